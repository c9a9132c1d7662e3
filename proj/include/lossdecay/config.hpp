// Copyright (c) 2026 The lossdecay Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lossdecay/trainer.hpp"

namespace lossdecay {

/// A "dotted.key=value" assignment applied over a parsed config file. The
/// value is read as JSON when it parses as JSON, otherwise as a string.
struct Override {
    std::string key;
    std::string value;
};

/// Splits "key=value". Throws ConfigError when '=' or the key is missing.
Override parse_override(std::string_view text);

/// JSON with // and /* */ comments. Throws ParseError with 1-based line and
/// column on malformed input.
nlohmann::json parse_document(std::string_view text);

/// Writes each override into `doc`, creating intermediate objects.
void apply_overrides(nlohmann::json& doc, std::span<const Override> overrides);

/// Builds and validates a config from a parsed document. Missing fields take
/// their documented defaults; unknown keys, wrong types and out-of-range
/// values throw ConfigError naming the key (prefixed by `key_prefix`).
ExperimentConfig config_from_json(const nlohmann::json& doc, const std::string& key_prefix = "");

/// Either {"defaults": {...}, "runs": [{...}, ...]} (each run merged over
/// the defaults) or a bare array of configs. Runs without an id become
/// "run-<index>"; runs without an output_path write "<id>.csv".
std::vector<ExperimentConfig> sweep_from_json(const nlohmann::json& doc, std::span<const Override> overrides = {});

ExperimentConfig parse_config_text(std::string_view text, std::span<const Override> overrides = {});
ExperimentConfig parse_config_file(const std::filesystem::path& path, std::span<const Override> overrides = {});
std::vector<ExperimentConfig> parse_sweep_text(std::string_view text, std::span<const Override> overrides = {});
std::vector<ExperimentConfig> parse_sweep_file(const std::filesystem::path& path,
                                               std::span<const Override> overrides = {});

/// Preset name or {"kind": ..., <params>, "granularity": ...} (kind defaults
/// to Constant), or
/// {"preset": name, "granularity": ...}.
ScheduleSpec schedule_from_json(const nlohmann::json& j, const std::string& key = "schedule");

nlohmann::ordered_json to_json(const ScheduleSpec& spec);
nlohmann::ordered_json to_json(const ExperimentConfig& config);

} // namespace lossdecay
