// Copyright (c) 2026 The lossdecay Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lossdecay/config.hpp"

namespace lossdecay::cli {

enum ExitCode : int {
    kOk = 0,
    kAborted = 1,   ///< a run ended with a non-finite loss, gradient or parameter
    kParseError = 2,
    kInvalid = 3,
};

struct Invocation {
    std::filesystem::path config_path;
    std::vector<Override> overrides;
    std::filesystem::path output_dir = ".";
    int verbosity = 0;
    int jobs = 1;
    std::string summary_name = "summary.csv";
    /// Probe cadence for cmd_probe; empty keeps the config's probe_every
    /// (or "epoch" when that is "never").
    std::string probe_every;
};

int cmd_run(const Invocation& inv, std::ostream& out, std::ostream& err);
int cmd_sweep(const Invocation& inv, std::ostream& out, std::ostream& err);
int cmd_probe(const Invocation& inv, std::ostream& out, std::ostream& err);
int cmd_presets(std::ostream& out);

/// Full command line (args excludes the program name).
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace lossdecay::cli
