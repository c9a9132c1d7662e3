// Copyright (c) 2026 The lossdecay Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lossdecay/optim.hpp"
#include "lossdecay/problems.hpp"
#include "lossdecay/schedules.hpp"

namespace lossdecay {

/// How often something happens during a run: never, at the first step of
/// every epoch, or every `every` steps (step % every == 0).
struct Cadence {
    enum class Kind { Never, Epoch, Steps };
    Kind kind = Kind::Epoch;
    std::int64_t every = 1;

    bool due(std::int64_t step, std::int64_t steps_per_epoch) const;
    bool operator==(const Cadence&) const = default;
};

struct PlateauSettings {
    /// Absolute loss tolerance. Unset means 1e-3 times the first epoch-mean loss.
    std::optional<double> tol;
    int window = 5;
    bool operator==(const PlateauSettings&) const = default;
};

struct ExperimentConfig {
    std::string id = "run";
    ProblemSpec problem = QuadraticBowlSpec{};
    /// Required by classifiers, must be absent for QuadraticBowl.
    std::optional<DatasetSpec> dataset;
    OptimizerConfig optimizer;
    ScheduleSpec weight_schedule;
    /// Multiplier on the base learning rate.
    ScheduleSpec lr_schedule;
    int epochs = 10;
    int batch_size = 32;
    /// Steps per epoch for problems without a dataset.
    int steps_per_epoch = 100;
    std::uint64_t seed = 0;
    Cadence probe_every;
    Cadence eval_every;
    std::string output_path = "records.csv";
    PlateauSettings plateau;

    /// Throws ConfigError naming the offending key.
    void validate() const;
    bool operator==(const ExperimentConfig&) const = default;
};

/// One row of training telemetry, describing the state before the step.
struct StepRecord {
    std::int64_t step = 0;
    std::int64_t epoch = 0;
    double weight_applied = 1.0;
    double eta_effective = 0.0;
    double loss_raw = 0.0;
    double loss_scaled = 0.0;
    double grad_norm = 0.0;
    std::optional<double> gTg;
    std::optional<double> gTHg;
    std::optional<double> predicted_decrease;
    std::optional<double> actual_decrease;
    std::optional<double> train_accuracy;

    bool operator==(const StepRecord&) const = default;
};

enum class RunStatus { Completed, NonFinite };

struct RunOptions {
    /// Keep theta after every step (for trajectory comparisons).
    bool record_trajectory = false;
    /// Called once per record as soon as it is produced.
    std::function<void(const StepRecord&)> sink;
};

struct RunResult {
    RunStatus status = RunStatus::Completed;
    std::string message;
    std::vector<StepRecord> records;
    std::vector<ParamVector> trajectory;
    ParamVector final_theta;
    /// Noise-free objective on the full dataset after the last step.
    double final_loss = 0.0;
    std::optional<double> final_accuracy;
    std::int64_t steps_per_epoch = 0;
};

/// Executes a full training run. Deterministic: equal configs give
/// bit-identical results. A NaN/Inf loss, gradient or parameter ends the run
/// with status NonFinite and the records produced so far.
RunResult run(const ExperimentConfig& config, const RunOptions& options = {});

/// Mean loss_raw per epoch, in epoch order.
std::vector<double> epoch_mean_losses(std::span<const StepRecord> records);

struct PlateauReport {
    std::optional<std::int64_t> plateau_start_epoch;
    std::optional<std::int64_t> break_epoch;
    double pre_break_best_loss = 0.0;
    std::optional<double> post_break_best_loss;

    bool operator==(const PlateauReport&) const = default;
};

/// Plateau: first epoch e >= 1 whose best epoch-mean loss over (e, e+window]
/// improves on the best over [0, e) by less than `tol`. Break: first epoch
/// after e+window whose epoch-mean loss beats the best over [0, e+window] by
/// more than `tol`. Needs at least window + 2 epochs.
PlateauReport detect_plateau_break(std::span<const double> epoch_means, double tol, int window);
PlateauReport detect_plateau_break(std::span<const StepRecord> records, double tol, int window);

struct SummaryRow {
    std::string id;
    std::string status; ///< "ok", "nonfinite" or "error"
    std::string message;
    std::uint64_t seed = 0;
    std::int64_t steps = 0;
    std::optional<double> final_loss;
    std::optional<double> best_loss;
    std::optional<double> final_accuracy;
    std::optional<double> plateau_tol;
    PlateauReport plateau;

    bool operator==(const SummaryRow&) const = default;
};

SummaryRow summarize(const ExperimentConfig& config, const RunResult& result);

struct SweepOptions {
    int parallelism = 1;
    /// When set, every run streams its records CSV to records_dir / output_path.
    std::optional<std::filesystem::path> records_dir;
};

/// Runs every config in isolation (possibly concurrently) and returns one
/// row per config in input order. A failing run becomes an error row.
std::vector<SummaryRow> sweep(std::span<const ExperimentConfig> configs, const SweepOptions& options = {});

} // namespace lossdecay
