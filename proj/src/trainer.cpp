// Copyright (c) 2026 The lossdecay Authors
// SPDX-License-Identifier: Apache-2.0

#include "lossdecay/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "lossdecay/curvature.hpp"
#include "lossdecay/errors.hpp"

namespace lossdecay {

namespace {

// Independent RNG streams derived from the run seed.
enum Stream : std::uint64_t {
    kInitStream = 1,
    kNoiseStream = 2,
    kWeightStream = 3,
    kLrStream = 4,
    kShuffleStream = 5,
};

void check_schedule(const ScheduleSpec& spec, const std::string& key) {
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(key, e.what());
    }
}

} // namespace

bool Cadence::due(std::int64_t step, std::int64_t steps_per_epoch) const {
    switch (kind) {
    case Kind::Never:
        return false;
    case Kind::Epoch:
        return step % steps_per_epoch == 0;
    case Kind::Steps:
        return every > 0 && step % every == 0;
    }
    return false;
}

void ExperimentConfig::validate() const {
    if (id.empty()) {
        throw ConfigError("id", "must not be empty");
    }
    if (epochs < 1) {
        throw ConfigError("epochs", "must be >= 1");
    }
    if (batch_size < 1) {
        throw ConfigError("batch_size", "must be >= 1");
    }
    if (steps_per_epoch < 1) {
        throw ConfigError("steps_per_epoch", "must be >= 1");
    }
    if (probe_every.kind == Cadence::Kind::Steps && probe_every.every < 1) {
        throw ConfigError("probe_every", "must be >= 1 steps");
    }
    if (eval_every.kind == Cadence::Kind::Steps && eval_every.every < 1) {
        throw ConfigError("eval_every", "must be >= 1 steps");
    }
    if (plateau.window < 1) {
        throw ConfigError("plateau.window", "must be >= 1");
    }
    if (plateau.tol && !(std::isfinite(*plateau.tol) && *plateau.tol > 0.0)) {
        throw ConfigError("plateau.tol", "must be > 0");
    }
    try {
        optimizer.validate();
    } catch (const ConfigError& e) {
        throw ConfigError("optimizer." + e.key(), std::string(e.what()).substr(e.key().size() + 2));
    }
    check_schedule(weight_schedule, "weight_schedule");
    check_schedule(lr_schedule, "lr_schedule");

    const bool needs_data = problem_kind(problem) != ProblemKind::QuadraticBowl;
    if (needs_data && !dataset) {
        throw ConfigError("dataset", "required for " + std::string(problem_kind_name(problem_kind(problem))));
    }
    if (!needs_data && dataset) {
        throw ConfigError("dataset", "not used by QuadraticBowl; remove the section");
    }
    if (dataset) {
        if (dataset->n_classes < 2) {
            throw ConfigError("dataset.n_classes", "must be >= 2");
        }
        if (dataset->n_samples < dataset->n_classes) {
            throw ConfigError("dataset.n_samples", "must be >= n_classes");
        }
        if (dataset->kind == DatasetKind::GaussianBlobs && dataset->n_features < 1) {
            throw ConfigError("dataset.n_features", "must be >= 1");
        }
        if (!(std::isfinite(dataset->noise) && dataset->noise >= 0.0)) {
            throw ConfigError("dataset.noise", "must be >= 0");
        }
    }
    std::visit(
        [&](const auto& spec) {
            using T = std::decay_t<decltype(spec)>;
            if constexpr (std::is_same_v<T, QuadraticBowlSpec>) {
                if (spec.dimension < 1) {
                    throw ConfigError("problem.dimension", "must be >= 1");
                }
                if (!(std::isfinite(spec.condition_number) && spec.condition_number >= 1.0)) {
                    throw ConfigError("problem.condition_number", "must be >= 1");
                }
                if (!(std::isfinite(spec.noise_sigma) && spec.noise_sigma >= 0.0)) {
                    throw ConfigError("problem.noise_sigma", "must be >= 0");
                }
            } else if constexpr (std::is_same_v<T, LogisticRegressionSpec>) {
                if (spec.n_features < 0) {
                    throw ConfigError("problem.n_features", "must be >= 0");
                }
                if (spec.n_features > 0 && dataset && dataset->kind == DatasetKind::GaussianBlobs &&
                    spec.n_features != dataset->n_features) {
                    throw ConfigError("problem.n_features", "does not match dataset.n_features");
                }
                if (spec.n_features > 0 && dataset && dataset->kind == DatasetKind::Spirals && spec.n_features != 2) {
                    throw ConfigError("problem.n_features", "Spirals are two-dimensional");
                }
                if (!(std::isfinite(spec.l2) && spec.l2 >= 0.0)) {
                    throw ConfigError("problem.l2", "must be >= 0");
                }
            } else {
                if (spec.depth < 1) {
                    throw ConfigError("problem.depth", "must be >= 1");
                }
                if (spec.width < 1) {
                    throw ConfigError("problem.width", "must be >= 1");
                }
                if (!(std::isfinite(spec.init_gain) && spec.init_gain >= 0.0)) {
                    throw ConfigError("problem.init_gain", "must be >= 0");
                }
                if (!(std::isfinite(spec.init_bias_std) && spec.init_bias_std >= 0.0)) {
                    throw ConfigError("problem.init_bias_std", "must be >= 0");
                }
                if (!(std::isfinite(spec.l2) && spec.l2 >= 0.0)) {
                    throw ConfigError("problem.l2", "must be >= 0");
                }
            }
        },
        problem);
}

RunResult run(const ExperimentConfig& config, const RunOptions& options) {
    config.validate();

    std::shared_ptr<const Dataset> data;
    if (config.dataset) {
        data = std::make_shared<const Dataset>(generate_dataset(*config.dataset));
    }
    const std::unique_ptr<Problem> problem = make_problem(config.problem, data);

    const std::int64_t n = data ? static_cast<std::int64_t>(data->size()) : 0;
    const std::int64_t bs = config.batch_size;
    const std::int64_t spe = data ? (n + bs - 1) / bs : config.steps_per_epoch;
    const std::int64_t total = spe * config.epochs;

    Rng init_rng(derive_seed(config.seed, kInitStream));
    Rng noise_rng(derive_seed(config.seed, kNoiseStream));
    Rng weight_rng(derive_seed(config.seed, kWeightStream));
    Rng lr_rng(derive_seed(config.seed, kLrStream));
    const std::uint64_t shuffle_seed = derive_seed(config.seed, kShuffleStream);

    RunResult result;
    result.steps_per_epoch = spe;
    result.records.reserve(static_cast<std::size_t>(total));
    if (options.record_trajectory) {
        result.trajectory.reserve(static_cast<std::size_t>(total));
    }

    OptimizerState state = OptimizerState::initial(problem->initial_params(init_rng));
    const Batch full = data ? data->full() : Batch{};
    const ScalingMode mode = config.optimizer.scaling;

    auto abort_run = [&](const std::string& why) {
        result.status = RunStatus::NonFinite;
        result.message = why;
    };

    for (std::int64_t epoch = 0; epoch < config.epochs && result.status == RunStatus::Completed; ++epoch) {
        std::vector<std::size_t> order;
        if (data) {
            Rng shuffle_rng(derive_seed(shuffle_seed, static_cast<std::uint64_t>(epoch)));
            order = shuffled_indices(static_cast<std::size_t>(n), shuffle_rng);
        }
        for (std::int64_t b = 0; b < spe; ++b) {
            const std::int64_t step = epoch * spe + b;
            const Progress progress{step, total, spe};

            Batch batch;
            if (data) {
                const auto lo = static_cast<std::size_t>(b * bs);
                const auto hi = static_cast<std::size_t>(std::min(n, (b + 1) * bs));
                batch = data->batch(std::span<const std::size_t>(order).subspan(lo, hi - lo));
            }

            const double w = weight_for_step(config.weight_schedule, progress, weight_rng);
            const double lr_mult = weight_for_step(config.lr_schedule, progress, lr_rng);
            OptimizerConfig opt = config.optimizer;
            opt.eta = config.optimizer.eta * lr_mult;

            StepRecord rec;
            rec.step = step;
            rec.epoch = epoch;
            rec.weight_applied = mode == ScalingMode::NoScale ? 1.0 : w;
            rec.loss_raw = problem->value(state.theta, batch);
            rec.loss_scaled = (mode == ScalingMode::ScaleLoss || mode == ScalingMode::ScaleGradient)
                                  ? rec.weight_applied * rec.loss_raw
                                  : rec.loss_raw;

            const ParamVector clean = problem->gradient(state.theta, batch);
            ParamVector g = clean;
            problem->add_gradient_noise(g, noise_rng);
            rec.grad_norm = clean.norm();

            const EffectiveInputs eff = effective_inputs(opt, g, rec.weight_applied, state.theta);
            rec.eta_effective = eff.eta;

            if (config.probe_every.due(step, spe) && opt.eta > 0.0 && std::isfinite(rec.loss_raw)) {
                const CurvatureProbe p = probe(*problem, state.theta, batch, opt.eta, rec.weight_applied);
                rec.gTg = p.gTg;
                rec.gTHg = p.gTHg;
                rec.predicted_decrease = p.predicted_decrease;
                rec.actual_decrease = p.actual_decrease;
            }
            if (problem->is_classifier() && config.eval_every.due(step, spe)) {
                rec.train_accuracy = problem->accuracy(state.theta, full);
            }

            result.records.push_back(rec);
            if (options.sink) {
                options.sink(rec);
            }

            if (!std::isfinite(rec.loss_raw)) {
                abort_run("non-finite loss at step " + std::to_string(step));
                break;
            }
            try {
                state = lossdecay::step(std::move(state), opt, eff.gradient, eff.eta);
            } catch (const NonFiniteError& e) {
                abort_run(e.what());
                break;
            }
            if (!state.theta.allFinite()) {
                abort_run("non-finite parameters after step " + std::to_string(step));
                break;
            }
            if (options.record_trajectory) {
                result.trajectory.push_back(state.theta);
            }
        }
    }

    result.final_theta = state.theta;
    if (result.status == RunStatus::Completed) {
        result.final_loss = problem->value(state.theta, full);
        if (problem->is_classifier()) {
            result.final_accuracy = problem->accuracy(state.theta, full);
        }
        if (!std::isfinite(result.final_loss)) {
            abort_run("non-finite final loss");
        }
    } else {
        result.final_loss = std::numeric_limits<double>::quiet_NaN();
    }
    return result;
}

std::vector<double> epoch_mean_losses(std::span<const StepRecord> records) {
    std::vector<double> sums;
    std::vector<std::int64_t> counts;
    for (const auto& r : records) {
        const auto e = static_cast<std::size_t>(r.epoch);
        if (e >= sums.size()) {
            sums.resize(e + 1, 0.0);
            counts.resize(e + 1, 0);
        }
        sums[e] += r.loss_raw;
        counts[e] += 1;
    }
    std::vector<double> means;
    means.reserve(sums.size());
    for (std::size_t e = 0; e < sums.size(); ++e) {
        if (counts[e] == 0) {
            throw std::invalid_argument("records skip epoch " + std::to_string(e));
        }
        means.push_back(sums[e] / static_cast<double>(counts[e]));
    }
    return means;
}

SummaryRow summarize(const ExperimentConfig& config, const RunResult& result) {
    SummaryRow row;
    row.id = config.id;
    row.seed = config.seed;
    row.steps = static_cast<std::int64_t>(result.records.size());
    row.status = result.status == RunStatus::Completed ? "ok" : "nonfinite";
    row.message = result.message;
    if (result.status == RunStatus::Completed) {
        row.final_loss = result.final_loss;
        row.final_accuracy = result.final_accuracy;
    }
    if (result.records.empty()) {
        return row;
    }
    const std::vector<double> means = epoch_mean_losses(result.records);
    const auto finite_end = std::find_if(means.begin(), means.end(), [](double x) { return !std::isfinite(x); });
    if (finite_end != means.begin()) {
        row.best_loss = *std::min_element(means.begin(), finite_end);
    }
    if (result.status == RunStatus::Completed && static_cast<int>(means.size()) >= config.plateau.window + 2) {
        const double tol = config.plateau.tol.value_or(1e-3 * std::abs(means.front()));
        if (tol > 0.0) {
            row.plateau_tol = tol;
            row.plateau = detect_plateau_break(means, tol, config.plateau.window);
        }
    }
    return row;
}

} // namespace lossdecay
