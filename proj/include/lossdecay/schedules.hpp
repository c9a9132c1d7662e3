// Copyright (c) 2026 The lossdecay Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lossdecay/rng.hpp"

namespace lossdecay {

/// Position within a training run. `step` is the 0-based global optimizer
/// step and may equal `total_steps` (end of training).
struct Progress {
    std::int64_t step = 0;
    std::int64_t total_steps = 1;
    std::int64_t steps_per_epoch = 1;

    std::int64_t epoch() const { return step / steps_per_epoch; }
    std::int64_t total_epochs() const { return (total_steps + steps_per_epoch - 1) / steps_per_epoch; }

    /// Throws std::out_of_range when the invariants do not hold.
    void validate() const;
};

enum class Granularity { PerStep, PerEpoch };

namespace schedule {

struct Constant {
    double value = 1.0;
    bool operator==(const Constant&) const = default;
};

/// w(p) = (1 - p) * w_start + p * w_end. Weights above 1 are allowed.
struct LinearDecrease {
    double w_start = 2.0;
    double w_end = 0.0;
    bool operator==(const LinearDecrease&) const = default;
};

struct Knot {
    double fraction = 0.0;
    double weight = 0.0;
    bool operator==(const Knot&) const = default;
};

/// Linear interpolation between knots; first knot at 0, last at 1.
struct PiecewiseLinear {
    std::vector<Knot> knots;
    bool operator==(const PiecewiseLinear&) const = default;
};

/// Product of every factor whose milestone is <= p (staircase decay).
struct PiecewiseConstant {
    std::vector<double> milestones;
    std::vector<double> factors;
    bool operator==(const PiecewiseConstant&) const = default;
};

/// (1 - p)^power, the "poly" policy.
struct PolyDecay {
    double power = 0.9;
    bool operator==(const PolyDecay&) const = default;
};

/// Independent uniform draw in [lo, hi) each step.
struct RandomUniform {
    double lo = 0.0;
    double hi = 1.0;
    bool operator==(const RandomUniform&) const = default;
};

} // namespace schedule

enum class ScheduleKind { Constant, LinearDecrease, PiecewiseLinear, PiecewiseConstant, PolyDecay, RandomUniform };

struct ScheduleSpec {
    using Params = std::variant<schedule::Constant, schedule::LinearDecrease, schedule::PiecewiseLinear,
                                schedule::PiecewiseConstant, schedule::PolyDecay, schedule::RandomUniform>;

    Params params = schedule::Constant{};
    Granularity granularity = Granularity::PerEpoch;

    ScheduleKind kind() const { return static_cast<ScheduleKind>(params.index()); }
    bool is_stochastic() const { return kind() == ScheduleKind::RandomUniform; }

    /// Throws std::invalid_argument naming the violated constraint.
    void validate() const;

    bool operator==(const ScheduleSpec&) const = default;
};

std::string_view kind_name(ScheduleKind kind);
ScheduleKind kind_from_name(std::string_view name);
std::string_view granularity_name(Granularity g);
Granularity granularity_from_name(std::string_view name);

/// Progress fraction at the spec's granularity: step/total_steps or
/// epoch/total_epochs, clamped to [0, 1].
double progress_fraction(const Progress& progress, Granularity granularity);

/// Deterministic weight at a given progress fraction p in [0, 1].
double weight_at(const ScheduleSpec& spec, double p);

/// Deterministic weight at `progress`. Rejects RandomUniform.
double evaluate(const ScheduleSpec& spec, const Progress& progress);

/// Draw a RandomUniform weight, advancing `rng`. Rejects deterministic kinds.
double sample(const ScheduleSpec& spec, const Progress& progress, Rng& rng);

/// Weight for the step regardless of kind; stochastic kinds consume `rng`.
double weight_for_step(const ScheduleSpec& spec, const Progress& progress, Rng& rng);

/// Named schedule catalog. Throws std::invalid_argument listing the catalog
/// for unknown names.
ScheduleSpec preset(std::string_view name);
const std::vector<std::string>& preset_names();

} // namespace lossdecay
