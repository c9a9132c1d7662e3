// Copyright (c) 2026 The lossdecay Authors
// SPDX-License-Identifier: Apache-2.0

#include "lossdecay/schedules.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace lossdecay {

namespace {

constexpr std::array<std::string_view, 6> kKindNames = {
    "Constant", "LinearDecrease", "PiecewiseLinear", "PiecewiseConstant", "PolyDecay", "RandomUniform",
};

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& what) {
    if (!ok) {
        throw std::invalid_argument(what);
    }
}

bool nonneg_finite(double x) { return std::isfinite(x) && x >= 0.0; }

double interpolate(const std::vector<schedule::Knot>& knots, double p) {
    if (p >= knots.back().fraction) {
        return knots.back().weight;
    }
    // First knot strictly to the right of p; p itself lies in [lo, hi).
    auto hi = std::upper_bound(knots.begin(), knots.end(), p,
                               [](double value, const schedule::Knot& k) { return value < k.fraction; });
    auto lo = std::prev(hi);
    const double t = (p - lo->fraction) / (hi->fraction - lo->fraction);
    return lo->weight + (hi->weight - lo->weight) * t;
}

} // namespace

void Progress::validate() const {
    if (total_steps <= 0) {
        throw std::out_of_range("progress: total_steps must be positive");
    }
    if (steps_per_epoch <= 0) {
        throw std::out_of_range("progress: steps_per_epoch must be positive");
    }
    if (step < 0 || step > total_steps) {
        throw std::out_of_range("progress: step " + std::to_string(step) + " outside [0, " +
                                std::to_string(total_steps) + "]");
    }
}

void ScheduleSpec::validate() const {
    std::visit(Overloaded{
                   [](const schedule::Constant& s) { require(nonneg_finite(s.value), "value must be >= 0"); },
                   [](const schedule::LinearDecrease& s) {
                       require(nonneg_finite(s.w_start), "w_start must be >= 0");
                       require(nonneg_finite(s.w_end), "w_end must be >= 0");
                   },
                   [](const schedule::PiecewiseLinear& s) {
                       require(s.knots.size() >= 2, "knots needs at least two entries");
                       require(s.knots.front().fraction == 0.0, "first knot must be at fraction 0");
                       require(s.knots.back().fraction == 1.0, "last knot must be at fraction 1");
                       for (std::size_t i = 0; i < s.knots.size(); ++i) {
                           require(nonneg_finite(s.knots[i].weight), "knot weights must be >= 0");
                           if (i > 0) {
                               require(s.knots[i].fraction > s.knots[i - 1].fraction,
                                       "knot fractions must be strictly increasing");
                           }
                       }
                   },
                   [](const schedule::PiecewiseConstant& s) {
                       require(s.milestones.size() == s.factors.size(),
                               "milestones and factors must have equal length");
                       for (std::size_t i = 0; i < s.milestones.size(); ++i) {
                           require(std::isfinite(s.milestones[i]) && s.milestones[i] >= 0.0 &&
                                       s.milestones[i] <= 1.0,
                                   "milestones must lie in [0, 1]");
                           require(nonneg_finite(s.factors[i]), "factors must be >= 0");
                           if (i > 0) {
                               require(s.milestones[i] > s.milestones[i - 1],
                                       "milestones must be strictly increasing");
                           }
                       }
                   },
                   [](const schedule::PolyDecay& s) {
                       require(std::isfinite(s.power) && s.power > 0.0, "power must be > 0");
                   },
                   [](const schedule::RandomUniform& s) {
                       require(nonneg_finite(s.lo), "lo must be >= 0");
                       require(std::isfinite(s.hi) && s.hi >= s.lo, "hi must be >= lo");
                   },
               },
               params);
}

std::string_view kind_name(ScheduleKind kind) { return kKindNames.at(static_cast<std::size_t>(kind)); }

ScheduleKind kind_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i) {
        if (kKindNames[i] == name) {
            return static_cast<ScheduleKind>(i);
        }
    }
    throw std::invalid_argument("unknown schedule kind '" + std::string(name) + "'");
}

std::string_view granularity_name(Granularity g) { return g == Granularity::PerStep ? "PerStep" : "PerEpoch"; }

Granularity granularity_from_name(std::string_view name) {
    if (name == "PerStep") {
        return Granularity::PerStep;
    }
    if (name == "PerEpoch") {
        return Granularity::PerEpoch;
    }
    throw std::invalid_argument("unknown granularity '" + std::string(name) + "' (expected PerStep or PerEpoch)");
}

double progress_fraction(const Progress& progress, Granularity granularity) {
    progress.validate();
    double p = 0.0;
    if (granularity == Granularity::PerStep) {
        p = static_cast<double>(progress.step) / static_cast<double>(progress.total_steps);
    } else {
        p = static_cast<double>(progress.epoch()) / static_cast<double>(progress.total_epochs());
    }
    return std::clamp(p, 0.0, 1.0);
}

double weight_at(const ScheduleSpec& spec, double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::out_of_range("progress fraction must lie in [0, 1]");
    }
    return std::visit(
        Overloaded{
            [](const schedule::Constant& s) { return s.value; },
            [p](const schedule::LinearDecrease& s) { return (1.0 - p) * s.w_start + p * s.w_end; },
            [p](const schedule::PiecewiseLinear& s) { return interpolate(s.knots, p); },
            [p](const schedule::PiecewiseConstant& s) {
                double w = 1.0;
                for (std::size_t i = 0; i < s.milestones.size() && s.milestones[i] <= p; ++i) {
                    w *= s.factors[i];
                }
                return w;
            },
            [p](const schedule::PolyDecay& s) { return std::pow(1.0 - p, s.power); },
            [](const schedule::RandomUniform&) -> double {
                throw std::invalid_argument("RandomUniform is stochastic; use sample() with an Rng");
            },
        },
        spec.params);
}

double evaluate(const ScheduleSpec& spec, const Progress& progress) {
    if (spec.is_stochastic()) {
        throw std::invalid_argument("RandomUniform is stochastic; use sample() with an Rng");
    }
    return weight_at(spec, progress_fraction(progress, spec.granularity));
}

double sample(const ScheduleSpec& spec, const Progress& progress, Rng& rng) {
    const auto* s = std::get_if<schedule::RandomUniform>(&spec.params);
    if (s == nullptr) {
        throw std::invalid_argument("sample() requires a RandomUniform schedule, got " +
                                    std::string(kind_name(spec.kind())));
    }
    progress.validate();
    const double u = rng.uniform();
    if (s->hi == s->lo) {
        return s->lo;
    }
    return s->lo + (s->hi - s->lo) * u;
}

double weight_for_step(const ScheduleSpec& spec, const Progress& progress, Rng& rng) {
    return spec.is_stochastic() ? sample(spec, progress, rng) : evaluate(spec, progress);
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {
        "linear-2-0", "linear-3-0", "long-tail", "fig4a", "poly-0.9", "piecewise-0.1", "random-unit", "constant-1",
    };
    return names;
}

ScheduleSpec preset(std::string_view name) {
    ScheduleSpec spec;
    if (name == "linear-2-0") {
        spec.params = schedule::LinearDecrease{2.0, 0.0};
    } else if (name == "linear-3-0") {
        spec.params = schedule::LinearDecrease{3.0, 0.0};
    } else if (name == "long-tail") {
        // Fast initial drop followed by a long low tail.
        spec.params = schedule::PiecewiseLinear{{{0.0, 2.0}, {0.5, 0.5}, {1.0, 0.0}}};
    } else if (name == "fig4a") {
        // Hold at 1, decay to 0 over the final fifth.
        spec.params = schedule::PiecewiseLinear{{{0.0, 1.0}, {0.8, 1.0}, {1.0, 0.0}}};
    } else if (name == "poly-0.9") {
        spec.params = schedule::PolyDecay{0.9};
    } else if (name == "piecewise-0.1") {
        spec.params = schedule::PiecewiseConstant{{0.5, 0.75}, {0.1, 0.1}};
    } else if (name == "random-unit") {
        spec.params = schedule::RandomUniform{0.0, 1.0};
        spec.granularity = Granularity::PerStep;
    } else if (name == "constant-1") {
        spec.params = schedule::Constant{1.0};
    } else {
        std::string catalog;
        for (const auto& n : preset_names()) {
            catalog += (catalog.empty() ? "" : ", ") + n;
        }
        throw std::invalid_argument("unknown schedule preset '" + std::string(name) + "'; known presets: " + catalog);
    }
    return spec;
}

} // namespace lossdecay
