// Copyright (c) 2026 The lossdecay Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "lossdecay/problems.hpp"

namespace lossdecay {

/// Where the scheduled weight w(t) enters the update.
enum class ScalingMode {
    ScaleLoss,         ///< w multiplies the whole objective, coupled decay included
    ScaleGradient,     ///< w multiplies the data gradient only
    ScaleLearningRate, ///< w multiplies eta
    NoScale,           ///< w is ignored
};

enum class UpdateRule { SGD, SGDMomentum, Adam };

enum class WeightDecayMode {
    None,
    CoupledInLoss,             ///< lambda/2 |theta|^2 joins the objective
    DecoupledOptimizerApplied, ///< theta -= eta * lambda * theta after the step
};

struct OptimizerConfig {
    UpdateRule rule = UpdateRule::SGD;
    double eta = 0.1;
    double mu = 0.95;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_hat = 1e-8;
    WeightDecayMode decay = WeightDecayMode::None;
    double lambda = 0.0;
    ScalingMode scaling = ScalingMode::ScaleLoss;

    /// Defaults per rule: SGD eta 0.1; SGDMomentum eta 0.001, mu 0.95;
    /// Adam eta 0.0002, beta1 0.9, beta2 0.999, eps 1e-8.
    static OptimizerConfig defaults_for(UpdateRule rule);

    /// Throws ConfigError naming the field ("eta", "momentum", ...).
    void validate() const;

    bool operator==(const OptimizerConfig&) const = default;
};

/// Mutable optimizer buffers. Zero-initialized, same dimension as theta.
struct OptimizerState {
    ParamVector theta;
    ParamVector velocity;
    ParamVector m;
    ParamVector v;
    std::int64_t t = 0;

    static OptimizerState initial(ParamVector theta);
};

struct EffectiveInputs {
    ParamVector gradient;
    double eta = 0.0;
};

/// Folds the schedule weight `w` into (gradient, eta) per the scaling mode.
/// Coupled decay is added here; decoupled decay is left to step().
EffectiveInputs effective_inputs(const OptimizerConfig& config, const ParamVector& raw_gradient, double w,
                                 const ParamVector& theta);

/// One update of the configured rule. Throws NonFiniteError for NaN/Inf
/// gradients. Momentum is heavy-ball: v = mu v + g, theta -= eta v.
OptimizerState step(OptimizerState state, const OptimizerConfig& config, const ParamVector& g_eff, double eta_eff);

/// max over steps of |a_t - b_t|_inf.
double trajectory_distance(std::span<const ParamVector> a, std::span<const ParamVector> b);

std::string_view scaling_mode_name(ScalingMode mode);
ScalingMode scaling_mode_from_name(std::string_view name);
std::string_view update_rule_name(UpdateRule rule);
UpdateRule update_rule_from_name(std::string_view name);
std::string_view weight_decay_mode_name(WeightDecayMode mode);
WeightDecayMode weight_decay_mode_from_name(std::string_view name);

} // namespace lossdecay
