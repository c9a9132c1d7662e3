// Copyright (c) 2026 The lossdecay Authors
// SPDX-License-Identifier: Apache-2.0

#include "lossdecay/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "lossdecay/errors.hpp"

namespace lossdecay {

OptimizerConfig OptimizerConfig::defaults_for(UpdateRule rule) {
    OptimizerConfig c;
    c.rule = rule;
    switch (rule) {
    case UpdateRule::SGD:
        c.eta = 0.1;
        break;
    case UpdateRule::SGDMomentum:
        c.eta = 0.001;
        c.mu = 0.95;
        break;
    case UpdateRule::Adam:
        c.eta = 0.0002;
        c.beta1 = 0.9;
        c.beta2 = 0.999;
        c.eps_hat = 1e-8;
        break;
    }
    return c;
}

void OptimizerConfig::validate() const {
    auto in_unit = [](double x) { return std::isfinite(x) && x >= 0.0 && x < 1.0; };
    if (!(std::isfinite(eta) && eta > 0.0)) {
        throw ConfigError("eta", "must be > 0");
    }
    if (!in_unit(mu)) {
        throw ConfigError("momentum", "must lie in [0, 1)");
    }
    if (!in_unit(beta1)) {
        throw ConfigError("beta1", "must lie in [0, 1)");
    }
    if (!in_unit(beta2)) {
        throw ConfigError("beta2", "must lie in [0, 1)");
    }
    if (!(std::isfinite(eps_hat) && eps_hat > 0.0)) {
        throw ConfigError("eps", "must be > 0");
    }
    if (!(std::isfinite(lambda) && lambda >= 0.0)) {
        throw ConfigError("weight_decay.lambda", "must be >= 0");
    }
    if (decay == WeightDecayMode::None && lambda != 0.0) {
        throw ConfigError("weight_decay.lambda", "must be 0 when weight_decay.mode is None");
    }
}

OptimizerState OptimizerState::initial(ParamVector theta) {
    OptimizerState s;
    const auto n = theta.size();
    s.theta = std::move(theta);
    s.velocity = ParamVector::Zero(n);
    s.m = ParamVector::Zero(n);
    s.v = ParamVector::Zero(n);
    return s;
}

EffectiveInputs effective_inputs(const OptimizerConfig& config, const ParamVector& raw_gradient, double w,
                                 const ParamVector& theta) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
        throw std::invalid_argument("schedule weight must be finite and >= 0, got " + std::to_string(w));
    }
    if (raw_gradient.size() != theta.size()) {
        throw std::invalid_argument("gradient and theta dimensions differ");
    }
    const bool coupled = config.decay == WeightDecayMode::CoupledInLoss && config.lambda > 0.0;
    EffectiveInputs out;
    out.eta = config.eta;
    switch (config.scaling) {
    case ScalingMode::ScaleLoss:
        out.gradient = coupled ? ParamVector(w * (raw_gradient + config.lambda * theta)) : ParamVector(w * raw_gradient);
        break;
    case ScalingMode::ScaleGradient:
        out.gradient = w * raw_gradient;
        if (coupled) {
            out.gradient += config.lambda * theta;
        }
        break;
    case ScalingMode::ScaleLearningRate:
        out.gradient = coupled ? ParamVector(raw_gradient + config.lambda * theta) : raw_gradient;
        out.eta = w * config.eta;
        break;
    case ScalingMode::NoScale:
        out.gradient = coupled ? ParamVector(raw_gradient + config.lambda * theta) : raw_gradient;
        break;
    }
    return out;
}

OptimizerState step(OptimizerState state, const OptimizerConfig& config, const ParamVector& g_eff, double eta_eff) {
    if (g_eff.size() != state.theta.size()) {
        throw std::invalid_argument("gradient and theta dimensions differ");
    }
    if (!(eta_eff >= 0.0) || !std::isfinite(eta_eff)) {
        throw std::invalid_argument("effective learning rate must be finite and >= 0");
    }
    if (!g_eff.allFinite()) {
        throw NonFiniteError("non-finite gradient at optimizer step " + std::to_string(state.t));
    }

    switch (config.rule) {
    case UpdateRule::SGD:
        state.theta -= eta_eff * g_eff;
        break;
    case UpdateRule::SGDMomentum:
        state.velocity = config.mu * state.velocity + g_eff;
        state.theta -= eta_eff * state.velocity;
        break;
    case UpdateRule::Adam: {
        const double t = static_cast<double>(state.t + 1);
        state.m = config.beta1 * state.m + (1.0 - config.beta1) * g_eff;
        state.v = config.beta2 * state.v + (1.0 - config.beta2) * g_eff.cwiseProduct(g_eff);
        const double c1 = 1.0 - std::pow(config.beta1, t);
        const double c2 = 1.0 - std::pow(config.beta2, t);
        const auto m_hat = state.m.array() / c1;
        const auto v_hat = state.v.array() / c2;
        state.theta.array() -= eta_eff * m_hat / (v_hat.sqrt() + config.eps_hat);
        break;
    }
    }

    if (config.decay == WeightDecayMode::DecoupledOptimizerApplied && config.lambda > 0.0) {
        state.theta -= config.eta * config.lambda * state.theta;
    }
    state.t += 1;
    return state;
}

double trajectory_distance(std::span<const ParamVector> a, std::span<const ParamVector> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("trajectory lengths differ: " + std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()));
    }
    double dist = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != b[i].size()) {
            throw std::invalid_argument("trajectory dimensions differ at step " + std::to_string(i));
        }
        if (a[i].size() > 0) {
            dist = std::max(dist, (a[i] - b[i]).lpNorm<Eigen::Infinity>());
        }
    }
    return dist;
}

std::string_view scaling_mode_name(ScalingMode mode) {
    switch (mode) {
    case ScalingMode::ScaleLoss:
        return "ScaleLoss";
    case ScalingMode::ScaleGradient:
        return "ScaleGradient";
    case ScalingMode::ScaleLearningRate:
        return "ScaleLearningRate";
    case ScalingMode::NoScale:
        return "NoScale";
    }
    return "unknown";
}

ScalingMode scaling_mode_from_name(std::string_view name) {
    for (auto m : {ScalingMode::ScaleLoss, ScalingMode::ScaleGradient, ScalingMode::ScaleLearningRate,
                   ScalingMode::NoScale}) {
        if (scaling_mode_name(m) == name) {
            return m;
        }
    }
    throw std::invalid_argument("unknown scaling mode '" + std::string(name) +
                                "' (expected ScaleLoss, ScaleGradient, ScaleLearningRate or NoScale)");
}

std::string_view update_rule_name(UpdateRule rule) {
    switch (rule) {
    case UpdateRule::SGD:
        return "SGD";
    case UpdateRule::SGDMomentum:
        return "SGDMomentum";
    case UpdateRule::Adam:
        return "Adam";
    }
    return "unknown";
}

UpdateRule update_rule_from_name(std::string_view name) {
    for (auto r : {UpdateRule::SGD, UpdateRule::SGDMomentum, UpdateRule::Adam}) {
        if (update_rule_name(r) == name) {
            return r;
        }
    }
    throw std::invalid_argument("unknown update rule '" + std::string(name) + "' (expected SGD, SGDMomentum or Adam)");
}

std::string_view weight_decay_mode_name(WeightDecayMode mode) {
    switch (mode) {
    case WeightDecayMode::None:
        return "None";
    case WeightDecayMode::CoupledInLoss:
        return "CoupledInLoss";
    case WeightDecayMode::DecoupledOptimizerApplied:
        return "DecoupledOptimizerApplied";
    }
    return "unknown";
}

WeightDecayMode weight_decay_mode_from_name(std::string_view name) {
    for (auto m : {WeightDecayMode::None, WeightDecayMode::CoupledInLoss, WeightDecayMode::DecoupledOptimizerApplied}) {
        if (weight_decay_mode_name(m) == name) {
            return m;
        }
    }
    throw std::invalid_argument("unknown weight decay mode '" + std::string(name) +
                                "' (expected None, CoupledInLoss or DecoupledOptimizerApplied)");
}

} // namespace lossdecay
