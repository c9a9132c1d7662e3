// Copyright (c) 2026 The lossdecay Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "lossdecay/problems.hpp"

namespace lossdecay {

/// Second-order account of one weighted gradient step theta -> theta - eta*w*g:
///   f(theta - eta w g) ~ f(theta) - eta w g^T g + 1/2 eta^2 w^2 g^T H g
struct CurvatureProbe {
    double gTg = 0.0;
    double gTHg = 0.0;
    double predicted_decrease = 0.0;
    double actual_decrease = 0.0;
    double eta = 0.0;
    double weight = 0.0;
};

/// Probes the step at theta using the noise-free gradient. Pure: neither
/// theta nor any optimizer state is modified.
CurvatureProbe probe(const Problem& problem, const ParamVector& theta, const Batch& batch, double eta, double w);

/// Expected excess loss of constant-weight SGD at stationarity on a noisy
/// quadratic (g = A theta + sigma xi):
///   sum_i eta w sigma^2 / (2 (2 - eta w lambda_i)).
/// Throws std::invalid_argument unless eta * w * lambda_max < 2.
double stationary_loss_floor(const QuadraticBowl& problem, double eta, double w);

} // namespace lossdecay
