// Copyright (c) 2026 The lossdecay Authors
// SPDX-License-Identifier: Apache-2.0

#include "lossdecay/curvature.hpp"

#include <cmath>
#include <stdexcept>

namespace lossdecay {

CurvatureProbe probe(const Problem& problem, const ParamVector& theta, const Batch& batch, double eta, double w) {
    if (!(std::isfinite(eta) && eta > 0.0)) {
        throw std::invalid_argument("probe: eta must be > 0");
    }
    if (!(std::isfinite(w) && w >= 0.0)) {
        throw std::invalid_argument("probe: weight must be >= 0");
    }
    const ParamVector g = problem.gradient(theta, batch);
    const ParamVector hg = problem.hvp(theta, batch, g);

    CurvatureProbe p;
    p.eta = eta;
    p.weight = w;
    p.gTg = g.squaredNorm();
    p.gTHg = g.dot(hg);
    const double step = eta * w;
    p.predicted_decrease = -step * p.gTg + 0.5 * step * step * p.gTHg;
    if (step == 0.0) {
        p.actual_decrease = 0.0;
    } else {
        const double before = problem.value(theta, batch);
        const double after = problem.value(ParamVector(theta - step * g), batch);
        p.actual_decrease = after - before;
    }
    return p;
}

double stationary_loss_floor(const QuadraticBowl& problem, double eta, double w) {
    if (!(std::isfinite(eta) && eta > 0.0)) {
        throw std::invalid_argument("stationary_loss_floor: eta must be > 0");
    }
    if (!(std::isfinite(w) && w >= 0.0)) {
        throw std::invalid_argument("stationary_loss_floor: weight must be >= 0");
    }
    const auto& lambda = problem.eigenvalues();
    const double a = eta * w;
    if (!(a * lambda.maxCoeff() < 2.0)) {
        throw std::invalid_argument("stationary_loss_floor: unstable, eta * w * lambda_max must be < 2");
    }
    const double s2 = problem.noise_sigma() * problem.noise_sigma();
    double floor = 0.0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        // A flat direction random-walks but never contributes to the loss.
        if (lambda[i] > 0.0) {
            floor += a * s2 / (2.0 * (2.0 - a * lambda[i]));
        }
    }
    return floor;
}

} // namespace lossdecay
