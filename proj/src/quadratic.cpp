// Copyright (c) 2026 The lossdecay Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <stdexcept>

#include "lossdecay/problems.hpp"

namespace lossdecay {

namespace {

Eigen::VectorXd log_spaced(int n, double kappa) {
    Eigen::VectorXd lambda(n);
    for (int i = 0; i < n; ++i) {
        lambda[i] = n == 1 ? 1.0 : std::pow(kappa, static_cast<double>(i) / (n - 1));
    }
    // pow() is not guaranteed to hit the endpoint exactly.
    lambda[n - 1] = n == 1 ? 1.0 : kappa;
    return lambda;
}

} // namespace

QuadraticBowl::QuadraticBowl(const QuadraticBowlSpec& spec) {
    if (spec.dimension < 1) {
        throw std::invalid_argument("QuadraticBowl: dimension must be >= 1");
    }
    if (!(std::isfinite(spec.condition_number) && spec.condition_number >= 1.0)) {
        throw std::invalid_argument("QuadraticBowl: condition_number must be >= 1");
    }
    if (!(std::isfinite(spec.noise_sigma) && spec.noise_sigma >= 0.0)) {
        throw std::invalid_argument("QuadraticBowl: noise_sigma must be >= 0");
    }
    eigenvalues_ = log_spaced(spec.dimension, spec.condition_number);
    noise_sigma_ = spec.noise_sigma;
}

QuadraticBowl::QuadraticBowl(Eigen::VectorXd eigenvalues, double noise_sigma)
    : eigenvalues_(std::move(eigenvalues)), noise_sigma_(noise_sigma) {}

QuadraticBowl QuadraticBowl::from_eigenvalues(std::vector<double> eigenvalues, double noise_sigma) {
    if (eigenvalues.empty()) {
        throw std::invalid_argument("QuadraticBowl: need at least one eigenvalue");
    }
    for (double l : eigenvalues) {
        if (!(std::isfinite(l) && l >= 0.0)) {
            throw std::invalid_argument("QuadraticBowl: eigenvalues must be finite and >= 0");
        }
    }
    if (!(std::isfinite(noise_sigma) && noise_sigma >= 0.0)) {
        throw std::invalid_argument("QuadraticBowl: noise_sigma must be >= 0");
    }
    return QuadraticBowl(Eigen::Map<const Eigen::VectorXd>(eigenvalues.data(), static_cast<Eigen::Index>(eigenvalues.size())),
                         noise_sigma);
}

double QuadraticBowl::value(const ParamVector& theta, const Batch&) const {
    check_dimension(theta, "theta");
    return 0.5 * theta.dot(eigenvalues_.cwiseProduct(theta));
}

ParamVector QuadraticBowl::gradient(const ParamVector& theta, const Batch&) const {
    check_dimension(theta, "theta");
    return eigenvalues_.cwiseProduct(theta);
}

void QuadraticBowl::add_gradient_noise(ParamVector& g, Rng& rng) const {
    if (noise_sigma_ == 0.0) {
        return;
    }
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        g[i] += noise_sigma_ * rng.normal();
    }
}

ParamVector QuadraticBowl::hvp(const ParamVector& theta, const Batch&, const ParamVector& v) const {
    check_dimension(theta, "theta");
    check_dimension(v, "v");
    return eigenvalues_.cwiseProduct(v);
}

ParamVector QuadraticBowl::initial_params(Rng& rng) const {
    ParamVector theta(eigenvalues_.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        theta[i] = rng.normal();
    }
    return theta;
}

} // namespace lossdecay
