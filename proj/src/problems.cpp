// Copyright (c) 2026 The lossdecay Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "lossdecay/problems.hpp"

namespace lossdecay {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

} // namespace

ParamVector Problem::gradient(const ParamVector& theta, const Batch& batch, Rng& rng) const {
    ParamVector g = gradient(theta, batch);
    add_gradient_noise(g, rng);
    return g;
}

void Problem::add_gradient_noise(ParamVector&, Rng&) const {}

ParamVector Problem::hvp(const ParamVector& theta, const Batch& batch, const ParamVector& v) const {
    check_dimension(theta, "theta");
    check_dimension(v, "v");
    const double vnorm = v.norm();
    if (vnorm == 0.0) {
        return ParamVector::Zero(v.size());
    }
    const ParamVector dir = v / vnorm;
    const double h = 1e-4 * (1.0 + theta.norm());
    const ParamVector plus = gradient(ParamVector(theta + h * dir), batch);
    const ParamVector minus = gradient(ParamVector(theta - h * dir), batch);
    return (plus - minus) * (vnorm / (2.0 * h));
}

double Problem::accuracy(const ParamVector&, const Batch&) const {
    throw std::logic_error("accuracy is only defined for classification problems");
}

void Problem::check_dimension(const ParamVector& v, const char* what) const {
    if (static_cast<std::size_t>(v.size()) != dimension()) {
        throw std::invalid_argument(std::string(what) + " has dimension " + std::to_string(v.size()) +
                                    ", problem expects " + std::to_string(dimension()));
    }
}

std::unique_ptr<Problem> make_problem(const ProblemSpec& spec, std::shared_ptr<const Dataset> data) {
    return std::visit(
        Overloaded{
            [](const QuadraticBowlSpec& s) -> std::unique_ptr<Problem> { return std::make_unique<QuadraticBowl>(s); },
            [&data](const LogisticRegressionSpec& s) -> std::unique_ptr<Problem> {
                if (!data) {
                    throw std::invalid_argument("LogisticRegression requires a dataset");
                }
                return std::make_unique<LogisticRegression>(s, data);
            },
            [&data](const DeepMLPSpec& s) -> std::unique_ptr<Problem> {
                if (!data) {
                    throw std::invalid_argument("DeepMLP requires a dataset");
                }
                return std::make_unique<DeepMLP>(s, data->n_features(), static_cast<std::size_t>(data->n_classes));
            },
        },
        spec);
}

std::string_view problem_kind_name(ProblemKind kind) {
    switch (kind) {
    case ProblemKind::QuadraticBowl:
        return "QuadraticBowl";
    case ProblemKind::LogisticRegression:
        return "LogisticRegression";
    case ProblemKind::DeepMLP:
        return "DeepMLP";
    }
    return "unknown";
}

ProblemKind problem_kind_from_name(std::string_view name) {
    for (auto k : {ProblemKind::QuadraticBowl, ProblemKind::LogisticRegression, ProblemKind::DeepMLP}) {
        if (problem_kind_name(k) == name) {
            return k;
        }
    }
    throw std::invalid_argument("unknown problem kind '" + std::string(name) +
                                "' (expected QuadraticBowl, LogisticRegression or DeepMLP)");
}

std::string_view activation_name(Activation a) { return a == Activation::Relu ? "relu" : "tanh"; }

Activation activation_from_name(std::string_view name) {
    if (name == "tanh") {
        return Activation::Tanh;
    }
    if (name == "relu") {
        return Activation::Relu;
    }
    throw std::invalid_argument("unknown activation '" + std::string(name) + "' (expected tanh or relu)");
}

double default_init_gain(Activation a) { return a == Activation::Relu ? std::sqrt(2.0) : 1.0; }

ParamVector finite_diff_gradient(const Problem& problem, const ParamVector& theta, const Batch& batch, double h) {
    if (!(h > 0.0)) {
        throw std::invalid_argument("finite difference step must be positive");
    }
    if (static_cast<std::size_t>(theta.size()) != problem.dimension()) {
        throw std::invalid_argument("theta dimension does not match problem");
    }
    ParamVector g(theta.size());
    ParamVector probe = theta;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double step = h * std::max(1.0, std::abs(theta[i]));
        probe[i] = theta[i] + step;
        const double up = problem.value(probe, batch);
        probe[i] = theta[i] - step;
        const double down = problem.value(probe, batch);
        probe[i] = theta[i];
        g[i] = (up - down) / (2.0 * step);
    }
    return g;
}

double relative_error(const ParamVector& a, const ParamVector& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("relative_error: size mismatch");
    }
    if (a.size() == 0) {
        return 0.0;
    }
    const double scale = std::max(a.lpNorm<Eigen::Infinity>(), b.lpNorm<Eigen::Infinity>());
    if (scale == 0.0) {
        return 0.0;
    }
    return (a - b).lpNorm<Eigen::Infinity>() / scale;
}

} // namespace lossdecay
