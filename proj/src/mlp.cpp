// Copyright (c) 2026 The lossdecay Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <stdexcept>
#include <string>

#include "lossdecay/problems.hpp"

namespace lossdecay {

namespace detail {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_batch(const Eigen::MatrixXd& x, std::span<const int> labels, int n_in, int n_out) {
    if (labels.empty()) {
        throw std::invalid_argument("batch is empty");
    }
    if (x.rows() != static_cast<Eigen::Index>(labels.size())) {
        throw std::invalid_argument("batch inputs and labels disagree in length");
    }
    if (x.cols() != n_in) {
        throw std::invalid_argument("batch has " + std::to_string(x.cols()) + " features, model expects " +
                                    std::to_string(n_in));
    }
    for (int y : labels) {
        if (y < 0 || y >= n_out) {
            throw std::invalid_argument("label " + std::to_string(y) + " out of range");
        }
    }
}

void activate(Eigen::MatrixXd& z, Activation a) {
    if (a == Activation::Tanh) {
        z = z.array().tanh();
    } else {
        z = z.cwiseMax(0.0);
    }
}

// Derivative expressed through the activation output h.
void multiply_by_derivative(Eigen::MatrixXd& delta, const Eigen::MatrixXd& h, Activation a) {
    if (a == Activation::Tanh) {
        delta.array() *= 1.0 - h.array().square();
    } else {
        delta.array() *= (h.array() > 0.0).cast<double>();
    }
}

} // namespace

DenseSoftmaxNet::DenseSoftmaxNet(std::vector<int> layer_sizes, Activation activation, double l2)
    : sizes_(std::move(layer_sizes)), activation_(activation), l2_(l2) {
    if (sizes_.size() < 2) {
        throw std::invalid_argument("network needs input and output sizes");
    }
    for (int s : sizes_) {
        if (s < 1) {
            throw std::invalid_argument("layer sizes must be positive");
        }
    }
    if (!(std::isfinite(l2) && l2 >= 0.0)) {
        throw std::invalid_argument("l2 must be >= 0");
    }
    offsets_.reserve(sizes_.size());
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        offsets_.push_back(dimension_);
        dimension_ += static_cast<std::size_t>(sizes_[l + 1]) * static_cast<std::size_t>(sizes_[l] + 1);
    }
    offsets_.push_back(dimension_);
}

std::pair<std::size_t, std::size_t> DenseSoftmaxNet::layer_span(std::size_t l) const {
    if (l + 1 >= sizes_.size()) {
        throw std::out_of_range("layer index out of range");
    }
    return {offsets_[l], offsets_[l + 1] - offsets_[l]};
}

Eigen::MatrixXd DenseSoftmaxNet::logits(const ParamVector& theta, const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd h = x;
    const std::size_t n_layers = sizes_.size() - 1;
    for (std::size_t l = 0; l < n_layers; ++l) {
        const int in = sizes_[l];
        const int out = sizes_[l + 1];
        Eigen::Map<const RowMatrix> w(theta.data() + offsets_[l], out, in);
        Eigen::Map<const Eigen::VectorXd> b(theta.data() + offsets_[l] + static_cast<std::size_t>(out * in), out);
        Eigen::MatrixXd z = h * w.transpose();
        z.rowwise() += b.transpose();
        if (l + 1 < n_layers) {
            activate(z, activation_);
        }
        h = std::move(z);
    }
    return h;
}

double DenseSoftmaxNet::value(const ParamVector& theta, const Eigen::MatrixXd& x, std::span<const int> labels) const {
    check_batch(x, labels, sizes_.front(), sizes_.back());
    const Eigen::MatrixXd z = logits(theta, x);
    double total = 0.0;
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const double zmax = z.row(i).maxCoeff();
        const double lse = zmax + std::log((z.row(i).array() - zmax).exp().sum());
        total += lse - z(i, labels[static_cast<std::size_t>(i)]);
    }
    double loss = total / static_cast<double>(z.rows());
    if (l2_ > 0.0) {
        loss += 0.5 * l2_ * theta.squaredNorm();
    }
    return loss;
}

ParamVector DenseSoftmaxNet::gradient(const ParamVector& theta, const Eigen::MatrixXd& x,
                                      std::span<const int> labels) const {
    check_batch(x, labels, sizes_.front(), sizes_.back());
    const std::size_t n_layers = sizes_.size() - 1;

    // Forward pass keeping every layer's input activation.
    std::vector<Eigen::MatrixXd> acts;
    acts.reserve(n_layers);
    acts.push_back(x);
    Eigen::MatrixXd z;
    for (std::size_t l = 0; l < n_layers; ++l) {
        const int in = sizes_[l];
        const int out = sizes_[l + 1];
        Eigen::Map<const RowMatrix> w(theta.data() + offsets_[l], out, in);
        Eigen::Map<const Eigen::VectorXd> b(theta.data() + offsets_[l] + static_cast<std::size_t>(out * in), out);
        z = acts.back() * w.transpose();
        z.rowwise() += b.transpose();
        if (l + 1 < n_layers) {
            activate(z, activation_);
            acts.push_back(z);
        }
    }

    // Softmax minus one-hot, averaged over the batch.
    const double inv_n = 1.0 / static_cast<double>(z.rows());
    Eigen::MatrixXd delta(z.rows(), z.cols());
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const double zmax = z.row(i).maxCoeff();
        auto e = (z.row(i).array() - zmax).exp();
        delta.row(i) = e / e.sum();
        delta(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
    }
    delta *= inv_n;

    ParamVector g(static_cast<Eigen::Index>(dimension_));
    for (std::size_t l = n_layers; l-- > 0;) {
        const int in = sizes_[l];
        const int out = sizes_[l + 1];
        Eigen::Map<RowMatrix> gw(g.data() + offsets_[l], out, in);
        Eigen::Map<Eigen::VectorXd> gb(g.data() + offsets_[l] + static_cast<std::size_t>(out * in), out);
        gw.noalias() = delta.transpose() * acts[l];
        gb = delta.colwise().sum().transpose();
        if (l > 0) {
            Eigen::Map<const RowMatrix> w(theta.data() + offsets_[l], out, in);
            Eigen::MatrixXd back = delta * w;
            multiply_by_derivative(back, acts[l], activation_);
            delta = std::move(back);
        }
    }
    if (l2_ > 0.0) {
        g += l2_ * theta;
    }
    return g;
}

} // namespace detail

namespace {

std::vector<int> mlp_sizes(const DeepMLPSpec& spec, std::size_t n_features, std::size_t n_classes) {
    if (spec.depth < 1) {
        throw std::invalid_argument("DeepMLP: depth must be >= 1");
    }
    if (spec.width < 1) {
        throw std::invalid_argument("DeepMLP: width must be >= 1");
    }
    std::vector<int> sizes;
    sizes.push_back(static_cast<int>(n_features));
    for (int i = 0; i < spec.depth; ++i) {
        sizes.push_back(spec.width);
    }
    sizes.push_back(static_cast<int>(n_classes));
    return sizes;
}

double argmax_accuracy(const Eigen::MatrixXd& z, const std::vector<int>& labels) {
    std::size_t correct = 0;
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        Eigen::Index best = 0;
        z.row(i).maxCoeff(&best);
        if (static_cast<int>(best) == labels[static_cast<std::size_t>(i)]) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

} // namespace

DeepMLP::DeepMLP(const DeepMLPSpec& spec, std::size_t n_features, std::size_t n_classes)
    : net_(mlp_sizes(spec, n_features, n_classes), spec.activation, spec.l2),
      gain_(spec.init_gain > 0.0 ? spec.init_gain : default_init_gain(spec.activation)),
      bias_std_(spec.init_bias_std) {
    if (!(std::isfinite(spec.init_gain) && spec.init_gain >= 0.0)) {
        throw std::invalid_argument("DeepMLP: init_gain must be >= 0");
    }
    if (!(std::isfinite(spec.init_bias_std) && spec.init_bias_std >= 0.0)) {
        throw std::invalid_argument("DeepMLP: init_bias_std must be >= 0");
    }
}

double DeepMLP::value(const ParamVector& theta, const Batch& batch) const {
    check_dimension(theta, "theta");
    return net_.value(theta, batch.inputs, batch.labels);
}

ParamVector DeepMLP::gradient(const ParamVector& theta, const Batch& batch) const {
    check_dimension(theta, "theta");
    return net_.gradient(theta, batch.inputs, batch.labels);
}

ParamVector DeepMLP::initial_params(Rng& rng) const {
    ParamVector theta = ParamVector::Zero(static_cast<Eigen::Index>(dimension()));
    const auto& sizes = net_.layer_sizes();
    for (std::size_t l = 0; l < n_layers(); ++l) {
        const std::size_t offset = net_.layer_span(l).first;
        const std::size_t n_weights = static_cast<std::size_t>(sizes[l]) * static_cast<std::size_t>(sizes[l + 1]);
        const double sd = gain_ / std::sqrt(static_cast<double>(sizes[l]));
        for (std::size_t i = 0; i < n_weights; ++i) {
            theta[static_cast<Eigen::Index>(offset + i)] = sd * rng.normal();
        }
        for (std::size_t i = 0; i < static_cast<std::size_t>(sizes[l + 1]); ++i) {
            theta[static_cast<Eigen::Index>(offset + n_weights + i)] = bias_std_ * rng.normal();
        }
    }
    return theta;
}

double DeepMLP::accuracy(const ParamVector& theta, const Batch& batch) const {
    check_dimension(theta, "theta");
    return argmax_accuracy(net_.logits(theta, batch.inputs), batch.labels);
}

LogisticRegression::LogisticRegression(const LogisticRegressionSpec& spec, std::shared_ptr<const Dataset> data)
    : net_({static_cast<int>(data ? data->n_features() : 0), data ? data->n_classes : 0}, Activation::Tanh, spec.l2) {
    if (spec.n_features != 0 && static_cast<std::size_t>(spec.n_features) != data->n_features()) {
        throw std::invalid_argument("LogisticRegression: n_features " + std::to_string(spec.n_features) +
                                    " does not match dataset (" + std::to_string(data->n_features()) + ")");
    }
}

double LogisticRegression::value(const ParamVector& theta, const Batch& batch) const {
    check_dimension(theta, "theta");
    return net_.value(theta, batch.inputs, batch.labels);
}

ParamVector LogisticRegression::gradient(const ParamVector& theta, const Batch& batch) const {
    check_dimension(theta, "theta");
    return net_.gradient(theta, batch.inputs, batch.labels);
}

ParamVector LogisticRegression::initial_params(Rng&) const {
    return ParamVector::Zero(static_cast<Eigen::Index>(dimension()));
}

double LogisticRegression::accuracy(const ParamVector& theta, const Batch& batch) const {
    check_dimension(theta, "theta");
    return argmax_accuracy(net_.logits(theta, batch.inputs), batch.labels);
}

} // namespace lossdecay
