// Copyright (c) 2026 The lossdecay Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "lossdecay/rng.hpp"

namespace lossdecay {

/// Flat parameter vector. Layout is documented per problem.
using ParamVector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

enum class DatasetKind { GaussianBlobs, Spirals };

struct DatasetSpec {
    DatasetKind kind = DatasetKind::GaussianBlobs;
    int n_samples = 200;
    int n_classes = 2;
    /// Ignored for Spirals, which are always two-dimensional.
    int n_features = 2;
    /// Blob standard deviation, or angular jitter for spirals.
    double noise = 0.2;
    std::uint64_t seed = 0;

    bool operator==(const DatasetSpec&) const = default;
};

/// Rows of a dataset selected for one evaluation.
struct Batch {
    Eigen::MatrixXd inputs; // n_samples x n_features
    std::vector<int> labels;
    std::vector<std::size_t> indices;

    std::size_t size() const { return labels.size(); }
};

struct Dataset {
    Eigen::MatrixXd inputs; // standardized, n_samples x n_features
    std::vector<int> labels;
    int n_classes = 0;

    std::size_t size() const { return labels.size(); }
    std::size_t n_features() const { return static_cast<std::size_t>(inputs.cols()); }
    Batch batch(std::span<const std::size_t> indices) const;
    Batch full() const;
};

/// Deterministic synthetic classification data. Classes are balanced within
/// one sample and every feature column is standardized to zero mean and unit
/// (population) variance.
Dataset generate_dataset(const DatasetSpec& spec);

std::string_view dataset_kind_name(DatasetKind kind);
DatasetKind dataset_kind_from_name(std::string_view name);

// ---------------------------------------------------------------------------
// Problem specs
// ---------------------------------------------------------------------------

enum class ProblemKind { QuadraticBowl, LogisticRegression, DeepMLP };
enum class Activation { Tanh, Relu };

/// f(x) = 1/2 x^T A x with A = diag of log-spaced eigenvalues in [1, kappa].
/// Gradient noise is additive: g = A x + sigma * xi.
struct QuadraticBowlSpec {
    int dimension = 10;
    double condition_number = 10.0;
    double noise_sigma = 0.0;
    bool operator==(const QuadraticBowlSpec&) const = default;
};

/// Softmax regression. Layout: W (n_classes x n_features, row-major) then b.
struct LogisticRegressionSpec {
    /// 0 means "take it from the dataset".
    int n_features = 0;
    double l2 = 0.0;
    bool operator==(const LogisticRegressionSpec&) const = default;
};

/// Plain feed-forward network, `depth` hidden layers of `width` units and a
/// linear softmax head, no skip connections. Layer-major layout: for each
/// layer W (out x in, row-major) followed by b.
struct DeepMLPSpec {
    int depth = 4;
    int width = 16;
    Activation activation = Activation::Tanh;
    /// Weight std is gain / sqrt(fan_in). 0 selects the per-activation default.
    double init_gain = 0.0;
    /// Bias std at init. Nonzero biases keep deep tanh stacks away from the
    /// linear regime, so gradients shrink toward the input.
    double init_bias_std = 0.5;
    double l2 = 0.0;
    bool operator==(const DeepMLPSpec&) const = default;
};

using ProblemSpec = std::variant<QuadraticBowlSpec, LogisticRegressionSpec, DeepMLPSpec>;

inline ProblemKind problem_kind(const ProblemSpec& spec) { return static_cast<ProblemKind>(spec.index()); }
std::string_view problem_kind_name(ProblemKind kind);
ProblemKind problem_kind_from_name(std::string_view name);
std::string_view activation_name(Activation a);
Activation activation_from_name(std::string_view name);

/// Default init gains: 1 for tanh, sqrt(2) for relu.
double default_init_gain(Activation a);

// ---------------------------------------------------------------------------
// Problems
// ---------------------------------------------------------------------------

/// A differentiable objective. Instances are immutable after construction;
/// every method is safe to call concurrently.
class Problem {
public:
    virtual ~Problem() = default;

    virtual ProblemKind kind() const = 0;
    virtual std::size_t dimension() const = 0;

    /// Noise-free objective on `batch`.
    virtual double value(const ParamVector& theta, const Batch& batch) const = 0;

    /// Noise-free analytic gradient on `batch`.
    virtual ParamVector gradient(const ParamVector& theta, const Batch& batch) const = 0;

    /// Stochastic gradient: the analytic gradient plus whatever noise the
    /// problem models. `rng` advances only when noise is drawn.
    ParamVector gradient(const ParamVector& theta, const Batch& batch, Rng& rng) const;

    /// Adds the problem's gradient noise in place. No-op by default.
    virtual void add_gradient_noise(ParamVector& g, Rng& rng) const;

    /// Hessian-vector product. The default is a central difference of
    /// noise-free gradients along v / |v| with step 1e-4 * (1 + |theta|).
    /// v = 0 yields the zero vector.
    virtual ParamVector hvp(const ParamVector& theta, const Batch& batch, const ParamVector& v) const;

    virtual ParamVector initial_params(Rng& rng) const = 0;

    /// Exact minimum of the objective, when known in closed form.
    virtual std::optional<double> minimum_value() const { return std::nullopt; }

    virtual bool is_classifier() const { return false; }

    /// Fraction of correctly classified rows (classifiers only).
    virtual double accuracy(const ParamVector& theta, const Batch& batch) const;

protected:
    void check_dimension(const ParamVector& v, const char* what) const;
};

class QuadraticBowl final : public Problem {
public:
    explicit QuadraticBowl(const QuadraticBowlSpec& spec);

    /// Bowl with explicit (non-negative) eigenvalues, e.g. diag(1, 100).
    static QuadraticBowl from_eigenvalues(std::vector<double> eigenvalues, double noise_sigma = 0.0);

    ProblemKind kind() const override { return ProblemKind::QuadraticBowl; }
    std::size_t dimension() const override { return static_cast<std::size_t>(eigenvalues_.size()); }
    double value(const ParamVector& theta, const Batch& batch) const override;
    using Problem::gradient;
    ParamVector gradient(const ParamVector& theta, const Batch& batch) const override;
    void add_gradient_noise(ParamVector& g, Rng& rng) const override;
    ParamVector hvp(const ParamVector& theta, const Batch& batch, const ParamVector& v) const override;
    ParamVector initial_params(Rng& rng) const override;
    std::optional<double> minimum_value() const override { return 0.0; }

    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    double noise_sigma() const { return noise_sigma_; }

private:
    QuadraticBowl(Eigen::VectorXd eigenvalues, double noise_sigma);

    Eigen::VectorXd eigenvalues_;
    double noise_sigma_ = 0.0;
};

namespace detail {

/// Dense tanh/relu network with a softmax cross-entropy head. Zero hidden
/// layers gives softmax regression.
class DenseSoftmaxNet {
public:
    DenseSoftmaxNet(std::vector<int> layer_sizes, Activation activation, double l2);

    std::size_t dimension() const { return dimension_; }
    const std::vector<int>& layer_sizes() const { return sizes_; }
    double value(const ParamVector& theta, const Eigen::MatrixXd& x, std::span<const int> labels) const;
    ParamVector gradient(const ParamVector& theta, const Eigen::MatrixXd& x, std::span<const int> labels) const;
    Eigen::MatrixXd logits(const ParamVector& theta, const Eigen::MatrixXd& x) const;

    /// [offset, offset + size) of layer `l`'s weights and biases in theta.
    std::pair<std::size_t, std::size_t> layer_span(std::size_t l) const;

private:
    std::vector<int> sizes_;
    std::vector<std::size_t> offsets_;
    Activation activation_;
    double l2_;
    std::size_t dimension_ = 0;
};

} // namespace detail

class LogisticRegression final : public Problem {
public:
    LogisticRegression(const LogisticRegressionSpec& spec, std::shared_ptr<const Dataset> data);

    ProblemKind kind() const override { return ProblemKind::LogisticRegression; }
    std::size_t dimension() const override { return net_.dimension(); }
    double value(const ParamVector& theta, const Batch& batch) const override;
    using Problem::gradient;
    ParamVector gradient(const ParamVector& theta, const Batch& batch) const override;
    /// Zero vector: the loss is convex, so no symmetry breaking is needed.
    ParamVector initial_params(Rng& rng) const override;
    bool is_classifier() const override { return true; }
    double accuracy(const ParamVector& theta, const Batch& batch) const override;

    std::size_t n_features() const { return static_cast<std::size_t>(net_.layer_sizes().front()); }
    std::size_t n_classes() const { return static_cast<std::size_t>(net_.layer_sizes().back()); }

private:
    detail::DenseSoftmaxNet net_;
};

class DeepMLP final : public Problem {
public:
    DeepMLP(const DeepMLPSpec& spec, std::size_t n_features, std::size_t n_classes);

    ProblemKind kind() const override { return ProblemKind::DeepMLP; }
    std::size_t dimension() const override { return net_.dimension(); }
    double value(const ParamVector& theta, const Batch& batch) const override;
    using Problem::gradient;
    ParamVector gradient(const ParamVector& theta, const Batch& batch) const override;
    /// Gaussian weights with std gain / sqrt(fan_in), Gaussian biases with std
    /// init_bias_std.
    ParamVector initial_params(Rng& rng) const override;
    bool is_classifier() const override { return true; }
    double accuracy(const ParamVector& theta, const Batch& batch) const override;

    std::size_t n_layers() const { return net_.layer_sizes().size() - 1; }
    /// Index range of layer `l` (0 = input layer) inside theta.
    std::pair<std::size_t, std::size_t> layer_span(std::size_t l) const { return net_.layer_span(l); }
    double init_gain() const { return gain_; }

private:
    detail::DenseSoftmaxNet net_;
    double gain_;
    double bias_std_;
};

/// Builds the problem described by `spec`. Classification problems need a
/// dataset; QuadraticBowl ignores it.
std::unique_ptr<Problem> make_problem(const ProblemSpec& spec, std::shared_ptr<const Dataset> data);

// ---------------------------------------------------------------------------
// Verification oracles
// ---------------------------------------------------------------------------

/// Central differences of the noise-free value, coordinate by coordinate,
/// with step h * max(1, |theta_i|).
ParamVector finite_diff_gradient(const Problem& problem, const ParamVector& theta, const Batch& batch,
                                 double h = 1e-5);

/// max_i |a_i - b_i| / max(|a|_inf, |b|_inf). Zero when both vectors vanish.
double relative_error(const ParamVector& a, const ParamVector& b);

} // namespace lossdecay
