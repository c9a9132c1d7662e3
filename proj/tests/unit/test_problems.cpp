#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <memory>
#include <numeric>

#include "lossdecay/problems.hpp"

using namespace lossdecay;

namespace {

ParamVector vec(std::initializer_list<double> xs) {
    ParamVector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) {
        v(i++) = x;
    }
    return v;
}

ParamVector random_vector(std::size_t n, Rng& rng, double scale = 1.0) {
    ParamVector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v(i) = scale * rng.normal();
    }
    return v;
}

Batch random_batch(const Dataset& data, std::size_t size, Rng& rng) {
    auto order = shuffled_indices(data.size(), rng);
    order.resize(size);
    return data.batch(order);
}

std::shared_ptr<const Dataset> blobs(int n, int classes, int features, double noise, std::uint64_t seed) {
    DatasetSpec spec;
    spec.kind = DatasetKind::GaussianBlobs;
    spec.n_samples = n;
    spec.n_classes = classes;
    spec.n_features = features;
    spec.noise = noise;
    spec.seed = seed;
    return std::make_shared<const Dataset>(generate_dataset(spec));
}

// Full Hessian by central differences of the analytic gradient, one column
// per coordinate.
Eigen::MatrixXd brute_force_hessian(const Problem& p, const ParamVector& theta, const Batch& batch) {
    const auto n = static_cast<Eigen::Index>(p.dimension());
    Eigen::MatrixXd h(n, n);
    const double eps = 1e-5;
    for (Eigen::Index j = 0; j < n; ++j) {
        ParamVector plus = theta;
        ParamVector minus = theta;
        plus(j) += eps;
        minus(j) -= eps;
        h.col(j) = (p.gradient(plus, batch) - p.gradient(minus, batch)) / (2.0 * eps);
    }
    return h;
}

const Batch kNoBatch{};

} // namespace

TEST_CASE("quadratic bowl diag(1, 100)") {
    const auto bowl = QuadraticBowl::from_eigenvalues({1.0, 100.0});
    CHECK(bowl.value(vec({0, 0}), kNoBatch) == 0.0);
    CHECK(bowl.value(vec({1, 1}), kNoBatch) == 50.5);
    CHECK(bowl.gradient(vec({1, 1}), kNoBatch) == vec({1, 100}));
    CHECK(bowl.hvp(vec({1, 1}), kNoBatch, vec({1, 1})) == vec({1, 100}));
    CHECK(bowl.hvp(vec({3, -2}), kNoBatch, vec({0, 0})) == vec({0, 0}));

    const ParamVector fd = finite_diff_gradient(bowl, vec({1, 1}), kNoBatch, 1e-5);
    CHECK(std::abs(fd(0) - 1.0) / 1.0 < 1e-6);
    CHECK(std::abs(fd(1) - 100.0) / 100.0 < 1e-6);

    CHECK_THROWS_AS(bowl.value(vec({1, 1, 1}), kNoBatch), std::invalid_argument);
    CHECK_THROWS_AS(bowl.gradient(vec({1}), kNoBatch), std::invalid_argument);
    CHECK_THROWS_AS(bowl.hvp(vec({1, 1}), kNoBatch, vec({1})), std::invalid_argument);
}

TEST_CASE("constant problem has zero finite-difference gradient") {
    const auto flat = QuadraticBowl::from_eigenvalues({0.0, 0.0, 0.0});
    CHECK(finite_diff_gradient(flat, vec({1, -2, 3}), kNoBatch).isZero(0.0));
}

TEST_CASE("bowl spec eigenvalues are log-spaced from 1 to kappa") {
    QuadraticBowlSpec spec;
    spec.dimension = 5;
    spec.condition_number = 10000.0;
    const QuadraticBowl bowl(spec);
    const auto& ev = bowl.eigenvalues();
    REQUIRE(ev.size() == 5);
    CHECK(ev(0) == 1.0);
    CHECK(ev(4) == 10000.0);
    for (int i = 0; i < 5; ++i) {
        CHECK(ev(i) == doctest::Approx(std::pow(10.0, i)).epsilon(1e-12));
    }
    spec.condition_number = 0.5;
    CHECK_THROWS(QuadraticBowl{spec});
}

TEST_CASE("gradient noise only when sigma > 0") {
    const auto clean = QuadraticBowl::from_eigenvalues({1.0, 4.0});
    Rng rng(1);
    const Rng before = rng;
    CHECK(clean.gradient(vec({1, 1}), kNoBatch, rng) == vec({1, 4}));
    CHECK(rng == before);

    const auto noisy = QuadraticBowl::from_eigenvalues({1.0, 4.0}, 0.5);
    Rng a(1);
    Rng b(1);
    const ParamVector g = noisy.gradient(vec({1, 1}), kNoBatch, a);
    CHECK_FALSE(a == before);
    // Independent oracle: Av + sigma * (two normals from the same stream).
    const double n0 = b.normal();
    const double n1 = b.normal();
    CHECK(g(0) == 1.0 + 0.5 * n0);
    CHECK(g(1) == 4.0 + 0.5 * n1);
}

TEST_CASE("datasets are deterministic, balanced and standardized") {
    for (auto kind : {DatasetKind::GaussianBlobs, DatasetKind::Spirals}) {
        DatasetSpec spec;
        spec.kind = kind;
        spec.n_samples = 101;
        spec.n_classes = 3;
        spec.seed = 7;
        const Dataset a = generate_dataset(spec);
        const Dataset b = generate_dataset(spec);
        CHECK(a.inputs == b.inputs);
        CHECK(a.labels == b.labels);
        REQUIRE(a.size() == 101);

        std::vector<int> counts(3, 0);
        for (int y : a.labels) {
            ++counts.at(static_cast<std::size_t>(y));
        }
        CHECK(*std::max_element(counts.begin(), counts.end()) - *std::min_element(counts.begin(), counts.end()) <=
              1);

        for (Eigen::Index c = 0; c < a.inputs.cols(); ++c) {
            const double mean = a.inputs.col(c).mean();
            const double var = (a.inputs.col(c).array() - mean).square().mean();
            CHECK(std::abs(mean) < 1e-12);
            CHECK(var == doctest::Approx(1.0).epsilon(1e-12));
        }
        spec.seed = 8;
        CHECK_FALSE(generate_dataset(spec).inputs == a.inputs);
    }
    DatasetSpec bad;
    bad.n_samples = 1;
    CHECK_THROWS(generate_dataset(bad));
    bad.n_samples = 10;
    bad.n_classes = 1;
    CHECK_THROWS(generate_dataset(bad));
}

TEST_CASE("uniform softmax gives ln(k)") {
    DatasetSpec spec;
    spec.kind = DatasetKind::Spirals;
    spec.n_samples = 90;
    spec.n_classes = 3;
    const Dataset data = generate_dataset(spec);
    DeepMLPSpec mlp;
    mlp.depth = 3;
    mlp.width = 8;
    const DeepMLP net(mlp, 2, 3);
    Rng rng(4);
    ParamVector theta = net.initial_params(rng);
    const auto [off, len] = net.layer_span(net.n_layers() - 1);
    theta.segment(static_cast<Eigen::Index>(off), static_cast<Eigen::Index>(len)).setZero();
    CHECK(net.value(theta, data.full()) == doctest::Approx(std::log(3.0)).epsilon(1e-14));
}

TEST_CASE("logistic regression bias gradient vanishes at zero on balanced data") {
    const auto data = blobs(60, 3, 4, 0.3, 2);
    const LogisticRegression lr({}, data);
    CHECK(lr.dimension() == 3 * 4 + 3);
    const ParamVector g = lr.gradient(ParamVector::Zero(15), data->full());
    for (Eigen::Index i = 12; i < 15; ++i) {
        CHECK(std::abs(g(i)) < 1e-15);
    }
    Rng rng(0);
    CHECK(lr.initial_params(rng).isZero(0.0));
}

TEST_CASE("separable blobs are fit perfectly by logistic regression") {
    const auto data = blobs(100, 2, 2, 0.0, 5);
    const LogisticRegression lr({}, data);
    ParamVector theta = ParamVector::Zero(static_cast<Eigen::Index>(lr.dimension()));
    const Batch all = data->full();
    for (int i = 0; i < 200; ++i) {
        theta -= 0.5 * lr.gradient(theta, all);
    }
    CHECK(lr.accuracy(theta, all) == 1.0);
}

TEST_CASE("analytic gradients match finite differences") {
    Rng rng(123);
    SUBCASE("logistic regression with coupled l2") {
        const auto data = blobs(200, 3, 20, 0.5, 1);
        LogisticRegressionSpec spec;
        spec.l2 = 0.01;
        const LogisticRegression lr(spec, data);
        for (int k = 0; k < 20; ++k) {
            const ParamVector theta = random_vector(lr.dimension(), rng, 0.5);
            const Batch b = random_batch(*data, 32, rng);
            CHECK(relative_error(lr.gradient(theta, b), finite_diff_gradient(lr, theta, b)) < 1e-5);
        }
    }
    SUBCASE("deep mlp, both activations") {
        const auto data = blobs(120, 3, 2, 0.3, 3);
        for (auto act : {Activation::Tanh, Activation::Relu}) {
            DeepMLPSpec spec;
            spec.depth = 6;
            spec.width = 8;
            spec.activation = act;
            spec.l2 = 1e-3;
            const DeepMLP net(spec, 2, 3);
            for (int k = 0; k < 20; ++k) {
                const ParamVector theta = net.initial_params(rng);
                const Batch b = random_batch(*data, 16, rng);
                CHECK(relative_error(net.gradient(theta, b), finite_diff_gradient(net, theta, b)) < 1e-5);
            }
        }
    }
}

TEST_CASE("deep mlp depth 6 gradient matches per coordinate") {
    const auto data = blobs(64, 2, 2, 0.3, 9);
    DeepMLPSpec spec;
    spec.depth = 6;
    spec.width = 6;
    const DeepMLP net(spec, 2, 2);
    Rng rng(17);
    const ParamVector theta = net.initial_params(rng);
    const Batch b = data->full();
    const ParamVector g = net.gradient(theta, b);
    const ParamVector fd = finite_diff_gradient(net, theta, b);
    // Coordinates below 1e-9 are dominated by round-off in the difference quotient.
    int compared = 0;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        if (std::abs(g(i)) > 1e-9) {
            CHECK(std::abs(g(i) - fd(i)) / std::abs(g(i)) < 1e-5);
            ++compared;
        } else {
            CHECK(std::abs(fd(i)) < 1e-9);
        }
    }
    CHECK(compared > g.size() / 2);
}

TEST_CASE("finite-difference hvp matches a brute-force Hessian") {
    const auto data = blobs(80, 3, 5, 0.4, 4);
    const LogisticRegression lr({}, data);
    REQUIRE(lr.dimension() <= 20);
    Rng rng(8);
    const Batch b = data->full();
    for (int k = 0; k < 5; ++k) {
        const ParamVector theta = random_vector(lr.dimension(), rng, 0.5);
        const ParamVector v = random_vector(lr.dimension(), rng);
        const Eigen::MatrixXd h = brute_force_hessian(lr, theta, b);
        CHECK(relative_error(lr.hvp(theta, b, v), h * v) < 1e-4);
    }
    CHECK(lr.hvp(ParamVector::Zero(18), b, ParamVector::Zero(18)).isZero(0.0));
}

TEST_CASE("hessian-vector products are symmetric") {
    const auto data = blobs(60, 2, 3, 0.4, 6);
    DeepMLPSpec spec;
    spec.depth = 3;
    spec.width = 5;
    const DeepMLP net(spec, 3, 2);
    Rng rng(10);
    for (int k = 0; k < 10; ++k) {
        const ParamVector theta = net.initial_params(rng);
        const ParamVector v = random_vector(net.dimension(), rng);
        const ParamVector w = random_vector(net.dimension(), rng);
        const double vhw = v.dot(net.hvp(theta, data->full(), w));
        const double whv = w.dot(net.hvp(theta, data->full(), v));
        CHECK(std::abs(vhw - whv) <= 1e-6 * std::max(std::abs(vhw), std::abs(whv)));
    }
}

TEST_CASE("quadratic hvp is exact") {
    QuadraticBowlSpec spec;
    spec.dimension = 10;
    spec.condition_number = 1000.0;
    const QuadraticBowl bowl(spec);
    Rng rng(3);
    for (int k = 0; k < 10; ++k) {
        const ParamVector v = random_vector(10, rng);
        const ParamVector theta = random_vector(10, rng);
        CHECK(bowl.hvp(theta, kNoBatch, v) == ParamVector(bowl.eigenvalues().cwiseProduct(v)));
    }
}

TEST_CASE("deep tanh network at unit gain has vanishing input-layer gradients") {
    DatasetSpec ds;
    ds.kind = DatasetKind::Spirals;
    ds.n_samples = 300;
    ds.n_classes = 3;
    const Dataset data = generate_dataset(ds);
    DeepMLPSpec spec;
    spec.depth = 20;
    spec.width = 16;
    spec.init_gain = 1.0;
    const DeepMLP net(spec, 2, 3);
    CHECK(net.init_gain() == 1.0);
    Rng rng(0);
    const ParamVector theta = net.initial_params(rng);
    const ParamVector g = net.gradient(theta, data.full());
    auto layer_norm = [&](std::size_t l) {
        const auto [off, len] = net.layer_span(l);
        return g.segment(static_cast<Eigen::Index>(off), static_cast<Eigen::Index>(len)).norm();
    };
    CHECK(layer_norm(net.n_layers() - 1) >= 10.0 * layer_norm(0));
}

TEST_CASE("make_problem requires data for classifiers") {
    CHECK(make_problem(QuadraticBowlSpec{}, nullptr)->kind() == ProblemKind::QuadraticBowl);
    CHECK_THROWS(make_problem(DeepMLPSpec{}, nullptr));
    const auto data = blobs(40, 2, 3, 0.2, 0);
    LogisticRegressionSpec wrong;
    wrong.n_features = 5;
    CHECK_THROWS(make_problem(wrong, data));
    CHECK(make_problem(DeepMLPSpec{}, data)->dimension() > 0);
}

TEST_CASE("relative_error") {
    CHECK(relative_error(vec({0, 0}), vec({0, 0})) == 0.0);
    CHECK(relative_error(vec({1, 2}), vec({1, 2})) == 0.0);
    CHECK(relative_error(vec({1, 2}), vec({1, 3})) == doctest::Approx(1.0 / 3.0));
}
