// Copyright (c) 2026 The lossdecay Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "cli.hpp"
#include "lossdecay/curvature.hpp"
#include "lossdecay/trainer.hpp"

namespace fs = std::filesystem;
using namespace lossdecay;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

Cadence never() { return Cadence{Cadence::Kind::Never, 1}; }

RunOptions trajectory_options() {
    RunOptions o;
    o.record_trajectory = true;
    return o;
}

ScheduleSpec linear_2_0() {
    ScheduleSpec s;
    s.params = schedule::LinearDecrease{2.0, 0.0};
    return s;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome equivalence() {
    ExperimentConfig c;
    c.problem = LogisticRegressionSpec{};
    DatasetSpec d;
    d.n_samples = 200;
    d.n_features = 20;
    d.n_classes = 3;
    d.noise = 1.0;
    c.dataset = d;
    c.optimizer.eta = 0.1;
    c.weight_schedule = linear_2_0();
    c.batch_size = 20;
    c.epochs = 20;
    c.probe_every = never();
    c.eval_every = never();

    std::vector<std::vector<ParamVector>> paths;
    for (auto mode : {ScalingMode::ScaleLoss, ScalingMode::ScaleGradient, ScalingMode::ScaleLearningRate}) {
        c.optimizer.scaling = mode;
        paths.push_back(run(c, trajectory_options()).trajectory);
    }
    if (paths[0].size() != 200) {
        return {false, fmt("expected 200 steps, got %zu", paths[0].size())};
    }
    const double d01 = trajectory_distance(paths[0], paths[1]);
    const double d02 = trajectory_distance(paths[0], paths[2]);
    const double d12 = trajectory_distance(paths[1], paths[2]);
    const double worst = std::max({d01, d02, d12});
    return {worst < 1e-12, fmt("max pairwise distance %.3g over 200 steps", worst)};
}

Outcome momentum_inequivalence() {
    ExperimentConfig c;
    QuadraticBowlSpec q;
    q.condition_number = 100.0;
    c.problem = q;
    c.optimizer = OptimizerConfig::defaults_for(UpdateRule::SGDMomentum);
    c.optimizer.mu = 0.9;
    c.weight_schedule = linear_2_0();
    c.steps_per_epoch = 10;
    c.epochs = 5;
    c.probe_every = never();

    c.optimizer.scaling = ScalingMode::ScaleGradient;
    const auto g = run(c, trajectory_options()).trajectory;
    c.optimizer.scaling = ScalingMode::ScaleLearningRate;
    const auto l = run(c, trajectory_options()).trajectory;
    const double d = trajectory_distance(g, l);
    return {g.size() == 50 && d > 1e-3, fmt("distance %.4g after %zu steps (eta %g)", d, g.size(), c.optimizer.eta)};
}

Outcome gradient_correctness() {
    Rng rng(2024);
    auto random_theta = [&](std::size_t n, double scale) {
        ParamVector v(static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            v(i) = scale * rng.normal();
        }
        return v;
    };

    DatasetSpec blobs;
    blobs.n_samples = 200;
    blobs.n_features = 20;
    blobs.n_classes = 3;
    blobs.noise = 0.5;
    const auto blob_data = std::make_shared<const Dataset>(generate_dataset(blobs));

    DatasetSpec spirals;
    spirals.kind = DatasetKind::Spirals;
    spirals.n_samples = 600;
    spirals.n_classes = 3;
    const auto spiral_data = std::make_shared<const Dataset>(generate_dataset(spirals));

    QuadraticBowlSpec q;
    q.condition_number = 100.0;
    DeepMLPSpec mlp;
    mlp.depth = 8;
    mlp.width = 12;

    struct Case {
        std::string name;
        std::unique_ptr<Problem> problem;
        std::shared_ptr<const Dataset> data;
    };
    std::vector<Case> cases;
    cases.push_back({"QuadraticBowl", make_problem(q, nullptr), nullptr});
    cases.push_back({"LogisticRegression", make_problem(LogisticRegressionSpec{}, blob_data), blob_data});
    cases.push_back({"DeepMLP", make_problem(mlp, spiral_data), spiral_data});

    double worst = 0.0;
    std::string worst_name;
    for (const auto& c : cases) {
        for (int k = 0; k < 20; ++k) {
            ParamVector theta = c.problem->initial_params(rng) + random_theta(c.problem->dimension(), 0.1);
            Batch batch;
            if (c.data) {
                auto order = shuffled_indices(c.data->size(), rng);
                order.resize(32);
                batch = c.data->batch(order);
            }
            const double e = relative_error(c.problem->gradient(theta, batch),
                                            finite_diff_gradient(*c.problem, theta, batch));
            if (e > worst) {
                worst = e;
                worst_name = c.name;
            }
        }
    }
    return {worst < 1e-5, fmt("worst relative error %.3g (%s)", worst, worst_name.c_str())};
}

Outcome curvature_exactness() {
    QuadraticBowlSpec q;
    q.condition_number = 100.0;
    const QuadraticBowl bowl(q);
    Rng rng(7);
    double worst_probe = 0.0;
    double worst_hvp = 0.0;
    for (int k = 0; k < 50; ++k) {
        const ParamVector theta = bowl.initial_params(rng) * (0.1 + 10.0 * rng.uniform());
        const double eta = 0.02 * rng.uniform();
        const double w = 2.0 * rng.uniform();
        const auto p = probe(bowl, theta, Batch{}, eta, w);
        const double scale = std::max(std::abs(p.actual_decrease), std::numeric_limits<double>::min());
        worst_probe = std::max(worst_probe, std::abs(p.predicted_decrease - p.actual_decrease) / scale);

        ParamVector v(theta.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            v(i) = rng.normal();
        }
        const ParamVector av = bowl.eigenvalues().cwiseProduct(v);
        worst_hvp = std::max(worst_hvp, relative_error(bowl.hvp(theta, Batch{}, v), av));
    }
    const bool pass = worst_probe <= 1e-10 && worst_hvp <= std::numeric_limits<double>::epsilon();
    return {pass, fmt("probe relative gap %.3g, hvp relative error %.3g", worst_probe, worst_hvp)};
}

// Shared by the noise-floor and plateau criteria.
struct FloorRuns {
    double floor = 0.0;
    ExperimentConfig constant;
    ExperimentConfig decayed;
    RunResult constant_run;
    RunResult decayed_run;
};

const FloorRuns& floor_runs() {
    static const FloorRuns runs = [] {
        FloorRuns r;
        QuadraticBowlSpec q;
        q.dimension = 10;
        q.condition_number = 100.0;
        q.noise_sigma = 0.1;
        r.floor = stationary_loss_floor(QuadraticBowl(q), 0.01, 1.0);

        ExperimentConfig c;
        c.problem = q;
        c.optimizer.eta = 0.01;
        c.steps_per_epoch = 100;
        c.epochs = 1000;
        c.probe_every = never();
        c.plateau.tol = r.floor;
        c.plateau.window = 5;
        c.weight_schedule = preset("constant-1");
        r.constant = c;
        c.weight_schedule = linear_2_0();
        r.decayed = c;
        r.constant_run = run(r.constant);
        r.decayed_run = run(r.decayed);
        return r;
    }();
    return runs;
}

double tail_mean(const RunResult& r, double fraction) {
    const auto n = r.records.size();
    const auto start = n - static_cast<std::size_t>(fraction * static_cast<double>(n));
    double sum = 0.0;
    for (auto i = start; i < n; ++i) {
        sum += r.records[i].loss_raw;
    }
    return sum / static_cast<double>(n - start);
}

Outcome noise_floor() {
    const auto& r = floor_runs();
    if (r.constant_run.status != RunStatus::Completed || r.decayed_run.status != RunStatus::Completed) {
        return {false, "a run did not complete"};
    }
    const double constant = tail_mean(r.constant_run, 0.2);
    const double decayed = tail_mean(r.decayed_run, 0.2);
    const double gap = std::abs(constant - r.floor) / r.floor;
    const double gain = constant / decayed;
    return {gap <= 0.15 && gain >= 2.0,
            fmt("floor %.4g, constant tail %.4g (gap %.1f%%), decayed tail %.4g (%.2fx lower)", r.floor, constant,
                100.0 * gap, decayed, gain)};
}

std::string epoch_or_none(const std::optional<std::int64_t>& e) {
    return e ? std::to_string(*e) : "none";
}

Outcome plateau_break() {
    const auto& r = floor_runs();
    const auto decayed = detect_plateau_break(r.decayed_run.records, *r.decayed.plateau.tol, r.decayed.plateau.window);
    const auto constant =
        detect_plateau_break(r.constant_run.records, *r.constant.plateau.tol, r.constant.plateau.window);
    const std::int64_t final_third = (2 * r.decayed.epochs + 2) / 3;
    const bool pass = decayed.plateau_start_epoch && decayed.break_epoch && *decayed.break_epoch >= final_third &&
                      !constant.break_epoch;
    return {pass, fmt("tol %.4g window %d: decayed plateau %s break %s (final third from %lld), constant break %s",
                      *r.decayed.plateau.tol, r.decayed.plateau.window,
                      epoch_or_none(decayed.plateau_start_epoch).c_str(), epoch_or_none(decayed.break_epoch).c_str(),
                      static_cast<long long>(final_third), epoch_or_none(constant.break_epoch).c_str())};
}

Outcome deep_mlp_direction() {
    ExperimentConfig c;
    DeepMLPSpec mlp;
    mlp.depth = 16;
    mlp.activation = Activation::Tanh;
    c.problem = mlp;
    DatasetSpec d;
    d.kind = DatasetKind::Spirals;
    d.n_samples = 600;
    d.n_classes = 3;
    c.dataset = d;
    c.epochs = 100;
    c.probe_every = never();
    c.eval_every = never();

    auto mean_over_seeds = [&](const char* name) {
        c.weight_schedule = preset(name);
        double loss = 0.0;
        double acc = 0.0;
        int ok = 0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            c.seed = seed;
            const auto r = run(c);
            if (r.status == RunStatus::Completed) {
                loss += r.final_loss;
                acc += r.final_accuracy.value_or(0.0);
                ++ok;
            }
        }
        return std::tuple{ok == 10, loss / 10.0, acc / 10.0};
    };
    const auto [ok_d, loss_d, acc_d] = mean_over_seeds("linear-2-0");
    const auto [ok_c, loss_c, acc_c] = mean_over_seeds("constant-1");
    return {ok_d && ok_c && loss_d <= loss_c,
            fmt("eta %g, mean final loss %.4g vs %.4g, mean accuracy %.4f vs %.4f (difference %+.4f)",
                c.optimizer.eta, loss_d, loss_c, acc_d, acc_c, acc_d - acc_c)};
}

Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / "lossdecay_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::ofstream(dir / "run.json") << R"({
            "problem": {"kind": "DeepMLP", "depth": 6, "width": 12},
            "dataset": {"kind": "Spirals", "n_samples": 150, "n_classes": 3},
            "weight_schedule": "random-unit", "epochs": 10, "probe_every": 7, "seed": 3
        })";
        std::ofstream(dir / "sweep.json") << R"({
            "defaults": {"problem": {"kind": "QuadraticBowl", "noise_sigma": 0.1}, "epochs": 20},
            "runs": [{"seed": 1}, {"seed": 2, "weight_schedule": "linear-2-0"}, {"seed": 3, "weight_schedule": "poly-0.9"},
                     {"seed": 4, "weight_schedule": "long-tail"}, {"seed": 5, "weight_schedule": "random-unit"},
                     {"seed": 6, "optimizer": {"rule": "Adam"}}]
        })";
    }
    std::ostringstream sink;
    auto invoke = [&](auto cmd, const char* config, const char* out, int jobs) {
        cli::Invocation inv;
        inv.config_path = dir / config;
        inv.output_dir = dir / out;
        inv.jobs = jobs;
        return cmd(inv, sink, sink);
    };
    const int a = invoke(cli::cmd_run, "run.json", "a", 1);
    const int b = invoke(cli::cmd_run, "run.json", "b", 1);
    const int s1 = invoke(cli::cmd_sweep, "sweep.json", "s1", 1);
    const int s4 = invoke(cli::cmd_sweep, "sweep.json", "s4", 4);

    const std::string run_a = slurp(dir / "a" / "records.csv");
    const std::string sum_1 = slurp(dir / "s1" / "summary.csv");
    const bool runs_equal = !run_a.empty() && run_a == slurp(dir / "b" / "records.csv");
    const bool sweeps_equal = !sum_1.empty() && sum_1 == slurp(dir / "s4" / "summary.csv");
    fs::remove_all(dir);
    const bool codes = a == 0 && b == 0 && s1 == 0 && s4 == 0;
    return {codes && runs_equal && sweeps_equal,
            fmt("exit codes %d %d %d %d, run CSVs %s (%zu bytes), sweep summaries %s", a, b, s1, s4,
                runs_equal ? "identical" : "differ", run_a.size(), sweeps_equal ? "identical" : "differ")};
}

struct Criterion {
    int number;
    const char* name;
    double time_limit_s; ///< 0 means no limit
    std::function<Outcome()> check;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "scaling modes agree for plain SGD", 1.0, equivalence},
        {2, "momentum separates gradient and learning-rate scaling", 0.0, momentum_inequivalence},
        {3, "analytic gradients match finite differences", 10.0, gradient_correctness},
        {4, "curvature probe is exact on quadratics", 0.0, curvature_exactness},
        {5, "noise floor law", 30.0, noise_floor},
        {6, "decayed weight lowers deep MLP training loss", 300.0, deep_mlp_direction},
        {7, "plateau then late break under decay only", 0.0, plateau_break},
        {8, "byte-stable runs and sweeps", 0.0, determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::string timing = fmt("%.2f s", secs);
        if (c.time_limit_s > 0.0) {
            timing += fmt(", limit %g s", c.time_limit_s);
            if (secs >= c.time_limit_s) {
                o.pass = false;
            }
        }
        std::printf("%s criterion %d: %s: %s [%s]\n", o.pass ? "PASS" : "FAIL", c.number, c.name, o.detail.c_str(),
                    timing.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures;
}
