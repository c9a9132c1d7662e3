// Copyright (c) 2026 The lossdecay Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lossdecay/config.hpp"
#include "lossdecay/curvature.hpp"
#include "lossdecay/errors.hpp"
#include "lossdecay/trainer.hpp"

namespace py = pybind11;
using namespace lossdecay;

namespace {

std::vector<Override> to_overrides(const std::vector<std::string>& items) {
    std::vector<Override> out;
    out.reserve(items.size());
    for (const auto& s : items) {
        out.push_back(parse_override(s));
    }
    return out;
}

py::array_t<double> column(const std::vector<StepRecord>& records, auto get) {
    py::array_t<double> a(static_cast<py::ssize_t>(records.size()));
    auto view = a.mutable_unchecked<1>();
    for (std::size_t i = 0; i < records.size(); ++i) {
        const std::optional<double> v = get(records[i]);
        view(static_cast<py::ssize_t>(i)) = v.value_or(std::numeric_limits<double>::quiet_NaN());
    }
    return a;
}

py::dict records_dict(const std::vector<StepRecord>& r) {
    py::dict d;
    py::array_t<std::int64_t> step(static_cast<py::ssize_t>(r.size()));
    py::array_t<std::int64_t> epoch(static_cast<py::ssize_t>(r.size()));
    auto sv = step.mutable_unchecked<1>();
    auto ev = epoch.mutable_unchecked<1>();
    for (std::size_t i = 0; i < r.size(); ++i) {
        sv(static_cast<py::ssize_t>(i)) = r[i].step;
        ev(static_cast<py::ssize_t>(i)) = r[i].epoch;
    }
    d["step"] = step;
    d["epoch"] = epoch;
    d["weight_applied"] = column(r, [](const StepRecord& s) { return std::optional(s.weight_applied); });
    d["eta_effective"] = column(r, [](const StepRecord& s) { return std::optional(s.eta_effective); });
    d["loss_raw"] = column(r, [](const StepRecord& s) { return std::optional(s.loss_raw); });
    d["loss_scaled"] = column(r, [](const StepRecord& s) { return std::optional(s.loss_scaled); });
    d["grad_norm"] = column(r, [](const StepRecord& s) { return std::optional(s.grad_norm); });
    d["gTg"] = column(r, [](const StepRecord& s) { return s.gTg; });
    d["gTHg"] = column(r, [](const StepRecord& s) { return s.gTHg; });
    d["predicted_decrease"] = column(r, [](const StepRecord& s) { return s.predicted_decrease; });
    d["actual_decrease"] = column(r, [](const StepRecord& s) { return s.actual_decrease; });
    d["train_accuracy"] = column(r, [](const StepRecord& s) { return s.train_accuracy; });
    return d;
}

py::dict plateau_dict(const PlateauReport& p) {
    py::dict d;
    d["plateau_start_epoch"] = p.plateau_start_epoch;
    d["break_epoch"] = p.break_epoch;
    d["pre_break_best_loss"] = p.pre_break_best_loss;
    d["post_break_best_loss"] = p.post_break_best_loss;
    return d;
}

py::dict summary_dict(const SummaryRow& row) {
    py::dict d;
    d["id"] = row.id;
    d["status"] = row.status;
    d["message"] = row.message;
    d["seed"] = row.seed;
    d["steps"] = row.steps;
    d["final_loss"] = row.final_loss;
    d["best_loss"] = row.best_loss;
    d["final_accuracy"] = row.final_accuracy;
    d["plateau_tol"] = row.plateau_tol;
    d["plateau"] = plateau_dict(row.plateau);
    return d;
}

py::dict run_config(const std::string& text, const std::vector<std::string>& overrides, bool trajectory) {
    const ExperimentConfig config = parse_config_text(text, to_overrides(overrides));
    RunOptions options;
    options.record_trajectory = trajectory;
    RunResult r;
    {
        py::gil_scoped_release release;
        r = run(config, options);
    }
    py::dict d;
    d["id"] = config.id;
    d["status"] = r.status == RunStatus::Completed ? "ok" : "nonfinite";
    d["message"] = r.message;
    d["final_loss"] = r.final_loss;
    d["final_accuracy"] = r.final_accuracy;
    d["steps_per_epoch"] = r.steps_per_epoch;
    d["final_theta"] = r.final_theta;
    d["records"] = records_dict(r.records);
    d["epoch_means"] = epoch_mean_losses(r.records);
    d["summary"] = summary_dict(summarize(config, r));
    if (trajectory) {
        d["trajectory"] = r.trajectory;
    }
    return d;
}

std::vector<py::dict> run_sweep(const std::string& text, const std::vector<std::string>& overrides, int parallelism) {
    const auto configs = parse_sweep_text(text, to_overrides(overrides));
    SweepOptions options;
    options.parallelism = parallelism;
    std::vector<SummaryRow> rows;
    {
        py::gil_scoped_release release;
        rows = sweep(configs, options);
    }
    std::vector<py::dict> out;
    for (const auto& row : rows) {
        out.push_back(summary_dict(row));
    }
    return out;
}

std::vector<double> schedule_trace(const std::string& spec_text, std::int64_t total_steps,
                                   std::int64_t steps_per_epoch, std::uint64_t seed) {
    const ScheduleSpec spec = schedule_from_json(parse_document(spec_text));
    spec.validate();
    Rng rng(seed);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(total_steps));
    for (std::int64_t t = 0; t < total_steps; ++t) {
        const Progress p{t, total_steps, steps_per_epoch};
        out.push_back(spec.is_stochastic() ? sample(spec, p, rng) : evaluate(spec, p));
    }
    return out;
}

// Worst relative error between analytic and finite-difference gradients over
// `draws` random parameter/batch pairs for the problem a config describes.
double gradient_check(const std::string& text, int draws, std::uint64_t seed) {
    const ExperimentConfig config = parse_config_text(text);
    std::shared_ptr<const Dataset> data;
    if (config.dataset) {
        data = std::make_shared<const Dataset>(generate_dataset(*config.dataset));
    }
    const auto problem = make_problem(config.problem, data);
    Rng rng(seed);
    double worst = 0.0;
    for (int k = 0; k < draws; ++k) {
        ParamVector theta = problem->initial_params(rng);
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
            theta(i) += 0.1 * rng.normal();
        }
        Batch batch;
        if (data) {
            auto order = shuffled_indices(data->size(), rng);
            order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(config.batch_size)));
            batch = data->batch(order);
        }
        worst = std::max(worst, relative_error(problem->gradient(theta, batch),
                                               finite_diff_gradient(*problem, theta, batch)));
    }
    return worst;
}

QuadraticBowl bowl_from(const std::vector<double>& eigenvalues, double sigma) {
    return QuadraticBowl::from_eigenvalues(eigenvalues, sigma);
}

} // namespace

PYBIND11_MODULE(_lossdecay, m) {
    m.doc() = "Loss-weight schedules, optimizers and training diagnostics.";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

    m.def("preset_names", &preset_names);
    m.def(
        "preset", [](const std::string& name) { return to_json(preset(name)).dump(); }, py::arg("name"),
        "Preset schedule as a JSON string.");
    m.def(
        "schedule_weight",
        [](const std::string& spec_text, double p) {
            return weight_at(schedule_from_json(parse_document(spec_text)), p);
        },
        py::arg("spec"), py::arg("p"), "Weight of a deterministic schedule at progress fraction p.");
    m.def("schedule_trace", &schedule_trace, py::arg("spec"), py::arg("total_steps"), py::arg("steps_per_epoch"),
          py::arg("seed") = 0, "Weight applied at every step of a run.");

    m.def(
        "normalize_config",
        [](const std::string& text, const std::vector<std::string>& overrides) {
            return to_json(parse_config_text(text, to_overrides(overrides))).dump();
        },
        py::arg("text"), py::arg("overrides") = std::vector<std::string>{},
        "Parses, validates and re-serializes a config with every default filled in.");
    m.def("run", &run_config, py::arg("text"), py::arg("overrides") = std::vector<std::string>{},
          py::arg("trajectory") = false);
    m.def("sweep", &run_sweep, py::arg("text"), py::arg("overrides") = std::vector<std::string>{},
          py::arg("parallelism") = 1);

    m.def(
        "detect_plateau_break",
        [](const std::vector<double>& epoch_means, double tol, int window) {
            return plateau_dict(detect_plateau_break(epoch_means, tol, window));
        },
        py::arg("epoch_means"), py::arg("tol"), py::arg("window") = 5);

    m.def(
        "stationary_loss_floor",
        [](const std::vector<double>& eigenvalues, double sigma, double eta, double w) {
            return stationary_loss_floor(bowl_from(eigenvalues, sigma), eta, w);
        },
        py::arg("eigenvalues"), py::arg("sigma"), py::arg("eta"), py::arg("w") = 1.0);
    m.def(
        "probe_quadratic",
        [](const std::vector<double>& eigenvalues, const ParamVector& theta, double eta, double w) {
            const auto p = probe(bowl_from(eigenvalues, 0.0), theta, Batch{}, eta, w);
            py::dict d;
            d["gTg"] = p.gTg;
            d["gTHg"] = p.gTHg;
            d["predicted_decrease"] = p.predicted_decrease;
            d["actual_decrease"] = p.actual_decrease;
            return d;
        },
        py::arg("eigenvalues"), py::arg("theta"), py::arg("eta"), py::arg("w") = 1.0);
    m.def("gradient_check", &gradient_check, py::arg("text"), py::arg("draws") = 5, py::arg("seed") = 0);
}
