// Copyright (c) 2026 The lossdecay Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "lossdecay/csv.hpp"
#include "lossdecay/errors.hpp"
#include "lossdecay/trainer.hpp"

namespace lossdecay::cli {

namespace {

// Maps library exceptions onto the documented exit codes.
template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kParseError;
    } catch (const ConfigError& e) {
        err << "invalid config: " << e.what() << '\n';
        return kInvalid;
    } catch (const std::invalid_argument& e) {
        err << "invalid config: " << e.what() << '\n';
        return kInvalid;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kAborted;
    }
}

std::filesystem::path prepare_output(const Invocation& inv, const std::string& name) {
    std::filesystem::create_directories(inv.output_dir);
    const auto path = inv.output_dir / name;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    return path;
}

void report_epochs(const RunResult& result, std::ostream& err) {
    const auto means = epoch_mean_losses(result.records);
    for (std::size_t e = 0; e < means.size(); ++e) {
        err << "epoch " << e << " mean_loss " << csv::format_double(means[e]) << '\n';
    }
}

int finish(const ExperimentConfig& config, const RunResult& result, const std::filesystem::path& path,
           std::ostream& out, std::ostream& err) {
    if (result.status == RunStatus::NonFinite) {
        err << config.id << ": aborted after " << result.records.size() << " steps: " << result.message << '\n';
        err << "partial records in " << path.string() << '\n';
        return kAborted;
    }
    out << config.id << ": final_loss " << csv::format_double(result.final_loss);
    if (result.final_accuracy) {
        out << " final_accuracy " << csv::format_double(*result.final_accuracy);
    }
    out << " steps " << result.records.size() << '\n';
    return kOk;
}

std::string probe_file_name(const std::string& output_path) {
    std::filesystem::path p(output_path);
    const std::string stem = p.extension() == ".csv" ? p.replace_extension().string() : p.string();
    return stem + ".probe.csv";
}

} // namespace

int cmd_run(const Invocation& inv, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ExperimentConfig config = parse_config_file(inv.config_path, inv.overrides);
        const auto path = prepare_output(inv, config.output_path);
        RunResult result;
        {
            csv::RecordFileWriter writer(path.string());
            RunOptions options;
            options.sink = [&writer](const StepRecord& r) { writer.write(r); };
            result = run(config, options);
        }
        if (inv.verbosity > 0) {
            report_epochs(result, err);
        }
        return finish(config, result, path, out, err);
    });
}

int cmd_probe(const Invocation& inv, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        std::vector<Override> overrides = inv.overrides;
        if (!inv.probe_every.empty()) {
            overrides.push_back({"probe_every", inv.probe_every});
        }
        ExperimentConfig config = parse_config_file(inv.config_path, overrides);
        if (config.probe_every.kind == Cadence::Kind::Never) {
            config.probe_every.kind = Cadence::Kind::Epoch;
        }
        const auto path = prepare_output(inv, probe_file_name(config.output_path));
        RunResult result;
        std::int64_t probes = 0;
        {
            csv::RecordFileWriter writer(path.string(), csv::RecordFileWriter::Columns::ProbeOnly);
            RunOptions options;
            options.sink = [&](const StepRecord& r) {
                if (r.gTg) {
                    writer.write(r);
                    ++probes;
                }
            };
            result = run(config, options);
        }
        if (inv.verbosity > 0) {
            report_epochs(result, err);
        }
        if (result.status == RunStatus::Completed) {
            out << config.id << ": " << probes << " probes written to " << path.string() << '\n';
        }
        return finish(config, result, path, out, err);
    });
}

int cmd_sweep(const Invocation& inv, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto configs = parse_sweep_file(inv.config_path, inv.overrides);
        std::filesystem::create_directories(inv.output_dir);
        SweepOptions options;
        options.parallelism = inv.jobs;
        options.records_dir = inv.output_dir;
        for (const auto& c : configs) {
            const auto p = inv.output_dir / c.output_path;
            if (p.has_parent_path()) {
                std::filesystem::create_directories(p.parent_path());
            }
        }
        const auto rows = sweep(configs, options);
        const auto path = inv.output_dir / inv.summary_name;
        {
            std::ofstream file(path, std::ios::binary | std::ios::trunc);
            if (!file) {
                throw std::runtime_error("cannot open '" + path.string() + "' for writing");
            }
            csv::write_summary(file, rows);
        }
        int failed = 0;
        for (const auto& row : rows) {
            if (row.status != "ok") {
                ++failed;
                err << row.id << ": " << row.status << ": " << row.message << '\n';
            } else if (inv.verbosity > 0) {
                err << row.id << ": final_loss " << csv::format_optional(row.final_loss) << '\n';
            }
        }
        out << rows.size() - static_cast<std::size_t>(failed) << "/" << rows.size() << " runs ok, summary in "
            << path.string() << '\n';
        return failed == 0 ? kOk : kAborted;
    });
}

int cmd_presets(std::ostream& out) {
    for (const auto& name : preset_names()) {
        out << name << ' ' << to_json(preset(name)).dump() << '\n';
    }
    return kOk;
}

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Scheduled loss weighting experiments", "lossdecay"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "lossdecay 0.1.0");

    Invocation inv;
    std::vector<std::string> sets;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", inv.config_path, "Config file (JSON, comments allowed)")->required();
        sub->add_option("-s,--set", sets, "Override a config key, e.g. optimizer.eta=0.001")->allow_extra_args(false);
        sub->add_option("-o,--output-dir", inv.output_dir, "Directory for CSV outputs")->capture_default_str();
        sub->add_flag("-v,--verbose", inv.verbosity, "Print per-epoch losses (repeatable)");
    };

    auto* run_cmd = app.add_subcommand("run", "Train one config and write its records CSV");
    add_common(run_cmd);
    auto* sweep_cmd = app.add_subcommand("sweep", "Train a list of configs and write a summary CSV");
    add_common(sweep_cmd);
    sweep_cmd->add_option("-j,--jobs", inv.jobs, "Runs to execute in parallel")->capture_default_str()->check(
        CLI::PositiveNumber);
    sweep_cmd->add_option("--summary", inv.summary_name, "Summary file name inside the output dir")
        ->capture_default_str();
    auto* probe_cmd = app.add_subcommand("probe", "Train one config and write only the curvature probe columns");
    add_common(probe_cmd);
    probe_cmd->add_option("--every", inv.probe_every, "Probe cadence: \"epoch\" or a step count");
    auto* presets_cmd = app.add_subcommand("presets", "Print the schedule preset catalog as name + JSON");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion& e) {
        out << e.what() << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        if (const auto subs = app.get_subcommands(); !subs.empty()) {
            err << subs.front()->help();
        } else {
            err << app.help();
        }
        return kParseError;
    }

    for (const auto& s : sets) {
        try {
            inv.overrides.push_back(parse_override(s));
        } catch (const ConfigError& e) {
            err << "invalid override: " << e.what() << '\n';
            return kInvalid;
        }
    }

    if (run_cmd->parsed()) {
        return cmd_run(inv, out, err);
    }
    if (sweep_cmd->parsed()) {
        return cmd_sweep(inv, out, err);
    }
    if (probe_cmd->parsed()) {
        return cmd_probe(inv, out, err);
    }
    if (presets_cmd->parsed()) {
        return cmd_presets(out);
    }
    return kParseError;
}

} // namespace lossdecay::cli
