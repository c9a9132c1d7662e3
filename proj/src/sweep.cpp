// Copyright (c) 2026 The lossdecay Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <atomic>
#include <exception>
#include <optional>
#include <set>
#include <stdexcept>
#include <thread>

#include "lossdecay/csv.hpp"
#include "lossdecay/trainer.hpp"

namespace lossdecay {

namespace {

SummaryRow run_one(const ExperimentConfig& config, const SweepOptions& options) {
    try {
        RunOptions run_options;
        std::optional<csv::RecordFileWriter> writer;
        if (options.records_dir) {
            writer.emplace((*options.records_dir / config.output_path).string());
            run_options.sink = [&writer](const StepRecord& r) { writer->write(r); };
        }
        return summarize(config, run(config, run_options));
    } catch (const std::exception& e) {
        SummaryRow row;
        row.id = config.id;
        row.seed = config.seed;
        row.status = "error";
        row.message = e.what();
        return row;
    }
}

} // namespace

std::vector<SummaryRow> sweep(std::span<const ExperimentConfig> configs, const SweepOptions& options) {
    if (configs.empty()) {
        throw std::invalid_argument("sweep: no configurations given");
    }
    if (options.parallelism < 1) {
        throw std::invalid_argument("sweep: parallelism must be >= 1");
    }
    if (options.records_dir) {
        std::set<std::string> paths;
        for (const auto& c : configs) {
            if (!paths.insert(c.output_path).second) {
                throw std::invalid_argument("sweep: duplicate output_path '" + c.output_path + "'");
            }
        }
    }

    std::vector<SummaryRow> rows(configs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            rows[i] = run_one(configs[i], options);
        }
    };
    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(options.parallelism), configs.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    return rows;
}

} // namespace lossdecay
