// Copyright (c) 2026 The lossdecay Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "lossdecay/trainer.hpp"

namespace lossdecay {

PlateauReport detect_plateau_break(std::span<const double> m, double tol, int window) {
    if (m.empty()) {
        throw std::invalid_argument("detect_plateau_break: no epochs");
    }
    if (!(std::isfinite(tol) && tol > 0.0)) {
        throw std::invalid_argument("detect_plateau_break: tol must be > 0");
    }
    if (window < 1) {
        throw std::invalid_argument("detect_plateau_break: window must be >= 1");
    }
    const auto epochs = static_cast<std::int64_t>(m.size());
    if (epochs < window + 2) {
        throw std::invalid_argument("detect_plateau_break: window of " + std::to_string(window) +
                                    " epochs exceeds the run length (" + std::to_string(epochs) + " epochs)");
    }
    auto best = [&m](std::int64_t lo, std::int64_t hi) { // min over [lo, hi)
        return *std::min_element(m.begin() + lo, m.begin() + hi);
    };

    PlateauReport report;
    report.pre_break_best_loss = best(0, epochs);

    for (std::int64_t e = 1; e + window < epochs; ++e) {
        if (best(0, e) - best(e + 1, e + window + 1) < tol) {
            report.plateau_start_epoch = e;
            break;
        }
    }
    if (!report.plateau_start_epoch) {
        return report;
    }
    const std::int64_t plateau_end = *report.plateau_start_epoch + window;
    const double plateau_best = best(0, plateau_end + 1);
    for (std::int64_t b = plateau_end + 1; b < epochs; ++b) {
        if (m[static_cast<std::size_t>(b)] < plateau_best - tol) {
            report.break_epoch = b;
            report.pre_break_best_loss = best(0, b);
            report.post_break_best_loss = best(b, epochs);
            break;
        }
    }
    return report;
}

PlateauReport detect_plateau_break(std::span<const StepRecord> records, double tol, int window) {
    if (records.empty()) {
        throw std::invalid_argument("detect_plateau_break: no records");
    }
    const std::vector<double> means = epoch_mean_losses(records);
    return detect_plateau_break(std::span<const double>(means), tol, window);
}

} // namespace lossdecay
