// Copyright (c) 2026 The lossdecay Authors
// SPDX-License-Identifier: Apache-2.0

#include "lossdecay/csv.hpp"

#include <array>
#include <charconv>
#include <ostream>
#include <stdexcept>
#include <system_error>

namespace lossdecay::csv {

namespace {

std::string format_int(std::int64_t x) { return std::to_string(x); }

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

} // namespace

std::string format_double(double x) {
    std::array<char, 32> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (ec != std::errc{}) {
        throw std::runtime_error("format_double: to_chars failed");
    }
    return std::string(buf.data(), end);
}

std::string format_optional(const std::optional<double>& x) { return x ? format_double(*x) : std::string(); }

std::string record_row(const StepRecord& r) {
    std::string s;
    s.reserve(192);
    s += format_int(r.step);
    s += ',';
    s += format_int(r.epoch);
    s += ',';
    s += format_double(r.weight_applied);
    s += ',';
    s += format_double(r.eta_effective);
    s += ',';
    s += format_double(r.loss_raw);
    s += ',';
    s += format_double(r.loss_scaled);
    s += ',';
    s += format_double(r.grad_norm);
    s += ',';
    s += format_optional(r.gTg);
    s += ',';
    s += format_optional(r.gTHg);
    s += ',';
    s += format_optional(r.predicted_decrease);
    s += ',';
    s += format_optional(r.actual_decrease);
    s += ',';
    s += format_optional(r.train_accuracy);
    return s;
}

std::string probe_row(const StepRecord& r) {
    return format_int(r.step) + ',' + format_int(r.epoch) + ',' + format_double(r.weight_applied) + ',' +
           format_double(r.eta_effective) + ',' + format_optional(r.gTg) + ',' + format_optional(r.gTHg) + ',' +
           format_optional(r.predicted_decrease) + ',' + format_optional(r.actual_decrease);
}

std::string summary_row(const SummaryRow& row) {
    auto opt_int = [](const std::optional<std::int64_t>& x) { return x ? std::to_string(*x) : std::string(); };
    const bool has_plateau_fields = row.plateau_tol.has_value();
    return quote(row.id) + ',' + row.status + ',' + std::to_string(row.seed) + ',' + std::to_string(row.steps) + ',' +
           format_optional(row.final_loss) + ',' + format_optional(row.best_loss) + ',' +
           format_optional(row.final_accuracy) + ',' + format_optional(row.plateau_tol) + ',' +
           opt_int(row.plateau.plateau_start_epoch) + ',' + opt_int(row.plateau.break_epoch) + ',' +
           (has_plateau_fields ? format_double(row.plateau.pre_break_best_loss) : std::string()) + ',' +
           format_optional(row.plateau.post_break_best_loss) + ',' + quote(row.message);
}

void write_records(std::ostream& out, std::span<const StepRecord> records) {
    out << kRecordHeader << '\n';
    for (const auto& r : records) {
        out << record_row(r) << '\n';
    }
}

void write_summary(std::ostream& out, std::span<const SummaryRow> rows) {
    out << kSummaryHeader << '\n';
    for (const auto& r : rows) {
        out << summary_row(r) << '\n';
    }
}

RecordFileWriter::RecordFileWriter(const std::string& path, Columns columns)
    : out_(path, std::ios::binary | std::ios::trunc), columns_(columns) {
    if (!out_) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    out_ << (columns_ == Columns::Full ? kRecordHeader : kProbeHeader) << '\n';
    out_.flush();
}

void RecordFileWriter::write(const StepRecord& r) {
    out_ << (columns_ == Columns::Full ? record_row(r) : probe_row(r)) << '\n';
}

} // namespace lossdecay::csv
