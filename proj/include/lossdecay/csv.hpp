// Copyright (c) 2026 The lossdecay Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "lossdecay/trainer.hpp"

namespace lossdecay::csv {

/// Shortest representation that parses back to the identical double.
std::string format_double(double x);
/// Empty string for absent values.
std::string format_optional(const std::optional<double>& x);

inline constexpr std::string_view kRecordHeader =
    "step,epoch,weight_applied,eta_effective,loss_raw,loss_scaled,grad_norm,gTg,gTHg,"
    "predicted_decrease,actual_decrease,train_accuracy";

inline constexpr std::string_view kProbeHeader =
    "step,epoch,weight_applied,eta_effective,gTg,gTHg,predicted_decrease,actual_decrease";

inline constexpr std::string_view kSummaryHeader =
    "id,status,seed,steps,final_loss,best_loss,final_accuracy,plateau_tol,plateau_start_epoch,break_epoch,"
    "pre_break_best_loss,post_break_best_loss,message";

std::string record_row(const StepRecord& r);
/// Probe-only view of a record.
std::string probe_row(const StepRecord& r);
std::string summary_row(const SummaryRow& row);

void write_records(std::ostream& out, std::span<const StepRecord> records);
void write_summary(std::ostream& out, std::span<const SummaryRow> rows);

/// Streams record rows to a file as they are produced; an aborted run keeps
/// every row written before the abort.
class RecordFileWriter {
public:
    enum class Columns { Full, ProbeOnly };

    RecordFileWriter(const std::string& path, Columns columns = Columns::Full);

    void write(const StepRecord& r);

private:
    std::ofstream out_;
    Columns columns_;
};

} // namespace lossdecay::csv
