#include <doctest.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "lossdecay/csv.hpp"

using namespace lossdecay;

TEST_CASE("doubles round-trip through their shortest form") {
    CHECK(csv::format_double(0.1) == "0.1");
    CHECK(csv::format_double(2.0) == "2");
    CHECK(csv::format_double(-0.0) == "-0");
    CHECK(csv::format_double(1e-300) == "1e-300");
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double x = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<int>(rng.below(40)) - 20);
        const std::string s = csv::format_double(x);
        double back = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        CHECK(back == x);
    }
    CHECK(csv::format_optional(std::nullopt).empty());
    CHECK(csv::format_optional(0.25) == "0.25");
}

TEST_CASE("record rows follow the header") {
    StepRecord r;
    r.step = 3;
    r.epoch = 1;
    r.weight_applied = 1.5;
    r.eta_effective = 0.1;
    r.loss_raw = 2.0;
    r.loss_scaled = 3.0;
    r.grad_norm = 0.5;
    CHECK(csv::record_row(r) == "3,1,1.5,0.1,2,3,0.5,,,,,");
    r.gTg = 0.25;
    r.gTHg = 1.0;
    r.predicted_decrease = -0.02;
    r.actual_decrease = -0.019;
    r.train_accuracy = 0.75;
    CHECK(csv::record_row(r) == "3,1,1.5,0.1,2,3,0.5,0.25,1,-0.02,-0.019,0.75");
    CHECK(csv::probe_row(r) == "3,1,1.5,0.1,0.25,1,-0.02,-0.019");

    const std::string header(csv::kRecordHeader);
    CHECK(std::count(header.begin(), header.end(), ',') == 11);
    std::ostringstream out;
    csv::write_records(out, std::vector<StepRecord>{r});
    CHECK(out.str() == header + "\n3,1,1.5,0.1,2,3,0.5,0.25,1,-0.02,-0.019,0.75\n");
}

TEST_CASE("summary rows quote free text") {
    SummaryRow row;
    row.id = "a,b";
    row.status = "error";
    row.message = "bad \"value\"";
    row.seed = 9;
    CHECK(csv::summary_row(row) == "\"a,b\",error,9,0,,,,,,,,,\"bad \"\"value\"\"\"");
    row.id = "x";
    row.status = "ok";
    row.message.clear();
    row.steps = 10;
    row.final_loss = 0.5;
    row.best_loss = 0.25;
    row.plateau_tol = 0.01;
    row.plateau.plateau_start_epoch = 2;
    row.plateau.break_epoch = 8;
    row.plateau.pre_break_best_loss = 1.0;
    row.plateau.post_break_best_loss = 0.25;
    CHECK(csv::summary_row(row) == "x,ok,9,10,0.5,0.25,,0.01,2,8,1,0.25,");
    const std::string header(csv::kSummaryHeader);
    CHECK(std::count(header.begin(), header.end(), ',') == 12);
}

TEST_CASE("record file writer streams rows") {
    const auto path = std::filesystem::temp_directory_path() / "lossdecay_writer_test.csv";
    StepRecord r;
    r.gTg = 1.0;
    {
        csv::RecordFileWriter w(path.string(), csv::RecordFileWriter::Columns::ProbeOnly);
        w.write(r);
    }
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == std::string(csv::kProbeHeader) + "\n0,0,1,0,1,,,\n");
    std::filesystem::remove(path);
    CHECK_THROWS(csv::RecordFileWriter("/nonexistent-dir/x.csv"));
}
