// Copyright (c) 2026 The lossdecay Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <stdexcept>
#include <string>

#include "lossdecay/problems.hpp"

namespace lossdecay {

namespace {

constexpr double kBlobCenterScale = 3.0;
constexpr double kSpiralTurnRadians = 4.0;

int class_count(int c, int n_samples, int n_classes) {
    return n_samples / n_classes + (c < n_samples % n_classes ? 1 : 0);
}

void standardize(Eigen::MatrixXd& x) {
    const double n = static_cast<double>(x.rows());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        auto col = x.col(j);
        const double mean = col.sum() / n;
        col.array() -= mean;
        const double sd = std::sqrt(col.squaredNorm() / n);
        if (sd > 0.0) {
            col /= sd;
        }
    }
}

} // namespace

Batch Dataset::batch(std::span<const std::size_t> indices) const {
    Batch b;
    b.inputs.resize(static_cast<Eigen::Index>(indices.size()), inputs.cols());
    b.labels.reserve(indices.size());
    b.indices.assign(indices.begin(), indices.end());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        if (indices[r] >= size()) {
            throw std::out_of_range("batch index " + std::to_string(indices[r]) + " beyond dataset size");
        }
        b.inputs.row(static_cast<Eigen::Index>(r)) = inputs.row(static_cast<Eigen::Index>(indices[r]));
        b.labels.push_back(labels[indices[r]]);
    }
    return b;
}

Batch Dataset::full() const {
    Batch b;
    b.inputs = inputs;
    b.labels = labels;
    b.indices.resize(size());
    for (std::size_t i = 0; i < size(); ++i) {
        b.indices[i] = i;
    }
    return b;
}

Dataset generate_dataset(const DatasetSpec& spec) {
    if (spec.n_classes < 2) {
        throw std::invalid_argument("dataset: n_classes must be >= 2");
    }
    if (spec.n_samples < spec.n_classes) {
        throw std::invalid_argument("dataset: n_samples must be >= n_classes");
    }
    if (!(std::isfinite(spec.noise) && spec.noise >= 0.0)) {
        throw std::invalid_argument("dataset: noise must be >= 0");
    }
    const int dims = spec.kind == DatasetKind::Spirals ? 2 : spec.n_features;
    if (dims < 1) {
        throw std::invalid_argument("dataset: n_features must be >= 1");
    }

    Rng rng(spec.seed);
    Dataset data;
    data.n_classes = spec.n_classes;
    data.inputs.resize(spec.n_samples, dims);
    data.labels.reserve(static_cast<std::size_t>(spec.n_samples));

    Eigen::Index row = 0;
    if (spec.kind == DatasetKind::GaussianBlobs) {
        Eigen::MatrixXd centers(spec.n_classes, dims);
        for (Eigen::Index i = 0; i < centers.size(); ++i) {
            centers.data()[i] = kBlobCenterScale * rng.normal();
        }
        for (int c = 0; c < spec.n_classes; ++c) {
            for (int k = 0; k < class_count(c, spec.n_samples, spec.n_classes); ++k, ++row) {
                for (int j = 0; j < dims; ++j) {
                    data.inputs(row, j) = centers(c, j) + spec.noise * rng.normal();
                }
                data.labels.push_back(c);
            }
        }
    } else {
        // Interleaved arms: radius grows linearly while the angle sweeps
        // kSpiralTurnRadians per class, jittered by `noise`.
        for (int c = 0; c < spec.n_classes; ++c) {
            const int m = class_count(c, spec.n_samples, spec.n_classes);
            for (int k = 0; k < m; ++k, ++row) {
                const double s = m > 1 ? static_cast<double>(k) / (m - 1) : 0.0;
                const double r = s;
                const double t = kSpiralTurnRadians * (c + s) + spec.noise * rng.normal();
                data.inputs(row, 0) = r * std::sin(t);
                data.inputs(row, 1) = r * std::cos(t);
                data.labels.push_back(c);
            }
        }
    }
    standardize(data.inputs);
    return data;
}

std::string_view dataset_kind_name(DatasetKind kind) {
    return kind == DatasetKind::Spirals ? "Spirals" : "GaussianBlobs";
}

DatasetKind dataset_kind_from_name(std::string_view name) {
    if (name == "GaussianBlobs") {
        return DatasetKind::GaussianBlobs;
    }
    if (name == "Spirals") {
        return DatasetKind::Spirals;
    }
    throw std::invalid_argument("unknown dataset kind '" + std::string(name) + "' (expected GaussianBlobs or Spirals)");
}

} // namespace lossdecay
