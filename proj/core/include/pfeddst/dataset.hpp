#pragma once

#include "pfeddst/matrix.hpp"
#include "pfeddst/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace pfeddst {

/// A labeled dataset: inputs is N x dim, labels hold class indices.
struct Dataset {
    DenseMatrix inputs;
    std::vector<int> labels;
    int num_classes = 0;

    int size() const { return inputs.rows; }
    int dim() const { return inputs.cols; }
};

/// One Gaussian cluster per class. Cluster centers are drawn once from the
/// seed, uniform in [-1, 1]^dim; points are center + spread * N(0, I).
/// Rows come out class-major (all of class 0 first).
Dataset generate_synthetic(int num_classes, int dim, int per_class, double spread,
                           std::uint64_t seed);

/// Reads the flat-file dataset format: a header line `dim=<d>,classes=<k>`
/// followed by one `label,v1,...,vd` line per example.
Dataset load_flatfile(const std::filesystem::path& path);

/// Inverse of load_flatfile; values are written shortest-round-trip so a
/// save/load cycle reproduces the dataset exactly.
void save_flatfile(const Dataset& data, const std::filesystem::path& path);

} // namespace pfeddst
