#pragma once

#include "ee/geometry.hpp"

#include <cstdint>
#include <string>
#include <utility>

namespace ee {

enum class Split { all, train, test };

// Feature-level dataset; labels are dense in {1..class_count}.
struct FeatureDataset {
    Matrix features;
    Labels labels;
    int class_count = 0;
    Split split = Split::all;

    std::size_t size() const { return features.rows(); }
    std::size_t dim() const { return features.cols(); }
};

struct BlobSpec {
    int classes = 10;
    int per_class = 50;
    int input_dim = 32;
    double center_scale = 1.0;
    double noise_sigma = 0.5;
    std::uint64_t seed = 1;
};

// Centers uniform in [-center_scale, center_scale]^input_dim, isotropic
// Gaussian noise around each. Rows are class-major.
FeatureDataset gaussian_blobs(const BlobSpec& spec);

// CSV with header "label,f0,...,f{D-1}". Labels are remapped to 1..C in
// order of first appearance.
FeatureDataset load_feature_csv(const std::string& path);
void save_feature_csv(const FeatureDataset& dataset, const std::string& path);

// Partitions classes (not samples). round(train_fraction * C) classes go to
// train; each side is relabelled densely.
std::pair<FeatureDataset, FeatureDataset> class_disjoint_split(const FeatureDataset& dataset,
                                                               double train_fraction, std::uint64_t seed);

// Relabels to 1..C in order of first appearance.
Labels remap_dense(const Labels& labels, int* class_count = nullptr);

} // namespace ee
