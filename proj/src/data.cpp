#include "ee/data.hpp"

#include "ee/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

namespace ee {

Labels remap_dense(const Labels& labels, int* class_count) {
    std::map<int, int> ids;
    Labels out;
    out.reserve(labels.size());
    for (int l : labels) {
        auto [it, inserted] = ids.try_emplace(l, static_cast<int>(ids.size()) + 1);
        out.push_back(it->second);
    }
    if (class_count != nullptr) {
        *class_count = static_cast<int>(ids.size());
    }
    return out;
}

FeatureDataset gaussian_blobs(const BlobSpec& spec) {
    if (spec.classes < 1 || spec.per_class < 1 || spec.input_dim < 1) {
        throw InvalidBatch("gaussian_blobs: counts must be positive");
    }
    if (!(spec.noise_sigma >= 0.0)) {
        throw InvalidBatch("gaussian_blobs: noise_sigma must be >= 0");
    }
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> center_dist(-spec.center_scale, spec.center_scale);
    std::normal_distribution<double> noise(0.0, 1.0);

    const auto dim = static_cast<std::size_t>(spec.input_dim);
    Matrix centers(static_cast<std::size_t>(spec.classes), dim);
    for (double& v : centers.values()) {
        v = center_dist(rng);
    }
    FeatureDataset ds;
    ds.class_count = spec.classes;
    ds.features = Matrix(static_cast<std::size_t>(spec.classes * spec.per_class), dim);
    ds.labels.reserve(ds.features.rows());
    std::size_t row = 0;
    for (int c = 0; c < spec.classes; ++c) {
        const auto center = centers.row(static_cast<std::size_t>(c));
        for (int s = 0; s < spec.per_class; ++s, ++row) {
            auto out = ds.features.row(row);
            for (std::size_t d = 0; d < dim; ++d) {
                out[d] = center[d] + spec.noise_sigma * noise(rng);
            }
            ds.labels.push_back(c + 1);
        }
    }
    return ds;
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

} // namespace

FeatureDataset load_feature_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IOFailure("cannot open feature file '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line) || trim(line).empty()) {
        throw EmptyFile(path);
    }
    const auto header = split_commas(trim(line));
    if (header.size() < 2 || trim(header[0]) != "label") {
        throw ParseError(1, "header must start with 'label' followed by feature columns");
    }
    for (std::size_t c = 1; c < header.size(); ++c) {
        if (trim(header[c]) != "f" + std::to_string(c - 1)) {
            throw ParseError(1, "expected column 'f" + std::to_string(c - 1) + "'");
        }
    }
    const std::size_t dim = header.size() - 1;

    FeatureDataset ds;
    Labels raw;
    std::size_t line_no = 1;
    std::vector<double> values(dim);
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty()) {
            continue;
        }
        const auto fields = split_commas(body);
        if (fields.size() != dim + 1) {
            throw ParseError(line_no, "expected " + std::to_string(dim + 1) + " fields, got " +
                                          std::to_string(fields.size()));
        }
        const auto label_field = trim(fields[0]);
        int label = 0;
        auto [lp, lec] = std::from_chars(label_field.data(), label_field.data() + label_field.size(), label);
        if (lec != std::errc() || lp != label_field.data() + label_field.size()) {
            throw ParseError(line_no, "label is not an integer");
        }
        for (std::size_t d = 0; d < dim; ++d) {
            auto field = trim(fields[d + 1]);
            if (!field.empty() && field.front() == '+') {
                field.remove_prefix(1);
            }
            double v = 0.0;
            auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            if (ec != std::errc() || p != field.data() + field.size() || field.empty()) {
                throw ParseError(line_no, "column f" + std::to_string(d) + " is not a number");
            }
            if (!std::isfinite(v)) {
                throw NonFiniteValue(line_no);
            }
            values[d] = v;
        }
        ds.features.append_row(values);
        raw.push_back(label);
    }
    if (raw.empty()) {
        throw EmptyFile(path);
    }
    ds.labels = remap_dense(raw, &ds.class_count);
    return ds;
}

void save_feature_csv(const FeatureDataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IOFailure("cannot write feature file '" + path + "'");
    }
    out << "label";
    for (std::size_t d = 0; d < dataset.dim(); ++d) {
        out << ",f" << d;
    }
    out << '\n';
    char buf[32];
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        out << dataset.labels[r];
        for (double v : dataset.features.row(r)) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) {
        throw IOFailure("write failed for '" + path + "'");
    }
}

std::pair<FeatureDataset, FeatureDataset> class_disjoint_split(const FeatureDataset& dataset,
                                                               double train_fraction, std::uint64_t seed) {
    if (dataset.class_count < 2) {
        throw InvalidFraction("class-disjoint split needs at least 2 classes");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw InvalidFraction("train fraction must lie in (0, 1)");
    }
    const int train_classes = static_cast<int>(std::lround(train_fraction * dataset.class_count));
    if (train_classes < 1 || train_classes >= dataset.class_count) {
        throw InvalidFraction("train fraction leaves one side without classes");
    }
    std::vector<int> order(static_cast<std::size_t>(dataset.class_count));
    std::iota(order.begin(), order.end(), 1);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<bool> in_train(static_cast<std::size_t>(dataset.class_count) + 1, false);
    for (int c = 0; c < train_classes; ++c) {
        in_train[static_cast<std::size_t>(order[static_cast<std::size_t>(c)])] = true;
    }

    FeatureDataset train;
    FeatureDataset test;
    train.split = Split::train;
    test.split = Split::test;
    Labels train_raw;
    Labels test_raw;
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        const int l = dataset.labels[r];
        if (l < 1 || l > dataset.class_count) {
            throw InvalidBatch("labels must be dense in 1..class_count before splitting");
        }
        if (in_train[static_cast<std::size_t>(l)]) {
            train.features.append_row(dataset.features.row(r));
            train_raw.push_back(l);
        } else {
            test.features.append_row(dataset.features.row(r));
            test_raw.push_back(l);
        }
    }
    train.labels = remap_dense(train_raw, &train.class_count);
    test.labels = remap_dense(test_raw, &test.class_count);
    return {std::move(train), std::move(test)};
}

} // namespace ee
