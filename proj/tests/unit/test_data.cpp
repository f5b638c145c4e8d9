#include "ee/data.hpp"

#include "ee/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

using namespace ee;

namespace {

std::string temp_file(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / ("ee_data_" + name);
    std::ofstream(path) << content;
    return path.string();
}

} // namespace

TEST(Data, BlobsAreSeededAndCentered) {
    BlobSpec spec;
    spec.classes = 3;
    spec.per_class = 400;
    spec.input_dim = 4;
    spec.noise_sigma = 0.5;
    spec.seed = 9;
    const FeatureDataset a = gaussian_blobs(spec);
    const FeatureDataset b = gaussian_blobs(spec);
    EXPECT_EQ(a.features, b.features);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_EQ(a.class_count, 3);

    BlobSpec flat = spec;
    flat.noise_sigma = 0.0;
    const FeatureDataset c = gaussian_blobs(flat);
    // Centers are drawn first and do not depend on sigma.
    for (int cls = 0; cls < 3; ++cls) {
        const auto first = c.features.row(static_cast<std::size_t>(cls * 400));
        for (int s = 1; s < 400; ++s) {
            const auto row = c.features.row(static_cast<std::size_t>(cls * 400 + s));
            EXPECT_TRUE(std::equal(row.begin(), row.end(), first.begin()));
        }
    }
    const double bound = 4.0 * 0.5 / std::sqrt(400.0);
    for (int cls = 0; cls < 3; ++cls) {
        for (std::size_t d = 0; d < 4; ++d) {
            double mean = 0.0;
            for (int s = 0; s < 400; ++s) mean += a.features(static_cast<std::size_t>(cls * 400 + s), d);
            mean /= 400.0;
            EXPECT_LT(std::abs(mean - c.features(static_cast<std::size_t>(cls * 400), d)), bound);
        }
    }
}

TEST(Data, CsvRoundTripIsExact) {
    BlobSpec spec;
    spec.classes = 4;
    spec.per_class = 5;
    spec.input_dim = 3;
    spec.seed = 2;
    const FeatureDataset a = gaussian_blobs(spec);
    const auto path = (std::filesystem::temp_directory_path() / "ee_data_roundtrip.csv").string();
    save_feature_csv(a, path);
    const FeatureDataset b = load_feature_csv(path);
    EXPECT_EQ(a.features, b.features);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_EQ(b.class_count, 4);
}

TEST(Data, CsvRemapsLabels) {
    const auto ds = load_feature_csv(temp_file("remap.csv", "label,f0,f1\n7,1,2\n7,3,4\n"));
    EXPECT_EQ(ds.class_count, 1);
    EXPECT_EQ(ds.labels, (Labels{1, 1}));
    const auto mixed = load_feature_csv(temp_file("mixed.csv", "label,f0\n9,1\n-2,2\n9,3\n"));
    EXPECT_EQ(mixed.labels, (Labels{1, 2, 1}));
}

TEST(Data, CsvErrors) {
    EXPECT_THROW(load_feature_csv(temp_file("nan.csv", "label,f0\n1,nan\n")), NonFiniteValue);
    try {
        load_feature_csv(temp_file("bad.csv", "label,f0\n1,0.5\n1,abc\n"));
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    EXPECT_THROW(load_feature_csv(temp_file("short.csv", "label,f0,f1\n1,0.5\n")), ParseError);
    EXPECT_THROW(load_feature_csv(temp_file("header.csv", "y,f0\n1,0.5\n")), ParseError);
    EXPECT_THROW(load_feature_csv(temp_file("empty.csv", "")), EmptyFile);
    EXPECT_THROW(load_feature_csv(temp_file("noheader_rows.csv", "label,f0\n")), EmptyFile);
    EXPECT_THROW(load_feature_csv("/nonexistent/ee.csv"), IOFailure);
}

TEST(Data, ClassDisjointSplit) {
    BlobSpec spec;
    spec.classes = 10;
    spec.per_class = 3;
    spec.input_dim = 2;
    const FeatureDataset all = gaussian_blobs(spec);
    const auto [train, test] = class_disjoint_split(all, 0.5, 4);
    EXPECT_EQ(train.class_count, 5);
    EXPECT_EQ(test.class_count, 5);
    EXPECT_EQ(train.size() + test.size(), all.size());
    // Rows keep their feature values; classes do not straddle the split.
    std::set<std::vector<double>> train_rows;
    for (std::size_t r = 0; r < train.size(); ++r) train_rows.insert({train.features.row(r).begin(), train.features.row(r).end()});
    std::set<int> train_orig;
    std::set<int> test_orig;
    for (std::size_t r = 0; r < all.size(); ++r) {
        const std::vector<double> row(all.features.row(r).begin(), all.features.row(r).end());
        (train_rows.count(row) ? train_orig : test_orig).insert(all.labels[r]);
    }
    for (int c : train_orig) EXPECT_EQ(test_orig.count(c), 0u);
    EXPECT_EQ(train_orig.size() + test_orig.size(), 10u);

    const auto [train2, test2] = class_disjoint_split(all, 0.5, 4);
    EXPECT_EQ(train2.features, train.features);
    EXPECT_THROW(class_disjoint_split(all, 1.0, 1), InvalidFraction);
    EXPECT_THROW(class_disjoint_split(all, 0.01, 1), InvalidFraction);
}
