#pragma once

#include "ee/data.hpp"
#include "ee/diagnostics.hpp"
#include "ee/gradcheck.hpp"
#include "ee/trainer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ee {

struct DataConfig {
    std::string source = "blobs";  // blobs | csv
    std::string path;              // csv only
    std::string test_path;         // csv only; empty: split `path` by class
    BlobSpec blobs;                // seed is ignored, see `seed`
    double train_fraction = 0.5;
    std::optional<std::uint64_t> seed;  // blob and split seed; the run seed when unset
};

struct EvalConfig {
    std::string checkpoint;  // empty: <output_dir>/model.ckpt
    std::vector<int> recall_ks{1, 2, 4, 8};
    std::vector<int> combine_counts{2, 3, 4};
    int robustness_trials = 10;
};

struct AblateConfig {
    std::vector<LossKind> losses{LossKind::hphn_triplet};
    std::vector<int> n_values{2, 4, 8, 16, 32};
    std::vector<bool> normalize_values{true, false};
    std::vector<std::uint64_t> seeds{1, 2, 3};
};

struct ExpandConfig {
    int classes = 4;
    int per_class = 2;
};

// Everything a CLI verb needs. Train, gradcheck and bench seeds are taken
// from `seed`; the per-section seed fields are overwritten when resolving.
struct RunConfig {
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    DataConfig data;
    TrainConfig train;
    std::optional<bool> model_normalize_output;  // unset: follows the loss
    EvalConfig eval;
    AblateConfig ablate;
    GradcheckSpec gradcheck;
    BenchSpec bench;
    ExpandConfig expand;

    // Pushes `seed` and derived defaults into the sub-configs.
    void resolve();
};

// Strict: unknown keys, wrong types and bad enum names throw ConfigError.
RunConfig parse_run_config(const std::string& yaml_text);
// Throws ConfigError naming the path when the file cannot be read.
RunConfig load_run_config(const std::string& path);
// Full tree with every default spelled out; parses back to the same config.
std::string dump_run_config(const RunConfig& config);

std::string to_string(DivisionRule r);
std::string to_string(PoolScope s);
std::string to_string(TripletReduction r);

} // namespace ee
