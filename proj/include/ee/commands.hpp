#pragma once

#include "ee/errors.hpp"
#include "ee/run_config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace ee {

struct LoadedData {
    FeatureDataset train;
    FeatureDataset test;
    bool has_test = false;
};

LoadedData load_data(const RunConfig& config);

// Each verb writes its artifacts under config.output_dir and progress to `log`.
// Errors propagate as ee::Error; the CLI maps categories to exit codes.
TrainResult cmd_train(const RunConfig& config, std::ostream& log);
MetricsReport cmd_eval(const RunConfig& config, std::ostream& log);
// Returns false when any variant fails the threshold.
bool cmd_gradcheck(const RunConfig& config, std::ostream& log);

struct AblateRow {
    LossKind loss = LossKind::hphn_triplet;
    int n = 0;
    bool normalize = true;
    std::uint64_t seed = 0;
    double recall_at_1 = 0.0;
    double nmi = 0.0;
    double f1 = 0.0;
};
std::vector<AblateRow> cmd_ablate(const RunConfig& config, std::ostream& log);

std::vector<BenchRow> cmd_bench(const RunConfig& config, std::ostream& log);
AugmentedBatch cmd_expand(const RunConfig& config, std::ostream& log);

// Dispatches a verb name; returns the process exit code for non-exception
// outcomes (0, or 3 for a failed gradient check).
int run_verb(const std::string& verb, const RunConfig& config, std::ostream& log);

int exit_code_for(ErrorCategory category);

} // namespace ee
