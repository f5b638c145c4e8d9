#pragma once

#include "ee/data.hpp"
#include "ee/embedder.hpp"
#include "ee/losses.hpp"
#include "ee/metrics.hpp"
#include "ee/optimizer.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace ee {

struct BatchSpec {
    int classes = 8;      // P
    int per_class = 4;    // K
    int batch_size() const { return classes * per_class; }
};

struct TrainConfig {
    LossConfig loss;
    EmbedderSpec model;
    OptimizerConfig optimizer;
    BatchSpec batch;
    int epochs = 30;
    int steps_per_epoch = 0;  // 0: ceil(train size / batch size)
    std::uint64_t seed = 1;
    int eval_every = 1;       // 0 disables test-set evaluation
    std::vector<int> recall_ks{1, 2, 4, 8};
    bool label_certainty = false;  // synthetic vs original Recall@1 on the train set
    bool train_recall = false;     // Recall@1 on the train set

    void validate() const;
};

// P distinct classes, K indices each; classes with fewer than K samples are
// drawn with replacement. Throws InsufficientClasses when fewer than P
// classes exist.
std::vector<std::size_t> pk_sample(const Labels& labels, int classes, int per_class, std::mt19937_64& rng);

struct TrainResult {
    Embedder model;
    std::vector<MetricsReport> history;  // one per epoch
};

// Called after every epoch; used for console progress.
using EpochCallback = std::function<void(const MetricsReport&, double epoch_seconds)>;
// Called after every optimizer step with a running step counter.
using StepCallback = std::function<void(std::size_t global_step, const LossResult&)>;

// sample -> forward -> loss (expand + mine) -> backward -> step, per
// iteration. Every logged number is a function of (seed, config, data).
// A non-finite loss throws NonFiniteLoss.
TrainResult train(const FeatureDataset& train_set, const FeatureDataset* test_set, const TrainConfig& config,
                  const EpochCallback& on_epoch = {}, const StepCallback& on_step = {});

} // namespace ee
