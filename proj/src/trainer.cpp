#include "ee/trainer.hpp"

#include "ee/diagnostics.hpp"
#include "ee/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

namespace ee {

void TrainConfig::validate() const {
    loss.validate();
    optimizer.validate();
    if (batch.classes < 2 || batch.per_class < 2) {
        throw ConfigError("batch needs P >= 2 classes and K >= 2 samples per class");
    }
    if (epochs < 0 || steps_per_epoch < 0 || eval_every < 0) {
        throw ConfigError("epochs, steps_per_epoch and eval_every must be >= 0");
    }
    if (model.input_dim == 0 || model.embed_dim == 0) {
        throw ConfigError("model dimensions must be positive");
    }
    if (loss_expects_normalized(loss.kind) && !model.normalize_output) {
        throw ConfigError("loss '" + to_string(loss.kind) + "' expects L2-normalized embeddings");
    }
    if (!std::is_sorted(recall_ks.begin(), recall_ks.end()) || recall_ks.empty() || recall_ks.front() < 1) {
        throw ConfigError("recall ks must be positive and ascending");
    }
}

std::vector<std::size_t> pk_sample(const Labels& labels, int classes, int per_class, std::mt19937_64& rng) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        by_class[labels[i]].push_back(i);
    }
    if (classes < 1 || per_class < 1 || by_class.size() < static_cast<std::size_t>(classes)) {
        throw InsufficientClasses("need " + std::to_string(classes) + " classes, have " +
                                  std::to_string(by_class.size()));
    }
    std::vector<int> ids;
    for (const auto& [label, rows] : by_class) {
        ids.push_back(label);
    }
    std::shuffle(ids.begin(), ids.end(), rng);
    ids.resize(static_cast<std::size_t>(classes));

    std::vector<std::size_t> out;
    out.reserve(static_cast<std::size_t>(classes * per_class));
    for (int label : ids) {
        std::vector<std::size_t> rows = by_class[label];
        if (rows.size() >= static_cast<std::size_t>(per_class)) {
            // Partial Fisher-Yates: first K entries are a uniform sample without replacement.
            for (int k = 0; k < per_class; ++k) {
                std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(k), rows.size() - 1);
                std::swap(rows[static_cast<std::size_t>(k)], rows[pick(rng)]);
                out.push_back(rows[static_cast<std::size_t>(k)]);
            }
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, rows.size() - 1);
            for (int k = 0; k < per_class; ++k) {
                out.push_back(rows[pick(rng)]);
            }
        }
    }
    return out;
}

namespace {

constexpr std::uint64_t kInitSalt = 0x9e3779b97f4a7c15ULL;

ExpansionOptions diagnostic_expansion(const TrainConfig& config) {
    ExpansionOptions opts = config.loss.expansion.options();
    if (!config.loss.expansion.enabled) {
        opts.normalize = config.model.normalize_output;
    }
    return opts;
}

} // namespace

TrainResult train(const FeatureDataset& train_set, const FeatureDataset* test_set, const TrainConfig& config,
                  const EpochCallback& on_epoch, const StepCallback& on_step) {
    config.validate();
    if (train_set.size() == 0) {
        throw InvalidBatch("training set is empty");
    }
    if (train_set.dim() != config.model.input_dim) {
        throw ConfigError("model input_dim " + std::to_string(config.model.input_dim) +
                          " does not match data dimension " + std::to_string(train_set.dim()));
    }
    TrainResult result{Embedder::initialized(config.model, config.seed ^ kInitSalt), {}};
    Optimizer optimizer(config.optimizer);
    std::mt19937_64 rng(config.seed);

    const int batch_size = config.batch.batch_size();
    const int steps = config.steps_per_epoch > 0
                          ? config.steps_per_epoch
                          : static_cast<int>((train_set.size() + static_cast<std::size_t>(batch_size) - 1) /
                                             static_cast<std::size_t>(batch_size));

    std::size_t global_step = 0;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        MiningTrace epoch_trace;
        double loss_sum = 0.0;
        for (int step = 0; step < steps; ++step) {
            const auto idx = pk_sample(train_set.labels, config.batch.classes, config.batch.per_class, rng);
            const Matrix x = select_rows(train_set.features, idx);
            EmbeddingBatch batch{result.model.forward(x), {}};
            batch.labels.reserve(idx.size());
            for (std::size_t i : idx) {
                batch.labels.push_back(train_set.labels[i]);
            }
            const LossResult loss = evaluate_loss(batch, config.loss);
            if (!std::isfinite(loss.value) || !all_finite(loss.grad)) {
                throw NonFiniteLoss("non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                                    std::to_string(step) + " (value " + std::to_string(loss.value) + ")");
            }
            loss_sum += loss.value;
            epoch_trace.merge(loss.trace);
            const auto grads = result.model.backward(x, loss.grad);
            optimizer.step(result.model.parameters(), grads);
            if (on_step) {
                on_step(global_step, loss);
            }
            ++global_step;
        }

        MetricsReport report;
        report.epoch = epoch;
        report.extras["loss"] = steps > 0 ? loss_sum / steps : 0.0;
        report.extras["steps"] = steps;
        if (config.loss.expansion.enabled && !epoch_trace.empty()) {
            report.extras["ratio_syn"] = epoch_trace.ratio_synthetic();
            report.extras["ratio_ori"] = epoch_trace.ratio_original();
            report.extras["selected_synthetic"] = static_cast<double>(epoch_trace.synthetic_members());
            report.extras["selected_original"] = static_cast<double>(epoch_trace.original_members());
        }
        if (config.label_certainty || config.train_recall) {
            const EmbeddingBatch train_emb{result.model.forward(train_set.features), train_set.labels};
            if (config.label_certainty) {
                const LabelCertainty lc = synthetic_label_certainty(train_emb, diagnostic_expansion(config));
                report.extras["label_certainty_synthetic"] = lc.synthetic_recall_at_1;
                report.extras["label_certainty_original"] = lc.original_recall_at_1;
            }
            if (config.train_recall) {
                report.extras["train_recall_at_1"] =
                    recall_at_k(train_emb, train_emb, {1}, SelfMatch::exclude).at(1);
            }
        }
        if (test_set != nullptr && config.eval_every > 0 && epoch % config.eval_every == 0) {
            const EmbeddingBatch test_emb{result.model.forward(test_set->features), test_set->labels};
            const RetrievalSummary s = evaluate_retrieval(test_emb, config.recall_ks, config.seed + epoch);
            report.recall_at = s.recall_at;
            report.nmi = s.nmi;
            report.f1 = s.f1;
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (on_epoch) {
            on_epoch(report, seconds);
        }
        result.history.push_back(std::move(report));
    }
    return result;
}

} // namespace ee
