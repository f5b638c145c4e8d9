#include "ee/commands.hpp"

#include "ee/checkpoint.hpp"
#include "ee/errors.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

namespace ee {

namespace {

namespace fs = std::filesystem;

fs::path prepare_dir(const RunConfig& config) {
    const fs::path dir(config.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IOFailure("cannot create output directory '" + config.output_dir + "': " + ec.message());
    }
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text) || !out.flush()) {
        throw IOFailure("cannot write '" + path.string() + "'");
    }
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double final_recall1(const MetricsReport& r) {
    const auto it = r.recall_at.find(1);
    return it == r.recall_at.end() ? std::nan("") : it->second;
}

} // namespace

int exit_code_for(ErrorCategory category) {
    switch (category) {
    case ErrorCategory::config:
    case ErrorCategory::invalid_argument:
        return 2;
    case ErrorCategory::numeric:
        return 3;
    case ErrorCategory::io:
        return 4;
    }
    return 3;
}

LoadedData load_data(const RunConfig& config) {
    const std::uint64_t seed = config.data.seed.value_or(config.seed);
    LoadedData out;
    FeatureDataset all;
    if (config.data.source == "blobs") {
        BlobSpec spec = config.data.blobs;
        spec.seed = seed;
        all = gaussian_blobs(spec);
    } else {
        all = load_feature_csv(config.data.path);
        if (!config.data.test_path.empty()) {
            out.train = std::move(all);
            out.train.split = Split::train;
            out.test = load_feature_csv(config.data.test_path);
            out.test.split = Split::test;
            out.has_test = true;
            if (out.test.dim() != out.train.dim()) {
                throw DimensionMismatch("train and test feature files differ in dimension");
            }
            return out;
        }
    }
    auto [train, test] = class_disjoint_split(all, config.data.train_fraction, seed);
    out.train = std::move(train);
    out.test = std::move(test);
    out.has_test = true;
    return out;
}

namespace {

TrainConfig train_config_for(const RunConfig& config, const LoadedData& data) {
    TrainConfig t = config.train;
    t.model.input_dim = data.train.dim();
    return t;
}

} // namespace

TrainResult cmd_train(const RunConfig& config, std::ostream& log) {
    const LoadedData data = load_data(config);
    const TrainConfig tc = train_config_for(config, data);
    const fs::path dir = prepare_dir(config);
    write_text(dir / "config.resolved.yaml", dump_run_config(config));

    std::ostringstream trace_log;
    std::ostringstream metrics;
    const auto on_step = [&](std::size_t step, const LossResult& loss) {
        if (tc.loss.expansion.enabled) {
            trace_log << format_trace_line(step, loss.trace) << '\n';
        }
    };
    const auto on_epoch = [&](const MetricsReport& r, double seconds) {
        metrics << r.to_json_line() << '\n';
        char buf[160];
        std::snprintf(buf, sizeof(buf), "epoch %d loss=%.6f R@1=%.4f (%.2fs)", r.epoch, r.extras.at("loss"),
                      final_recall1(r), seconds);
        log << buf << '\n';
    };
    TrainResult result = train(data.train, data.has_test ? &data.test : nullptr, tc, on_epoch, on_step);

    save_checkpoint(result.model, (dir / "model.ckpt").string());
    write_text(dir / "metrics.jsonl", metrics.str());
    write_text(dir / "trace.log", trace_log.str());
    const FeatureDataset& shown = data.has_test ? data.test : data.train;
    export_distance_heatmap({result.model.forward(shown.features), shown.labels}, (dir / "heatmap.csv").string());
    log << "wrote " << dir.string() << "/{model.ckpt,metrics.jsonl,config.resolved.yaml,trace.log,heatmap.csv}\n";
    return result;
}

MetricsReport cmd_eval(const RunConfig& config, std::ostream& log) {
    const fs::path dir = prepare_dir(config);
    const std::string ckpt =
        config.eval.checkpoint.empty() ? (dir / "model.ckpt").string() : config.eval.checkpoint;
    const Embedder model = load_checkpoint(ckpt);
    const LoadedData data = load_data(config);
    const FeatureDataset& set = data.has_test ? data.test : data.train;
    if (set.dim() != model.spec().input_dim) {
        throw DimensionMismatch("checkpoint expects input_dim " + std::to_string(model.spec().input_dim) +
                                ", data has " + std::to_string(set.dim()));
    }
    const EmbeddingBatch emb{model.forward(set.features), set.labels};
    const RetrievalSummary s = evaluate_retrieval(emb, config.eval.recall_ks, config.seed);
    MetricsReport report;
    report.recall_at = s.recall_at;
    report.nmi = s.nmi;
    report.f1 = s.f1;
    for (int m : config.eval.combine_counts) {
        report.extras["robustness_recall_at_1_m" + std::to_string(m)] = synthetic_query_robustness(
            emb, m, config.eval.robustness_trials, config.seed, model.spec().normalize_output);
    }
    write_text(dir / "config.resolved.yaml", dump_run_config(config));
    write_text(dir / "eval.jsonl", report.to_json_line() + "\n");
    export_distance_heatmap(emb, (dir / "eval_heatmap.csv").string());
    log << report.to_json_line() << '\n';
    return report;
}

bool cmd_gradcheck(const RunConfig& config, std::ostream& log) {
    const fs::path dir = prepare_dir(config);
    const auto rows = run_gradcheck(config.gradcheck);
    const std::string csv = gradcheck_to_csv(rows);
    write_text(dir / "config.resolved.yaml", dump_run_config(config));
    write_text(dir / "gradcheck.csv", csv);
    log << csv;
    bool ok = true;
    for (const auto& r : rows) {
        ok = ok && r.pass;
    }
    log << (ok ? "gradcheck: all variants pass\n" : "gradcheck: FAILED\n");
    return ok;
}

std::vector<AblateRow> cmd_ablate(const RunConfig& config, std::ostream& log) {
    const fs::path dir = prepare_dir(config);
    write_text(dir / "config.resolved.yaml", dump_run_config(config));
    std::vector<AblateRow> rows;
    std::ostringstream runs;
    runs << "loss,n,normalize,seed,recall_at_1,nmi,f1\n";
    std::ostringstream cells;
    cells << "loss,n,normalize,seeds,recall_at_1_mean,recall_at_1_std,nmi_mean,nmi_std,f1_mean,f1_std\n";
    for (LossKind kind : config.ablate.losses) {
        for (int n : config.ablate.n_values) {
            for (bool normalize : config.ablate.normalize_values) {
                std::vector<AblateRow> cell;
                for (std::uint64_t seed : config.ablate.seeds) {
                    RunConfig run = config;
                    run.seed = seed;
                    run.train.loss.kind = kind;
                    run.train.loss.expansion.enabled = true;
                    run.train.loss.expansion.n = n;
                    run.train.loss.expansion.normalize = normalize;
                    run.resolve();
                    const LoadedData data = load_data(run);
                    TrainConfig tc = train_config_for(run, data);
                    tc.eval_every = 0;
                    const TrainResult result = train(data.train, nullptr, tc);
                    const EmbeddingBatch emb{result.model.forward(data.test.features), data.test.labels};
                    const RetrievalSummary s =
                        evaluate_retrieval(emb, tc.recall_ks, tc.seed + static_cast<std::uint64_t>(tc.epochs));
                    AblateRow row{kind, n, normalize, seed, s.recall_at.at(1), s.nmi, s.f1};
                    runs << to_string(kind) << ',' << n << ',' << (normalize ? 1 : 0) << ',' << seed << ','
                         << fmt(row.recall_at_1) << ',' << fmt(row.nmi) << ',' << fmt(row.f1) << '\n';
                    log << to_string(kind) << " n=" << n << " normalize=" << normalize << " seed=" << seed
                        << " R@1=" << row.recall_at_1 << '\n';
                    cell.push_back(row);
                    rows.push_back(row);
                }
                const auto stats = [&](double AblateRow::*field) {
                    double mean = 0.0;
                    for (const auto& r : cell) mean += r.*field;
                    mean /= static_cast<double>(cell.size());
                    double var = 0.0;
                    for (const auto& r : cell) var += (r.*field - mean) * (r.*field - mean);
                    const double sd = cell.size() > 1 ? std::sqrt(var / static_cast<double>(cell.size() - 1)) : 0.0;
                    return fmt(mean) + "," + fmt(sd);
                };
                cells << to_string(kind) << ',' << n << ',' << (normalize ? 1 : 0) << ',' << cell.size() << ','
                      << stats(&AblateRow::recall_at_1) << ',' << stats(&AblateRow::nmi) << ','
                      << stats(&AblateRow::f1) << '\n';
            }
        }
    }
    write_text(dir / "ablate_runs.csv", runs.str());
    write_text(dir / "ablate.csv", cells.str());
    return rows;
}

std::vector<BenchRow> cmd_bench(const RunConfig& config, std::ostream& log) {
    const fs::path dir = prepare_dir(config);
    const auto rows = bench_generation(config.bench);
    const std::string csv = bench_to_csv(config.bench, rows);
    write_text(dir / "config.resolved.yaml", dump_run_config(config));
    write_text(dir / "bench.csv", csv);
    log << csv;
    return rows;
}

AugmentedBatch cmd_expand(const RunConfig& config, std::ostream& log) {
    const fs::path dir = prepare_dir(config);
    const LoadedData data = load_data(config);
    std::mt19937_64 rng(config.seed);
    const auto idx = pk_sample(data.train.labels, config.expand.classes, config.expand.per_class, rng);
    EmbeddingBatch batch{select_rows(data.train.features, idx), {}};
    for (std::size_t i : idx) {
        batch.labels.push_back(data.train.labels[i]);
    }
    const ExpansionConfig& e = config.train.loss.expansion;
    if (e.normalize) {
        batch.data = l2_normalize_rows(batch.data);
    }
    const AugmentedBatch aug = expand_batch(batch, e.options());

    std::ostringstream csv;
    csv << "row,provenance,label,first,second,weight_first";
    for (std::size_t d = 0; d < aug.data.cols(); ++d) {
        csv << ",f" << d;
    }
    csv << '\n';
    for (std::size_t r = 0; r < aug.size(); ++r) {
        const RowSource& src = aug.sources[r];
        const bool syn = src.provenance == Provenance::synthetic;
        csv << r << ',' << (syn ? "synthetic" : "original") << ',' << aug.labels[r] << ',' << src.first << ','
            << (syn ? std::to_string(src.second) : std::string()) << ',' << fmt(src.weight_first);
        for (double v : aug.data.row(r)) {
            csv << ',' << fmt(v);
        }
        csv << '\n';
    }
    write_text(dir / "config.resolved.yaml", dump_run_config(config));
    write_text(dir / "expanded.csv", csv.str());
    log << "expanded " << aug.original_count << " originals into " << aug.size() << " rows\n";
    return aug;
}

int run_verb(const std::string& verb, const RunConfig& config, std::ostream& log) {
    if (verb == "train") {
        cmd_train(config, log);
    } else if (verb == "eval") {
        cmd_eval(config, log);
    } else if (verb == "gradcheck") {
        return cmd_gradcheck(config, log) ? 0 : 3;
    } else if (verb == "ablate") {
        cmd_ablate(config, log);
    } else if (verb == "bench") {
        cmd_bench(config, log);
    } else if (verb == "expand") {
        cmd_expand(config, log);
    } else {
        throw ConfigError("unknown command '" + verb + "'");
    }
    return 0;
}

} // namespace ee
