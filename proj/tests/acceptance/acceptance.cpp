// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "ee/commands.hpp"
#include "ee/diagnostics.hpp"
#include "ee/errors.hpp"
#include "ee/gradcheck.hpp"
#include "ee/losses.hpp"
#include "ee/metrics.hpp"
#include "ee/mining.hpp"
#include "ee/trainer.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace ee;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- 1

Outcome gradient_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    GradcheckSpec spec;
    const auto rows = run_gradcheck(spec);
    const double secs = seconds_since(t0);
    double worst = 0.0;
    int resampled = 0;
    bool all = rows.size() == 10;
    for (const GradcheckRow& r : rows) {
        worst = std::max(worst, r.max_rel_error);
        resampled += r.resampled;
        all = all && r.pass && r.trials >= 100 && r.max_rel_error <= 1e-5;
    }
    return {all && secs < 120.0, std::to_string(rows.size()) + " variants x " + std::to_string(spec.trials) +
                                     " batches, max rel error " + fmt("%.3e", worst) + ", " +
                                     std::to_string(resampled) + " kink resamples, " + fmt("%.1f", secs) + " s"};
}

// ---------------------------------------------------------------- 2

// Unit rows sqrt(1 - a^2) u + a e_c: u lies in a subspace private to the
// class, e_c are regular simplex vertices in shared coordinates. Every
// cross-class similarity is then the same negative constant, and a
// normalized synthetic s has similarity constant / |s_raw| < constant to
// any other class, so every pooled hardest negative is the original pair.
EmbeddingBatch simplex_offset_batch(int classes, int per_class, std::size_t private_dim, double alpha,
                                    std::mt19937_64& rng) {
    const auto c = static_cast<std::size_t>(classes);
    const std::size_t dim = c * private_dim + c;
    EmbeddingBatch b;
    b.data = Matrix(c * static_cast<std::size_t>(per_class), dim);
    std::normal_distribution<double> g(0.0, 1.0);
    const double vertex_norm = std::sqrt(1.0 - 1.0 / classes);
    std::size_t row = 0;
    for (int k = 0; k < per_class; ++k) {
        for (std::size_t cls = 0; cls < c; ++cls, ++row) {
            std::vector<double> u(private_dim);
            for (double& v : u) v = g(rng);
            const double un = std::sqrt(squared_norm(u));
            for (std::size_t d = 0; d < private_dim; ++d) {
                b.data(row, cls * private_dim + d) = std::sqrt(1.0 - alpha * alpha) * u[d] / un;
            }
            for (std::size_t s = 0; s < c; ++s) {
                const double e = ((s == cls ? 1.0 : 0.0) - 1.0 / classes) / vertex_norm;
                b.data(row, c * private_dim + s) = alpha * e;
            }
            b.labels.push_back(static_cast<int>(cls) + 1);
        }
    }
    return b;
}

Outcome reduction_identity() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> alpha(0.3, 0.9);
    double worst_value = 0.0;
    double worst_grad = 0.0;
    int batches = 0;
    int synthetic_selected = 0;
    for (LossKind kind : {LossKind::triplet, LossKind::hphn_triplet, LossKind::lifted, LossKind::npair,
                          LossKind::ms}) {
        for (int trial = 0; trial < 40; ++trial) {
            const int classes = 2 + trial % 3;
            const int per_class = 2 + (trial / 3) % 3;
            const EmbeddingBatch b = simplex_offset_batch(classes, per_class, 3, alpha(rng), rng);
            LossConfig base;
            base.kind = kind;
            base.ms_epsilon = 0.5;  // keeps plenty of MS pairs active
            const LossResult rb = evaluate_loss(b, base);
            for (int n : {1, 2, 4, 8}) {
                LossConfig ee = base;
                ee.expansion.enabled = true;
                ee.expansion.n = n;
                ee.expansion.normalize = true;
                const LossResult re = evaluate_loss(b, ee);
                synthetic_selected += static_cast<int>(re.trace.synthetic_members());
                worst_value = std::max(worst_value, std::abs(re.value - rb.value));
                worst_grad = std::max(worst_grad, max_abs_diff(re.grad, rb.grad));
                ++batches;
            }
        }
    }
    const bool pass = worst_value <= 1e-12 && worst_grad <= 1e-12 && synthetic_selected == 0;
    return {pass, std::to_string(batches) + " constructed batches over 5 losses, max |dvalue| " +
                      fmt("%.2e", worst_value) + ", max |dgrad| " + fmt("%.2e", worst_grad) +
                      ", synthetic selections " + std::to_string(synthetic_selected)};
}

// ---------------------------------------------------------------- 3

Outcome mining_oracles() {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::size_t> rows_dist(4, 24);
    std::uniform_int_distribution<int> classes_dist(2, 5);
    std::uniform_real_distribution<double> eps_dist(0.0, 0.3);
    long checks = 0;
    long mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = std::array{1, 2, 4}[static_cast<std::size_t>(trial % 3)];
        const bool normalize = trial % 4 < 2;
        std::size_t rows = 0;
        AugmentedBatch aug;
        // Quantized coordinates make exact ties common; antipodal normalized
        // pairs have a zero midpoint, so such draws are redrawn.
        for (bool drawn = false; !drawn;) {
            rows = rows_dist(rng);
            Matrix x = test::random_matrix(rows, 3, rng);
            if (trial % 2 == 0) {
                for (double& v : x.values()) v = std::round(v * 2.0) / 2.0;
            }
            EmbeddingBatch b{x, test::random_labels(rows, classes_dist(rng), rng)};
            try {
                if (normalize) b.data = l2_normalize_rows(b.data);
                aug = expand_batch(b, {n, normalize, DivisionRule::equal_parts});
                drawn = true;
            } catch (const ZeroNormRow&) {
            }
        }
        const Matrix sq = pairwise_sq_distance(aug.data, aug.data);
        const Matrix sim = pairwise_similarity(aug.data, aug.data);
        auto expect = [&](bool ok) {
            ++checks;
            mismatches += !ok;
        };

        for (PoolScope scope : {PoolScope::endpoint, PoolScope::class_pair}) {
            const PairCatalog cat(aug, scope);
            for (std::size_t a = 0; a < rows; ++a) {
                for (std::size_t k = 0; k < rows; ++k) {
                    if (aug.labels[a] == aug.labels[k]) continue;
                    const auto d = hardest_negative_by_distance(cat, sq, a, k);
                    const auto [dv, dp, dn] = test::pool_oracle(aug, scope, sq, a, k, 1.0);
                    expect(d.p == dp && d.n == dn && d.value == dv &&
                           d.p_provenance == aug.sources[dp].provenance &&
                           d.n_provenance == aug.sources[dn].provenance);
                    const auto s = hardest_negative_by_similarity(cat, sim, a, k);
                    const auto [sv, sp, sn] = test::pool_oracle(aug, scope, sim, a, k, -1.0);
                    expect(s.p == sp && s.n == sn && s.value == -sv);
                }
            }
        }

        std::vector<bool> mask(aug.size());
        for (std::size_t r = 0; r < aug.size(); ++r) mask[r] = aug.is_synthetic(r);
        const auto got = batch_hard_pairs(sq, aug.labels, mask, true);
        const auto want = test::batch_hard_oracle(sq, aug.labels, mask);
        expect(got.size() == want.size());
        for (std::size_t i = 0; i < std::min(got.size(), want.size()); ++i) {
            expect(got[i].anchor == want[i].anchor && got[i].positive == want[i].positive &&
                   got[i].negative == want[i].negative);
        }

        const double eps = eps_dist(rng);
        const PoolScope endpoint = PoolScope::endpoint;
        const PairCatalog cat(aug, endpoint);
        for (bool pooled : {false, true}) {
            const auto ms = ms_select_pairs(sim, aug.labels, rows, eps, pooled ? &cat : nullptr);
            const auto oracle = test::ms_oracle(aug, sim, eps, pooled ? &endpoint : nullptr);
            for (std::size_t i = 0; i < rows; ++i) {
                expect(ms[i].positives == oracle[i].first && ms[i].negatives == oracle[i].second);
                if (pooled) {
                    for (std::size_t t = 0; t < ms[i].negatives.size() && t < ms[i].pooled.size(); ++t) {
                        const auto [v, p, q] = test::pool_oracle(aug, endpoint, sim, i, ms[i].negatives[t], -1.0);
                        expect(ms[i].pooled[t].p == p && ms[i].pooled[t].n == q);
                    }
                }
            }
        }
    }
    return {mismatches == 0, "1000 instances, " + std::to_string(checks) + " index-level comparisons, " +
                                 std::to_string(mismatches) + " mismatches"};
}

// ---------------------------------------------------------------- 4

Outcome generation_geometry() {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> n_dist(1, 32);
    double worst_fraction = 0.0;
    for (int trial = 0; trial < 2000; ++trial) {
        const Matrix src = test::random_matrix(2, 1 + static_cast<std::size_t>(trial % 16), rng, 3.0);
        const int n = n_dist(rng);
        const auto s = generate_internal_points(src.row(0), src.row(1), n, DivisionRule::equal_parts);
        std::vector<double> seg(src.cols());
        for (std::size_t d = 0; d < seg.size(); ++d) seg[d] = src(0, d) - src(1, d);
        const double len2 = squared_norm(seg);
        for (int k = 1; k <= n; ++k) {
            // Position of the point along x_j -> x_i, and its offset from the segment.
            std::vector<double> off(src.cols());
            for (std::size_t d = 0; d < off.size(); ++d) {
                off[d] = s.points(static_cast<std::size_t>(k - 1), d) - src(1, d);
            }
            const double t = dot(off, seg) / len2;
            const double expected = static_cast<double>(k) / (n + 1);
            worst_fraction = std::max(worst_fraction, std::abs(t - expected));
            for (std::size_t d = 0; d < off.size(); ++d) {
                worst_fraction = std::max(worst_fraction, std::abs(off[d] - expected * seg[d]));
            }
        }
    }

    double worst_norm = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const EmbeddingBatch b = test::random_batch(12, 6, 3, rng, trial % 2 == 0);
        const AugmentedBatch aug = expand_batch(b, {1 + trial % 8, true, DivisionRule::equal_parts});
        for (std::size_t r = aug.original_count; r < aug.size(); ++r) {
            worst_norm = std::max(worst_norm, std::abs(std::sqrt(squared_norm(aug.data.row(r))) - 1.0));
        }
    }

    std::uniform_int_distribution<int> small_n(1, 8);
    int violations = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const Matrix src = test::random_matrix(2, 2 + static_cast<std::size_t>(trial % 8), rng, 2.0);
        const auto s = generate_internal_points(src.row(0), src.row(1), small_n(rng), DivisionRule::equal_parts);
        Matrix all = src;
        for (std::size_t r = 0; r < s.points.rows(); ++r) all.append_row(s.points.row(r));
        const Matrix d = pairwise_sq_distance(all, all);
        double best = -1.0;
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < all.rows(); ++i) {
            for (std::size_t j = i + 1; j < all.rows(); ++j) {
                if (d(i, j) > best) {
                    best = d(i, j);
                    bi = i;
                    bj = j;
                }
            }
        }
        violations += !(bi == 0 && bj == 1);
    }
    const bool pass = worst_fraction <= 1e-10 && worst_norm <= 1e-9 && violations == 0;
    return {pass, "fraction error " + fmt("%.2e", worst_fraction) + ", unit-norm error " + fmt("%.2e", worst_norm) +
                      ", hardest-positive violations " + std::to_string(violations) + "/10000"};
}

// ---------------------------------------------------------------- 5

Outcome metric_oracles() {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> rows_dist(2, 30);
    std::uniform_int_distribution<int> classes_dist(1, 6);
    int mismatches = 0;
    double worst_nmi = 0.0;
    double worst_perm = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t rows = rows_dist(rng);
        Matrix x = test::random_matrix(rows, 1 + static_cast<std::size_t>(trial % 4), rng);
        for (double& v : x.values()) v = std::round(v * 2.0) / 2.0;
        const EmbeddingBatch b{x, test::random_labels(rows, classes_dist(rng), rng)};
        const std::vector<int> ks{1, 2, 4, 8, 16};
        mismatches += recall_at_k(b, b, ks, SelfMatch::exclude) != test::recall_oracle(b, b, ks, true);
        mismatches += recall_at_k(b, b, ks, SelfMatch::include) != test::recall_oracle(b, b, ks, false);

        const std::vector<int> assign = test::random_labels(rows, classes_dist(rng), rng);
        const std::vector<int>& labels = b.labels;
        const double v = nmi(assign, labels);
        const double f = pairwise_f1(assign, labels);
        worst_nmi = std::max(worst_nmi, std::abs(v - test::nmi_oracle(assign, labels)));
        mismatches += f != test::f1_oracle(assign, labels);

        // Renaming cluster ids and reordering samples leaves both scores unchanged.
        std::vector<int> rename(8);
        std::iota(rename.begin(), rename.end(), 10);
        std::shuffle(rename.begin(), rename.end(), rng);
        std::vector<std::size_t> order(rows);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<int> pa(rows), pl(rows);
        for (std::size_t i = 0; i < rows; ++i) {
            pa[i] = rename[static_cast<std::size_t>(assign[order[i]])];
            pl[i] = labels[order[i]];
        }
        worst_perm = std::max(worst_perm, std::abs(nmi(pa, pl) - v));
        worst_perm = std::max(worst_perm, std::abs(nmi(pl, pa) - v));
        mismatches += pairwise_f1(pa, pl) != f;
    }
    const bool pass = mismatches == 0 && worst_nmi <= 1e-12 && worst_perm <= 1e-12;
    return {pass, "500 instances, exact mismatches " + std::to_string(mismatches) + ", NMI vs oracle " +
                      fmt("%.1e", worst_nmi) + ", permutation drift " + fmt("%.1e", worst_perm)};
}

// ---------------------------------------------------------------- 6, 7, 8

struct DeskRuns {
    std::vector<TrainResult> base;
    std::vector<TrainResult> ee2;
    std::vector<TrainResult> ee16;
    double seconds = 0.0;
};

// Desk defaults (linear, embed 16, K=4, Adam 1e-4, 30 epochs); P=5 because
// the train split holds only five classes.
const char* kDeskConfig = R"(
data: {classes: 10, per_class: 50, input_dim: 32, center_scale: 1.0, noise_sigma: 0.5, train_fraction: 0.5}
model: {architecture: linear, embed_dim: 16}
loss: {kind: hphn_triplet}
optimizer: {kind: adam, lr: 1.0e-4}
train: {epochs: 30, classes_per_batch: 5, samples_per_class: 4, eval_every: 1, recall_ks: [1]}
)";

DeskRuns desk_runs() {
    const auto t0 = std::chrono::steady_clock::now();
    DeskRuns out;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        RunConfig rc = parse_run_config(kDeskConfig);
        rc.seed = seed;
        rc.resolve();
        const LoadedData data = load_data(rc);
        TrainConfig tc = rc.train;
        out.base.push_back(train(data.train, &data.test, tc));
        tc.loss.expansion.enabled = true;
        tc.loss.expansion.normalize = true;
        tc.loss.expansion.n = 2;
        tc.label_certainty = true;
        out.ee2.push_back(train(data.train, &data.test, tc));
        tc.loss.expansion.n = 16;
        tc.label_certainty = false;
        out.ee16.push_back(train(data.train, &data.test, tc));
    }
    out.seconds = seconds_since(t0);
    return out;
}

double mean_final_recall(const std::vector<TrainResult>& runs) {
    double s = 0.0;
    for (const auto& r : runs) s += r.history.back().recall_at.at(1);
    return s / static_cast<double>(runs.size());
}

Outcome directional_reproduction(const DeskRuns& runs) {
    const double base = mean_final_recall(runs.base);
    const double ee = mean_final_recall(runs.ee2);
    return {ee >= base - 0.01 && runs.seconds < 600.0,
            "mean test R@1 over 5 seeds: EE+HPHN " + fmt("%.4f", ee) + " vs HPHN " + fmt("%.4f", base) +
                " (need >= " + fmt("%.4f", base - 0.01) + "), 15 runs in " + fmt("%.1f", runs.seconds) + " s"};
}

Outcome label_certainty_trend(const DeskRuns& runs) {
    double worst_gap = 1.0;
    int checked = 0;
    for (const auto& r : runs.ee2) {
        for (const MetricsReport& m : r.history) {
            if (m.epoch <= 1) continue;
            const double gap = m.extras.at("label_certainty_synthetic") - m.extras.at("label_certainty_original");
            worst_gap = std::min(worst_gap, gap);
            ++checked;
        }
    }
    return {checked > 0 && worst_gap >= -0.02, std::to_string(checked) + " epochs checked, min (synthetic - original) " +
                                                   fmt("%+.4f", worst_gap)};
}

Outcome selection_ratio(const DeskRuns& runs) {
    int good = 0;
    std::ostringstream detail;
    for (std::size_t s = 0; s < runs.ee2.size(); ++s) {
        const double first2 = runs.ee2[s].history.front().extras.at("ratio_syn");
        const double last2 = runs.ee2[s].history.back().extras.at("ratio_syn");
        const double first16 = runs.ee16[s].history.front().extras.at("ratio_syn");
        const bool ok = first16 > first2 && last2 < first2;
        good += ok;
        detail << " seed" << s + 1 << "[n2 " << fmt("%.3f", first2) << "->" << fmt("%.3f", last2) << ", n16 "
               << fmt("%.3f", first16) << (ok ? "" : " x") << "]";
    }
    return {good >= 4, std::to_string(good) + "/5 seeds;" + detail.str()};
}

// ---------------------------------------------------------------- 9

Outcome overhead_bound() {
    BenchSpec spec;  // batch 128, D 64, n in {0, 2, 4, 8, 16, 32}
    const auto rows = bench_generation(spec);
    double worst_share = 0.0;
    double total0 = 0.0;
    double total32 = 0.0;
    for (const BenchRow& r : rows) {
        if (r.n > 0) worst_share = std::max(worst_share, r.gen_ms / r.total_ms);
        if (r.n == 0) total0 = r.total_ms;
        if (r.n == 32) total32 = r.total_ms;
    }
    const double growth = total32 / total0;
    return {worst_share < 0.10 && growth < 1.25, "max Gen/Total " + fmt("%.3f", worst_share) +
                                                     ", Total(32)/Total(0) " + fmt("%.2f", growth) + " (" +
                                                     fmt("%.3f", total32) + " ms vs " + fmt("%.3f", total0) + " ms)"};
}

// ---------------------------------------------------------------- 10

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        const std::string ext = entry.path().extension().string();
        if ((ext != ".jsonl" && ext != ".csv" && ext != ".log") || name == "bench.csv") continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::stringstream s;
        s << in.rdbuf();
        out[name] = s.str();
    }
    return out;
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "ee_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path config = root / "run.yaml";
    std::ofstream(config) << R"(seed: 11
data: {classes: 8, per_class: 20, input_dim: 16}
model: {embed_dim: 8}
loss: {kind: ms}
expansion: {enabled: true, n: 4}
optimizer: {lr: 0.001}
train: {epochs: 4, classes_per_batch: 4, samples_per_class: 4, label_certainty: true, train_recall: true}
ablate: {losses: [hphn_triplet, lifted], n_values: [2, 8], seeds: [1, 2]}
gradcheck: {trials: 5}
bench: {batch_sizes: [32], n_values: [0, 4], dim: 16, repeats: 10}
)";
    const std::vector<std::string> verbs{"train", "eval", "gradcheck", "ablate", "bench", "expand"};
    std::map<std::string, std::string> first;
    int failures = 0;
    std::size_t compared = 0;
    for (int pass = 0; pass < 2; ++pass) {
        const fs::path out = root / "out";
        fs::remove_all(out);
        for (const std::string& verb : verbs) {
            const std::string cmd = std::string(EECLI_PATH) + " " + verb + " --config " + config.string() + " --out " +
                                    out.string() + " >/dev/null 2>&1";
            failures += std::system(cmd.c_str()) != 0;
        }
        const auto files = snapshot(out);
        if (pass == 0) {
            first = files;
        } else {
            compared = files.size();
            failures += files != first;
        }
    }
    std::string names;
    for (const auto& [name, bytes] : first) names += " " + name;
    return {failures == 0 && compared >= 8,
            std::to_string(verbs.size()) + " verbs run twice, " + std::to_string(compared) + " files byte-identical:" +
                names};
}

} // namespace

int main() {
    int failed = 0;
    auto report = [&](int id, const std::function<Outcome()>& run) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << o.detail << std::endl;
    };
    report(1, gradient_oracle);
    report(2, reduction_identity);
    report(3, mining_oracles);
    report(4, generation_geometry);
    report(5, metric_oracles);
    DeskRuns runs;
    std::string desk_error;
    try {
        runs = desk_runs();
    } catch (const std::exception& e) {
        desk_error = e.what();
    }
    auto desk = [&](Outcome (*f)(const DeskRuns&)) {
        return [&, f]() -> Outcome {
            if (!desk_error.empty()) return {false, "training threw: " + desk_error};
            return f(runs);
        };
    };
    report(6, desk(directional_reproduction));
    report(7, desk(label_certainty_trend));
    report(8, desk(selection_ratio));
    report(9, overhead_bound);
    report(10, determinism);
    return failed == 0 ? 0 : 1;
}
