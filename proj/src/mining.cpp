#include "ee/mining.hpp"

#include "ee/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

namespace ee {

std::vector<PositivePair> enumerate_positive_pairs(const Labels& labels) {
    std::vector<PositivePair> pairs;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        for (std::size_t j = i + 1; j < labels.size(); ++j) {
            if (labels[i] == labels[j]) {
                pairs.push_back({i, j, labels[i]});
            }
        }
    }
    return pairs;
}

PairCatalog::PairCatalog(const AugmentedBatch& augmented, PoolScope scope)
    : scope_(scope), original_count_(augmented.original_count), labels_(augmented.labels),
      pairs_(augmented.pairs) {
    provenance_.reserve(augmented.size());
    for (const RowSource& src : augmented.sources) {
        provenance_.push_back(src.provenance);
    }
    stars_.resize(original_count_);
    for (std::size_t r = 0; r < original_count_; ++r) {
        stars_[r].push_back(r);
    }
    for (std::size_t r = original_count_; r < augmented.size(); ++r) {
        const RowSource& src = augmented.sources[r];
        stars_[src.first].push_back(r);
        stars_[src.second].push_back(r);
    }
    for (std::size_t r = 0; r < augmented.size(); ++r) {
        class_rows_[labels_[r]].push_back(r);
    }
}

CandidateSet PairCatalog::candidates(std::size_t anchor, std::size_t negative) const {
    if (anchor >= original_count_ || negative >= original_count_) {
        throw InvalidBatch("candidate pools are keyed by original rows");
    }
    if (labels_[anchor] == labels_[negative]) {
        throw EmptyCandidateSet("rows " + std::to_string(anchor) + " and " + std::to_string(negative) +
                                " share a class");
    }
    if (scope_ == PoolScope::endpoint) {
        return {stars_[anchor], stars_[negative]};
    }
    return {class_rows_.at(labels_[anchor]), class_rows_.at(labels_[negative])};
}

std::vector<std::pair<std::size_t, std::size_t>> PairCatalog::enumerate(std::size_t anchor,
                                                                         std::size_t negative) const {
    const CandidateSet set = candidates(anchor, negative);
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(set.size());
    for (std::size_t p : set.positive_side) {
        for (std::size_t n : set.negative_side) {
            out.emplace_back(p, n);
        }
    }
    return out;
}

namespace {

template <typename Better>
NegativeSelection pool_select(const PairCatalog& catalog, const Matrix& values, std::size_t anchor,
                              std::size_t negative, Better better) {
    const CandidateSet set = catalog.candidates(anchor, negative);
    if (set.size() == 0) {
        throw EmptyCandidateSet("no candidate pairs for (" + std::to_string(anchor) + ", " +
                                std::to_string(negative) + ")");
    }
    NegativeSelection best;
    bool have = false;
    for (std::size_t p : set.positive_side) {
        for (std::size_t n : set.negative_side) {
            const double v = values(p, n);
            if (!have || better(v, best.value)) {
                best.value = v;
                best.p = p;
                best.n = n;
                have = true;
            }
        }
    }
    best.p_provenance = catalog.provenance(best.p);
    best.n_provenance = catalog.provenance(best.n);
    return best;
}

} // namespace

NegativeSelection hardest_negative_by_distance(const PairCatalog& catalog, const Matrix& sq_dist,
                                               std::size_t anchor, std::size_t negative) {
    return pool_select(catalog, sq_dist, anchor, negative, [](double v, double best) { return v < best; });
}

NegativeSelection hardest_negative_by_similarity(const PairCatalog& catalog, const Matrix& sim,
                                                 std::size_t anchor, std::size_t negative) {
    return pool_select(catalog, sim, anchor, negative, [](double v, double best) { return v > best; });
}

std::vector<HardPair> batch_hard_pairs(const Matrix& sq_dist, const Labels& labels,
                                       const std::vector<bool>& synthetic_mask, bool skip_incomplete) {
    if (labels.size() != synthetic_mask.size() || sq_dist.cols() != labels.size()) {
        throw DimensionMismatch("batch_hard_pairs: labels, mask and distance columns must agree");
    }
    std::vector<HardPair> out;
    for (std::size_t a = 0; a < labels.size(); ++a) {
        if (synthetic_mask[a]) {
            continue;
        }
        if (a >= sq_dist.rows()) {
            throw DimensionMismatch("batch_hard_pairs: anchor row outside distance matrix");
        }
        HardPair hp;
        hp.anchor = a;
        double pos_best = -std::numeric_limits<double>::infinity();
        double neg_best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < labels.size(); ++c) {
            const double d = sq_dist(a, c);
            if (labels[c] == labels[a]) {
                if (c != a && !synthetic_mask[c] && (hp.positive == kNoIndex || d > pos_best)) {
                    pos_best = d;
                    hp.positive = c;
                }
            } else if (hp.negative == kNoIndex || d < neg_best) {
                neg_best = d;
                hp.negative = c;
            }
        }
        if (!skip_incomplete) {
            if (hp.positive == kNoIndex) {
                throw NoPositiveAvailable(a);
            }
            if (hp.negative == kNoIndex) {
                throw NoNegativeAvailable(a);
            }
        }
        out.push_back(hp);
    }
    return out;
}

std::vector<MsSelection> ms_select_pairs(const Matrix& sim, const Labels& labels, std::size_t original_count,
                                         double epsilon, const PairCatalog* catalog) {
    if (sim.rows() < original_count || sim.cols() < original_count || labels.size() < original_count) {
        throw DimensionMismatch("ms_select_pairs: similarity matrix smaller than the original batch");
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<MsSelection> out(original_count);
    for (std::size_t i = 0; i < original_count; ++i) {
        MsSelection& sel = out[i];
        sel.anchor = i;
        double min_pos = inf;
        double max_neg = -inf;
        for (std::size_t k = 0; k < original_count; ++k) {
            if (k == i) {
                continue;
            }
            if (labels[k] == labels[i]) {
                min_pos = std::min(min_pos, sim(i, k));
            } else {
                max_neg = std::max(max_neg, sim(i, k));
            }
        }
        for (std::size_t j = 0; j < original_count; ++j) {
            if (j == i) {
                continue;
            }
            if (labels[j] == labels[i]) {
                if (sim(i, j) < max_neg + epsilon) {
                    sel.positives.push_back(j);
                }
                continue;
            }
            NegativeSelection pooled;
            if (catalog != nullptr) {
                pooled = hardest_negative_by_similarity(*catalog, sim, i, j);
            } else {
                pooled.value = sim(i, j);
                pooled.p = i;
                pooled.n = j;
            }
            if (pooled.value > min_pos - epsilon) {
                sel.negatives.push_back(j);
                sel.pooled.push_back(pooled);
            }
        }
    }
    return out;
}

void MiningTrace::record(const NegativeSelection& s) {
    record(s.p, s.p_provenance, s.n, s.n_provenance);
}

void MiningTrace::record(std::size_t p, Provenance p_provenance, std::size_t n, Provenance n_provenance) {
    entries_.push_back({p, n, p_provenance, n_provenance});
    for (Provenance prov : {p_provenance, n_provenance}) {
        if (prov == Provenance::synthetic) {
            ++synthetic_;
        } else {
            ++original_;
        }
    }
}

void MiningTrace::merge(const MiningTrace& other) {
    entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
    synthetic_ += other.synthetic_;
    original_ += other.original_;
}

double MiningTrace::ratio_synthetic() const {
    if (empty()) {
        throw EmptyTrace("selection ratio of an empty trace");
    }
    return static_cast<double>(synthetic_) / static_cast<double>(total_members());
}

double record_selection_ratio(const MiningTrace& trace) {
    return trace.ratio_synthetic();
}

std::string format_trace_line(std::size_t step, const MiningTrace& trace) {
    char buf[160];
    if (trace.empty()) {
        std::snprintf(buf, sizeof(buf), "step=%zu ratio_syn=nan synthetic=0 original=0", step);
    } else {
        std::snprintf(buf, sizeof(buf), "step=%zu ratio_syn=%.17g synthetic=%zu original=%zu", step,
                      trace.ratio_synthetic(), trace.synthetic_members(), trace.original_members());
    }
    return buf;
}

} // namespace ee
