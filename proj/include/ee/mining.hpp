#pragma once

#include "ee/geometry.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ee {

// All unordered same-class pairs (i < j), ascending.
std::vector<PositivePair> enumerate_positive_pairs(const Labels& labels);

// Which augmented rows may stand in for the two ends of a negative pair.
//   endpoint:   for an original pair (a, k), every row generated from a pair
//               that contains a, plus a itself, against the same for k.
//   class_pair: every augmented row of a's class against every augmented
//               row of k's class.
// Both pools contain the original pair (a, k) and nothing but cross-class pairs.
enum class PoolScope { endpoint, class_pair };

// Candidate negative pairs (p, n) = positive_side x negative_side. Both sides
// are sorted ascending, so nested iteration is lexicographic in (p, n).
struct CandidateSet {
    std::span<const std::size_t> positive_side;
    std::span<const std::size_t> negative_side;
    std::size_t size() const { return positive_side.size() * negative_side.size(); }
};

class PairCatalog {
public:
    PairCatalog(const AugmentedBatch& augmented, PoolScope scope);

    PoolScope scope() const { return scope_; }
    std::size_t original_count() const { return original_count_; }
    const std::vector<PositivePair>& positive_pairs() const { return pairs_; }
    const Labels& labels() const { return labels_; }
    Provenance provenance(std::size_t row) const { return provenance_[row]; }

    // anchor and negative are original rows of different classes.
    CandidateSet candidates(std::size_t anchor, std::size_t negative) const;
    std::vector<std::pair<std::size_t, std::size_t>> enumerate(std::size_t anchor, std::size_t negative) const;

private:
    PoolScope scope_;
    std::size_t original_count_ = 0;
    Labels labels_;
    std::vector<Provenance> provenance_;
    std::vector<PositivePair> pairs_;
    std::vector<std::vector<std::size_t>> stars_;
    std::map<int, std::vector<std::size_t>> class_rows_;
};

struct NegativeSelection {
    double value = 0.0;
    std::size_t p = 0;
    std::size_t n = 0;
    Provenance p_provenance = Provenance::original;
    Provenance n_provenance = Provenance::original;
};

// Min over the candidate set of sq_dist(p, n); ties go to the lowest (p, n).
NegativeSelection hardest_negative_by_distance(const PairCatalog& catalog, const Matrix& sq_dist,
                                               std::size_t anchor, std::size_t negative);
// Max over the candidate set of sim(p, n); same tie rule.
NegativeSelection hardest_negative_by_similarity(const PairCatalog& catalog, const Matrix& sim,
                                                 std::size_t anchor, std::size_t negative);

struct HardPair {
    std::size_t anchor = 0;
    std::size_t positive = kNoIndex;
    std::size_t negative = kNoIndex;
    bool complete() const { return positive != kNoIndex && negative != kNoIndex; }
};

// Batch-hard selection for every original row (synthetic_mask false). The
// hardest positive is the farthest same-class original; the hardest negative
// is the nearest different-class row of any provenance. Ties go to the lowest
// index. With skip_incomplete=false, a missing positive/negative throws
// NoPositiveAvailable / NoNegativeAvailable; otherwise the slot is kNoIndex.
std::vector<HardPair> batch_hard_pairs(const Matrix& sq_dist, const Labels& labels,
                                       const std::vector<bool>& synthetic_mask, bool skip_incomplete = false);

struct MsSelection {
    std::size_t anchor = 0;
    std::vector<std::size_t> positives;
    std::vector<std::size_t> negatives;
    // Per negative: the pair attaining the pooled max (EE only, else the original pair).
    std::vector<NegativeSelection> pooled;
    bool empty() const { return positives.empty() && negatives.empty(); }
};

// Multi-similarity pair mining over the original rows of `sim` (an M x M
// similarity matrix over the augmented batch). When `catalog` is given, a
// negative j is kept iff the max similarity over the candidate pool of (i, j)
// beats the anchor's weakest positive minus epsilon.
std::vector<MsSelection> ms_select_pairs(const Matrix& sim, const Labels& labels, std::size_t original_count,
                                         double epsilon, const PairCatalog* catalog = nullptr);

// Provenance counts of hard-negative selections. Each selected pair adds
// both of its members.
class MiningTrace {
public:
    struct Entry {
        std::size_t p = 0;
        std::size_t n = 0;
        Provenance p_provenance = Provenance::original;
        Provenance n_provenance = Provenance::original;
    };

    void record(const NegativeSelection& s);
    void record(std::size_t p, Provenance p_provenance, std::size_t n, Provenance n_provenance);
    void merge(const MiningTrace& other);

    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t synthetic_members() const { return synthetic_; }
    std::size_t original_members() const { return original_; }
    std::size_t total_members() const { return synthetic_ + original_; }
    bool empty() const { return total_members() == 0; }

    // Throws EmptyTrace when nothing was recorded.
    double ratio_synthetic() const;
    double ratio_original() const { return 1.0 - ratio_synthetic(); }

private:
    std::vector<Entry> entries_;
    std::size_t synthetic_ = 0;
    std::size_t original_ = 0;
};

double record_selection_ratio(const MiningTrace& trace);

// "step=<s> ratio_syn=<r> synthetic=<a> original=<b>"; ratio_syn is "nan"
// for an empty trace.
std::string format_trace_line(std::size_t step, const MiningTrace& trace);

} // namespace ee
