#include "ee/losses.hpp"

#include "ee/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

namespace ee {

void LossConfig::validate() const {
    if (!(margin >= 0.0)) {
        throw ConfigError("margin must be >= 0");
    }
    if (!(ms_alpha > 0.0) || !(ms_beta > 0.0)) {
        throw ConfigError("ms alpha and beta must be > 0");
    }
    if (!(ms_epsilon >= 0.0)) {
        throw ConfigError("ms epsilon must be >= 0");
    }
    if (!(npair_reg_coeff >= 0.0)) {
        throw ConfigError("npair regularization coefficient must be >= 0");
    }
    if (expansion.enabled && expansion.n < 1) {
        throw ConfigError("expansion n must be >= 1 when expansion is enabled");
    }
}

bool loss_expects_normalized(LossKind kind) {
    return kind != LossKind::npair;
}

std::string to_string(LossKind kind) {
    switch (kind) {
    case LossKind::triplet:
        return "triplet";
    case LossKind::hphn_triplet:
        return "hphn_triplet";
    case LossKind::lifted:
        return "lifted";
    case LossKind::npair:
        return "npair";
    case LossKind::ms:
        return "ms";
    }
    return "unknown";
}

LossKind parse_loss_kind(const std::string& name) {
    for (LossKind k : {LossKind::triplet, LossKind::hphn_triplet, LossKind::lifted, LossKind::npair, LossKind::ms}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    throw ConfigError("unknown loss kind '" + name + "'");
}

namespace {

// Everything a loss needs about the (possibly expanded) batch.
struct Workspace {
    AugmentedBatch augmented;
    std::optional<PairCatalog> catalog;
    Matrix grad_augmented;
    std::uint64_t decisions = 0xcbf29ce484222325ULL;

    Workspace(const EmbeddingBatch& batch, const ExpansionConfig& expansion) {
        batch.validate();
        augmented = expansion.enabled ? expand_batch(batch, expansion.options()) : originals_only(batch);
        if (expansion.enabled) {
            catalog.emplace(augmented, expansion.pool);
        }
        grad_augmented = Matrix(augmented.size(), augmented.data.cols());
    }

    void note(std::uint64_t v) {
        decisions ^= v + 0x9e3779b97f4a7c15ULL + (decisions << 6) + (decisions >> 2);
    }
    void note(const NegativeSelection& s) {
        note(s.p);
        note(s.n);
    }

    std::size_t n_orig() const { return augmented.original_count; }
    const Labels& labels() const { return augmented.labels; }

    // d/dx of coeff * |x_p - x_q|^2
    void add_sq_dist_grad(std::size_t p, std::size_t q, double coeff) {
        const auto xp = augmented.data.row(p);
        const auto xq = augmented.data.row(q);
        auto gp = grad_augmented.row(p);
        auto gq = grad_augmented.row(q);
        for (std::size_t d = 0; d < xp.size(); ++d) {
            const double g = 2.0 * coeff * (xp[d] - xq[d]);
            gp[d] += g;
            gq[d] -= g;
        }
    }

    // d/dx of coeff * |x_p - x_q|, given the distance itself.
    void add_dist_grad(std::size_t p, std::size_t q, double dist, double coeff) {
        if (dist <= 0.0) {
            return;
        }
        add_sq_dist_grad(p, q, coeff / (2.0 * dist));
    }

    // d/dx of coeff * <x_p, x_q>
    void add_sim_grad(std::size_t p, std::size_t q, double coeff) {
        const auto xp = augmented.data.row(p);
        const auto xq = augmented.data.row(q);
        auto gp = grad_augmented.row(p);
        auto gq = grad_augmented.row(q);
        for (std::size_t d = 0; d < xp.size(); ++d) {
            gp[d] += coeff * xq[d];
            gq[d] += coeff * xp[d];
        }
    }

    // Hardest pair for an original (anchor, negative), or the pair itself
    // when expansion is off.
    NegativeSelection pooled_min(const Matrix& sq_dist, std::size_t anchor, std::size_t negative) const {
        if (catalog) {
            return hardest_negative_by_distance(*catalog, sq_dist, anchor, negative);
        }
        return {sq_dist(anchor, negative), anchor, negative, Provenance::original, Provenance::original};
    }

    NegativeSelection pooled_max(const Matrix& sim, std::size_t anchor, std::size_t negative) const {
        if (catalog) {
            return hardest_negative_by_similarity(*catalog, sim, anchor, negative);
        }
        return {sim(anchor, negative), anchor, negative, Provenance::original, Provenance::original};
    }

    LossResult finish(double value, std::size_t terms, MiningTrace trace) const {
        LossResult result;
        result.contributing_terms = terms;
        result.trace = std::move(trace);
        result.decision_hash = decisions;
        if (terms == 0) {
            result.value = 0.0;
            result.grad = Matrix(n_orig(), augmented.data.cols());
            return result;
        }
        result.value = value;
        result.grad = backprop_to_originals(augmented, grad_augmented);
        return result;
    }
};

// Over all augmented rows; without expansion these are just the originals.
Matrix sq_dist_for(const Workspace& ws) {
    return pairwise_sq_distance(ws.augmented.data, ws.augmented.data);
}

Matrix sim_for(const Workspace& ws) {
    return pairwise_similarity(ws.augmented.data, ws.augmented.data);
}

std::vector<std::size_t> negatives_of(const Labels& labels, std::size_t n_orig, std::size_t anchor) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < n_orig; ++k) {
        if (labels[k] != labels[anchor]) {
            out.push_back(k);
        }
    }
    return out;
}

// log(1 + sum_k exp(z_k)) with the max shifted out. weights[k] receives
// d/dz_k = exp(z_k) / (1 + sum exp(z)).
double log1p_sum_exp(const std::vector<double>& z, std::vector<double>& weights) {
    double shift = 0.0;
    for (double v : z) {
        shift = std::max(shift, v);
    }
    double total = std::exp(-shift);
    weights.resize(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) {
        weights[k] = std::exp(z[k] - shift);
        total += weights[k];
    }
    for (double& w : weights) {
        w /= total;
    }
    return shift + std::log(total);
}

LossResult run_triplet(const EmbeddingBatch& batch, const LossConfig& config) {
    Workspace ws(batch, config.expansion);
    const auto& pairs = ws.augmented.pairs;
    if (pairs.empty()) {
        throw NoPositivePairs("triplet loss needs at least one same-class pair");
    }
    const Matrix sq = sq_dist_for(ws);
    MiningTrace trace;
    double value = 0.0;
    std::size_t terms = 0;
    const double pair_weight = 1.0 / static_cast<double>(pairs.size());
    for (const PositivePair& pair : pairs) {
        const std::size_t i = pair.first;
        const auto negatives = negatives_of(ws.labels(), ws.n_orig(), i);
        if (negatives.empty()) {
            continue;
        }
        const double w = config.triplet_reduction == TripletReduction::inner_mean
                             ? pair_weight / static_cast<double>(negatives.size())
                             : pair_weight;
        const double d_pos = sq(i, pair.second);
        for (std::size_t k : negatives) {
            const NegativeSelection neg = ws.pooled_min(sq, i, k);
            trace.record(neg);
            ws.note(neg);
            ++terms;
            const double hinge = d_pos - neg.value + config.margin;
            ws.note(hinge > 0.0);
            if (hinge > 0.0) {
                value += w * hinge;
                ws.add_sq_dist_grad(i, pair.second, w);
                ws.add_sq_dist_grad(neg.p, neg.n, -w);
            }
        }
    }
    return ws.finish(value, terms, std::move(trace));
}

LossResult run_hphn(const EmbeddingBatch& batch, const LossConfig& config) {
    Workspace ws(batch, config.expansion);
    const std::size_t n_orig = ws.n_orig();
    const auto& data = ws.augmented.data;
    // Anchors are originals only, so the rows of the distance matrix stop at n_orig.
    Matrix sq(n_orig, data.rows());
    for (std::size_t a = 0; a < n_orig; ++a) {
        for (std::size_t c = 0; c < data.rows(); ++c) {
            sq(a, c) = squared_distance(data.row(a), data.row(c));
        }
    }
    std::vector<bool> mask(data.rows());
    for (std::size_t r = 0; r < data.rows(); ++r) {
        mask[r] = ws.augmented.is_synthetic(r);
    }
    const auto hard = batch_hard_pairs(sq, ws.labels(), mask, /*skip_incomplete=*/true);
    std::vector<const HardPair*> complete;
    for (const HardPair& hp : hard) {
        if (hp.complete()) {
            complete.push_back(&hp);
        }
    }
    MiningTrace trace;
    double value = 0.0;
    const double w = complete.empty() ? 0.0 : 1.0 / static_cast<double>(complete.size());
    for (const HardPair* hp : complete) {
        trace.record(hp->anchor, Provenance::original, hp->negative,
                     ws.augmented.sources[hp->negative].provenance);
        const double hinge = sq(hp->anchor, hp->positive) - sq(hp->anchor, hp->negative) + config.margin;
        ws.note(hp->positive);
        ws.note(hp->negative);
        ws.note(hinge > 0.0);
        if (hinge > 0.0) {
            value += w * hinge;
            ws.add_sq_dist_grad(hp->anchor, hp->positive, w);
            ws.add_sq_dist_grad(hp->anchor, hp->negative, -w);
        }
    }
    return ws.finish(value, complete.size(), std::move(trace));
}

// Keeps the two-sided structure of the lifted loss for both variants; the
// expanded variant swaps every negative distance for its pooled minimum.
LossResult run_lifted(const EmbeddingBatch& batch, const LossConfig& config) {
    Workspace ws(batch, config.expansion);
    const auto& pairs = ws.augmented.pairs;
    if (pairs.empty()) {
        throw NoPositivePairs("lifted structured loss needs at least one same-class pair");
    }
    const Matrix sq = sq_dist_for(ws);
    MiningTrace trace;
    double value = 0.0;
    std::size_t terms = 0;
    const double scale = 1.0 / (2.0 * static_cast<double>(pairs.size()));

    struct Term {
        NegativeSelection sel;
        double dist;
        double exponent;
    };
    std::vector<Term> negs;
    for (const PositivePair& pair : pairs) {
        negs.clear();
        for (std::size_t end : {pair.first, pair.second}) {
            for (std::size_t k : negatives_of(ws.labels(), ws.n_orig(), end)) {
                const NegativeSelection sel = ws.pooled_min(sq, end, k);
                trace.record(sel);
                ws.note(sel);
                const double dist = std::sqrt(sel.value);
                negs.push_back({sel, dist, config.margin - dist});
            }
        }
        if (negs.empty()) {
            continue;
        }
        ++terms;
        double shift = -std::numeric_limits<double>::infinity();
        for (const Term& t : negs) {
            shift = std::max(shift, t.exponent);
        }
        double total = 0.0;
        for (const Term& t : negs) {
            total += std::exp(t.exponent - shift);
        }
        const double d_pos = std::sqrt(sq(pair.first, pair.second));
        const double j = shift + std::log(total) + d_pos;
        ws.note(j > 0.0);
        if (j <= 0.0) {
            continue;
        }
        value += scale * j * j;
        const double dj = 2.0 * scale * j;
        ws.add_dist_grad(pair.first, pair.second, d_pos, dj);
        for (const Term& t : negs) {
            const double softmax = std::exp(t.exponent - shift) / total;
            ws.add_dist_grad(t.sel.p, t.sel.n, t.dist, -dj * softmax);
        }
    }
    return ws.finish(value, terms, std::move(trace));
}

LossResult run_npair(const EmbeddingBatch& batch, const LossConfig& config) {
    Workspace ws(batch, config.expansion);
    const auto& pairs = ws.augmented.pairs;
    if (pairs.empty()) {
        throw NoPositivePairs("n-pair loss needs at least one same-class pair");
    }
    const Matrix sim = sim_for(ws);
    MiningTrace trace;
    double value = 0.0;
    const double w = 1.0 / static_cast<double>(pairs.size());
    std::vector<double> z;
    std::vector<double> weights;
    std::vector<NegativeSelection> sels;
    for (const PositivePair& pair : pairs) {
        const std::size_t i = pair.first;
        const double s_pos = sim(i, pair.second);
        z.clear();
        sels.clear();
        for (std::size_t k : negatives_of(ws.labels(), ws.n_orig(), i)) {
            const NegativeSelection sel = ws.pooled_max(sim, i, k);
            trace.record(sel);
            ws.note(sel);
            sels.push_back(sel);
            z.push_back(sel.value - s_pos);
        }
        value += w * log1p_sum_exp(z, weights);
        double pos_coeff = 0.0;
        for (std::size_t k = 0; k < sels.size(); ++k) {
            ws.add_sim_grad(sels[k].p, sels[k].n, w * weights[k]);
            pos_coeff -= w * weights[k];
        }
        if (pos_coeff != 0.0) {
            ws.add_sim_grad(i, pair.second, pos_coeff);
        }
    }
    if (config.npair_reg_coeff > 0.0) {
        const double reg_w = config.npair_reg_coeff / static_cast<double>(ws.n_orig());
        for (std::size_t r = 0; r < ws.n_orig(); ++r) {
            const auto x = ws.augmented.data.row(r);
            value += reg_w * squared_norm(x);
            axpy(2.0 * reg_w, x, ws.grad_augmented.row(r));
        }
    }
    return ws.finish(value, pairs.size(), std::move(trace));
}

LossResult run_ms(const EmbeddingBatch& batch, const LossConfig& config) {
    Workspace ws(batch, config.expansion);
    const Matrix sim = sim_for(ws);
    const auto selections = ms_select_pairs(sim, ws.labels(), ws.n_orig(), config.ms_epsilon,
                                            ws.catalog ? &*ws.catalog : nullptr);
    MiningTrace trace;
    std::size_t contributing = 0;
    for (const MsSelection& sel : selections) {
        contributing += sel.empty() ? 0 : 1;
    }
    if (contributing == 0) {
        return ws.finish(0.0, 0, std::move(trace));
    }
    const double w = 1.0 / static_cast<double>(contributing);
    const double alpha = config.ms_alpha;
    const double beta = config.ms_beta;
    const double lambda = config.ms_lambda;
    double value = 0.0;
    std::vector<double> z;
    std::vector<double> weights;
    for (const MsSelection& sel : selections) {
        if (sel.empty()) {
            continue;
        }
        const std::size_t i = sel.anchor;
        ws.note(i);
        for (std::size_t k : sel.positives) {
            ws.note(k);
        }
        for (const NegativeSelection& pooled : sel.pooled) {
            trace.record(pooled);
            ws.note(pooled);
        }
        z.clear();
        for (std::size_t k : sel.positives) {
            z.push_back(-alpha * (sim(i, k) - lambda));
        }
        value += w / alpha * log1p_sum_exp(z, weights);
        for (std::size_t t = 0; t < sel.positives.size(); ++t) {
            // d/ds of (1/alpha) log(1 + sum exp(-alpha (s - lambda))) = -weight
            ws.add_sim_grad(i, sel.positives[t], -w * weights[t]);
        }
        z.clear();
        for (std::size_t k : sel.negatives) {
            z.push_back(beta * (sim(i, k) - lambda));
        }
        value += w / beta * log1p_sum_exp(z, weights);
        for (std::size_t t = 0; t < sel.negatives.size(); ++t) {
            ws.add_sim_grad(i, sel.negatives[t], w * weights[t]);
        }
    }
    return ws.finish(value, contributing, std::move(trace));
}

LossConfig with(LossConfig config, LossKind kind, bool expand) {
    config.kind = kind;
    config.expansion.enabled = expand;
    return config;
}

} // namespace

LossResult evaluate_loss(const EmbeddingBatch& batch, const LossConfig& config) {
    config.validate();
    switch (config.kind) {
    case LossKind::triplet:
        return run_triplet(batch, config);
    case LossKind::hphn_triplet:
        return run_hphn(batch, config);
    case LossKind::lifted:
        return run_lifted(batch, config);
    case LossKind::npair:
        return run_npair(batch, config);
    case LossKind::ms:
        return run_ms(batch, config);
    }
    throw ConfigError("unhandled loss kind");
}

LossResult triplet_loss(const EmbeddingBatch& b, LossConfig c) { return evaluate_loss(b, with(c, LossKind::triplet, false)); }
LossResult ee_triplet_loss(const EmbeddingBatch& b, LossConfig c) { return evaluate_loss(b, with(c, LossKind::triplet, true)); }
LossResult hphn_triplet_loss(const EmbeddingBatch& b, LossConfig c) { return evaluate_loss(b, with(c, LossKind::hphn_triplet, false)); }
LossResult ee_hphn_triplet_loss(const EmbeddingBatch& b, LossConfig c) { return evaluate_loss(b, with(c, LossKind::hphn_triplet, true)); }
LossResult lifted_loss(const EmbeddingBatch& b, LossConfig c) { return evaluate_loss(b, with(c, LossKind::lifted, false)); }
LossResult ee_lifted_loss(const EmbeddingBatch& b, LossConfig c) { return evaluate_loss(b, with(c, LossKind::lifted, true)); }
LossResult npair_loss(const EmbeddingBatch& b, LossConfig c) { return evaluate_loss(b, with(c, LossKind::npair, false)); }
LossResult ee_npair_loss(const EmbeddingBatch& b, LossConfig c) { return evaluate_loss(b, with(c, LossKind::npair, true)); }
LossResult ms_loss(const EmbeddingBatch& b, LossConfig c) { return evaluate_loss(b, with(c, LossKind::ms, false)); }
LossResult ee_ms_loss(const EmbeddingBatch& b, LossConfig c) { return evaluate_loss(b, with(c, LossKind::ms, true)); }

Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f, const Matrix& x, double h) {
    Matrix grad(x.rows(), x.cols());
    Matrix probe = x;
    for (std::size_t i = 0; i < x.values().size(); ++i) {
        const double orig = probe.values()[i];
        probe.values()[i] = orig + h;
        const double up = f(probe);
        probe.values()[i] = orig - h;
        const double down = f(probe);
        probe.values()[i] = orig;
        grad.values()[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

} // namespace ee
