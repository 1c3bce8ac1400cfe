#pragma once

// Random forest of CART classification trees split on Gini impurity.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "smaepa/learn/matrix.hpp"
#include "smaepa/rng.hpp"

namespace smaepa::learn {

struct ForestConfig {
    std::size_t n_trees = 100;
    std::size_t max_depth = 12;
    std::size_t min_samples_leaf = 2;
    std::size_t features_per_split = 9; // ceil(sqrt(66))
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

inline void validate(const ForestConfig& c, std::size_t n_features) {
    if (c.n_trees < 1 || c.max_depth < 1 || c.min_samples_leaf < 1 || c.features_per_split < 1)
        throw ConfigError("forest counts must all be at least 1");
    if (c.features_per_split > n_features)
        throw ConfigError("features_per_split (" + std::to_string(c.features_per_split) + ") exceeds feature count (" +
                          std::to_string(n_features) + ")");
}

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0; // rows with x <= threshold go left
    int left = -1;
    int right = -1;
    int label = 0;                    // majority class, lowest index on ties
    std::vector<double> class_counts; // leaves only
};

struct Tree {
    std::vector<TreeNode> nodes; // nodes[0] is the root

    const TreeNode& leaf_for(std::span<const double> x) const {
        const TreeNode* n = &nodes[0];
        while (n->feature >= 0) n = &nodes[static_cast<std::size_t>(x[static_cast<std::size_t>(n->feature)] <= n->threshold ? n->left : n->right)];
        return *n;
    }
};

struct ForestModel {
    std::vector<Tree> trees;
    std::vector<double> impurity_decrease; // per feature, summed over all trees, unnormalized
};

namespace detail {

inline int majority(std::span<const double> counts) {
    return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

// n * gini = n - sum(c^2) / n
inline double weighted_gini(std::span<const double> counts, double n) {
    if (n <= 0.0) return 0.0;
    double sq = 0.0;
    for (double c : counts) sq += c * c;
    return n - sq / n;
}

// Per-column dense ranks of the training matrix (column-major) with the
// distinct sorted values, so nodes sort small integers instead of doubles.
class RankedColumns {
public:
    explicit RankedColumns(const Matrix& x) : rows_(x.rows()), cols_(x.cols()), ranks_(x.rows() * x.cols()), values_(x.cols()) {
        std::vector<double> column(rows_);
        for (std::size_t f = 0; f < cols_; ++f) {
            for (std::size_t i = 0; i < rows_; ++i) column[i] = x(i, f);
            auto& v = values_[f];
            v = column;
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
            for (std::size_t i = 0; i < rows_; ++i)
                ranks_[f * rows_ + i] =
                    static_cast<std::uint32_t>(std::lower_bound(v.begin(), v.end(), column[i]) - v.begin());
        }
    }

    std::size_t cols() const noexcept { return cols_; }
    std::uint32_t rank(std::size_t f, std::size_t i) const noexcept { return ranks_[f * rows_ + i]; }
    double value(std::size_t f, std::uint32_t r) const noexcept { return values_[f][r]; }
    std::size_t levels(std::size_t f) const noexcept { return values_[f].size(); }

private:
    std::size_t rows_, cols_;
    std::vector<std::uint32_t> ranks_;
    std::vector<std::vector<double>> values_;
};

class TreeBuilder {
public:
    TreeBuilder(const RankedColumns& ranked, const std::vector<int>& y, int q, const ForestConfig& cfg,
                rng::SplitMix64& gen, std::vector<double>& importance)
        : ranked_(ranked), y_(y), q_(static_cast<std::size_t>(q)), cfg_(cfg), gen_(gen), importance_(importance),
          feature_pool_(ranked.cols()) {}

    // `weight[i]` is how many times row i was drawn; only rows with weight > 0
    // are passed in `samples`. Counts stay integral, so results match a plain
    // list of repeated rows exactly.
    Tree build(std::vector<std::size_t> samples, std::vector<std::uint32_t> weight) {
        tree_.nodes.clear();
        weight_ = std::move(weight);
        grow(samples, 0);
        return std::move(tree_);
    }

private:
    struct Split {
        int feature = -1;
        double threshold = 0.0;
        std::uint32_t rank = 0; // last rank that goes left
        double gain = 0.0;
    };

    int grow(std::vector<std::size_t>& samples, std::size_t depth) {
        std::vector<double> counts(q_, 0.0);
        std::size_t n = 0;
        for (auto i : samples) {
            counts[static_cast<std::size_t>(y_[i])] += weight_[i];
            n += weight_[i];
        }
        const auto id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.push_back({});
        tree_.nodes.back().label = majority(counts);

        const bool pure = std::count(counts.begin(), counts.end(), 0.0) == static_cast<std::ptrdiff_t>(q_ - 1);
        Split best;
        if (!pure && depth < cfg_.max_depth && n >= 2 * cfg_.min_samples_leaf) best = find_split(samples, counts, n);

        if (best.feature < 0) {
            tree_.nodes[static_cast<std::size_t>(id)].class_counts = std::move(counts);
            return id;
        }

        importance_[static_cast<std::size_t>(best.feature)] += best.gain;
        std::vector<std::size_t> left, right;
        const auto f = static_cast<std::size_t>(best.feature);
        for (auto i : samples) (ranked_.rank(f, i) <= best.rank ? left : right).push_back(i);
        samples.clear();
        samples.shrink_to_fit();

        const int l = grow(left, depth + 1);
        const int r = grow(right, depth + 1);
        auto& node = tree_.nodes[static_cast<std::size_t>(id)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    // Candidate thresholds sit between consecutive distinct values present in
    // the node. Class counts are small integers, so every sum of squares below
    // is exact and both scan strategies produce identical gains.
    struct Scan {
        std::size_t n;
        double parent;
        const std::vector<double>& counts;
        Split& best;
    };

    void consider(const Scan& s, std::size_t f, std::size_t nl, double sq_left, double sq_right, std::uint32_t r,
                  std::uint32_t r_next) {
        const std::size_t msl = cfg_.min_samples_leaf;
        if (nl < msl || s.n - nl < msl) return;
        const double dl = static_cast<double>(nl), dr = static_cast<double>(s.n - nl);
        const double gain = s.parent - (dl - sq_left / dl) - (dr - sq_right / dr);
        if (gain > s.best.gain + 1e-12) {
            const double lo = ranked_.value(f, r), hi = ranked_.value(f, r_next);
            s.best.feature = static_cast<int>(f);
            s.best.threshold = lo + (hi - lo) / 2.0;
            if (!(s.best.threshold < hi)) s.best.threshold = lo; // adjacent doubles
            s.best.rank = r;
            s.best.gain = gain;
        }
    }

    // Per-rank class histogram over the node's rank span [lo, hi]; cheap when
    // the span is small relative to the node.
    void scan_histogram(const Scan& s, std::size_t f, const std::vector<std::size_t>& samples, std::uint32_t lo,
                        std::uint32_t hi) {
        const std::size_t span = hi - lo + 1;
        hist_.assign(span * q_, 0);
        for (auto i : samples) hist_[(ranked_.rank(f, i) - lo) * q_ + static_cast<std::size_t>(y_[i])] += weight_[i];
        std::fill(left_.begin(), left_.end(), 0.0);
        std::size_t nl = 0;
        bool seen = false;
        std::uint32_t prev = 0;
        for (std::size_t k = 0; k < span; ++k) {
            const auto* h = hist_.data() + k * q_;
            std::size_t here = 0;
            for (std::size_t c = 0; c < q_; ++c) here += h[c];
            if (here == 0) continue;
            const auto r = static_cast<std::uint32_t>(lo + k);
            if (seen) {
                double sq_left = 0.0, sq_right = 0.0;
                for (std::size_t c = 0; c < q_; ++c) {
                    sq_left += left_[c] * left_[c];
                    const double rc = s.counts[c] - left_[c];
                    sq_right += rc * rc;
                }
                consider(s, f, nl, sq_left, sq_right, prev, r);
            }
            for (std::size_t c = 0; c < q_; ++c) left_[c] += static_cast<double>(h[c]);
            nl += here;
            prev = r;
            seen = true;
        }
    }

    // Sorted (rank << 32 | label) keys; cheap for small nodes.
    void scan_sorted(const Scan& s, std::size_t f, const std::vector<std::size_t>& samples) {
        const auto m = samples.size();
        keys_.resize(m);
        for (std::size_t k = 0; k < m; ++k)
            keys_[k] = (static_cast<std::uint64_t>(ranked_.rank(f, samples[k])) << 32) |
                       (static_cast<std::uint64_t>(y_[samples[k]]) << 24) | samples[k];
        std::sort(keys_.begin(), keys_.end());
        std::fill(left_.begin(), left_.end(), 0.0);
        std::copy(s.counts.begin(), s.counts.end(), right_.begin());
        double sq_left = 0.0, sq_right = 0.0;
        for (double c : s.counts) sq_right += c * c;
        std::size_t nl = 0;
        for (std::size_t k = 0; k + 1 < m; ++k) {
            const auto c = static_cast<std::size_t>((keys_[k] >> 24) & 0xffu);
            const auto w = weight_[keys_[k] & 0xffffffu];
            const double dw = static_cast<double>(w);
            sq_left += (2.0 * left_[c] + dw) * dw;
            sq_right -= (2.0 * right_[c] - dw) * dw;
            left_[c] += dw;
            right_[c] -= dw;
            nl += w;
            const auto r = static_cast<std::uint32_t>(keys_[k] >> 32);
            const auto r_next = static_cast<std::uint32_t>(keys_[k + 1] >> 32);
            if (r != r_next) consider(s, f, nl, sq_left, sq_right, r, r_next);
        }
    }

    Split find_split(const std::vector<std::size_t>& samples, const std::vector<double>& counts, std::size_t n) {
        const auto d = ranked_.cols();
        const auto m = cfg_.features_per_split;
        std::iota(feature_pool_.begin(), feature_pool_.end(), 0);
        for (std::size_t i = 0; i < m; ++i) std::swap(feature_pool_[i], feature_pool_[i + gen_.below(d - i)]);
        std::sort(feature_pool_.begin(), feature_pool_.begin() + static_cast<std::ptrdiff_t>(m));

        Split best;
        const Scan scan{n, weighted_gini(counts, static_cast<double>(n)), counts, best};
        left_.resize(q_);
        right_.resize(q_);
        for (std::size_t fi = 0; fi < m; ++fi) {
            const auto f = feature_pool_[fi];
            std::uint32_t lo = ranked_.rank(f, samples.front()), hi = lo;
            for (auto i : samples) {
                const auto r = ranked_.rank(f, i);
                lo = std::min(lo, r);
                hi = std::max(hi, r);
            }
            if (lo == hi) continue;
            if (hi - lo < n) scan_histogram(scan, f, samples, lo, hi);
            else scan_sorted(scan, f, samples);
        }
        return best;
    }

    const RankedColumns& ranked_;
    const std::vector<int>& y_;
    std::size_t q_;
    const ForestConfig& cfg_;
    rng::SplitMix64& gen_;
    std::vector<double>& importance_;
    std::vector<std::size_t> feature_pool_;
    std::vector<std::uint64_t> keys_;
    std::vector<std::uint32_t> hist_;
    std::vector<double> left_, right_;
    std::vector<std::uint32_t> weight_;
    Tree tree_;
};

} // namespace detail

// Each tree draws its bootstrap sample and feature subsets from its own
// generator keyed by (seed, tree index), so trees are order-independent.
inline ForestModel fit_forest(const Matrix& x, const std::vector<int>& y, int q, const ForestConfig& cfg) {
    check_training_input(x, y, q);
    validate(cfg, x.cols());
    ForestModel model;
    model.impurity_decrease.assign(x.cols(), 0.0);
    model.trees.reserve(cfg.n_trees);
    const auto n = x.rows();
    if (n >= (std::size_t{1} << 24) || q > 255) throw DimensionError("forest: at most 2^24 rows and 255 classes");
    const detail::RankedColumns ranked(x);
    for (std::size_t t = 0; t < cfg.n_trees; ++t) {
        rng::SplitMix64 gen(rng::derive({cfg.seed, t}));
        std::vector<std::uint32_t> weight(n, cfg.bootstrap ? 0 : 1);
        if (cfg.bootstrap)
            for (std::size_t k = 0; k < n; ++k) ++weight[gen.below(n)];
        std::vector<std::size_t> samples;
        for (std::size_t i = 0; i < n; ++i)
            if (weight[i]) samples.push_back(i);
        detail::TreeBuilder builder(ranked, y, q, cfg, gen, model.impurity_decrease);
        model.trees.push_back(builder.build(std::move(samples), std::move(weight)));
    }
    return model;
}

// Vote fractions per class.
inline std::vector<double> forest_probabilities(const ForestModel& m, int q, std::span<const double> x) {
    std::vector<double> votes(static_cast<std::size_t>(q), 0.0);
    for (const auto& t : m.trees) votes[static_cast<std::size_t>(t.leaf_for(x).label)] += 1.0;
    for (auto& v : votes) v /= static_cast<double>(m.trees.size());
    return votes;
}

// Importances normalized to sum to 1; all zeros when no tree ever split.
inline std::vector<double> forest_importance(const ForestModel& m) {
    std::vector<double> out = m.impurity_decrease;
    const double total = std::accumulate(out.begin(), out.end(), 0.0);
    if (total > 0.0)
        for (auto& v : out) v /= total;
    return out;
}

} // namespace smaepa::learn
