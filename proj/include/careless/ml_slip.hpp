#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "careless/errors.hpp"
#include "careless/event_log.hpp"
#include "careless/features.hpp"
#include "careless/parallel.hpp"
#include "careless/rng.hpp"

namespace careless {

// leaf when feature < 0; otherwise x[feature] <= threshold goes left
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;

    double predict(const std::array<double, kEncodedWidth>& x) const {
        int idx = 0;
        while (nodes[idx].feature >= 0) {
            idx = x[static_cast<std::size_t>(nodes[idx].feature)] <= nodes[idx].threshold
                      ? nodes[idx].left
                      : nodes[idx].right;
        }
        return nodes[idx].value;
    }
};

struct EnsembleConfig {
    std::size_t n_trees = 100;
    std::uint64_t seed = 0;
    bool bootstrap = true;     // same-size sampling with replacement
    std::size_t min_leaf = 1;  // grown to purity by default
};

struct EnsembleModel {
    std::vector<RegressionTree> trees;
    std::uint64_t bootstrap_seed = 0;
    std::uint64_t manifest_hash = 0;
};

namespace detail {

// Variance-reduction split over all features; thresholds at midpoints of
// sorted distinct values. Ties break toward the lowest feature index, then
// the lowest threshold.
struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double sse_reduction = 0.0;
};

inline SplitChoice best_split(const std::vector<std::array<double, kEncodedWidth>>& X,
                              const std::vector<double>& y, const std::vector<std::size_t>& idx,
                              std::size_t min_leaf) {
    SplitChoice best;
    const std::size_t n = idx.size();
    if (n < 2 * min_leaf || n < 2) return best;

    double sum = 0.0;
    double ss = 0.0;
    for (const std::size_t i : idx) {
        sum += y[i];
        ss += y[i] * y[i];
    }
    const double parent_sse = ss - sum * sum / static_cast<double>(n);

    std::vector<std::size_t> order(idx);
    for (std::size_t f = 0; f < kEncodedWidth; ++f) {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double xa = X[a][f];
            const double xb = X[b][f];
            if (xa != xb) return xa < xb;
            return a < b;
        });
        double left_sum = 0.0;
        double left_ss = 0.0;
        for (std::size_t pos = 0; pos + 1 < n; ++pos) {
            const double yv = y[order[pos]];
            left_sum += yv;
            left_ss += yv * yv;
            const double xl = X[order[pos]][f];
            const double xr = X[order[pos + 1]][f];
            if (xl == xr) continue;  // only between distinct values
            const std::size_t nl = pos + 1;
            const std::size_t nr = n - nl;
            if (nl < min_leaf || nr < min_leaf) continue;
            const double right_sum = sum - left_sum;
            const double right_ss = ss - left_ss;
            const double child_sse =
                (left_ss - left_sum * left_sum / static_cast<double>(nl)) +
                (right_ss - right_sum * right_sum / static_cast<double>(nr));
            const double reduction = parent_sse - child_sse;
            const double thr = xl + (xr - xl) / 2.0;
            // strict > keeps the lowest feature index / threshold on ties
            if (reduction > 1e-12 && (!best.found || reduction > best.sse_reduction)) {
                best = {true, static_cast<int>(f), thr, reduction};
            }
        }
    }
    return best;
}

inline RegressionTree grow_tree(const std::vector<std::array<double, kEncodedWidth>>& X,
                                const std::vector<double>& y, std::vector<std::size_t> root_idx,
                                std::size_t min_leaf) {
    RegressionTree tree;
    struct Work {
        int node;
        std::vector<std::size_t> idx;
    };
    tree.nodes.push_back({});
    std::vector<Work> stack;
    stack.push_back({0, std::move(root_idx)});

    while (!stack.empty()) {
        Work w = std::move(stack.back());
        stack.pop_back();
        double sum = 0.0;
        for (const std::size_t i : w.idx) sum += y[i];
        const double mean = sum / static_cast<double>(w.idx.size());

        bool pure = true;
        for (const std::size_t i : w.idx) {
            if (y[i] != y[w.idx.front()]) {
                pure = false;
                break;
            }
        }
        SplitChoice split;
        if (!pure) split = best_split(X, y, w.idx, min_leaf);
        if (pure || !split.found) {
            tree.nodes[static_cast<std::size_t>(w.node)].value = mean;
            continue;
        }

        std::vector<std::size_t> left_idx;
        std::vector<std::size_t> right_idx;
        for (const std::size_t i : w.idx) {
            (X[i][static_cast<std::size_t>(split.feature)] <= split.threshold ? left_idx
                                                                              : right_idx)
                .push_back(i);
        }
        const int l = static_cast<int>(tree.nodes.size());
        const int r = l + 1;
        tree.nodes.push_back({});
        tree.nodes.push_back({});
        tree.nodes[static_cast<std::size_t>(w.node)].feature = split.feature;
        tree.nodes[static_cast<std::size_t>(w.node)].threshold = split.threshold;
        tree.nodes[static_cast<std::size_t>(w.node)].left = l;
        tree.nodes[static_cast<std::size_t>(w.node)].right = r;
        stack.push_back({r, std::move(right_idx)});
        stack.push_back({l, std::move(left_idx)});
    }
    return tree;
}

}  // namespace detail

// Bags n_trees regression trees on bootstrap samples. Per-tree RNG streams
// derive from (seed, tree_index), so parallel training is order-independent.
inline EnsembleModel train_ensemble(const std::vector<std::array<double, kEncodedWidth>>& X,
                                    const std::vector<double>& y, const EnsembleConfig& cfg = {},
                                    unsigned threads = 1) {
    if (X.empty() || X.size() != y.size()) throw EmptyTrainingSet();
    EnsembleModel model;
    model.bootstrap_seed = cfg.seed;
    model.manifest_hash = feature_manifest_hash();
    model.trees.resize(cfg.n_trees);
    const std::size_t n = X.size();
    parallel_for(cfg.n_trees, threads, [&](std::size_t t) {
        std::vector<std::size_t> idx;
        idx.reserve(n);
        if (cfg.bootstrap) {
            auto rng = make_rng(cfg.seed, t);
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            for (std::size_t i = 0; i < n; ++i) idx.push_back(pick(rng));
            std::sort(idx.begin(), idx.end());
        } else {
            idx.resize(n);
            std::iota(idx.begin(), idx.end(), 0);
        }
        model.trees[t] = detail::grow_tree(X, y, std::move(idx), std::max<std::size_t>(1, cfg.min_leaf));
    });
    return model;
}

inline std::vector<double> predict(const EnsembleModel& model,
                                   const std::vector<std::array<double, kEncodedWidth>>& X,
                                   unsigned threads = 1) {
    if (model.manifest_hash != feature_manifest_hash()) {
        throw ManifestMismatch("ensemble was trained against a different feature manifest");
    }
    std::vector<double> out(X.size());
    parallel_for(X.size(), threads, [&](std::size_t i) {
        double s = 0.0;
        for (const auto& tree : model.trees) s += tree.predict(X[i]);
        out[i] = std::clamp(s / static_cast<double>(model.trees.size()), 0.0, 1.0);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Student-level cross-validation

struct LabeledRows {
    std::vector<EventRef> refs;
    std::vector<std::array<double, kEncodedWidth>> rows;
    std::vector<double> y;
};

struct CvReport {
    std::map<std::string, std::size_t> fold_of_student;
    std::vector<double> per_fold_rmse;
    double pooled_rmse = 0.0;
    double baseline_rmse = 0.0;  // predict the training fold's mean
    std::size_t n_rows = 0;
};

// Students holding labeled rows are shuffled by seed and dealt round-robin
// into k near-equal folds; every row is scored exactly once, out of fold.
inline CvReport crossvalidate(const Dataset& d, const LabeledRows& data, std::size_t k,
                              std::uint64_t seed, const EnsembleConfig& cfg = {},
                              unsigned threads = 1) {
    std::vector<std::size_t> students;
    {
        std::vector<std::uint8_t> has_rows(d.students.size(), 0);
        for (const auto& ref : data.refs) has_rows[ref.student] = 1;
        for (std::size_t s = 0; s < has_rows.size(); ++s) {
            if (has_rows[s]) students.push_back(s);
        }
    }
    if (students.size() < k) throw TooFewStudents(students.size(), k);

    auto rng = make_rng(seed, 0xf01d);
    std::shuffle(students.begin(), students.end(), rng);
    std::vector<std::size_t> fold_of(d.students.size(), static_cast<std::size_t>(-1));
    CvReport report;
    for (std::size_t i = 0; i < students.size(); ++i) {
        fold_of[students[i]] = i % k;
        report.fold_of_student[d.students[students[i]].student_id] = i % k;
    }

    report.per_fold_rmse.resize(k, 0.0);
    double pooled_se = 0.0;
    double baseline_se = 0.0;
    std::size_t pooled_n = 0;

    for (std::size_t fold = 0; fold < k; ++fold) {
        std::vector<std::array<double, kEncodedWidth>> train_x;
        std::vector<double> train_y;
        std::vector<std::size_t> test_rows;
        for (std::size_t i = 0; i < data.refs.size(); ++i) {
            if (fold_of[data.refs[i].student] == fold) {
                test_rows.push_back(i);
            } else {
                train_x.push_back(data.rows[i]);
                train_y.push_back(data.y[i]);
            }
        }
        if (train_x.empty() || test_rows.empty()) continue;
        const EnsembleModel model = train_ensemble(train_x, train_y, cfg, threads);
        double train_mean = 0.0;
        for (double v : train_y) train_mean += v;
        train_mean /= static_cast<double>(train_y.size());

        std::vector<std::array<double, kEncodedWidth>> test_x;
        test_x.reserve(test_rows.size());
        for (const std::size_t i : test_rows) test_x.push_back(data.rows[i]);
        const auto preds = predict(model, test_x, threads);

        double fold_se = 0.0;
        for (std::size_t j = 0; j < test_rows.size(); ++j) {
            const double err = preds[j] - data.y[test_rows[j]];
            fold_se += err * err;
            const double base_err = train_mean - data.y[test_rows[j]];
            baseline_se += base_err * base_err;
        }
        report.per_fold_rmse[fold] = std::sqrt(fold_se / static_cast<double>(test_rows.size()));
        pooled_se += fold_se;
        pooled_n += test_rows.size();
    }
    report.n_rows = pooled_n;
    report.pooled_rmse = pooled_n > 0 ? std::sqrt(pooled_se / static_cast<double>(pooled_n)) : 0.0;
    report.baseline_rmse =
        pooled_n > 0 ? std::sqrt(baseline_se / static_cast<double>(pooled_n)) : 0.0;
    return report;
}

}  // namespace careless
