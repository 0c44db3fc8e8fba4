#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "logicx/core.hpp"

namespace logicx {

/// Deterministic CART with Gini impurity. Split thresholds are midpoints of
/// adjacent distinct sorted values; a sample goes right iff value >= threshold.
/// Ties are broken by lower impurity, then smaller feature index, then smaller
/// threshold, so identical inputs always produce identical trees.
struct DecisionTree {
    struct Node {
        int feature = -1;       // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        int klass = 0;
        std::vector<double> class_probs;
        int depth = 0;
    };

    std::vector<Node> nodes;
    std::size_t feature_count = 0;
    int num_classes = 0;
    int max_depth = 0;

    bool empty() const { return nodes.empty(); }

    int predict(const std::vector<double>& x) const {
        if (x.size() != feature_count)
            fail(ErrorKind::Contract, "predict: expected " + std::to_string(feature_count) +
                                          " features, got " + std::to_string(x.size()));
        int i = 0;
        while (nodes[i].feature >= 0)
            i = x[nodes[i].feature] < nodes[i].threshold ? nodes[i].left : nodes[i].right;
        return nodes[i].klass;
    }

    const std::vector<double>& leaf_probs(const std::vector<double>& x) const {
        int i = 0;
        while (nodes[i].feature >= 0)
            i = x[nodes[i].feature] < nodes[i].threshold ? nodes[i].left : nodes[i].right;
        return nodes[i].class_probs;
    }

    int depth() const {
        int d = 0;
        for (const auto& n : nodes) d = std::max(d, n.depth);
        return d;
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& n : nodes) {
            nlohmann::json jn;
            jn["feature"] = n.feature;
            jn["threshold"] = n.threshold;
            jn["left"] = n.left;
            jn["right"] = n.right;
            jn["class"] = n.klass;
            jn["probs"] = n.class_probs;
            arr.push_back(std::move(jn));
        }
        return nlohmann::json{{"feature_count", feature_count},
                              {"num_classes", num_classes},
                              {"max_depth", max_depth},
                              {"nodes", std::move(arr)}};
    }

    static DecisionTree from_json(const nlohmann::json& j) {
        DecisionTree t;
        t.feature_count = j.at("feature_count").get<std::size_t>();
        t.num_classes = j.at("num_classes").get<int>();
        t.max_depth = j.at("max_depth").get<int>();
        for (const auto& jn : j.at("nodes")) {
            Node n;
            n.feature = jn.at("feature").get<int>();
            n.threshold = jn.at("threshold").get<double>();
            n.left = jn.at("left").get<int>();
            n.right = jn.at("right").get<int>();
            n.klass = jn.at("class").get<int>();
            n.class_probs = jn.at("probs").get<std::vector<double>>();
            t.nodes.push_back(std::move(n));
        }
        return t;
    }
};

struct TreeParams {
    int max_depth = 8;
    std::size_t min_leaf = 1;
};

namespace detail {

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity(); // weighted child Gini sum
};

inline double gini_of(const std::vector<double>& counts, double total) {
    if (total <= 0) return 0.0;
    double g = 1.0;
    for (double c : counts) {
        double p = c / total;
        g -= p * p;
    }
    return g;
}

inline SplitChoice best_split(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                              const std::vector<double>& w, const std::vector<std::size_t>& items,
                              int num_classes, std::size_t min_leaf) {
    SplitChoice best;
    if (items.size() < 2) return best;
    std::size_t d = x[items[0]].size();
    std::vector<std::size_t> order(items);

    for (std::size_t f = 0; f < d; ++f) {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return x[a][f] < x[b][f]; });
        std::vector<double> left_counts(num_classes, 0.0), right_counts(num_classes, 0.0);
        double left_w = 0.0, right_w = 0.0;
        for (std::size_t i : order) {
            right_counts[y[i]] += w[i];
            right_w += w[i];
        }
        std::size_t n_left = 0;
        for (std::size_t k = 0; k + 1 < order.size(); ++k) {
            std::size_t i = order[k];
            left_counts[y[i]] += w[i];
            left_w += w[i];
            right_counts[y[i]] -= w[i];
            right_w -= w[i];
            ++n_left;
            double lo = x[i][f];
            double hi = x[order[k + 1]][f];
            if (lo == hi) continue; // threshold only between distinct values
            if (n_left < min_leaf || order.size() - n_left < min_leaf) continue;
            double impurity = left_w * gini_of(left_counts, left_w) + right_w * gini_of(right_counts, right_w);
            double threshold = lo + (hi - lo) / 2.0;
            if (impurity < best.impurity) {
                best = {true, static_cast<int>(f), threshold, impurity};
            }
            // equal impurity: earlier feature / smaller threshold already won
        }
    }
    return best;
}

} // namespace detail

/// Greedy CART fit. `weights` may be empty (all ones). Degenerate inputs give
/// a single-leaf tree; there is no randomness anywhere.
inline DecisionTree fit_tree(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                             const TreeParams& params, std::vector<double> weights = {}) {
    if (x.size() != y.size() || x.empty())
        fail(ErrorKind::Contract, "fit_tree: features and labels must be non-empty and aligned");
    if (weights.empty()) weights.assign(x.size(), 1.0);
    if (weights.size() != x.size()) fail(ErrorKind::Contract, "fit_tree: weight count mismatch");

    DecisionTree tree;
    tree.feature_count = x[0].size();
    tree.max_depth = params.max_depth;
    int num_classes = 0;
    for (int klass : y) num_classes = std::max(num_classes, klass + 1);
    tree.num_classes = num_classes;

    struct Pending {
        int node;
        std::vector<std::size_t> items;
        int depth;
    };

    auto make_leaf = [&](DecisionTree::Node& node, const std::vector<std::size_t>& items) {
        std::vector<double> counts(num_classes, 0.0);
        double total = 0.0;
        for (std::size_t i : items) {
            counts[y[i]] += weights[i];
            total += weights[i];
        }
        node.feature = -1;
        node.klass = 0;
        for (int c = 1; c < num_classes; ++c)
            if (counts[c] > counts[node.klass]) node.klass = c; // ties keep the smaller class
        node.class_probs.assign(num_classes, 0.0);
        if (total > 0)
            for (int c = 0; c < num_classes; ++c) node.class_probs[c] = counts[c] / total;
    };

    std::vector<std::size_t> all(x.size());
    std::iota(all.begin(), all.end(), 0);
    tree.nodes.emplace_back();
    std::deque<Pending> queue;
    queue.push_back({0, std::move(all), 0});

    while (!queue.empty()) {
        Pending p = std::move(queue.front());
        queue.pop_front();
        auto& node = tree.nodes[p.node];
        node.depth = p.depth;

        bool pure = true;
        for (std::size_t i : p.items)
            if (y[i] != y[p.items[0]]) { pure = false; break; }

        detail::SplitChoice split;
        if (!pure && p.depth < params.max_depth)
            split = detail::best_split(x, y, weights, p.items, num_classes, params.min_leaf);

        if (pure || !split.found) {
            make_leaf(node, p.items);
            continue;
        }

        std::vector<std::size_t> left_items, right_items;
        for (std::size_t i : p.items)
            (x[i][split.feature] < split.threshold ? left_items : right_items).push_back(i);

        make_leaf(node, p.items); // keep class stats on internal nodes too
        int left = static_cast<int>(tree.nodes.size());
        int right = left + 1;
        tree.nodes.emplace_back(); // may reallocate: re-acquire the node below
        tree.nodes.emplace_back();
        auto& parent = tree.nodes[p.node];
        parent.feature = split.feature;
        parent.threshold = split.threshold;
        parent.left = left;
        parent.right = right;
        queue.push_back({left, std::move(left_items), p.depth + 1});
        queue.push_back({right, std::move(right_items), p.depth + 1});
    }
    return tree;
}

inline double train_accuracy(const DecisionTree& tree, const std::vector<std::vector<double>>& x,
                             const std::vector<int>& y) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (tree.predict(x[i]) == y[i]) ++hits;
    return x.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(x.size());
}

struct GrownTree {
    DecisionTree tree;
    double accuracy = 0.0;
    bool reached_target = false;
};

/// Grows depth 1..depth_cap and returns the first tree whose training accuracy
/// reaches `target`, or the deepest one otherwise.
inline GrownTree fit_tree_to_accuracy(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                                      double target = 0.95, int depth_cap = 8, std::size_t min_leaf = 5) {
    GrownTree result;
    for (int depth = 1; depth <= depth_cap; ++depth) {
        result.tree = fit_tree(x, y, {depth, min_leaf});
        result.accuracy = train_accuracy(result.tree, x, y);
        if (result.accuracy >= target) {
            result.reached_target = true;
            return result;
        }
    }
    return result;
}

/// Distinct split features in BFS order, each with the threshold of the
/// shallowest (leftmost on ties) split using it. A single-leaf tree yields
/// an empty result, signalling non-discriminative inputs.
struct InformativeDims {
    std::vector<int> dims;          // BFS first-seen order
    std::vector<double> thresholds; // aligned with dims
};

inline InformativeDims informative_dims(const DecisionTree& tree) {
    InformativeDims out;
    if (tree.empty()) return out;
    std::deque<int> queue{0};
    while (!queue.empty()) {
        int i = queue.front();
        queue.pop_front();
        const auto& n = tree.nodes[i];
        if (n.feature < 0) continue;
        if (std::find(out.dims.begin(), out.dims.end(), n.feature) == out.dims.end()) {
            out.dims.push_back(n.feature);
            out.thresholds.push_back(n.threshold);
        }
        queue.push_back(n.left);
        queue.push_back(n.right);
    }
    return out;
}

/// One (feature, negated) literal per split along a root-to-leaf path;
/// negated means the path went left (value < threshold).
struct PathLiteral {
    int feature;
    bool negated;
    double threshold;
    bool operator==(const PathLiteral&) const = default;
};

using Conjunction = std::vector<PathLiteral>;

/// Per-class lists of leaf-path conjunctions. Within a tree the conjunctions
/// are mutually exclusive and exhaustive by construction.
inline std::vector<std::vector<Conjunction>> extract_paths(const DecisionTree& tree) {
    std::vector<std::vector<Conjunction>> per_class(std::max(tree.num_classes, 1));
    struct Frame {
        int node;
        Conjunction path;
    };
    std::vector<Frame> stack{{0, {}}};
    while (!stack.empty()) {
        Frame f = std::move(stack.back());
        stack.pop_back();
        const auto& n = tree.nodes[f.node];
        if (n.feature < 0) {
            per_class[n.klass].push_back(std::move(f.path));
            continue;
        }
        Conjunction left = f.path, right = std::move(f.path);
        left.push_back({n.feature, true, n.threshold});
        right.push_back({n.feature, false, n.threshold});
        // push right first so leaves pop out left-to-right
        stack.push_back({n.right, std::move(right)});
        stack.push_back({n.left, std::move(left)});
    }
    for (auto& cls : per_class) {
        for (auto& conj : cls) {
            // drop duplicate literals; presentation only, truth table unchanged
            Conjunction dedup;
            for (const auto& lit : conj)
                if (std::find(dedup.begin(), dedup.end(), lit) == dedup.end()) dedup.push_back(lit);
            conj = std::move(dedup);
        }
    }
    return per_class;
}

} // namespace logicx
