#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "logicx/core.hpp"

namespace logicx {

/// Undirected simple graph with per-node feature vectors and optional
/// categorical node/edge labels. Node indices are dense 0..num_nodes-1.
struct Graph {
    std::string id;
    std::size_t num_nodes = 0;
    std::vector<std::pair<NodeId, NodeId>> edges; // stored with first < second
    std::vector<std::vector<double>> node_features; // one row per node, width d0
    std::vector<std::string> node_labels;           // empty or one per node
    std::vector<std::string> edge_labels;           // empty or one per edge

    std::size_t feature_dim() const { return node_features.empty() ? 0 : node_features[0].size(); }
    bool has_node_labels() const { return !node_labels.empty(); }
    bool has_edge_labels() const { return !edge_labels.empty(); }

    std::vector<std::vector<NodeId>> adjacency() const {
        std::vector<std::vector<NodeId>> adj(num_nodes);
        for (const auto& [u, v] : edges) {
            adj[u].push_back(v);
            adj[v].push_back(u);
        }
        for (auto& row : adj) std::sort(row.begin(), row.end());
        return adj;
    }

    std::vector<std::size_t> degrees() const {
        std::vector<std::size_t> deg(num_nodes, 0);
        for (const auto& [u, v] : edges) {
            ++deg[u];
            ++deg[v];
        }
        return deg;
    }

    std::optional<std::string> edge_label_of(NodeId u, NodeId v) const {
        if (!has_edge_labels()) return std::nullopt;
        auto a = std::min(u, v), b = std::max(u, v);
        for (std::size_t i = 0; i < edges.size(); ++i) {
            if (edges[i].first == a && edges[i].second == b) return edge_labels[i];
        }
        return std::nullopt;
    }

    /// Checks all structural invariants; throws Validation errors naming the graph.
    void validate() const {
        std::set<std::pair<NodeId, NodeId>> seen;
        for (const auto& [u, v] : edges) {
            if (u >= num_nodes || v >= num_nodes)
                fail(ErrorKind::Validation, "graph '" + id + "': edge endpoint out of range");
            if (u == v)
                fail(ErrorKind::Validation, "graph '" + id + "': self-loop at node " + std::to_string(u));
            if (u > v)
                fail(ErrorKind::Validation, "graph '" + id + "': edge not normalized (first < second expected)");
            if (!seen.insert({u, v}).second)
                fail(ErrorKind::Validation, "graph '" + id + "': duplicate edge (" + std::to_string(u) + ", " +
                                                std::to_string(v) + ")");
        }
        if (node_features.size() != num_nodes)
            fail(ErrorKind::Validation, "graph '" + id + "': feature row count != num_nodes");
        std::size_t d0 = feature_dim();
        for (const auto& row : node_features) {
            if (row.size() != d0)
                fail(ErrorKind::Validation, "graph '" + id + "': inconsistent feature dimension");
        }
        if (!node_labels.empty() && node_labels.size() != num_nodes)
            fail(ErrorKind::Validation, "graph '" + id + "': node_labels must cover every node");
        if (!edge_labels.empty() && edge_labels.size() != edges.size())
            fail(ErrorKind::Validation, "graph '" + id + "': edge_labels must cover every edge");
    }
};

enum class Split : std::uint8_t { Train, Test };
enum class FeatureKind : std::uint8_t { DiscreteOneHot, Continuous };

struct LabeledDataset {
    std::vector<Graph> graphs;
    std::vector<int> class_labels;  // one per graph, in {0..num_classes-1}
    std::vector<Split> split_assignment;
    std::vector<FeatureKind> feature_kind; // one per feature dimension
    int num_classes = 0;

    std::size_t size() const { return graphs.size(); }
    std::size_t feature_dim() const { return feature_kind.size(); }

    std::vector<GraphIndex> split_indices(Split s) const {
        std::vector<GraphIndex> out;
        for (GraphIndex i = 0; i < graphs.size(); ++i)
            if (split_assignment[i] == s) out.push_back(i);
        return out;
    }

    bool all_features_discrete() const {
        if (feature_kind.empty()) return false;
        return std::all_of(feature_kind.begin(), feature_kind.end(),
                           [](FeatureKind k) { return k == FeatureKind::DiscreteOneHot; });
    }

    /// Sorted global alphabet of node symbols (empty when graphs carry none).
    std::vector<std::string> symbol_alphabet() const {
        std::set<std::string> sym;
        for (const auto& g : graphs)
            for (const auto& s : g.node_labels) sym.insert(s);
        return {sym.begin(), sym.end()};
    }

    void validate() const {
        if (class_labels.size() != graphs.size())
            fail(ErrorKind::Validation, "dataset: class label missing for some graph");
        if (split_assignment.size() != graphs.size())
            fail(ErrorKind::Validation, "dataset: split assignment missing for some graph");
        if (num_classes < 2) fail(ErrorKind::Validation, "dataset: at least 2 classes required");
        std::size_t d0 = feature_dim();
        for (GraphIndex i = 0; i < graphs.size(); ++i) {
            graphs[i].validate();
            if (graphs[i].feature_dim() != d0 && graphs[i].num_nodes > 0)
                fail(ErrorKind::Validation, "graph '" + graphs[i].id + "': feature dimension differs from dataset");
            if (class_labels[i] < 0 || class_labels[i] >= num_classes)
                fail(ErrorKind::Validation, "graph '" + graphs[i].id + "': class label out of range");
        }
    }
};

/// Final-layer node embeddings plus the producing model's per-graph predictions.
struct EmbeddingTable {
    std::size_t dim = 0;     // d_L
    std::size_t layers = 1;  // L, the receptive-field radius of the producer
    std::vector<std::vector<std::vector<double>>> node_embeddings; // [graph][node][dim]
    std::vector<int> predictions;                                  // y_hat per graph

    const std::vector<double>& at(GraphIndex g, NodeId v) const { return node_embeddings[g][v]; }

    std::vector<double> graph_embedding(GraphIndex g) const {
        std::vector<double> mean(dim, 0.0);
        const auto& rows = node_embeddings[g];
        if (rows.empty()) return mean;
        for (const auto& row : rows)
            for (std::size_t k = 0; k < dim; ++k) mean[k] += row[k];
        for (auto& x : mean) x /= static_cast<double>(rows.size());
        return mean;
    }

    void validate_against(const LabeledDataset& dataset) const {
        if (node_embeddings.size() != dataset.size() || predictions.size() != dataset.size())
            fail(ErrorKind::Alignment, "embedding table does not cover every dataset graph");
        for (GraphIndex g = 0; g < dataset.size(); ++g) {
            if (node_embeddings[g].size() != dataset.graphs[g].num_nodes)
                fail(ErrorKind::Alignment,
                     "embedding table misaligned for graph '" + dataset.graphs[g].id + "'");
            for (const auto& row : node_embeddings[g])
                if (row.size() != dim)
                    fail(ErrorKind::Validation,
                         "embedding dimension mismatch in graph '" + dataset.graphs[g].id + "'");
        }
    }
};

// Stratified 80/20 split, shuffled per class with the given seed.
inline void assign_split(LabeledDataset& dataset, std::uint64_t seed, double test_fraction = 0.2) {
    dataset.split_assignment.assign(dataset.size(), Split::Train);
    std::map<int, std::vector<GraphIndex>> by_class;
    for (GraphIndex i = 0; i < dataset.size(); ++i) by_class[dataset.class_labels[i]].push_back(i);
    for (auto& [cls, members] : by_class) {
        std::uint64_t state = mix_seed(seed ^ (0x5b5cu + static_cast<std::uint64_t>(cls)));
        for (std::size_t i = members.size(); i > 1; --i) {
            state = mix_seed(state);
            std::swap(members[i - 1], members[state % i]);
        }
        std::size_t n_test = members.size() >= 2
                                 ? std::max<std::size_t>(1, static_cast<std::size_t>(
                                       static_cast<double>(members.size()) * test_fraction + 0.5))
                                 : 0;
        for (std::size_t i = 0; i < n_test; ++i) dataset.split_assignment[members[i]] = Split::Test;
    }
}

inline std::vector<FeatureKind> infer_feature_kinds(const std::vector<Graph>& graphs) {
    std::size_t d0 = 0;
    for (const auto& g : graphs)
        if (g.num_nodes > 0) { d0 = g.feature_dim(); break; }
    std::vector<FeatureKind> kinds(d0, FeatureKind::DiscreteOneHot);
    for (const auto& g : graphs)
        for (const auto& row : g.node_features)
            for (std::size_t k = 0; k < row.size() && k < d0; ++k)
                if (row[k] != 0.0 && row[k] != 1.0) kinds[k] = FeatureKind::Continuous;
    return kinds;
}

/// Derives node symbols from one-hot features via argmax, with an injectable
/// symbol table (falls back to "f<k>" names). No-op when labels already exist
/// or features are not one-hot rows.
inline void derive_node_labels(LabeledDataset& dataset, const std::vector<std::string>& symbols = {}) {
    if (dataset.feature_dim() == 0) return;
    if (!dataset.all_features_discrete()) return;
    for (const auto& g : dataset.graphs) {
        if (g.has_node_labels()) return; // explicit labels win
        for (const auto& row : g.node_features) {
            double sum = 0;
            for (double x : row) sum += x;
            if (sum != 1.0) return; // not one-hot rows
        }
    }
    std::vector<std::string> table = symbols;
    for (std::size_t k = table.size(); k < dataset.feature_dim(); ++k)
        table.push_back("f" + std::to_string(k));
    for (auto& g : dataset.graphs) {
        g.node_labels.clear();
        g.node_labels.reserve(g.num_nodes);
        for (const auto& row : g.node_features) {
            std::size_t arg = 0;
            for (std::size_t k = 1; k < row.size(); ++k)
                if (row[k] > row[arg]) arg = k;
            g.node_labels.push_back(table[arg]);
        }
    }
}

} // namespace logicx
