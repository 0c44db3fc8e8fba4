// Hand-built five-graph fixture with one-layer embeddings engineered so that
// embedding dimension 1 separates the classes at midpoint 0.18. Mining it at
// L = 1 yields exactly six predicates, two of which share a structural hash
// with opposite activation bits, and depth-1 rule learning lands on that pair.
//
// Graphs (radius-1 patterns per node, expected activation bit):
//   g0  class 0  triangle          3x (triangle@node, 0)
//   g1  class 0  star K_{1,3}      1x (star3@center, 0), 3x (edge@end, 0)
//   g2  class 0  K4                4x (K4@node, 0)
//   g3  class 1  path P3           2x (edge@end, 1), 1x (path3@center, 1)
//   g4  class 1  path P4           2x (edge@end, 1), 2x (path3@center, 1)
//
// Node symbols: every class-0 node "A", every class-1 node "B" (one-hot
// features), so grounding can split the shared-hash pair on a single Z
// feature. Per-graph constant embedding dim 1 values: 0.02, 0.10, 0.06,
// 0.26, 0.30 -> the only zero-impurity graph-level split is at 0.18.

#pragma once

#include <logicx/gcn.hpp>
#include <logicx/graph.hpp>

namespace toy {

using namespace logicx;

struct Fixture {
    LabeledDataset dataset;
    EmbeddingTable embeddings;
};

inline Graph make(std::string id, std::size_t n, std::vector<std::pair<NodeId, NodeId>> edges,
                  const std::string& symbol) {
    Graph g;
    g.id = std::move(id);
    g.num_nodes = n;
    for (auto& [u, v] : edges)
        if (u > v) std::swap(u, v);
    std::sort(edges.begin(), edges.end());
    g.edges = std::move(edges);
    bool is_a = symbol == "A";
    g.node_features.assign(n, {is_a ? 1.0 : 0.0, is_a ? 0.0 : 1.0});
    g.node_labels.assign(n, symbol);
    return g;
}

inline Fixture build() {
    Fixture f;
    auto& ds = f.dataset;
    ds.graphs.push_back(make("g0", 3, {{0, 1}, {1, 2}, {0, 2}}, "A"));
    ds.graphs.push_back(make("g1", 4, {{0, 1}, {0, 2}, {0, 3}}, "A"));
    ds.graphs.push_back(make("g2", 4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}, "A"));
    ds.graphs.push_back(make("g3", 3, {{0, 1}, {1, 2}}, "B"));
    ds.graphs.push_back(make("g4", 4, {{0, 1}, {1, 2}, {2, 3}}, "B"));
    ds.class_labels = {0, 0, 0, 1, 1};
    ds.split_assignment.assign(5, Split::Train);
    ds.num_classes = 2;
    ds.feature_kind = infer_feature_kinds(ds.graphs);

    auto& table = f.embeddings;
    table.dim = 2;
    table.layers = 1;
    table.predictions = {0, 0, 0, 1, 1};
    const double dim1[] = {0.02, 0.10, 0.06, 0.26, 0.30};
    for (GraphIndex g = 0; g < 5; ++g) {
        std::vector<std::vector<double>> rows(ds.graphs[g].num_nodes, {0.5, dim1[g]});
        table.node_embeddings.push_back(std::move(rows));
    }
    return f;
}

} // namespace toy
