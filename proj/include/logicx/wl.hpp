#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "logicx/graph.hpp"
#include "logicx/sha256.hpp"

namespace logicx {

/// Node-induced subgraph of everything within distance <= radius of a center,
/// with a map from local back to original node indices. Features and labels
/// are carried over so grounding can read the original attributes.
struct ReceptiveField {
    NodeId center_local = 0;
    Graph subgraph;
    std::vector<NodeId> node_map; // local index -> index in the source graph
};

inline ReceptiveField extract_receptive_field(const Graph& graph, NodeId center, std::size_t radius) {
    if (center >= graph.num_nodes)
        fail(ErrorKind::Contract, "extract_receptive_field: node out of range");
    auto adj = graph.adjacency();
    std::vector<int> dist(graph.num_nodes, -1);
    std::deque<NodeId> queue{center};
    dist[center] = 0;
    std::vector<NodeId> members{center};
    while (!queue.empty()) {
        NodeId v = queue.front();
        queue.pop_front();
        if (static_cast<std::size_t>(dist[v]) >= radius) continue;
        for (NodeId u : adj[v]) {
            if (dist[u] >= 0) continue;
            dist[u] = dist[v] + 1;
            members.push_back(u);
            queue.push_back(u);
        }
    }
    std::sort(members.begin(), members.end());

    ReceptiveField rf;
    rf.node_map = members;
    std::vector<NodeId> local(graph.num_nodes, 0);
    for (std::size_t i = 0; i < members.size(); ++i) local[members[i]] = static_cast<NodeId>(i);
    rf.center_local = local[center];

    Graph& sg = rf.subgraph;
    sg.id = graph.id + "@" + std::to_string(center) + "/r" + std::to_string(radius);
    sg.num_nodes = members.size();
    for (NodeId v : members) {
        if (!graph.node_features.empty()) sg.node_features.push_back(graph.node_features[v]);
        if (graph.has_node_labels()) sg.node_labels.push_back(graph.node_labels[v]);
    }
    if (sg.node_features.empty()) sg.node_features.assign(sg.num_nodes, {});
    for (std::size_t e = 0; e < graph.edges.size(); ++e) {
        auto [u, v] = graph.edges[e];
        if (dist[u] >= 0 && dist[v] >= 0) {
            sg.edges.emplace_back(std::min(local[u], local[v]), std::max(local[u], local[v]));
            if (graph.has_edge_labels()) sg.edge_labels.push_back(graph.edge_labels[e]);
        }
    }
    return rf;
}

namespace detail {

// One canonical refinement round: signature of v = (color_v, sorted neighbor
// colors); new colors are dense ranks of the lexicographically sorted
// signatures, so they depend only on the isomorphism class.
inline std::vector<std::uint32_t> refine_colors(const std::vector<std::vector<NodeId>>& adj,
                                                const std::vector<std::uint32_t>& colors,
                                                std::vector<std::vector<std::uint32_t>>* sig_out = nullptr) {
    std::size_t n = adj.size();
    std::vector<std::vector<std::uint32_t>> sigs(n);
    for (std::size_t v = 0; v < n; ++v) {
        auto& s = sigs[v];
        s.reserve(adj[v].size() + 1);
        s.push_back(colors[v]);
        for (NodeId u : adj[v]) s.push_back(colors[u]);
        std::sort(s.begin() + 1, s.end());
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sigs[a] < sigs[b]; });
    std::vector<std::uint32_t> next(n, 0);
    std::uint32_t rank = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && sigs[order[i]] != sigs[order[i - 1]]) ++rank;
        next[order[i]] = rank;
    }
    if (sig_out) *sig_out = std::move(sigs);
    return next;
}

} // namespace detail

/// Stable WL colors of a graph refined to a fixed point, optionally with the
/// center seeded by a distinguished initial color. Structure only.
inline std::vector<std::uint32_t> wl_colors(const Graph& graph, std::optional<NodeId> center = {}) {
    auto adj = graph.adjacency();
    std::vector<std::uint32_t> colors(graph.num_nodes, 0);
    if (center) colors[*center] = 1;
    for (std::size_t it = 0; it < graph.num_nodes; ++it) {
        auto next = detail::refine_colors(adj, colors);
        if (next == colors) break;
        colors = std::move(next);
    }
    return colors;
}

/// Featureless WL hash of a (sub)graph: node-count refinement rounds, each
/// round's sorted signature multiset fed to SHA-256 along with node and edge
/// counts. The optional center gets a distinguished seed color so the anchored
/// role is part of the pattern. Digest = 16 hex chars.
inline std::string wl_hash(const Graph& graph, std::optional<NodeId> center = {}) {
    auto adj = graph.adjacency();
    std::size_t n = graph.num_nodes;
    Sha256 hasher;
    hasher.update_u64(n);
    hasher.update_u64(graph.edges.size());
    std::vector<std::uint32_t> colors(n, 0);
    if (center) {
        if (*center >= n) fail(ErrorKind::Contract, "wl_hash: center out of range");
        colors[*center] = 1;
        hasher.update_u64(0xa17c0000u); // anchored-mode marker
    }
    {
        std::vector<std::uint32_t> init(colors);
        std::sort(init.begin(), init.end());
        for (auto c : init) hasher.update_u64(c);
    }
    for (std::size_t it = 0; it < n; ++it) {
        std::vector<std::vector<std::uint32_t>> sigs;
        auto next = detail::refine_colors(adj, colors, &sigs);
        std::sort(sigs.begin(), sigs.end());
        hasher.update_u64(0x17e7u); // round separator
        for (const auto& s : sigs) {
            hasher.update_u64(s.size());
            for (auto c : s) hasher.update_u64(c);
        }
        if (next == colors) break; // stable partition; further rounds repeat
        colors = std::move(next);
    }
    return hasher.finish_hex(16);
}

/// Pattern_struct of a node: hash of its receptive field. Single definition
/// point used by mining, grounding, and inference alike.
inline std::string struct_pattern(const Graph& graph, NodeId v, std::size_t radius, bool anchor_center) {
    auto rf = extract_receptive_field(graph, v, radius);
    return wl_hash(rf.subgraph, anchor_center ? std::optional<NodeId>(rf.center_local) : std::nullopt);
}

} // namespace logicx
