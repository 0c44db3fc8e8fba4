#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "logicx/orbits.hpp"

namespace logicx {

namespace detail {

// One refinement round over labeled structure: signature of v is
// (color_v, sorted multiset of (edge code, neighbor color)).
inline std::vector<std::uint32_t> refine_labeled(const DenseGraphView& view,
                                                 const std::vector<std::uint32_t>& colors) {
    std::size_t n = view.n;
    std::vector<std::vector<std::uint64_t>> sigs(n);
    for (std::size_t v = 0; v < n; ++v) {
        auto& s = sigs[v];
        s.reserve(view.adj[v].size() + 1);
        s.push_back(colors[v]);
        for (NodeId u : view.adj[v])
            s.push_back((static_cast<std::uint64_t>(view.edge_code[v][u] + 1) << 32) | colors[u]);
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
    return next;
}

inline std::vector<std::uint32_t> stable_labeled_colors(const DenseGraphView& view,
                                                        std::vector<std::uint32_t> colors) {
    for (std::size_t it = 0; it <= view.n; ++it) {
        auto next = refine_labeled(view, colors);
        if (next == colors) break;
        colors = std::move(next);
    }
    return colors;
}

} // namespace detail

/// Exact canonical encoding of a node/edge-labeled graph, optionally anchored.
/// Two graphs get equal encodings iff they are isomorphic respecting labels
/// (and mapping anchor to anchor). Refinement plus individualization; branches
/// inside a refinement cell are pruned one-per-automorphism-orbit, which keeps
/// stars and cliques linear instead of factorial.
inline std::string canonical_form(const Graph& graph, std::optional<NodeId> anchor = {}) {
    std::size_t n = graph.num_nodes;
    auto view = detail::DenseGraphView::build(graph, /*use_edge_labels=*/true);

    // Initial colors: (anchor flag, node label) ranked densely.
    std::vector<std::uint32_t> init(n, 0);
    {
        std::vector<std::pair<std::pair<int, std::string>, std::size_t>> keyed;
        keyed.reserve(n);
        for (std::size_t v = 0; v < n; ++v) {
            int is_anchor = anchor && *anchor == v ? 0 : 1;
            std::string label = graph.has_node_labels() ? graph.node_labels[v] : std::string();
            keyed.push_back({{is_anchor, std::move(label)}, v});
        }
        std::sort(keyed.begin(), keyed.end());
        std::uint32_t rank = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0 && keyed[i].first != keyed[i - 1].first) ++rank;
            init[keyed[i].second] = rank;
        }
    }

    auto encode = [&](const std::vector<std::uint32_t>& colors) {
        std::vector<NodeId> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](NodeId a, NodeId b) { return colors[a] < colors[b]; });
        std::vector<std::size_t> rank(n);
        for (std::size_t i = 0; i < n; ++i) rank[order[i]] = i;
        std::string out = "n:" + std::to_string(n) + ";";
        if (anchor) out += "a:" + std::to_string(rank[*anchor]) + ";";
        out += "V:";
        for (NodeId v : order) {
            out += graph.has_node_labels() ? graph.node_labels[v] : std::string("*");
            out += ",";
        }
        std::vector<std::tuple<std::size_t, std::size_t, std::string>> edges;
        edges.reserve(graph.edges.size());
        for (std::size_t e = 0; e < graph.edges.size(); ++e) {
            auto [u, v] = graph.edges[e];
            auto a = std::min(rank[u], rank[v]);
            auto b = std::max(rank[u], rank[v]);
            edges.emplace_back(a, b, graph.has_edge_labels() ? graph.edge_labels[e] : std::string());
        }
        std::sort(edges.begin(), edges.end());
        out += ";E:";
        for (const auto& [a, b, l] : edges)
            out += std::to_string(a) + "-" + std::to_string(b) + (l.empty() ? "" : ":" + l) + ",";
        return out;
    };

    std::string best;
    std::function<void(std::vector<std::uint32_t>)> search = [&](std::vector<std::uint32_t> colors) {
        colors = detail::stable_labeled_colors(view, std::move(colors));
        // first smallest non-singleton cell, by color id
        std::map<std::uint32_t, std::vector<NodeId>> cells;
        for (std::size_t v = 0; v < n; ++v) cells[colors[v]].push_back(static_cast<NodeId>(v));
        const std::vector<NodeId>* target = nullptr;
        for (const auto& [c, members] : cells) {
            if (members.size() < 2) continue;
            if (!target || members.size() < target->size()) target = &members;
        }
        if (!target) {
            std::string enc = encode(colors);
            if (best.empty() || enc < best) best = std::move(enc);
            return;
        }
        // orbit representatives inside the target cell
        detail::UnionFind uf(n);
        for (std::size_t i = 0; i < target->size(); ++i) {
            for (std::size_t j = i + 1; j < target->size(); ++j) {
                NodeId a = (*target)[i], b = (*target)[j];
                if (uf.find(a) == uf.find(b)) continue;
                auto perm = detail::find_automorphism(view, colors, {{a, b}});
                if (perm)
                    for (std::size_t v = 0; v < n; ++v) uf.unite(v, (*perm)[v]);
            }
        }
        for (NodeId r : *target) {
            if (uf.find(r) != r && std::find(target->begin(), target->end(),
                                             static_cast<NodeId>(uf.find(r))) != target->end())
                continue; // not the orbit representative within the cell
            auto next = colors;
            // individualize: r sorts before the rest of its cell
            for (std::size_t v = 0; v < n; ++v)
                next[v] = next[v] * 2 + (v == r ? 0 : 1);
            search(std::move(next));
        }
    };
    search(init);
    return best;
}

} // namespace logicx
