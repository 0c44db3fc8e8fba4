#pragma once

#include <algorithm>
#include <chrono>
#include <numeric>
#include <optional>
#include <set>
#include <vector>

#include "logicx/graph.hpp"

namespace logicx {

enum class MatchMode { Monomorphism, Induced };
enum class MatchResult { Yes, No, Timeout };

struct MatchOptions {
    bool respect_labels = true;
    MatchMode mode = MatchMode::Monomorphism;
    std::chrono::milliseconds timeout{10000};
};

struct AnchoredMatch {
    NodeId anchor_image;
    std::vector<NodeId> map; // pattern node -> target node
};

namespace detail {

struct Matcher {
    const Graph& pattern;
    const Graph& target;
    MatchOptions options;
    std::vector<std::vector<int>> p_edge;  // -1 none, else edge label code (0 unlabeled)
    std::vector<std::vector<int>> t_edge;
    std::vector<std::size_t> p_deg, t_deg;
    std::vector<NodeId> order; // pattern nodes, degree descending, id tie-break
    std::vector<NodeId> image;
    std::vector<bool> used;
    std::chrono::steady_clock::time_point deadline;
    std::size_t steps = 0;
    bool timed_out = false;

    Matcher(const Graph& p, const Graph& t, const MatchOptions& o)
        : pattern(p), target(t), options(o) {
        p_edge = edge_matrix(p);
        t_edge = edge_matrix(t);
        p_deg = p.degrees();
        t_deg = t.degrees();
        order.resize(p.num_nodes);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
            if (p_deg[a] != p_deg[b]) return p_deg[a] > p_deg[b];
            return a < b;
        });
        image.assign(p.num_nodes, static_cast<NodeId>(t.num_nodes));
        used.assign(t.num_nodes, false);
        deadline = std::chrono::steady_clock::now() + options.timeout;
    }

    static std::vector<std::vector<int>> edge_matrix(const Graph& g) {
        std::vector<std::vector<int>> m(g.num_nodes, std::vector<int>(g.num_nodes, -1));
        for (const auto& [u, v] : g.edges) {
            m[u][v] = 0;
            m[v][u] = 0;
        }
        return m;
    }

    bool edge_labels_agree(NodeId pu, NodeId pv, NodeId tu, NodeId tv) const {
        if (!options.respect_labels) return true;
        if (!pattern.has_edge_labels() || !target.has_edge_labels()) return true;
        auto pl = pattern.edge_label_of(pu, pv);
        auto tl = target.edge_label_of(tu, tv);
        return pl && tl && *pl == *tl;
    }

    bool node_compatible(NodeId pv, NodeId tv) const {
        if (p_deg[pv] > t_deg[tv]) return false;
        if (options.mode == MatchMode::Induced && pattern.num_nodes == target.num_nodes &&
            p_deg[pv] != t_deg[tv])
            return false;
        if (options.respect_labels && pattern.has_node_labels() && target.has_node_labels() &&
            pattern.node_labels[pv] != target.node_labels[tv])
            return false;
        return true;
    }

    bool consistent(NodeId pv, NodeId tv, std::size_t pos) const {
        for (std::size_t k = 0; k < pos; ++k) {
            NodeId pw = order[k];
            NodeId tw = image[pw];
            bool p_adj = p_edge[pv][pw] >= 0;
            bool t_adj = t_edge[tv][tw] >= 0;
            if (p_adj) {
                if (!t_adj) return false;
                if (!edge_labels_agree(pv, pw, tv, tw)) return false;
            } else if (options.mode == MatchMode::Induced && t_adj) {
                return false;
            }
        }
        return true;
    }

    bool check_time() {
        if (++steps % 1024 == 0 && std::chrono::steady_clock::now() > deadline) timed_out = true;
        return !timed_out;
    }

    // visit(map) is called on every complete embedding; return true to stop.
    template <typename Visit>
    bool enumerate(std::size_t pos, Visit&& visit) {
        if (!check_time()) return false;
        if (pos == order.size()) return visit(image);
        NodeId pv = order[pos];
        for (NodeId tv = 0; tv < target.num_nodes; ++tv) {
            if (used[tv] || !node_compatible(pv, tv) || !consistent(pv, tv, pos)) continue;
            image[pv] = tv;
            used[tv] = true;
            bool stop = enumerate(pos + 1, visit);
            used[tv] = false;
            image[pv] = static_cast<NodeId>(target.num_nodes);
            if (stop || timed_out) return stop;
        }
        return false;
    }
};

} // namespace detail

/// Node-injective, edge-preserving (and for Induced also non-edge-preserving)
/// embedding test of pattern into target, honoring node/edge labels when
/// respect_labels is set and both sides carry them.
inline MatchResult subgraph_isomorphic(const Graph& pattern, const Graph& target,
                                       const MatchOptions& options = {}) {
    if (pattern.num_nodes == 0) fail(ErrorKind::Contract, "subgraph_isomorphic: empty pattern");
    if (pattern.num_nodes > target.num_nodes || pattern.edges.size() > target.edges.size())
        return MatchResult::No;
    detail::Matcher m(pattern, target, options);
    bool found = m.enumerate(0, [](const std::vector<NodeId>&) { return true; });
    if (m.timed_out) return MatchResult::Timeout;
    return found ? MatchResult::Yes : MatchResult::No;
}

/// All embeddings of an anchored pattern, reported by anchor image and
/// deduplicated by image set. Returns nothing when the search timed out.
inline std::optional<std::vector<AnchoredMatch>> find_anchored_matches(
    const Graph& pattern, NodeId anchor, const Graph& target, const MatchOptions& options = {}) {
    if (pattern.num_nodes == 0) fail(ErrorKind::Contract, "find_anchored_matches: empty pattern");
    if (anchor >= pattern.num_nodes) fail(ErrorKind::Contract, "find_anchored_matches: anchor out of range");
    std::vector<AnchoredMatch> out;
    if (pattern.num_nodes > target.num_nodes) return out;
    detail::Matcher m(pattern, target, options);
    std::set<std::pair<NodeId, std::vector<NodeId>>> seen; // (anchor image, sorted image set)
    m.enumerate(0, [&](const std::vector<NodeId>& image) {
        std::vector<NodeId> sorted(image);
        std::sort(sorted.begin(), sorted.end());
        if (seen.insert({image[anchor], std::move(sorted)}).second)
            out.push_back({image[anchor], image});
        return false; // keep enumerating
    });
    if (m.timed_out) return std::nullopt;
    return out;
}

} // namespace logicx
