#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "logicx/graph.hpp"
#include "logicx/wl.hpp"

namespace logicx {

namespace detail {

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (b < a) std::swap(a, b); // smallest id stays the root
        parent[b] = a;
        return true;
    }
};

/// Dense view used by the automorphism search: edge_code[u][v] is -1 for a
/// non-edge, otherwise the edge label id (0 when the graph is unlabeled).
struct DenseGraphView {
    std::size_t n = 0;
    std::vector<std::vector<int>> edge_code;
    std::vector<std::vector<NodeId>> adj;

    static DenseGraphView build(const Graph& g, bool use_edge_labels) {
        DenseGraphView view;
        view.n = g.num_nodes;
        view.edge_code.assign(view.n, std::vector<int>(view.n, -1));
        view.adj = g.adjacency();
        std::vector<std::string> alphabet;
        if (use_edge_labels && g.has_edge_labels()) {
            alphabet = g.edge_labels;
            std::sort(alphabet.begin(), alphabet.end());
            alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());
        }
        for (std::size_t e = 0; e < g.edges.size(); ++e) {
            auto [u, v] = g.edges[e];
            int code = 0;
            if (!alphabet.empty()) {
                code = static_cast<int>(
                    std::lower_bound(alphabet.begin(), alphabet.end(), g.edge_labels[e]) - alphabet.begin());
            }
            view.edge_code[u][v] = code;
            view.edge_code[v][u] = code;
        }
        return view;
    }
};

/// Backtracking search for one automorphism consistent with `colors`
/// (images must share the node's color) and the forced seed assignments.
/// Returns the full permutation or nothing if no automorphism exists.
inline std::optional<std::vector<NodeId>> find_automorphism(
    const DenseGraphView& view, const std::vector<std::uint32_t>& colors,
    const std::vector<std::pair<NodeId, NodeId>>& seeds) {
    std::size_t n = view.n;
    std::vector<NodeId> image(n, static_cast<NodeId>(n));
    std::vector<bool> used(n, false);

    for (auto [v, u] : seeds) {
        if (colors[v] != colors[u]) return std::nullopt;
        if (image[v] != n && image[v] != u) return std::nullopt;
        if (image[v] == u) continue;
        if (used[u]) return std::nullopt;
        image[v] = u;
        used[u] = true;
    }
    // seed pairs must be mutually consistent
    for (auto [v, u] : seeds) {
        (void)u;
        for (auto [w, t] : seeds) {
            if (view.edge_code[v][w] != view.edge_code[image[v]][t]) return std::nullopt;
        }
    }

    std::vector<std::size_t> class_size(n, 0);
    {
        std::vector<std::size_t> counts;
        for (auto c : colors) {
            if (c >= counts.size()) counts.resize(c + 1, 0);
            ++counts[c];
        }
        for (std::size_t v = 0; v < n; ++v) class_size[v] = counts[colors[v]];
    }
    std::vector<NodeId> order;
    order.reserve(n);
    for (std::size_t v = 0; v < n; ++v)
        if (image[v] == n) order.push_back(static_cast<NodeId>(v));
    std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
        if (class_size[a] != class_size[b]) return class_size[a] < class_size[b];
        return a < b;
    });

    std::vector<NodeId> assigned;
    assigned.reserve(n);
    for (auto [v, u] : seeds) {
        (void)u;
        assigned.push_back(v);
    }

    std::function<bool(std::size_t)> backtrack = [&](std::size_t pos) -> bool {
        if (pos == order.size()) return true;
        NodeId v = order[pos];
        for (std::size_t u = 0; u < n; ++u) {
            if (used[u] || colors[u] != colors[v]) continue;
            bool ok = true;
            for (NodeId w : assigned) {
                if (view.edge_code[v][w] != view.edge_code[u][image[w]]) { ok = false; break; }
            }
            if (!ok) continue;
            image[v] = static_cast<NodeId>(u);
            used[u] = true;
            assigned.push_back(v);
            if (backtrack(pos + 1)) return true;
            assigned.pop_back();
            used[u] = false;
            image[v] = static_cast<NodeId>(n);
        }
        return false;
    };
    if (!backtrack(0)) return std::nullopt;
    return image;
}

} // namespace detail

/// Orbit decomposition of a subgraph under its full automorphism group
/// (structure only; node features and labels play no role), with the ordering
/// of the four-level sort key: the anchor's orbit first, then size ascending,
/// sorted degree sequence, sorted anchor-distance profile, sorted node ids.
struct OrbitDecomposition {
    struct Key {
        std::size_t size = 0;
        std::vector<std::size_t> degrees;      // sorted
        std::vector<std::uint32_t> distances;  // sorted, kInfDistance when unreachable
        std::vector<NodeId> ids;               // sorted

        auto tie() const { return std::tie(size, degrees, distances, ids); }
        bool operator<(const Key& o) const { return tie() < o.tie(); }
        bool operator==(const Key& o) const { return tie() == o.tie(); }
    };

    static constexpr std::uint32_t kInfDistance = std::numeric_limits<std::uint32_t>::max();

    NodeId anchor = 0;
    std::vector<std::vector<NodeId>> orbits;                          // each sorted; anchor orbit first
    std::vector<std::vector<std::pair<NodeId, NodeId>>> edge_orbits;  // each sorted
    std::vector<Key> keys;                                            // aligned with orbits

    std::size_t orbit_of(NodeId v) const {
        for (std::size_t i = 0; i < orbits.size(); ++i)
            for (NodeId u : orbits[i])
                if (u == v) return i;
        fail(ErrorKind::Contract, "orbit_of: node not in any orbit");
    }
};

inline std::vector<std::uint32_t> anchor_distances(const Graph& g, NodeId anchor) {
    auto adj = g.adjacency();
    std::vector<std::uint32_t> dist(g.num_nodes, OrbitDecomposition::kInfDistance);
    std::deque<NodeId> queue{anchor};
    dist[anchor] = 0;
    while (!queue.empty()) {
        NodeId v = queue.front();
        queue.pop_front();
        for (NodeId u : adj[v])
            if (dist[u] == OrbitDecomposition::kInfDistance) {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
    }
    return dist;
}

inline OrbitDecomposition orbit_decompose(const Graph& subgraph, NodeId anchor,
                                          std::size_t node_cap = 30) {
    std::size_t n = subgraph.num_nodes;
    if (anchor >= n) fail(ErrorKind::Contract, "orbit_decompose: anchor out of range");
    if (n > node_cap)
        fail(ErrorKind::CapExceeded, "orbit_decompose: " + std::to_string(n) + " nodes exceeds cap " +
                                         std::to_string(node_cap));

    auto view = detail::DenseGraphView::build(subgraph, /*use_edge_labels=*/false);
    auto colors = wl_colors(subgraph); // refinement-pruned: images must share WL color
    detail::UnionFind node_uf(n);
    std::size_t edge_count = subgraph.edges.size();
    detail::UnionFind edge_uf(edge_count);

    std::vector<std::vector<int>> edge_index(n, std::vector<int>(n, -1));
    for (std::size_t e = 0; e < edge_count; ++e) {
        auto [u, v] = subgraph.edges[e];
        edge_index[u][v] = static_cast<int>(e);
        edge_index[v][u] = static_cast<int>(e);
    }

    auto absorb = [&](const std::vector<NodeId>& perm) {
        for (std::size_t v = 0; v < n; ++v) node_uf.unite(v, perm[v]);
        for (std::size_t e = 0; e < edge_count; ++e) {
            auto [u, v] = subgraph.edges[e];
            int img = edge_index[perm[u]][perm[v]];
            edge_uf.unite(e, static_cast<std::size_t>(img));
        }
    };

    // Two nodes share an orbit iff some automorphism maps one to the other;
    // each candidate pair gets a complete (seeded) search, so the partition
    // is exact without enumerating the whole group.
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t u = v + 1; u < n; ++u) {
            if (colors[v] != colors[u]) continue;
            if (node_uf.find(v) == node_uf.find(u)) continue;
            auto perm = detail::find_automorphism(view, colors,
                                                  {{static_cast<NodeId>(v), static_cast<NodeId>(u)}});
            if (perm) absorb(*perm);
        }
    }
    // Edge orbits may still be finer than what the witnesses above produced.
    for (std::size_t e1 = 0; e1 < edge_count; ++e1) {
        for (std::size_t e2 = e1 + 1; e2 < edge_count; ++e2) {
            if (edge_uf.find(e1) == edge_uf.find(e2)) continue;
            auto [a, b] = subgraph.edges[e1];
            auto [c, d] = subgraph.edges[e2];
            auto perm = detail::find_automorphism(view, colors, {{a, c}, {b, d}});
            if (!perm) perm = detail::find_automorphism(view, colors, {{a, d}, {b, c}});
            if (perm) absorb(*perm);
        }
    }

    OrbitDecomposition out;
    out.anchor = anchor;
    std::vector<std::vector<NodeId>> orbits;
    {
        std::vector<int> root_slot(n, -1);
        for (std::size_t v = 0; v < n; ++v) {
            auto r = node_uf.find(v);
            if (root_slot[r] < 0) {
                root_slot[r] = static_cast<int>(orbits.size());
                orbits.emplace_back();
            }
            orbits[root_slot[r]].push_back(static_cast<NodeId>(v));
        }
    }

    auto degrees = subgraph.degrees();
    auto dist = anchor_distances(subgraph, anchor);
    std::vector<OrbitDecomposition::Key> keys;
    keys.reserve(orbits.size());
    for (auto& orbit : orbits) {
        std::sort(orbit.begin(), orbit.end());
        OrbitDecomposition::Key key;
        key.size = orbit.size();
        for (NodeId v : orbit) {
            key.degrees.push_back(degrees[v]);
            key.distances.push_back(dist[v]);
        }
        std::sort(key.degrees.begin(), key.degrees.end());
        std::sort(key.distances.begin(), key.distances.end());
        key.ids = orbit;
        keys.push_back(std::move(key));
    }

    std::vector<std::size_t> order(orbits.size());
    std::iota(order.begin(), order.end(), 0);
    std::size_t anchor_orbit = 0;
    for (std::size_t i = 0; i < orbits.size(); ++i)
        if (std::binary_search(orbits[i].begin(), orbits[i].end(), anchor)) anchor_orbit = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        bool aa = a == anchor_orbit, bb = b == anchor_orbit;
        if (aa != bb) return aa; // anchor priority
        return keys[a] < keys[b];
    });
    for (std::size_t i : order) {
        out.orbits.push_back(std::move(orbits[i]));
        out.keys.push_back(std::move(keys[i]));
    }

    // Edge orbits, ordered by the node key scheme lifted to endpoint pairs.
    std::vector<std::vector<std::pair<NodeId, NodeId>>> eorbits;
    {
        std::vector<int> root_slot(std::max<std::size_t>(edge_count, 1), -1);
        for (std::size_t e = 0; e < edge_count; ++e) {
            auto r = edge_uf.find(e);
            if (root_slot[r] < 0) {
                root_slot[r] = static_cast<int>(eorbits.size());
                eorbits.emplace_back();
            }
            eorbits[root_slot[r]].push_back(subgraph.edges[e]);
        }
    }
    struct EdgeKey {
        std::size_t size;
        std::vector<std::pair<std::size_t, std::size_t>> degree_pairs;
        std::vector<std::pair<std::uint32_t, std::uint32_t>> distance_pairs;
        std::vector<std::pair<NodeId, NodeId>> id_pairs;
        auto tie() const { return std::tie(size, degree_pairs, distance_pairs, id_pairs); }
        bool operator<(const EdgeKey& o) const { return tie() < o.tie(); }
    };
    std::vector<EdgeKey> ekeys;
    for (auto& orbit : eorbits) {
        std::sort(orbit.begin(), orbit.end());
        EdgeKey k;
        k.size = orbit.size();
        for (auto [u, v] : orbit) {
            k.degree_pairs.push_back(std::minmax(degrees[u], degrees[v]));
            k.distance_pairs.push_back(std::minmax(dist[u], dist[v]));
        }
        std::sort(k.degree_pairs.begin(), k.degree_pairs.end());
        std::sort(k.distance_pairs.begin(), k.distance_pairs.end());
        k.id_pairs = orbit;
        ekeys.push_back(std::move(k));
    }
    std::vector<std::size_t> eorder(eorbits.size());
    std::iota(eorder.begin(), eorder.end(), 0);
    std::sort(eorder.begin(), eorder.end(),
              [&](std::size_t a, std::size_t b) { return ekeys[a] < ekeys[b]; });
    for (std::size_t i : eorder) out.edge_orbits.push_back(std::move(eorbits[i]));

    return out;
}

} // namespace logicx
