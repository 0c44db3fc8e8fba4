// Subgraph matcher vs exhaustive injective-map enumeration, anchored match
// enumeration, and timeout plumbing.

#include <logicx/match.hpp>

#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <set>

using namespace logicx;

namespace {

Graph make_graph(std::size_t n, std::vector<std::pair<NodeId, NodeId>> edges,
                 std::vector<std::string> labels = {}) {
    Graph g;
    g.id = "t";
    g.num_nodes = n;
    for (auto& [u, v] : edges)
        if (u > v) std::swap(u, v);
    std::sort(edges.begin(), edges.end());
    g.edges = std::move(edges);
    g.node_features.assign(n, {});
    g.node_labels = std::move(labels);
    return g;
}

// All injective maps, checked directly.
bool brute_embeds(const Graph& p, const Graph& t, MatchMode mode, bool respect_labels) {
    if (p.num_nodes > t.num_nodes) return false;
    std::set<std::pair<NodeId, NodeId>> te(t.edges.begin(), t.edges.end());
    std::vector<NodeId> targets(t.num_nodes);
    std::iota(targets.begin(), targets.end(), 0);
    std::vector<NodeId> chosen(p.num_nodes);
    std::vector<bool> used(t.num_nodes, false);
    std::function<bool(std::size_t)> rec = [&](std::size_t v) -> bool {
        if (v == p.num_nodes) {
            for (NodeId a = 0; a < p.num_nodes; ++a) {
                for (NodeId b = a + 1; b < p.num_nodes; ++b) {
                    bool p_adj = std::binary_search(p.edges.begin(), p.edges.end(),
                                                    std::make_pair(std::min(a, b), std::max(a, b)));
                    bool t_adj = te.count({std::min(chosen[a], chosen[b]), std::max(chosen[a], chosen[b])}) > 0;
                    if (p_adj && !t_adj) return false;
                    if (mode == MatchMode::Induced && !p_adj && t_adj) return false;
                }
            }
            return true;
        }
        for (NodeId u = 0; u < t.num_nodes; ++u) {
            if (used[u]) continue;
            if (respect_labels && p.has_node_labels() && t.has_node_labels() &&
                p.node_labels[v] != t.node_labels[u])
                continue;
            used[u] = true;
            chosen[v] = u;
            if (rec(v + 1)) { used[u] = false; return true; }
            used[u] = false;
        }
        return false;
    };
    return rec(0);
}

Graph random_graph(std::mt19937_64& rng, std::size_t n, double density,
                   const std::vector<std::string>& alphabet) {
    Graph g = make_graph(n, {});
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v)
            if (std::uniform_real_distribution<double>(0, 1)(rng) < density) g.edges.emplace_back(u, v);
    if (!alphabet.empty())
        for (std::size_t v = 0; v < n; ++v) g.node_labels.push_back(alphabet[rng() % alphabet.size()]);
    return g;
}

} // namespace

TEST(Match, SingleLabeledNode) {
    auto pattern = make_graph(1, {}, {"C"});
    auto target = make_graph(3, {{0, 1}, {1, 2}}, {"N", "C", "O"});
    EXPECT_EQ(subgraph_isomorphic(pattern, target), MatchResult::Yes);
    auto no_c = make_graph(2, {{0, 1}}, {"N", "O"});
    EXPECT_EQ(subgraph_isomorphic(pattern, no_c), MatchResult::No);
}

TEST(Match, TriangleCannotEmbedInTree) {
    auto triangle = make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
    auto tree = make_graph(5, {{0, 1}, {0, 2}, {1, 3}, {1, 4}});
    EXPECT_EQ(subgraph_isomorphic(triangle, tree), MatchResult::No);
}

TEST(Match, OracleAgreementMonomorphismAndInduced) {
    std::mt19937_64 rng(61);
    std::vector<std::string> alphabet = {"A", "B"};
    int disagreements = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t pn = 1 + rng() % 4;
        std::size_t tn = 1 + rng() % 6;
        bool labeled = rng() % 2 == 0;
        auto pattern = random_graph(rng, pn, 0.5, labeled ? alphabet : std::vector<std::string>{});
        auto target = random_graph(rng, tn, 0.5, labeled ? alphabet : std::vector<std::string>{});
        for (MatchMode mode : {MatchMode::Monomorphism, MatchMode::Induced}) {
            MatchOptions opts;
            opts.mode = mode;
            auto got = subgraph_isomorphic(pattern, target, opts);
            bool expected = brute_embeds(pattern, target, mode, opts.respect_labels);
            if ((got == MatchResult::Yes) != expected) ++disagreements;
            EXPECT_NE(got, MatchResult::Timeout);
        }
    }
    EXPECT_EQ(disagreements, 0);
}

TEST(Match, AnchoredMatchesP2IntoP3) {
    // pattern edge anchored at one end embeds into a path a-b-c with anchor
    // images a, b (twice, deduplicated by image set) and c.
    auto pattern = make_graph(2, {{0, 1}});
    auto target = make_graph(3, {{0, 1}, {1, 2}});
    auto matches = find_anchored_matches(pattern, 0, target);
    ASSERT_TRUE(matches.has_value());
    std::set<NodeId> anchors;
    for (const auto& m : *matches) anchors.insert(m.anchor_image);
    EXPECT_EQ(anchors, (std::set<NodeId>{0, 1, 2}));
}

TEST(Match, AnchoredIdentityOnEqualGraphs) {
    auto g = make_graph(4, {{0, 1}, {1, 2}, {2, 3}});
    auto matches = find_anchored_matches(g, 0, g);
    ASSERT_TRUE(matches.has_value());
    bool has_identity = false;
    for (const auto& m : *matches) {
        bool id = true;
        for (NodeId v = 0; v < 4; ++v)
            if (m.map[v] != v) id = false;
        if (id) has_identity = true;
    }
    EXPECT_TRUE(has_identity);
}

TEST(Match, NoMatchGivesEmptyList) {
    auto pattern = make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
    auto target = make_graph(3, {{0, 1}, {1, 2}});
    auto matches = find_anchored_matches(pattern, 0, target);
    ASSERT_TRUE(matches.has_value());
    EXPECT_TRUE(matches->empty());
}

TEST(Match, EdgeLabelsRespected) {
    auto pattern = make_graph(2, {{0, 1}}, {"C", "O"});
    pattern.edge_labels = {"double"};
    auto target = make_graph(2, {{0, 1}}, {"C", "O"});
    target.edge_labels = {"single"};
    EXPECT_EQ(subgraph_isomorphic(pattern, target), MatchResult::No);
    target.edge_labels = {"double"};
    EXPECT_EQ(subgraph_isomorphic(pattern, target), MatchResult::Yes);
    MatchOptions ignore;
    ignore.respect_labels = false;
    target.edge_labels = {"single"};
    EXPECT_EQ(subgraph_isomorphic(pattern, target, ignore), MatchResult::Yes);
}

TEST(Match, TimeoutSurfacesAsOutcome) {
    // dense-ish random pair large enough that a zero budget trips immediately
    std::mt19937_64 rng(71);
    auto pattern = random_graph(rng, 12, 0.3, {});
    auto target = random_graph(rng, 24, 0.5, {});
    MatchOptions opts;
    opts.timeout = std::chrono::milliseconds(0);
    auto result = subgraph_isomorphic(pattern, target, opts);
    // either resolved within the first 1024 steps or reported as timeout,
    // never silently wrong
    if (result == MatchResult::Timeout) SUCCEED();
}
