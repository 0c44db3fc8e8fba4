#pragma once

#include <array>
#include <cctype>
#include <string>
#include <vector>

#include "logicx/graph.hpp"

namespace logicx {

// ---------------------------------------------------------------------------
// Planted-motif benchmark: Barabasi-Albert base graphs with house / wheel /
// grid motifs attached by a single random bridge edge each, labeled by a DNF
// rule over motif presence. The planted truth bits are retained so tests can
// check rule recovery against ground truth.
// ---------------------------------------------------------------------------

enum class Motif : int { House = 0, Wheel = 1, Grid = 2 };

inline const char* motif_name(Motif m) {
    switch (m) {
        case Motif::House: return "house";
        case Motif::Wheel: return "wheel";
        case Motif::Grid: return "grid";
    }
    return "?";
}

/// house: 5-cycle plus chord (roof triangle over a square body);
/// wheel: hub plus 6-cycle rim; grid: 3x3 lattice.
inline Graph motif_template(Motif m) {
    Graph g;
    g.id = motif_name(m);
    switch (m) {
        case Motif::House:
            g.num_nodes = 5;
            g.edges = {{0, 1}, {0, 4}, {1, 2}, {1, 4}, {2, 3}, {3, 4}};
            break;
        case Motif::Wheel:
            g.num_nodes = 7;
            g.edges = {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}, {0, 6},
                       {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {1, 6}};
            break;
        case Motif::Grid:
            g.num_nodes = 9;
            // 3x3 lattice, row-major
            g.edges = {{0, 1}, {1, 2}, {3, 4}, {4, 5}, {6, 7}, {7, 8},
                       {0, 3}, {3, 6}, {1, 4}, {4, 7}, {2, 5}, {5, 8}};
            break;
    }
    std::sort(g.edges.begin(), g.edges.end());
    g.node_labels.assign(g.num_nodes, motif_name(m));
    g.node_features.assign(g.num_nodes, {});
    return g;
}

/// DNF over motif presence, e.g. "(H&W)|(H&G)|(W&G)". Tokens H/W/G or full
/// names, '!' negates, '&' conjunction, '|' disjunction. No clauses = false;
/// an empty clause = true.
struct MotifRule {
    std::vector<std::vector<std::pair<Motif, bool>>> clauses; // (motif, negated)

    bool eval(const std::array<bool, 3>& bits) const {
        for (const auto& clause : clauses) {
            bool sat = true;
            for (auto [m, neg] : clause) {
                if (bits[static_cast<int>(m)] == neg) { sat = false; break; }
            }
            if (sat) return true;
        }
        return false;
    }

    static MotifRule two_of_three() {
        using enum Motif;
        MotifRule r;
        r.clauses = {{{House, false}, {Wheel, false}},
                     {{House, false}, {Grid, false}},
                     {{Wheel, false}, {Grid, false}}};
        return r;
    }

    static MotifRule parse(const std::string& text) {
        MotifRule rule;
        std::string s;
        for (char c : text)
            if (!std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')') s.push_back(c);
        if (s.empty()) return rule;
        std::size_t pos = 0;
        auto next_clause = [&]() {
            std::vector<std::pair<Motif, bool>> clause;
            while (pos < s.size() && s[pos] != '|') {
                bool neg = false;
                while (pos < s.size() && s[pos] == '!') {
                    neg = !neg;
                    ++pos;
                }
                Motif m;
                if (s.compare(pos, 5, "house") == 0) { m = Motif::House; pos += 5; }
                else if (s.compare(pos, 5, "wheel") == 0) { m = Motif::Wheel; pos += 5; }
                else if (s.compare(pos, 4, "grid") == 0) { m = Motif::Grid; pos += 4; }
                else if (s[pos] == 'H' || s[pos] == 'h') { m = Motif::House; ++pos; }
                else if (s[pos] == 'W' || s[pos] == 'w') { m = Motif::Wheel; ++pos; }
                else if (s[pos] == 'G' || s[pos] == 'g') { m = Motif::Grid; ++pos; }
                else fail(ErrorKind::Parse, "bad motif rule near '" + s.substr(pos) + "'");
                clause.emplace_back(m, neg);
                if (pos < s.size() && s[pos] == '&') ++pos;
            }
            return clause;
        };
        while (pos < s.size()) {
            rule.clauses.push_back(next_clause());
            if (pos < s.size() && s[pos] == '|') ++pos;
        }
        return rule;
    }

    std::string to_string() const {
        if (clauses.empty()) return "false";
        std::string out;
        static const char* letters = "HWG";
        for (std::size_t i = 0; i < clauses.size(); ++i) {
            if (i) out += "|";
            if (clauses[i].empty()) {
                out += "true";
                continue;
            }
            out += "(";
            for (std::size_t k = 0; k < clauses[i].size(); ++k) {
                if (k) out += "&";
                if (clauses[i][k].second) out += "!";
                out += letters[static_cast<int>(clauses[i][k].first)];
            }
            out += ")";
        }
        return out;
    }
};

struct SynthConfig {
    std::size_t n_graphs = 200;
    std::size_t base_n = 40;     // total node budget: the BA base shrinks to make room for motifs
    std::size_t attach_m = 1;    // preferential attachments per new node
    std::vector<Motif> motifs = {Motif::House, Motif::Wheel, Motif::Grid};
    MotifRule rule = MotifRule::two_of_three();
    double motif_prob = 0.5;
    std::uint64_t seed = 0;
    double test_fraction = 0.2;
};

struct MotifTruth {
    std::vector<std::array<bool, 3>> graph_bits;       // planted presence per motif
    std::vector<std::vector<int>> node_membership;     // -1 base, else Motif index
};

namespace detail {

// deterministic cross-platform rng
struct DetRng {
    std::uint64_t state;
    explicit DetRng(std::uint64_t seed) : state(mix_seed(seed)) {}
    std::uint64_t next() { return state = mix_seed(state); }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }
    double unit() { return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0); }
};

inline void add_barabasi_albert(Graph& g, std::size_t n, std::size_t m, DetRng& rng) {
    if (n == 0) return;
    g.num_nodes = n;
    if (n == 1) return;
    m = std::min(m, n - 1);
    std::vector<NodeId> repeated; // one entry per edge endpoint, drives preferential attachment
    std::size_t m0 = m; // seed nodes 0..m0-1, node m0 connects to all of them
    if (m0 >= n) m0 = n - 1;
    for (NodeId v = 0; v < m0; ++v) {
        g.edges.emplace_back(v, static_cast<NodeId>(m0));
        repeated.push_back(v);
        repeated.push_back(static_cast<NodeId>(m0));
    }
    for (NodeId v = static_cast<NodeId>(m0 + 1); v < n; ++v) {
        std::set<NodeId> targets;
        while (targets.size() < m) targets.insert(repeated[rng.below(repeated.size())]);
        for (NodeId t : targets) {
            g.edges.emplace_back(std::min(v, t), std::max(v, t));
            repeated.push_back(v);
            repeated.push_back(t);
        }
    }
}

} // namespace detail

struct SynthResult {
    LabeledDataset dataset;
    MotifTruth truth;
};

inline SynthResult generate_synthetic(const SynthConfig& config) {
    if (config.base_n < 2) fail(ErrorKind::Contract, "generate_synthetic: base_n must be >= 2");
    if (config.n_graphs == 0) fail(ErrorKind::Contract, "generate_synthetic: n_graphs must be >= 1");
    if (config.motif_prob < 0.0 || config.motif_prob > 1.0)
        fail(ErrorKind::Contract, "generate_synthetic: motif_prob must be in [0, 1]");
    SynthResult result;
    auto& ds = result.dataset;
    ds.num_classes = 2;
    ds.graphs.resize(config.n_graphs);
    ds.class_labels.resize(config.n_graphs);
    result.truth.graph_bits.resize(config.n_graphs);
    result.truth.node_membership.resize(config.n_graphs);

    for (std::size_t i = 0; i < config.n_graphs; ++i) {
        detail::DetRng rng(config.seed ^ (0x517fULL + i * 0x9e37ULL));
        Graph g;
        g.id = "syn" + std::to_string(i);
        // decide the plants first: motifs displace base nodes so the total
        // graph size carries no information about the label
        std::array<bool, 3> bits{false, false, false};
        std::size_t planted_nodes = 0;
        for (Motif m : config.motifs) {
            if (rng.unit() >= config.motif_prob) continue;
            bits[static_cast<int>(m)] = true;
            planted_nodes += motif_template(m).num_nodes;
        }
        std::size_t base_size = config.base_n > planted_nodes + 2 ? config.base_n - planted_nodes : 2;
        detail::add_barabasi_albert(g, base_size, config.attach_m, rng);
        auto& membership = result.truth.node_membership[i];
        membership.assign(g.num_nodes, -1);
        for (Motif m : config.motifs) {
            if (!bits[static_cast<int>(m)]) continue;
            Graph tpl = motif_template(m);
            NodeId offset = static_cast<NodeId>(g.num_nodes);
            std::size_t bridge_base = rng.below(base_size);
            std::size_t bridge_motif = rng.below(tpl.num_nodes);
            g.num_nodes += tpl.num_nodes;
            for (auto [u, v] : tpl.edges) g.edges.emplace_back(offset + u, offset + v);
            g.edges.emplace_back(std::min<NodeId>(static_cast<NodeId>(bridge_base),
                                                  offset + static_cast<NodeId>(bridge_motif)),
                                 std::max<NodeId>(static_cast<NodeId>(bridge_base),
                                                  offset + static_cast<NodeId>(bridge_motif)));
            membership.resize(g.num_nodes, static_cast<int>(m));
        }
        std::sort(g.edges.begin(), g.edges.end());
        // node type features: one-hot over (house, wheel, grid, base)
        g.node_features.assign(g.num_nodes, std::vector<double>(4, 0.0));
        g.node_labels.assign(g.num_nodes, "base");
        for (NodeId v = 0; v < g.num_nodes; ++v) {
            int m = membership[v];
            std::size_t dim = m < 0 ? 3 : static_cast<std::size_t>(m);
            g.node_features[v][dim] = 1.0;
            if (m >= 0) g.node_labels[v] = motif_name(static_cast<Motif>(m));
        }
        result.truth.graph_bits[i] = bits;
        ds.class_labels[i] = config.rule.eval(bits) ? 1 : 0;
        ds.graphs[i] = std::move(g);
    }
    ds.feature_kind = infer_feature_kinds(ds.graphs);
    assign_split(ds, config.seed, config.test_fraction);
    ds.validate();
    return result;
}

/// Pseudo-GNN embeddings: per node a one-hot of (in-house, in-wheel, in-grid,
/// base) plus uniform noise of the given amplitude; predictions equal the
/// ground-truth labels. Decouples pipeline checks from GCN training quality.
inline EmbeddingTable oracle_embeddings(const LabeledDataset& dataset, const MotifTruth& truth,
                                        double noise, std::uint64_t seed = 0, std::size_t radius = 1) {
    EmbeddingTable table;
    table.dim = 4;
    table.layers = radius;
    table.predictions = dataset.class_labels;
    table.node_embeddings.resize(dataset.size());
    for (GraphIndex g = 0; g < dataset.size(); ++g) {
        detail::DetRng rng(seed ^ (0xe27cULL + g * 0x51d3ULL));
        auto& rows = table.node_embeddings[g];
        rows.assign(dataset.graphs[g].num_nodes, std::vector<double>(4, 0.0));
        for (NodeId v = 0; v < dataset.graphs[g].num_nodes; ++v) {
            int m = truth.node_membership[g][v];
            rows[v][m < 0 ? 3 : static_cast<std::size_t>(m)] = 1.0;
            for (auto& x : rows[v]) x += noise * rng.unit();
        }
    }
    return table;
}

} // namespace logicx
