#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "logicx/canonical.hpp"
#include "logicx/decision_tree.hpp"
#include "logicx/orbits.hpp"
#include "logicx/predicates.hpp"

namespace logicx {

// ---------------------------------------------------------------------------
// Structure-aware feature vectors Z: per ordered orbit, identity for
// singletons, symbol-frequency counts for multi-node orbits of discrete
// graphs, per-dimension means otherwise, plus endpoint-symbol-pair counts
// per edge orbit when symbols exist.
// ---------------------------------------------------------------------------

struct GroundingContext {
    std::vector<std::string> symbols; // sorted global alphabet, may be empty
    bool discrete = false;            // all feature dims one-hot
    std::size_t feature_dim = 0;

    static GroundingContext from_dataset(const LabeledDataset& dataset) {
        GroundingContext ctx;
        ctx.symbols = dataset.symbol_alphabet();
        ctx.discrete = dataset.all_features_discrete();
        ctx.feature_dim = dataset.feature_dim();
        return ctx;
    }

    std::size_t symbol_index(const std::string& s) const {
        auto it = std::lower_bound(symbols.begin(), symbols.end(), s);
        if (it == symbols.end() || *it != s)
            fail(ErrorKind::Contract, "unknown node symbol '" + s + "'");
        return static_cast<std::size_t>(it - symbols.begin());
    }

    std::size_t pair_count() const { return symbols.size() * (symbols.size() + 1) / 2; }

    // index of the unordered symbol pair (a, b) in upper-triangle order
    std::size_t pair_index(std::size_t a, std::size_t b) const {
        if (a > b) std::swap(a, b);
        std::size_t s = symbols.size();
        return a * s - a * (a - 1) / 2 + (b - a);
    }

    std::pair<std::string, std::string> pair_symbols(std::size_t index) const {
        for (std::size_t a = 0; a < symbols.size(); ++a) {
            std::size_t width = symbols.size() - a;
            if (index < width) return {symbols[a], symbols[a + index]};
            index -= width;
        }
        fail(ErrorKind::Contract, "symbol pair index out of range");
    }

    nlohmann::json to_json() const {
        return {{"symbols", symbols}, {"discrete", discrete}, {"feature_dim", feature_dim}};
    }
    static GroundingContext from_json(const nlohmann::json& j) {
        GroundingContext ctx;
        ctx.symbols = j.at("symbols").get<std::vector<std::string>>();
        ctx.discrete = j.at("discrete").get<bool>();
        ctx.feature_dim = j.at("feature_dim").get<std::size_t>();
        return ctx;
    }
};

struct ZLayout {
    enum class Kind { SingletonRaw, SymbolCounts, DimMeans, EdgePairCounts };

    struct Block {
        Kind kind;
        std::size_t orbit;  // node orbit index, or edge orbit index for EdgePairCounts
        std::size_t offset;
        std::size_t width;
    };

    std::vector<Block> blocks;
    std::size_t total = 0;

    // display index of a block's orbit: node orbits first, then edge orbits
    std::string describe_dim(std::size_t dim, const GroundingContext& ctx,
                             std::size_t node_orbit_count) const {
        for (const auto& b : blocks) {
            if (dim < b.offset || dim >= b.offset + b.width) continue;
            std::size_t k = dim - b.offset;
            switch (b.kind) {
                case Kind::SingletonRaw:
                    return "f_" + std::to_string(k) + "(orbit " + std::to_string(b.orbit) + ")";
                case Kind::DimMeans:
                    return "mean f_" + std::to_string(k) + "(orbit " + std::to_string(b.orbit) + ")";
                case Kind::SymbolCounts:
                    return "#" + ctx.symbols[k] + "(orbit " + std::to_string(b.orbit) + ")";
                case Kind::EdgePairCounts: {
                    auto [a, bsym] = ctx.pair_symbols(k);
                    return "#(" + a + ", " + bsym + ")(orbit " +
                           std::to_string(node_orbit_count + b.orbit) + ")";
                }
            }
        }
        return "z_" + std::to_string(dim);
    }

    bool is_count_dim(std::size_t dim) const {
        for (const auto& b : blocks)
            if (dim >= b.offset && dim < b.offset + b.width)
                return b.kind == Kind::SymbolCounts || b.kind == Kind::EdgePairCounts;
        return false;
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& b : blocks)
            arr.push_back({{"kind", static_cast<int>(b.kind)},
                           {"orbit", b.orbit},
                           {"offset", b.offset},
                           {"width", b.width}});
        return {{"blocks", std::move(arr)}, {"total", total}};
    }
    static ZLayout from_json(const nlohmann::json& j) {
        ZLayout l;
        l.total = j.at("total").get<std::size_t>();
        for (const auto& jb : j.at("blocks"))
            l.blocks.push_back({static_cast<Kind>(jb.at("kind").get<int>()),
                                jb.at("orbit").get<std::size_t>(), jb.at("offset").get<std::size_t>(),
                                jb.at("width").get<std::size_t>()});
        return l;
    }
};

/// Layout depends only on the orbit structure and the dataset context, so all
/// subgraphs sharing one structural hash see identical widths and kinds.
inline ZLayout layout_for(const OrbitDecomposition& decomp, const Graph& subgraph,
                          const GroundingContext& ctx) {
    ZLayout layout;
    bool symbols = !ctx.symbols.empty() && subgraph.has_node_labels();
    for (std::size_t i = 0; i < decomp.orbits.size(); ++i) {
        ZLayout::Block b{};
        b.orbit = i;
        b.offset = layout.total;
        if (decomp.orbits[i].size() == 1) {
            b.kind = ZLayout::Kind::SingletonRaw;
            b.width = ctx.feature_dim;
        } else if (symbols && ctx.discrete) {
            b.kind = ZLayout::Kind::SymbolCounts;
            b.width = ctx.symbols.size();
        } else {
            b.kind = ZLayout::Kind::DimMeans;
            b.width = ctx.feature_dim;
        }
        if (b.width == 0) continue;
        layout.total += b.width;
        layout.blocks.push_back(b);
    }
    if (symbols) {
        for (std::size_t i = 0; i < decomp.edge_orbits.size(); ++i) {
            ZLayout::Block b{};
            b.kind = ZLayout::Kind::EdgePairCounts;
            b.orbit = i;
            b.offset = layout.total;
            b.width = ctx.pair_count();
            if (b.width == 0) continue;
            layout.total += b.width;
            layout.blocks.push_back(b);
        }
    }
    return layout;
}

inline std::vector<double> build_z(const Graph& subgraph, const OrbitDecomposition& decomp,
                                   const GroundingContext& ctx) {
    auto layout = layout_for(decomp, subgraph, ctx);
    std::vector<double> z(layout.total, 0.0);
    for (const auto& b : layout.blocks) {
        switch (b.kind) {
            case ZLayout::Kind::SingletonRaw: {
                NodeId v = decomp.orbits[b.orbit][0];
                for (std::size_t k = 0; k < b.width; ++k) z[b.offset + k] = subgraph.node_features[v][k];
                break;
            }
            case ZLayout::Kind::SymbolCounts: {
                for (NodeId v : decomp.orbits[b.orbit])
                    z[b.offset + ctx.symbol_index(subgraph.node_labels[v])] += 1.0;
                break;
            }
            case ZLayout::Kind::DimMeans: {
                const auto& orbit = decomp.orbits[b.orbit];
                for (NodeId v : orbit)
                    for (std::size_t k = 0; k < b.width; ++k) z[b.offset + k] += subgraph.node_features[v][k];
                for (std::size_t k = 0; k < b.width; ++k) z[b.offset + k] /= static_cast<double>(orbit.size());
                break;
            }
            case ZLayout::Kind::EdgePairCounts: {
                for (auto [u, v] : decomp.edge_orbits[b.orbit]) {
                    auto a = ctx.symbol_index(subgraph.node_labels[u]);
                    auto c = ctx.symbol_index(subgraph.node_labels[v]);
                    z[b.offset + ctx.pair_index(a, c)] += 1.0;
                }
                break;
            }
        }
    }
    return z;
}

// ---------------------------------------------------------------------------
// Grounded predicates: orbit template + grounding tree + ranked
// representative subgraphs drawn from real training instances.
// ---------------------------------------------------------------------------

inline nlohmann::json subgraph_to_json(const Graph& g) {
    nlohmann::json j;
    j["id"] = g.id;
    j["num_nodes"] = g.num_nodes;
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [u, v] : g.edges) edges.push_back({u, v});
    j["edges"] = std::move(edges);
    j["x"] = g.node_features;
    if (g.has_node_labels()) j["node_labels"] = g.node_labels;
    if (g.has_edge_labels()) j["edge_labels"] = g.edge_labels;
    return j;
}

inline Graph subgraph_from_json(const nlohmann::json& j) {
    Graph g;
    g.id = j.at("id").get<std::string>();
    g.num_nodes = j.at("num_nodes").get<std::size_t>();
    for (const auto& e : j.at("edges"))
        g.edges.emplace_back(e.at(0).get<NodeId>(), e.at(1).get<NodeId>());
    g.node_features = j.at("x").get<std::vector<std::vector<double>>>();
    if (g.node_features.empty()) g.node_features.assign(g.num_nodes, {});
    if (j.contains("node_labels")) g.node_labels = j.at("node_labels").get<std::vector<std::string>>();
    if (j.contains("edge_labels")) g.edge_labels = j.at("edge_labels").get<std::vector<std::string>>();
    return g;
}

struct Representative {
    Graph subgraph;       // an actual receptive field from the training data
    NodeId anchor = 0;
    std::string canonical;
    double coverage = 0.0;     // fraction of activating graphs containing this form
    std::size_t graph_count = 0;
    std::string source_graph;  // id of one training graph it occurs in

    nlohmann::json to_json() const {
        return {{"subgraph", subgraph_to_json(subgraph)}, {"anchor", anchor},
                {"canonical", canonical},                 {"coverage", coverage},
                {"graph_count", graph_count},             {"source_graph", source_graph}};
    }
    static Representative from_json(const nlohmann::json& j) {
        Representative r;
        r.subgraph = subgraph_from_json(j.at("subgraph"));
        r.anchor = j.at("anchor").get<NodeId>();
        r.canonical = j.at("canonical").get<std::string>();
        r.coverage = j.at("coverage").get<double>();
        r.graph_count = j.at("graph_count").get<std::size_t>();
        r.source_graph = j.at("source_graph").get<std::string>();
        return r;
    }
};

enum class GroundingKind { FeatureRule, StructureOnly };

struct GroundedPredicate {
    int id = 0;
    std::string struct_hash;
    GroundingKind kind = GroundingKind::StructureOnly;
    std::vector<Representative> representatives;

    // FeatureRule only: shared per hash group but stored per predicate for
    // self-contained evaluation.
    DecisionTree tree;                       // labels are local group classes
    std::vector<int> group_members;          // predicate ids, ascending; tree class i -> group_members[i]
    ZLayout layout;
    Graph template_subgraph;
    NodeId template_anchor = 0;
    OrbitDecomposition template_orbits;
    double grounding_accuracy = 1.0;         // tree accuracy on training supporters
    std::vector<std::string> rule_cases;     // rendered DNF cases for this predicate

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["id"] = id;
        j["struct_hash"] = struct_hash;
        j["kind"] = kind == GroundingKind::FeatureRule ? "feature-rule" : "structure-only";
        nlohmann::json reps = nlohmann::json::array();
        for (const auto& r : representatives) reps.push_back(r.to_json());
        j["representatives"] = std::move(reps);
        if (kind == GroundingKind::FeatureRule) {
            j["tree"] = tree.to_json();
            j["group_members"] = group_members;
            j["layout"] = layout.to_json();
            j["template"] = subgraph_to_json(template_subgraph);
            j["template_anchor"] = template_anchor;
            nlohmann::json orbits = nlohmann::json::array();
            for (const auto& o : template_orbits.orbits) orbits.push_back(o);
            j["template_orbits"] = std::move(orbits);
            nlohmann::json eorbits = nlohmann::json::array();
            for (const auto& eo : template_orbits.edge_orbits) {
                nlohmann::json edges = nlohmann::json::array();
                for (auto [u, v] : eo) edges.push_back({u, v});
                eorbits.push_back(std::move(edges));
            }
            j["template_edge_orbits"] = std::move(eorbits);
            j["grounding_accuracy"] = grounding_accuracy;
            j["rule_cases"] = rule_cases;
        }
        return j;
    }
};

struct GroundingConfig {
    int depth = 3;
    std::size_t orbit_cap = 30;
    std::size_t top_k = 5;
    unsigned jobs = 1;
};

struct GroundedModel {
    std::size_t radius = 1;
    bool anchored = true;
    std::size_t orbit_cap = 30;
    GroundingContext context;
    std::vector<GroundedPredicate> predicates; // indexed by predicate id

    nlohmann::json to_json() const {
        nlohmann::json preds = nlohmann::json::array();
        for (const auto& p : predicates) preds.push_back(p.to_json());
        return {{"L", radius},
                {"anchored", anchored},
                {"orbit_cap", orbit_cap},
                {"context", context.to_json()},
                {"predicates", std::move(preds)}};
    }

    static GroundedModel from_json(const nlohmann::json& j) {
        GroundedModel m;
        m.radius = j.at("L").get<std::size_t>();
        m.anchored = j.at("anchored").get<bool>();
        m.orbit_cap = j.at("orbit_cap").get<std::size_t>();
        m.context = GroundingContext::from_json(j.at("context"));
        for (const auto& jp : j.at("predicates")) {
            GroundedPredicate p;
            p.id = jp.at("id").get<int>();
            p.struct_hash = jp.at("struct_hash").get<std::string>();
            p.kind = jp.at("kind").get<std::string>() == "feature-rule" ? GroundingKind::FeatureRule
                                                                        : GroundingKind::StructureOnly;
            for (const auto& jr : jp.at("representatives"))
                p.representatives.push_back(Representative::from_json(jr));
            if (p.kind == GroundingKind::FeatureRule) {
                p.tree = DecisionTree::from_json(jp.at("tree"));
                p.group_members = jp.at("group_members").get<std::vector<int>>();
                p.layout = ZLayout::from_json(jp.at("layout"));
                p.template_subgraph = subgraph_from_json(jp.at("template"));
                p.template_anchor = jp.at("template_anchor").get<NodeId>();
                p.grounding_accuracy = jp.at("grounding_accuracy").get<double>();
                p.rule_cases = jp.at("rule_cases").get<std::vector<std::string>>();
                // deterministic re-derivation beats serializing the orbit arrays
                p.template_orbits = orbit_decompose(p.template_subgraph, p.template_anchor, m.orbit_cap);
            }
            m.predicates.push_back(std::move(p));
        }
        return m;
    }
};

namespace detail {

inline std::string render_literal(const PathLiteral& lit, const ZLayout& layout,
                                  const GroundingContext& ctx, std::size_t node_orbit_count) {
    std::string name = layout.describe_dim(static_cast<std::size_t>(lit.feature), ctx, node_orbit_count);
    if (layout.is_count_dim(static_cast<std::size_t>(lit.feature))) {
        // integer-valued count dims render as inclusive integer bounds
        if (lit.negated) return name + " <= " + std::to_string(static_cast<long long>(std::floor(lit.threshold)));
        return name + " >= " + std::to_string(static_cast<long long>(std::ceil(lit.threshold)));
    }
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", lit.threshold);
    return name + (lit.negated ? " < " : " >= ") + buf;
}

} // namespace detail

/// Grounds every predicate. Predicates sharing a structural hash with others
/// get a decision tree over Z that tells them apart; unique hashes stay
/// structure-only and are grounded by the presence of their topology.
inline GroundedModel ground_predicates(const PredicateSet& set, const LabeledDataset& dataset,
                                       const EmbeddingTable& embeddings, const GroundingConfig& config = {}) {
    GroundedModel model;
    model.radius = set.radius;
    model.anchored = set.anchored;
    model.orbit_cap = config.orbit_cap;
    model.context = GroundingContext::from_dataset(dataset);
    model.predicates.resize(set.size());

    auto train = dataset.split_indices(Split::Train);

    // supporters per predicate, in dataset order
    struct Supporter {
        GraphIndex graph;
        NodeId node;
    };
    std::vector<std::vector<Supporter>> supporters(set.size());
    {
        std::vector<std::vector<std::optional<int>>> ids(train.size());
        parallel_for(train.size(), config.jobs, [&](std::size_t i) {
            GraphIndex g = train[i];
            const Graph& graph = dataset.graphs[g];
            ids[i].resize(graph.num_nodes);
            for (NodeId v = 0; v < graph.num_nodes; ++v) {
                auto key = node_pattern(graph, v, embeddings.at(g, v), set.dims, set.thresholds,
                                        set.radius, set.anchored);
                ids[i][v] = set.find(key.first, key.second);
            }
        });
        for (std::size_t i = 0; i < train.size(); ++i)
            for (NodeId v = 0; v < ids[i].size(); ++v)
                if (ids[i][v]) supporters[static_cast<std::size_t>(*ids[i][v])].push_back({train[i], v});
    }

    // representatives, independent per predicate
    parallel_for(set.size(), config.jobs, [&](std::size_t pi) {
        auto& gp = model.predicates[pi];
        gp.id = static_cast<int>(pi);
        gp.struct_hash = set.predicates[pi].struct_hash;
        struct FormStats {
            std::set<GraphIndex> graphs;
            Representative rep;
        };
        std::map<std::string, FormStats> forms;
        std::set<GraphIndex> activating;
        for (const auto& s : supporters[pi]) {
            activating.insert(s.graph);
            auto rf = extract_receptive_field(dataset.graphs[s.graph], s.node, set.radius);
            auto canon = canonical_form(rf.subgraph, rf.center_local);
            auto it = forms.find(canon);
            if (it == forms.end()) {
                FormStats fs;
                fs.rep.subgraph = rf.subgraph;
                fs.rep.anchor = rf.center_local;
                fs.rep.canonical = canon;
                fs.rep.source_graph = dataset.graphs[s.graph].id;
                it = forms.emplace(std::move(canon), std::move(fs)).first;
            }
            it->second.graphs.insert(s.graph);
        }
        std::vector<Representative> reps;
        for (auto& [canon, fs] : forms) {
            fs.rep.graph_count = fs.graphs.size();
            fs.rep.coverage = activating.empty()
                                  ? 0.0
                                  : static_cast<double>(fs.graphs.size()) / static_cast<double>(activating.size());
            reps.push_back(std::move(fs.rep));
        }
        std::sort(reps.begin(), reps.end(), [](const Representative& a, const Representative& b) {
            if (a.coverage != b.coverage) return a.coverage > b.coverage;
            return a.canonical < b.canonical;
        });
        if (reps.size() > config.top_k) reps.resize(config.top_k);
        gp.representatives = std::move(reps);
    });

    // hash groups -> grounding trees
    std::map<std::string, std::vector<int>> groups;
    for (const auto& p : set.predicates) groups[p.struct_hash].push_back(p.id);
    std::vector<const std::vector<int>*> multi;
    std::vector<const std::string*> multi_hash;
    for (auto& [hash, members] : groups) {
        if (members.size() < 2) continue;
        std::sort(members.begin(), members.end());
        multi.push_back(&members);
        multi_hash.push_back(&hash);
    }

    parallel_for(multi.size(), config.jobs, [&](std::size_t gi) {
        const auto& members = *multi[gi];
        // template: first supporter of the lowest predicate id
        const auto& first_supporters = supporters[static_cast<std::size_t>(members[0])];
        if (first_supporters.empty()) return;
        auto template_rf = extract_receptive_field(dataset.graphs[first_supporters[0].graph],
                                                   first_supporters[0].node, set.radius);
        OrbitDecomposition template_orbits;
        try {
            template_orbits = orbit_decompose(template_rf.subgraph, template_rf.center_local,
                                              config.orbit_cap);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::CapExceeded) throw;
            log_warn("grounding: hash " + *multi_hash[gi] +
                     " exceeds the orbit cap; predicates downgraded to structure-only");
            return; // representatives stay intact, kind stays StructureOnly
        }
        auto layout = layout_for(template_orbits, template_rf.subgraph, model.context);

        std::vector<std::vector<double>> x;
        std::vector<int> y; // local class = index into members
        for (std::size_t local = 0; local < members.size(); ++local) {
            for (const auto& s : supporters[static_cast<std::size_t>(members[local])]) {
                auto rf = extract_receptive_field(dataset.graphs[s.graph], s.node, set.radius);
                auto decomp = orbit_decompose(rf.subgraph, rf.center_local, config.orbit_cap);
                x.push_back(build_z(rf.subgraph, decomp, model.context));
                y.push_back(static_cast<int>(local));
            }
        }
        if (x.empty()) return;
        auto tree = fit_tree(x, y, {config.depth, 1});
        double accuracy = train_accuracy(tree, x, y);
        auto paths = extract_paths(tree);

        for (std::size_t local = 0; local < members.size(); ++local) {
            auto& gp = model.predicates[static_cast<std::size_t>(members[local])];
            gp.kind = GroundingKind::FeatureRule;
            gp.tree = tree;
            gp.group_members = members;
            gp.layout = layout;
            gp.template_subgraph = template_rf.subgraph;
            gp.template_anchor = template_rf.center_local;
            gp.template_orbits = template_orbits;
            gp.grounding_accuracy = accuracy;
            gp.rule_cases.clear();
            if (local < paths.size()) {
                for (const auto& conj : paths[local]) {
                    if (conj.empty()) {
                        gp.rule_cases.push_back("always");
                        continue;
                    }
                    std::string text;
                    for (std::size_t k = 0; k < conj.size(); ++k) {
                        if (k) text += " and ";
                        text += detail::render_literal(conj[k], layout, model.context,
                                                       template_orbits.orbits.size());
                    }
                    gp.rule_cases.push_back(std::move(text));
                }
            }
        }
    });
    return model;
}

} // namespace logicx
