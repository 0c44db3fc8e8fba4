#pragma once

#include <fstream>
#include <string>

#include "logicx/grounding.hpp"

namespace logicx {

namespace detail {

inline const char* orbit_color(std::size_t index) {
    // graphviz set312 palette, cycled
    static const char* palette[] = {"#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462",
                                    "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd", "#ccebc5", "#ffed6f"};
    return palette[index % 12];
}

} // namespace detail

/// Representative subgraph as DOT: node symbols as labels, anchor double-circled.
inline std::string representative_dot(const Representative& rep, const std::string& name) {
    std::string out = "graph \"" + name + "\" {\n  node [style=filled fillcolor=white];\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf), "  label=\"coverage %.2f (%zu graphs)\";\n", rep.coverage,
                  rep.graph_count);
    out += buf;
    const Graph& g = rep.subgraph;
    for (NodeId v = 0; v < g.num_nodes; ++v) {
        std::string label = g.has_node_labels() ? g.node_labels[v] : std::to_string(v);
        out += "  n" + std::to_string(v) + " [label=\"" + label + "\"" +
               (v == rep.anchor ? " shape=doublecircle" : "") + "];\n";
    }
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        auto [u, v] = g.edges[e];
        out += "  n" + std::to_string(u) + " -- n" + std::to_string(v);
        if (g.has_edge_labels()) out += " [label=\"" + g.edge_labels[e] + "\"]";
        out += ";\n";
    }
    out += "}\n";
    return out;
}

/// Orbit template as DOT: node orbits colored by index, edge orbits styled
/// and indexed after the node orbits.
inline std::string orbit_template_dot(const GroundedPredicate& gp, const std::string& name) {
    const Graph& g = gp.template_subgraph;
    const auto& decomp = gp.template_orbits;
    std::string out = "graph \"" + name + "\" {\n  node [style=filled];\n";
    std::vector<std::size_t> orbit_of(g.num_nodes, 0);
    for (std::size_t i = 0; i < decomp.orbits.size(); ++i)
        for (NodeId v : decomp.orbits[i]) orbit_of[v] = i;
    for (NodeId v = 0; v < g.num_nodes; ++v) {
        std::string label = (g.has_node_labels() ? g.node_labels[v] + "\\n" : "") + "orbit " +
                            std::to_string(orbit_of[v]);
        out += "  n" + std::to_string(v) + " [label=\"" + label + "\" fillcolor=\"" +
               detail::orbit_color(orbit_of[v]) + "\"" +
               (v == gp.template_anchor ? " shape=doublecircle" : "") + "];\n";
    }
    std::map<std::pair<NodeId, NodeId>, std::size_t> edge_orbit_of;
    for (std::size_t i = 0; i < decomp.edge_orbits.size(); ++i)
        for (auto e : decomp.edge_orbits[i]) edge_orbit_of[e] = i;
    for (const auto& e : g.edges) {
        auto it = edge_orbit_of.find(e);
        std::size_t idx = it == edge_orbit_of.end() ? 0 : it->second;
        out += "  n" + std::to_string(e.first) + " -- n" + std::to_string(e.second) + " [color=\"" +
               detail::orbit_color(decomp.orbits.size() + idx) + "\" penwidth=2 label=\"" +
               std::to_string(decomp.orbits.size() + idx) + "\"];\n";
    }
    out += "}\n";
    return out;
}

/// Writes template + representatives for every predicate used by the rules
/// (or all predicates when `used_only` is false) under dir/p<id>/.
inline void export_dot(const GroundedModel& model, const std::vector<int>& predicate_ids,
                       const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    for (int id : predicate_ids) {
        const auto& gp = model.predicates[static_cast<std::size_t>(id)];
        fs::path pdir = dir / ("p" + std::to_string(id));
        fs::create_directories(pdir);
        if (gp.kind == GroundingKind::FeatureRule) {
            std::ofstream t(pdir / "template.dot");
            t << orbit_template_dot(gp, "p" + std::to_string(id) + "_template");
            std::ofstream r(pdir / "rule.txt");
            for (std::size_t i = 0; i < gp.rule_cases.size(); ++i)
                r << "case " << (i + 1) << ": " << gp.rule_cases[i] << "\n";
        }
        for (std::size_t k = 0; k < gp.representatives.size(); ++k) {
            std::ofstream f(pdir / ("rep" + std::to_string(k) + ".dot"));
            f << representative_dot(gp.representatives[k],
                                    "p" + std::to_string(id) + "_rep" + std::to_string(k));
        }
    }
}

} // namespace logicx
