#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "logicx/graph.hpp"

namespace logicx {

namespace fs = std::filesystem;
using json = nlohmann::json;

// ---------------------------------------------------------------------------
// JSONL graph format: one object per line with keys
//   id, num_nodes, edges, x, optional node_labels / edge_labels / split, y.
// ---------------------------------------------------------------------------

inline Graph graph_from_json(const json& j, const std::string& context) {
    Graph g;
    try {
        g.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
        g.num_nodes = j.at("num_nodes").get<std::size_t>();
        for (const auto& e : j.at("edges")) {
            auto u = e.at(0).get<long long>();
            auto v = e.at(1).get<long long>();
            if (u < 0 || v < 0)
                fail(ErrorKind::Validation, context + ": negative node index in graph '" + g.id + "'");
            if (u == v)
                fail(ErrorKind::Validation,
                     context + ": self-loop (" + std::to_string(u) + ", " + std::to_string(v) +
                         ") in graph '" + g.id + "'");
            auto a = static_cast<NodeId>(std::min(u, v));
            auto b = static_cast<NodeId>(std::max(u, v));
            g.edges.emplace_back(a, b);
        }
        for (const auto& row : j.at("x")) g.node_features.push_back(row.get<std::vector<double>>());
        if (g.node_features.empty() && g.num_nodes > 0)
            g.node_features.assign(g.num_nodes, std::vector<double>{});
        if (j.contains("node_labels")) g.node_labels = j.at("node_labels").get<std::vector<std::string>>();
        if (j.contains("edge_labels")) g.edge_labels = j.at("edge_labels").get<std::vector<std::string>>();
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        fail(ErrorKind::Parse, context + ": " + e.what());
    }
    g.validate();
    return g;
}

inline json graph_to_json(const Graph& g, int class_label, Split split) {
    json j;
    j["id"] = g.id;
    j["num_nodes"] = g.num_nodes;
    json edges = json::array();
    for (const auto& [u, v] : g.edges) edges.push_back({u, v});
    j["edges"] = std::move(edges);
    j["x"] = g.node_features;
    if (g.has_node_labels()) j["node_labels"] = g.node_labels;
    if (g.has_edge_labels()) j["edge_labels"] = g.edge_labels;
    j["y"] = class_label;
    j["split"] = split == Split::Train ? "train" : "test";
    return j;
}

struct LoadOptions {
    std::uint64_t seed = 0;          // for the default stratified split
    double test_fraction = 0.2;
    std::vector<std::string> symbols; // symbol table for one-hot label derivation
    bool derive_labels = true;
    bool append_degree_feature = false; // append node degree as a continuous dim
};

inline LabeledDataset finalize_dataset(std::vector<Graph> graphs, std::vector<int> labels,
                                       std::vector<int> split_tags, const LoadOptions& options) {
    LabeledDataset ds;
    ds.graphs = std::move(graphs);
    ds.class_labels = std::move(labels);
    if (options.append_degree_feature) {
        for (auto& g : ds.graphs) {
            auto deg = g.degrees();
            for (std::size_t v = 0; v < g.num_nodes; ++v)
                g.node_features[v].push_back(static_cast<double>(deg[v]));
        }
    }
    int max_label = -1;
    for (int y : ds.class_labels) max_label = std::max(max_label, y);
    ds.num_classes = max_label + 1;
    ds.feature_kind = infer_feature_kinds(ds.graphs);
    // split tags: -1 unassigned, 0 train, 1 test
    bool any_assigned = false;
    for (int t : split_tags)
        if (t >= 0) any_assigned = true;
    if (any_assigned) {
        ds.split_assignment.resize(ds.size(), Split::Train);
        for (GraphIndex i = 0; i < ds.size(); ++i) {
            if (split_tags[i] < 0)
                fail(ErrorKind::Validation,
                     "graph '" + ds.graphs[i].id + "': split tag missing while others are tagged");
            ds.split_assignment[i] = split_tags[i] == 0 ? Split::Train : Split::Test;
        }
    } else {
        assign_split(ds, options.seed, options.test_fraction);
    }
    if (options.derive_labels) derive_node_labels(ds, options.symbols);
    ds.validate();
    return ds;
}

inline LabeledDataset load_dataset_jsonl(const fs::path& path, const LoadOptions& options = {}) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open dataset file: " + path.string());
    std::vector<Graph> graphs;
    std::vector<int> labels;
    std::vector<int> split_tags;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::string context = path.filename().string() + ":" + std::to_string(line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const std::exception& e) {
            fail(ErrorKind::Parse, context + ": " + e.what());
        }
        graphs.push_back(graph_from_json(j, context));
        if (!j.contains("y")) fail(ErrorKind::Validation, context + ": missing class label 'y'");
        labels.push_back(j.at("y").get<int>());
        if (j.contains("split")) {
            auto s = j.at("split").get<std::string>();
            if (s != "train" && s != "test") fail(ErrorKind::Parse, context + ": bad split tag '" + s + "'");
            split_tags.push_back(s == "train" ? 0 : 1);
        } else {
            split_tags.push_back(-1);
        }
    }
    return finalize_dataset(std::move(graphs), std::move(labels), std::move(split_tags), options);
}

inline void save_dataset_jsonl(const LabeledDataset& ds, const fs::path& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Io, "cannot write dataset file: " + path.string());
    for (GraphIndex i = 0; i < ds.size(); ++i)
        out << graph_to_json(ds.graphs[i], ds.class_labels[i], ds.split_assignment[i]) << "\n";
}

// ---------------------------------------------------------------------------
// TU format: <DS>_A.txt, <DS>_graph_indicator.txt, <DS>_graph_labels.txt and
// optionally <DS>_node_labels.txt, all 1-indexed. Node labels are one-hot
// encoded into features.
// ---------------------------------------------------------------------------

inline LabeledDataset load_dataset_tu(const fs::path& dir, const LoadOptions& options = {}) {
    if (!fs::is_directory(dir)) fail(ErrorKind::Io, "not a TU dataset directory: " + dir.string());
    std::string prefix;
    for (const auto& entry : fs::directory_iterator(dir)) {
        auto name = entry.path().filename().string();
        auto pos = name.rfind("_A.txt");
        if (pos != std::string::npos && pos + 6 == name.size()) {
            prefix = name.substr(0, pos);
            break;
        }
    }
    if (prefix.empty()) fail(ErrorKind::Parse, "no *_A.txt found in " + dir.string());

    auto read_ints = [&](const std::string& suffix, bool required) {
        std::vector<long long> out;
        fs::path p = dir / (prefix + suffix);
        std::ifstream in(p);
        if (!in) {
            if (required) fail(ErrorKind::Io, "missing TU file: " + p.string());
            return out;
        }
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
            try {
                out.push_back(std::stoll(line));
            } catch (const std::exception&) {
                fail(ErrorKind::Parse, p.filename().string() + ":" + std::to_string(line_no) +
                                           ": expected integer, got '" + line + "'");
            }
        }
        return out;
    };

    auto indicator = read_ints("_graph_indicator.txt", true);
    auto graph_labels_raw = read_ints("_graph_labels.txt", true);
    auto node_labels_raw = read_ints("_node_labels.txt", false);
    if (!node_labels_raw.empty() && node_labels_raw.size() != indicator.size())
        fail(ErrorKind::Validation, "node label count does not match node count");

    std::size_t num_graphs = graph_labels_raw.size();
    std::vector<Graph> graphs(num_graphs);
    std::vector<NodeId> local_index(indicator.size());
    for (std::size_t v = 0; v < indicator.size(); ++v) {
        long long g = indicator[v];
        if (g < 1 || static_cast<std::size_t>(g) > num_graphs)
            fail(ErrorKind::Validation, "graph_indicator entry " + std::to_string(v + 1) + " out of range");
        auto gi = static_cast<std::size_t>(g - 1);
        local_index[v] = static_cast<NodeId>(graphs[gi].num_nodes++);
    }
    for (std::size_t gi = 0; gi < num_graphs; ++gi) graphs[gi].id = "g" + std::to_string(gi);

    // Edges: accept each undirected edge listed once or in both directions.
    {
        fs::path p = dir / (prefix + "_A.txt");
        std::ifstream in(p);
        std::string line;
        std::size_t line_no = 0;
        std::set<std::pair<long long, long long>> seen_directed;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
            for (auto& c : line)
                if (c == ',') c = ' ';
            std::istringstream ss(line);
            long long u = 0, v = 0;
            if (!(ss >> u >> v))
                fail(ErrorKind::Parse,
                     p.filename().string() + ":" + std::to_string(line_no) + ": expected edge pair");
            if (u < 1 || v < 1 || static_cast<std::size_t>(u) > indicator.size() ||
                static_cast<std::size_t>(v) > indicator.size())
                fail(ErrorKind::Validation,
                     p.filename().string() + ":" + std::to_string(line_no) + ": node index out of range");
            if (u == v)
                fail(ErrorKind::Validation,
                     p.filename().string() + ":" + std::to_string(line_no) + ": self-loop");
            if (indicator[u - 1] != indicator[v - 1])
                fail(ErrorKind::Validation,
                     p.filename().string() + ":" + std::to_string(line_no) + ": edge crosses graphs");
            if (!seen_directed.insert({u, v}).second)
                fail(ErrorKind::Validation,
                     p.filename().string() + ":" + std::to_string(line_no) + ": duplicate edge");
            if (u > v) continue; // keep the normalized direction only
            auto gi = static_cast<std::size_t>(indicator[u - 1] - 1);
            graphs[gi].edges.emplace_back(local_index[u - 1], local_index[v - 1]);
        }
    }

    // Node labels become symbols plus a one-hot feature encoding.
    if (!node_labels_raw.empty()) {
        std::vector<long long> distinct(node_labels_raw);
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        std::map<long long, std::size_t> dense;
        for (std::size_t i = 0; i < distinct.size(); ++i) dense[distinct[i]] = i;
        for (std::size_t v = 0; v < indicator.size(); ++v) {
            auto gi = static_cast<std::size_t>(indicator[v] - 1);
            auto& g = graphs[gi];
            if (g.node_features.empty()) {
                g.node_features.assign(g.num_nodes, std::vector<double>(distinct.size(), 0.0));
                g.node_labels.assign(g.num_nodes, "");
            }
            std::size_t sym = dense[node_labels_raw[v]];
            g.node_features[local_index[v]][sym] = 1.0;
            std::size_t sym_index = sym;
            g.node_labels[local_index[v]] =
                sym_index < options.symbols.size() ? options.symbols[sym_index]
                                                   : "L" + std::to_string(distinct[sym_index]);
        }
    } else {
        for (auto& g : graphs) g.node_features.assign(g.num_nodes, std::vector<double>{});
    }

    // Class labels densified in sorted order of the raw values.
    std::vector<long long> distinct_y(graph_labels_raw);
    std::sort(distinct_y.begin(), distinct_y.end());
    distinct_y.erase(std::unique(distinct_y.begin(), distinct_y.end()), distinct_y.end());
    std::map<long long, int> y_dense;
    for (std::size_t i = 0; i < distinct_y.size(); ++i) y_dense[distinct_y[i]] = static_cast<int>(i);
    std::vector<int> labels;
    labels.reserve(num_graphs);
    for (auto y : graph_labels_raw) labels.push_back(y_dense[y]);

    LoadOptions opts = options;
    opts.derive_labels = false; // symbols already attached above
    return finalize_dataset(std::move(graphs), std::move(labels),
                            std::vector<int>(num_graphs, -1), opts);
}

inline LabeledDataset load_dataset(const fs::path& path, const std::string& format,
                                   const LoadOptions& options = {}) {
    if (format == "jsonl") return load_dataset_jsonl(path, options);
    if (format == "tu-dir") return load_dataset_tu(path, options);
    fail(ErrorKind::Contract, "unknown dataset format: " + format);
}

// ---------------------------------------------------------------------------
// Embedding file: JSONL with one header line {"d_L":..,"L":..}, one record
// per node {"graph_id","node_id","h"} and one per graph {"graph_id","y_hat"}.
// Values are serialized at 9 significant digits.
// ---------------------------------------------------------------------------

inline std::string format_sig9(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", x);
    return buf;
}

inline void save_embeddings(const EmbeddingTable& table, const LabeledDataset& dataset,
                            const fs::path& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Io, "cannot write embedding file: " + path.string());
    out << "{\"d_L\":" << table.dim << ",\"L\":" << table.layers << "}\n";
    for (GraphIndex g = 0; g < dataset.size(); ++g) {
        const auto& id = dataset.graphs[g].id;
        out << "{\"graph_id\":\"" << id << "\",\"y_hat\":" << table.predictions[g] << "}\n";
        for (NodeId v = 0; v < dataset.graphs[g].num_nodes; ++v) {
            out << "{\"graph_id\":\"" << id << "\",\"node_id\":" << v << ",\"h\":[";
            const auto& h = table.node_embeddings[g][v];
            for (std::size_t k = 0; k < h.size(); ++k) {
                if (k) out << ",";
                out << format_sig9(h[k]);
            }
            out << "]}\n";
        }
    }
}

inline EmbeddingTable load_embeddings(const fs::path& path, const LabeledDataset& dataset) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open embedding file: " + path.string());
    std::map<std::string, GraphIndex> index_of;
    for (GraphIndex g = 0; g < dataset.size(); ++g) index_of[dataset.graphs[g].id] = g;

    EmbeddingTable table;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) fail(ErrorKind::Parse, "embedding file is empty");
    ++line_no;
    try {
        json header = json::parse(line);
        table.dim = header.at("d_L").get<std::size_t>();
        table.layers = header.at("L").get<std::size_t>();
    } catch (const std::exception& e) {
        fail(ErrorKind::Parse, path.filename().string() + ":1: bad header: " + std::string(e.what()));
    }
    table.node_embeddings.resize(dataset.size());
    for (GraphIndex g = 0; g < dataset.size(); ++g)
        table.node_embeddings[g].resize(dataset.graphs[g].num_nodes);
    table.predictions.assign(dataset.size(), -1);
    std::vector<std::vector<bool>> seen(dataset.size());
    for (GraphIndex g = 0; g < dataset.size(); ++g) seen[g].assign(dataset.graphs[g].num_nodes, false);

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::string context = path.filename().string() + ":" + std::to_string(line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const std::exception& e) {
            fail(ErrorKind::Parse, context + ": " + e.what());
        }
        auto gid = j.at("graph_id").is_string() ? j.at("graph_id").get<std::string>() : j.at("graph_id").dump();
        auto it = index_of.find(gid);
        if (it == index_of.end()) fail(ErrorKind::Alignment, context + ": unknown graph '" + gid + "'");
        GraphIndex g = it->second;
        if (j.contains("y_hat")) {
            table.predictions[g] = j.at("y_hat").get<int>();
            continue;
        }
        auto v = j.at("node_id").get<std::size_t>();
        if (v >= dataset.graphs[g].num_nodes)
            fail(ErrorKind::Alignment, context + ": node " + std::to_string(v) + " out of range for '" + gid + "'");
        auto h = j.at("h").get<std::vector<double>>();
        if (h.size() != table.dim)
            fail(ErrorKind::Validation, context + ": embedding dimension mismatch for '" + gid + "'");
        if (seen[g][v]) fail(ErrorKind::Alignment, context + ": duplicate node " + std::to_string(v) + " of '" + gid + "'");
        seen[g][v] = true;
        table.node_embeddings[g][static_cast<NodeId>(v)] = std::move(h);
    }
    for (GraphIndex g = 0; g < dataset.size(); ++g) {
        for (NodeId v = 0; v < dataset.graphs[g].num_nodes; ++v)
            if (!seen[g][v])
                fail(ErrorKind::Alignment, "embedding missing for node " + std::to_string(v) + " of graph '" +
                                               dataset.graphs[g].id + "'");
        if (table.predictions[g] < 0)
            fail(ErrorKind::Alignment, "y_hat missing for graph '" + dataset.graphs[g].id + "'");
    }
    return table;
}

} // namespace logicx
