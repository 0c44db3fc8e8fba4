#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "logicx/graph.hpp"
#include "logicx/wl.hpp"

namespace logicx {

/// Activation bit-vector over the informative dimensions, ascending dim order.
struct EmbPattern {
    std::vector<std::uint8_t> bits;

    bool operator==(const EmbPattern&) const = default;
    bool operator<(const EmbPattern& o) const { return bits < o.bits; }

    std::string to_string() const {
        std::string s;
        s.reserve(bits.size());
        for (auto b : bits) s.push_back(b ? '1' : '0');
        return s;
    }
};

/// bit k set iff h[dims[k]] >= thresholds[k] (inclusive on the boundary).
inline EmbPattern emb_pattern(const std::vector<double>& h, const std::vector<int>& dims,
                              const std::vector<double>& thresholds) {
    EmbPattern p;
    p.bits.reserve(dims.size());
    for (std::size_t k = 0; k < dims.size(); ++k) {
        auto d = static_cast<std::size_t>(dims[k]);
        if (d >= h.size()) fail(ErrorKind::Contract, "emb_pattern: dimension out of range");
        p.bits.push_back(h[d] >= thresholds[k] ? 1 : 0);
    }
    return p;
}

/// A hidden predicate: one observed (structural hash, activation pattern)
/// pair, with its training support.
struct Predicate {
    int id = 0;
    std::string struct_hash;
    EmbPattern pattern;
    std::size_t support = 0;
    std::vector<std::size_t> class_support; // indexed by the producer's predicted class
};

struct PredicateSet {
    std::vector<Predicate> predicates;
    std::vector<int> dims;           // K, ascending
    std::vector<double> thresholds;  // aligned with dims
    std::size_t radius = 1;          // L
    bool anchored = true;

    std::size_t size() const { return predicates.size(); }

    std::optional<int> find(const std::string& hash, const EmbPattern& pattern) const {
        auto it = index_.find({hash, pattern});
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::vector<int> predicates_with_hash(const std::string& hash) const {
        std::vector<int> out;
        for (const auto& p : predicates)
            if (p.struct_hash == hash) out.push_back(p.id);
        return out;
    }

    void rebuild_index() {
        index_.clear();
        for (const auto& p : predicates) index_[{p.struct_hash, p.pattern}] = p.id;
    }

    nlohmann::json to_json() const {
        nlohmann::json preds = nlohmann::json::array();
        for (const auto& p : predicates) {
            preds.push_back({{"id", p.id},
                             {"struct_hash", p.struct_hash},
                             {"emb_pattern", p.pattern.bits},
                             {"support", p.support},
                             {"class_support", p.class_support}});
        }
        return nlohmann::json{{"K", dims},
                              {"T", thresholds},
                              {"L", radius},
                              {"anchored", anchored},
                              {"predicates", std::move(preds)}};
    }

    static PredicateSet from_json(const nlohmann::json& j) {
        PredicateSet set;
        set.dims = j.at("K").get<std::vector<int>>();
        set.thresholds = j.at("T").get<std::vector<double>>();
        set.radius = j.at("L").get<std::size_t>();
        set.anchored = j.at("anchored").get<bool>();
        for (const auto& jp : j.at("predicates")) {
            Predicate p;
            p.id = jp.at("id").get<int>();
            p.struct_hash = jp.at("struct_hash").get<std::string>();
            p.pattern.bits = jp.at("emb_pattern").get<std::vector<std::uint8_t>>();
            p.support = jp.at("support").get<std::size_t>();
            p.class_support = jp.at("class_support").get<std::vector<std::size_t>>();
            set.predicates.push_back(std::move(p));
        }
        set.rebuild_index();
        return set;
    }

private:
    std::map<std::pair<std::string, EmbPattern>, int> index_;
};

struct MineConfig {
    std::size_t min_support = 1;
    bool anchor_center = true;
    unsigned jobs = 1;
};

/// One node's predicate key f(v).
inline std::pair<std::string, EmbPattern> node_pattern(const Graph& graph, NodeId v,
                                                       const std::vector<double>& h,
                                                       const std::vector<int>& dims,
                                                       const std::vector<double>& thresholds,
                                                       std::size_t radius, bool anchored) {
    return {struct_pattern(graph, v, radius, anchored), emb_pattern(h, dims, thresholds)};
}

/// Collects every distinct f(v) over the training split. Ids are dense and
/// follow first occurrence in dataset order, so mining is reproducible.
/// Empty K yields structure-only predicates (with a warning).
inline PredicateSet mine_predicates(const LabeledDataset& dataset, const EmbeddingTable& embeddings,
                                    std::vector<int> dims, std::vector<double> thresholds,
                                    std::size_t radius, const MineConfig& config = {}) {
    if (dims.size() != thresholds.size())
        fail(ErrorKind::Contract, "mine_predicates: K and T must be aligned");
    // ascending dimension order for patterns
    {
        std::vector<std::size_t> order(dims.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dims[a] < dims[b]; });
        std::vector<int> d2;
        std::vector<double> t2;
        for (auto i : order) {
            d2.push_back(dims[i]);
            t2.push_back(thresholds[i]);
        }
        dims = std::move(d2);
        thresholds = std::move(t2);
    }
    if (dims.empty())
        log_warn("mine_predicates: empty K, predicates are structure-only");

    auto train = dataset.split_indices(Split::Train);
    std::vector<std::vector<std::pair<std::string, EmbPattern>>> per_graph(train.size());
    parallel_for(train.size(), config.jobs, [&](std::size_t i) {
        GraphIndex g = train[i];
        const Graph& graph = dataset.graphs[g];
        auto& keys = per_graph[i];
        keys.reserve(graph.num_nodes);
        for (NodeId v = 0; v < graph.num_nodes; ++v)
            keys.push_back(node_pattern(graph, v, embeddings.at(g, v), dims, thresholds, radius,
                                        config.anchor_center));
    });

    PredicateSet set;
    set.dims = std::move(dims);
    set.thresholds = std::move(thresholds);
    set.radius = radius;
    set.anchored = config.anchor_center;

    std::map<std::pair<std::string, EmbPattern>, std::size_t> slot; // key -> position in first_seen
    std::vector<Predicate> first_seen;
    for (std::size_t i = 0; i < train.size(); ++i) {
        int y_hat = embeddings.predictions[train[i]];
        for (auto& key : per_graph[i]) {
            auto it = slot.find(key);
            if (it == slot.end()) {
                Predicate p;
                p.struct_hash = key.first;
                p.pattern = key.second;
                p.class_support.assign(static_cast<std::size_t>(dataset.num_classes), 0);
                it = slot.emplace(std::move(key), first_seen.size()).first;
                first_seen.push_back(std::move(p));
            }
            auto& p = first_seen[it->second];
            ++p.support;
            if (y_hat >= 0 && static_cast<std::size_t>(y_hat) < p.class_support.size())
                ++p.class_support[y_hat];
        }
    }
    for (auto& p : first_seen) {
        if (p.support < config.min_support) continue;
        p.id = static_cast<int>(set.predicates.size());
        set.predicates.push_back(std::move(p));
    }
    set.rebuild_index();
    return set;
}

/// Existential evaluation by embedding: 1 iff some node's f(v) equals the
/// predicate's (hash, pattern) pair.
inline bool eval_on_graph(const Predicate& p, const Graph& graph,
                          const std::vector<std::vector<double>>& node_embeddings,
                          const PredicateSet& set) {
    for (NodeId v = 0; v < graph.num_nodes; ++v) {
        auto key = node_pattern(graph, v, node_embeddings[v], set.dims, set.thresholds, set.radius,
                                set.anchored);
        if (key.first == p.struct_hash && key.second == p.pattern) return true;
    }
    return false;
}

/// Bulk row of predicate bits for one graph (shared hash/pattern computation).
inline std::vector<std::uint8_t> predicate_row(const PredicateSet& set, const Graph& graph,
                                               const std::vector<std::vector<double>>& node_embeddings) {
    std::vector<std::uint8_t> row(set.size(), 0);
    for (NodeId v = 0; v < graph.num_nodes; ++v) {
        auto key = node_pattern(graph, v, node_embeddings[v], set.dims, set.thresholds, set.radius,
                                set.anchored);
        if (auto id = set.find(key.first, key.second)) row[static_cast<std::size_t>(*id)] = 1;
    }
    return row;
}

} // namespace logicx
