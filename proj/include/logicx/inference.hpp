#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "logicx/grounding.hpp"
#include "logicx/match.hpp"
#include "logicx/rules.hpp"

namespace logicx {

/// Mode (2), the default: a predicate fires when some node's receptive field
/// carries the right hash and its Z satisfies the grounding rule. Mode (1)
/// is strict structural matching of stored representative subgraphs.
enum class PredicateMatchMode { Grounded, Structural };

struct InferenceConfig {
    PredicateMatchMode mode = PredicateMatchMode::Grounded;
    std::chrono::milliseconds match_timeout{10000};
    unsigned jobs = 1;
};

struct InferenceOutcome {
    std::string graph_id;
    std::vector<std::uint8_t> bits;      // full predicate width (unused ids stay 0)
    std::vector<std::uint8_t> satisfied; // per class
    int verdict = kAmbiguous;
    int y_hat = -1;
    bool timed_out = false; // some representative match hit the timeout
};

namespace detail {

struct HashGroup {
    std::vector<int> structure_only;          // predicate ids
    const GroundedPredicate* feature_rule = nullptr; // any member carries the shared tree
};

inline std::map<std::string, HashGroup> group_by_hash(const GroundedModel& model,
                                                      const std::vector<int>& wanted) {
    std::map<std::string, HashGroup> groups;
    for (int id : wanted) {
        const auto& gp = model.predicates[static_cast<std::size_t>(id)];
        auto& group = groups[gp.struct_hash];
        if (gp.kind == GroundingKind::StructureOnly)
            group.structure_only.push_back(id);
        else
            group.feature_rule = &gp;
    }
    return groups;
}

} // namespace detail

/// Predicate bits for one graph, restricted to `wanted` ids. Node hashes and
/// Z vectors are computed once per node regardless of how many predicates
/// share them.
inline std::vector<std::uint8_t> grounded_bits(const GroundedModel& model, const Graph& graph,
                                               const std::vector<int>& wanted, bool* timed_out = nullptr,
                                               const InferenceConfig& config = {}) {
    std::vector<std::uint8_t> bits(model.predicates.size(), 0);
    if (config.mode == PredicateMatchMode::Structural) {
        std::set<std::string> present_hashes;
        for (NodeId v = 0; v < graph.num_nodes; ++v)
            present_hashes.insert(struct_pattern(graph, v, model.radius, model.anchored));
        for (int id : wanted) {
            const auto& gp = model.predicates[static_cast<std::size_t>(id)];
            if (gp.kind == GroundingKind::StructureOnly) {
                bits[id] = present_hashes.count(gp.struct_hash) ? 1 : 0;
                continue;
            }
            // strict mode: one of the stored representatives embeds in the graph
            for (const auto& rep : gp.representatives) {
                MatchOptions opts;
                opts.respect_labels = true;
                opts.mode = MatchMode::Monomorphism;
                opts.timeout = config.match_timeout;
                auto r = subgraph_isomorphic(rep.subgraph, graph, opts);
                if (r == MatchResult::Timeout && timed_out) *timed_out = true;
                if (r == MatchResult::Yes) {
                    bits[id] = 1;
                    break;
                }
            }
        }
        return bits;
    }

    auto groups = detail::group_by_hash(model, wanted);
    std::set<int> wanted_set(wanted.begin(), wanted.end());
    for (NodeId v = 0; v < graph.num_nodes; ++v) {
        auto hash = struct_pattern(graph, v, model.radius, model.anchored);
        auto it = groups.find(hash);
        if (it == groups.end()) continue;
        for (int id : it->second.structure_only) bits[id] = 1;
        const auto* fr = it->second.feature_rule;
        if (!fr) continue;
        auto rf = extract_receptive_field(graph, v, model.radius);
        try {
            auto decomp = orbit_decompose(rf.subgraph, rf.center_local, model.orbit_cap);
            auto z = build_z(rf.subgraph, decomp, model.context);
            int local = fr->tree.predict(z);
            int member = fr->group_members[static_cast<std::size_t>(local)];
            if (wanted_set.count(member)) bits[member] = 1;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::CapExceeded) throw;
            log_debug("inference: orbit cap exceeded at node, falling back to structural match");
            for (int id : fr->group_members)
                if (wanted_set.count(id)) bits[id] = 1;
        }
    }
    return bits;
}

inline bool evaluate_predicate_grounded(const GroundedModel& model, int predicate_id,
                                        const Graph& graph, const InferenceConfig& config = {}) {
    bool timed_out = false;
    auto bits = grounded_bits(model, graph, {predicate_id}, &timed_out, config);
    return bits[static_cast<std::size_t>(predicate_id)] != 0;
}

/// Full rule inference for one graph: grounded predicate bits composed with
/// the class-wise DNF.
inline InferenceOutcome infer(const DnfRuleSet& rules, const GroundedModel& model, const Graph& graph,
                              int y_hat = -1, const InferenceConfig& config = {}) {
    InferenceOutcome out;
    out.graph_id = graph.id;
    out.y_hat = y_hat;
    auto wanted = rules.used_predicates();
    out.bits = grounded_bits(model, graph, wanted, &out.timed_out, config);
    out.bits.resize(rules.width, 0);
    auto result = rules.eval(out.bits);
    out.satisfied = std::move(result.satisfied);
    out.verdict = result.verdict;
    return out;
}

/// Batch inference over a list of graphs; per-graph work is independent.
inline std::vector<InferenceOutcome> infer_all(const DnfRuleSet& rules, const GroundedModel& model,
                                               const LabeledDataset& dataset,
                                               const std::vector<GraphIndex>& indices,
                                               const std::vector<int>& y_hat,
                                               const InferenceConfig& config = {}) {
    std::vector<InferenceOutcome> out(indices.size());
    parallel_for(indices.size(), config.jobs, [&](std::size_t i) {
        GraphIndex g = indices[i];
        out[i] = infer(rules, model, dataset.graphs[g], y_hat[g], config);
    });
    return out;
}

} // namespace logicx
