#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "logicx/grounding.hpp"
#include "logicx/inference.hpp"
#include "logicx/metrics.hpp"
#include "logicx/predicates.hpp"
#include "logicx/rules.hpp"

namespace logicx {

// ---------------------------------------------------------------------------
// extract: graph-level tree -> informative dimensions -> predicate mining ->
// activation matrix -> DNF rules. One call covers the whole middle of the
// pipeline so the CLI and the test suites share a single definition.
// ---------------------------------------------------------------------------

struct ExtractConfig {
    int rule_depth = 3;
    double dim_tree_target = 0.95;
    int dim_tree_depth_cap = 8;
    std::size_t dim_tree_min_leaf = 5;
    std::size_t min_support = 1;
    bool anchor_center = true;
    unsigned jobs = 1;
};

struct ExtractResult {
    std::vector<int> dims;
    std::vector<double> thresholds;
    double dim_tree_accuracy = 0.0;
    bool dim_tree_reached_target = false;
    PredicateSet predicates;
    ActivationMatrix matrix;
    DnfRuleSet rules;
    std::map<std::string, double> timings_ms;
};

inline ExtractResult extract_pipeline(const LabeledDataset& dataset, const EmbeddingTable& embeddings,
                                      const ExtractConfig& config = {}) {
    embeddings.validate_against(dataset);
    ExtractResult result;

    StageTimer t_dims;
    auto train = dataset.split_indices(Split::Train);
    std::vector<std::vector<double>> graph_embs;
    std::vector<int> y_hat;
    graph_embs.reserve(train.size());
    for (GraphIndex g : train) {
        graph_embs.push_back(embeddings.graph_embedding(g));
        y_hat.push_back(embeddings.predictions[g]);
    }
    auto grown = fit_tree_to_accuracy(graph_embs, y_hat, config.dim_tree_target,
                                      config.dim_tree_depth_cap, config.dim_tree_min_leaf);
    result.dim_tree_accuracy = grown.accuracy;
    result.dim_tree_reached_target = grown.reached_target;
    if (!grown.reached_target)
        log_warn("extract: dimension tree capped at depth " + std::to_string(config.dim_tree_depth_cap) +
                 " with accuracy " + std::to_string(grown.accuracy));
    auto info = informative_dims(grown.tree);
    result.dims = info.dims;
    result.thresholds = info.thresholds;
    result.timings_ms["informative_dims"] = t_dims.elapsed_ms();

    StageTimer t_mine;
    MineConfig mine_cfg;
    mine_cfg.min_support = config.min_support;
    mine_cfg.anchor_center = config.anchor_center;
    mine_cfg.jobs = config.jobs;
    result.predicates =
        mine_predicates(dataset, embeddings, result.dims, result.thresholds, embeddings.layers, mine_cfg);
    result.timings_ms["predicate_mining"] = t_mine.elapsed_ms();

    StageTimer t_rules;
    result.matrix = build_matrix(result.predicates, dataset, embeddings, config.jobs);
    result.rules = learn_rules(result.matrix, config.rule_depth);
    result.timings_ms["matrix_and_rules"] = t_rules.elapsed_ms();
    return result;
}

// ---------------------------------------------------------------------------
// evaluate: grounded inference over a split plus the full metric battery.
// ---------------------------------------------------------------------------

struct EvaluateConfig {
    Split split = Split::Test;
    InferenceConfig inference;
    CoverageBasis coverage_basis = CoverageBasis::Top1;
    bool fid_train_weights = false; // weight classes by train-split frequencies
    std::vector<std::set<std::string>> stability_runs; // optional, current run appended
};

struct EvaluateResult {
    EvaluationReport report;
    std::vector<InferenceOutcome> outcomes;
};

inline EvaluateResult evaluate_pipeline(const LabeledDataset& dataset, const EmbeddingTable& embeddings,
                                        const DnfRuleSet& rules, const GroundedModel& model,
                                        const EvaluateConfig& config = {}) {
    StageTimer timer;
    EvaluateResult result;
    auto indices = dataset.split_indices(config.split);
    result.outcomes =
        infer_all(rules, model, dataset, indices, embeddings.predictions, config.inference);

    auto& report = result.report;
    report.evaluated = result.outcomes.size();
    for (const auto& o : result.outcomes) {
        if (o.timed_out) ++report.timeouts;
        else if (o.verdict == kAmbiguous) ++report.ambiguous;
    }
    if (config.fid_train_weights) {
        std::map<int, std::size_t> train_counts;
        for (GraphIndex g : dataset.split_indices(Split::Train)) ++train_counts[embeddings.predictions[g]];
        report.fidelity = fid_d(result.outcomes, nullptr, &train_counts);
    } else {
        report.fidelity = fid_d(result.outcomes);
    }
    report.prf = weighted_prf(result.outcomes);

    auto valid = predicate_validity(rules, model, dataset, config.coverage_basis,
                                    config.inference.match_timeout);
    report.coverage_per_class.resize(static_cast<std::size_t>(rules.num_classes));
    for (int c = 0; c < rules.num_classes; ++c)
        report.coverage_per_class[static_cast<std::size_t>(c)] = coverage(result.outcomes, rules, valid, c);

    std::vector<Representative> fragments;
    for (int id : rules.used_predicates())
        for (const auto& rep : model.predicates[static_cast<std::size_t>(id)].representatives)
            fragments.push_back(rep);
    report.validity_report = validity(fragments, dataset, config.inference.match_timeout);

    if (!config.stability_runs.empty()) {
        auto runs = config.stability_runs;
        runs.push_back(explanation_forms(rules, model));
        report.stability_value = stability(runs);
    }
    report.wall_seconds = timer.elapsed_ms() / 1000.0;
    return result;
}

} // namespace logicx
