#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "logicx/decision_tree.hpp"
#include "logicx/predicates.hpp"

namespace logicx {

constexpr int kAmbiguous = -1;

/// Binary activation matrix: one row per correctly predicted training graph,
/// one column per predicate.
struct ActivationMatrix {
    std::vector<std::vector<std::uint8_t>> rows;
    std::vector<int> row_labels; // the producer's prediction, equal to ground truth here
    std::vector<std::string> graph_ids;
    std::vector<GraphIndex> graph_indices;
    std::size_t width = 0;
};

inline ActivationMatrix build_matrix(const PredicateSet& set, const LabeledDataset& dataset,
                                     const EmbeddingTable& embeddings, unsigned jobs = 1) {
    auto train = dataset.split_indices(Split::Train);
    std::vector<GraphIndex> kept;
    for (GraphIndex g : train)
        if (embeddings.predictions[g] == dataset.class_labels[g]) kept.push_back(g);

    for (int c = 0; c < dataset.num_classes; ++c) {
        bool any = false;
        for (GraphIndex g : kept)
            if (dataset.class_labels[g] == c) any = true;
        if (!any)
            fail(ErrorKind::RuleLearning,
                 "no correctly predicted training graphs for class " + std::to_string(c));
    }

    ActivationMatrix m;
    m.width = set.size();
    m.rows.resize(kept.size());
    m.row_labels.resize(kept.size());
    m.graph_ids.resize(kept.size());
    m.graph_indices = kept;
    parallel_for(kept.size(), jobs, [&](std::size_t i) {
        GraphIndex g = kept[i];
        m.rows[i] = predicate_row(set, dataset.graphs[g], embeddings.node_embeddings[g]);
        m.row_labels[i] = embeddings.predictions[g];
        m.graph_ids[i] = dataset.graphs[g].id;
    });
    return m;
}

struct RuleLiteral {
    int pred = 0;
    bool negated = false;
    bool operator==(const RuleLiteral&) const = default;
};

using RuleConjunction = std::vector<RuleLiteral>;

struct RuleOutcome {
    std::vector<std::uint8_t> satisfied; // per class
    int verdict = kAmbiguous;            // unique satisfied class, else kAmbiguous
};

/// Class-wise DNF over predicate literals. Produced from decision-tree leaf
/// paths, so every bit-vector satisfies exactly one class.
struct DnfRuleSet {
    int num_classes = 0;
    std::size_t width = 0; // predicate count the bit-vectors must have
    int depth = 0;         // tree depth used when learning
    std::vector<std::vector<RuleConjunction>> per_class;

    RuleOutcome eval(const std::vector<std::uint8_t>& bits) const {
        if (bits.size() != width)
            fail(ErrorKind::Contract, "eval_rules: expected " + std::to_string(width) + " bits, got " +
                                          std::to_string(bits.size()));
        RuleOutcome out;
        out.satisfied.assign(static_cast<std::size_t>(num_classes), 0);
        for (int c = 0; c < num_classes; ++c) {
            for (const auto& conj : per_class[c]) {
                bool sat = true;
                for (const auto& lit : conj) {
                    bool value = bits[static_cast<std::size_t>(lit.pred)] != 0;
                    if (value == lit.negated) { sat = false; break; }
                }
                if (sat) {
                    out.satisfied[c] = 1;
                    break;
                }
            }
        }
        int hits = 0;
        for (int c = 0; c < num_classes; ++c)
            if (out.satisfied[c]) {
                ++hits;
                out.verdict = c;
            }
        if (hits != 1) out.verdict = kAmbiguous;
        return out;
    }

    /// Every predicate id referenced by any literal, ascending.
    std::vector<int> used_predicates() const {
        std::set<int> used;
        for (const auto& cls : per_class)
            for (const auto& conj : cls)
                for (const auto& lit : conj) used.insert(lit.pred);
        return {used.begin(), used.end()};
    }

    std::string pretty(int klass) const {
        const auto& conjs = per_class[static_cast<std::size_t>(klass)];
        std::string out;
        if (conjs.empty()) {
            out = "false";
        } else {
            for (std::size_t i = 0; i < conjs.size(); ++i) {
                if (i) out += " ∨ ";
                if (conjs[i].empty()) {
                    out += "true";
                    continue;
                }
                out += "(";
                for (std::size_t k = 0; k < conjs[i].size(); ++k) {
                    if (k) out += " ∧ ";
                    if (conjs[i][k].negated) out += "¬";
                    out += "p" + std::to_string(conjs[i][k].pred);
                }
                out += ")";
            }
        }
        return out + " ⇒ class " + std::to_string(klass);
    }

    nlohmann::json to_json() const {
        nlohmann::json classes = nlohmann::json::array();
        for (int c = 0; c < num_classes; ++c) {
            nlohmann::json conjs = nlohmann::json::array();
            for (const auto& conj : per_class[c]) {
                nlohmann::json lits = nlohmann::json::array();
                for (const auto& lit : conj)
                    lits.push_back({{"pred_id", lit.pred}, {"negated", lit.negated}});
                conjs.push_back(std::move(lits));
            }
            classes.push_back({{"class", c}, {"conjunctions", std::move(conjs)}, {"pretty", pretty(c)}});
        }
        return nlohmann::json{{"num_classes", num_classes},
                              {"width", width},
                              {"depth", depth},
                              {"rules", std::move(classes)}};
    }

    static DnfRuleSet from_json(const nlohmann::json& j) {
        DnfRuleSet rules;
        rules.num_classes = j.at("num_classes").get<int>();
        rules.width = j.at("width").get<std::size_t>();
        rules.depth = j.at("depth").get<int>();
        rules.per_class.resize(static_cast<std::size_t>(rules.num_classes));
        for (const auto& jc : j.at("rules")) {
            auto c = jc.at("class").get<std::size_t>();
            for (const auto& jconj : jc.at("conjunctions")) {
                RuleConjunction conj;
                for (const auto& jl : jconj)
                    conj.push_back({jl.at("pred_id").get<int>(), jl.at("negated").get<bool>()});
                rules.per_class[c].push_back(std::move(conj));
            }
        }
        return rules;
    }
};

/// Rule learning over the activation matrix: a depth-bounded tree with rows
/// weighted inversely to class frequency (so the majority class cannot
/// swallow the rule set), then one conjunction per leaf path.
inline DnfRuleSet learn_rules(const ActivationMatrix& matrix, int depth) {
    if (matrix.rows.empty()) fail(ErrorKind::RuleLearning, "learn_rules: empty activation matrix");
    std::set<int> classes(matrix.row_labels.begin(), matrix.row_labels.end());
    if (classes.size() < 2) fail(ErrorKind::RuleLearning, "learn_rules: need at least 2 classes present");

    std::vector<std::vector<double>> x(matrix.rows.size());
    for (std::size_t i = 0; i < matrix.rows.size(); ++i)
        x[i].assign(matrix.rows[i].begin(), matrix.rows[i].end());

    std::map<int, std::size_t> freq;
    for (int y : matrix.row_labels) ++freq[y];
    std::vector<double> weights;
    weights.reserve(matrix.rows.size());
    for (int y : matrix.row_labels) weights.push_back(1.0 / static_cast<double>(freq[y]));

    auto tree = fit_tree(x, matrix.row_labels, {depth, 1}, std::move(weights));
    auto paths = extract_paths(tree);

    DnfRuleSet rules;
    rules.num_classes = tree.num_classes;
    rules.width = matrix.width;
    rules.depth = depth;
    rules.per_class.resize(static_cast<std::size_t>(tree.num_classes));
    for (std::size_t c = 0; c < paths.size(); ++c) {
        for (const auto& conj : paths[c]) {
            RuleConjunction rc;
            for (const auto& lit : conj) rc.push_back({lit.feature, lit.negated});
            rules.per_class[c].push_back(std::move(rc));
        }
    }
    return rules;
}

inline RuleOutcome eval_rules(const DnfRuleSet& rules, const std::vector<std::uint8_t>& bits) {
    return rules.eval(bits);
}

} // namespace logicx
