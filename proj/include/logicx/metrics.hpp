#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "logicx/inference.hpp"

namespace logicx {

// ---------------------------------------------------------------------------
// Data-grounded fidelity: class-weighted agreement between rule verdicts and
// the producer's predictions, ambiguous verdicts counted wrong, class weights
// w_c = 1 / |{G in test : y_hat(G) = c}| normalized over the classes present.
// Timed-out instances are excluded and tallied.
// ---------------------------------------------------------------------------

/// `class_counts` defaults to the evaluated outcomes' own class frequencies
/// (test-time weighting); pass training-split counts to weight by train-time
/// frequencies instead.
inline double fid_d(const std::vector<InferenceOutcome>& outcomes, std::size_t* timeouts = nullptr,
                    const std::map<int, std::size_t>* class_counts = nullptr) {
    std::map<int, std::size_t> class_n;
    std::size_t timed_out = 0;
    for (const auto& o : outcomes) {
        if (o.timed_out) {
            ++timed_out;
            continue;
        }
        ++class_n[o.y_hat];
    }
    if (timeouts) *timeouts = timed_out;
    if (class_n.empty()) fail(ErrorKind::Contract, "fid_d: no evaluable outcomes");
    double num = 0.0, den = 0.0;
    for (const auto& o : outcomes) {
        if (o.timed_out) continue;
        std::size_t count = class_n[o.y_hat];
        if (class_counts) {
            auto it = class_counts->find(o.y_hat);
            if (it == class_counts->end() || it->second == 0) {
                log_warn("fid_d: class " + std::to_string(o.y_hat) +
                         " absent from the weighting split; using its test count");
            } else {
                count = it->second;
            }
        }
        double w = 1.0 / static_cast<double>(count);
        den += w;
        if (o.verdict == o.y_hat) num += w;
    }
    return num / den;
}

struct PrfReport {
    double accuracy = 0.0;       // plain fraction of exact matches (ambiguous wrong)
    double precision = 0.0;      // macro over classes with at least one prediction
    double recall = 0.0;         // macro over classes present; equals fid_d
    double f1 = 0.0;             // macro F1 from per-class precision/recall
    std::vector<int> undefined_precision_classes; // no predictions for these
};

inline PrfReport weighted_prf(const std::vector<InferenceOutcome>& outcomes) {
    std::set<int> classes;
    for (const auto& o : outcomes)
        if (!o.timed_out) classes.insert(o.y_hat);
    PrfReport report;
    std::size_t n = 0, correct = 0;
    std::map<int, std::size_t> tp, actual, predicted;
    for (const auto& o : outcomes) {
        if (o.timed_out) continue;
        ++n;
        ++actual[o.y_hat];
        if (o.verdict != kAmbiguous) ++predicted[o.verdict];
        if (o.verdict == o.y_hat) {
            ++correct;
            ++tp[o.y_hat];
        }
    }
    if (n == 0) fail(ErrorKind::Contract, "weighted_prf: no evaluable outcomes");
    report.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    double recall_sum = 0.0;
    std::map<int, double> precision_by_class, recall_by_class;
    for (int c : classes) {
        recall_by_class[c] = static_cast<double>(tp[c]) / static_cast<double>(actual[c]);
        recall_sum += recall_by_class[c];
    }
    report.recall = recall_sum / static_cast<double>(classes.size());
    double precision_sum = 0.0;
    std::size_t defined = 0;
    for (int c : classes) {
        if (predicted[c] == 0) {
            report.undefined_precision_classes.push_back(c);
            log_warn("weighted_prf: precision undefined for class " + std::to_string(c) +
                     " (no predictions); excluded from the macro average");
            continue;
        }
        precision_by_class[c] = static_cast<double>(tp[c]) / static_cast<double>(predicted[c]);
        precision_sum += precision_by_class[c];
        ++defined;
    }
    report.precision = defined ? precision_sum / static_cast<double>(defined) : 0.0;
    double f1_sum = 0.0;
    for (int c : classes) {
        double p = precision_by_class.count(c) ? precision_by_class[c] : 0.0;
        double r = recall_by_class[c];
        f1_sum += (p + r) > 0 ? 2 * p * r / (p + r) : 0.0;
    }
    report.f1 = f1_sum / static_cast<double>(classes.size());
    return report;
}

// ---------------------------------------------------------------------------
// Validity: a fragment counts as valid iff it occurs as a label-respecting
// induced subgraph of some training graph. Timeouts are tallied separately.
// ---------------------------------------------------------------------------

struct ValidityReport {
    double fraction = 1.0;
    std::size_t total = 0;
    std::size_t valid = 0;
    std::size_t timeouts = 0;
};

inline bool fragment_is_valid(const Graph& fragment, const LabeledDataset& dataset,
                              const std::vector<GraphIndex>& train,
                              std::optional<std::string> source_graph_id,
                              std::chrono::milliseconds timeout, bool* timed_out) {
    MatchOptions opts;
    opts.mode = MatchMode::Induced;
    opts.respect_labels = true;
    opts.timeout = timeout;
    // the recorded source graph nearly always resolves it instantly
    if (source_graph_id) {
        for (GraphIndex g : train) {
            if (dataset.graphs[g].id != *source_graph_id) continue;
            auto r = subgraph_isomorphic(fragment, dataset.graphs[g], opts);
            if (r == MatchResult::Yes) return true;
            break;
        }
    }
    for (GraphIndex g : train) {
        auto r = subgraph_isomorphic(fragment, dataset.graphs[g], opts);
        if (r == MatchResult::Yes) return true;
        if (r == MatchResult::Timeout && timed_out) *timed_out = true;
    }
    return false;
}

inline ValidityReport validity(const std::vector<Representative>& fragments,
                               const LabeledDataset& dataset,
                               std::chrono::milliseconds timeout = std::chrono::milliseconds(10000)) {
    ValidityReport report;
    auto train = dataset.split_indices(Split::Train);
    report.total = fragments.size();
    for (const auto& rep : fragments) {
        bool timed_out = false;
        if (fragment_is_valid(rep.subgraph, dataset, train, rep.source_graph, timeout, &timed_out))
            ++report.valid;
        if (timed_out) ++report.timeouts;
    }
    report.fraction = report.total ? static_cast<double>(report.valid) / static_cast<double>(report.total)
                                   : 1.0;
    return report;
}

// ---------------------------------------------------------------------------
// Stability: |intersection of k runs| / max run size, over canonical forms.
// ---------------------------------------------------------------------------

inline double stability(const std::vector<std::set<std::string>>& runs) {
    if (runs.size() < 2) fail(ErrorKind::Contract, "stability: needs at least 2 runs");
    std::size_t max_size = 0;
    for (const auto& run : runs) max_size = std::max(max_size, run.size());
    if (max_size == 0) {
        log_warn("stability: some run produced zero subgraphs");
        return 0.0;
    }
    for (const auto& run : runs) {
        if (run.empty()) {
            log_warn("stability: some run produced zero subgraphs");
            return 0.0;
        }
    }
    std::set<std::string> common = runs[0];
    for (std::size_t i = 1; i < runs.size(); ++i) {
        std::set<std::string> next;
        for (const auto& s : common)
            if (runs[i].count(s)) next.insert(s);
        common = std::move(next);
    }
    return static_cast<double>(common.size()) / static_cast<double>(max_size);
}

/// All representative canonical forms referenced by a rule set; the unit the
/// stability metric compares across runs.
inline std::set<std::string> explanation_forms(const DnfRuleSet& rules, const GroundedModel& model) {
    std::set<std::string> forms;
    for (int id : rules.used_predicates())
        for (const auto& rep : model.predicates[static_cast<std::size_t>(id)].representatives)
            forms.insert(rep.canonical);
    return forms;
}

// ---------------------------------------------------------------------------
// Coverage: per-class correct fraction after forcing invalid predicates off.
// ---------------------------------------------------------------------------

enum class CoverageBasis { Top1, Any };

/// Validity per rule-used predicate, judged by its top representative (or any
/// representative under CoverageBasis::Any).
inline std::map<int, bool> predicate_validity(const DnfRuleSet& rules, const GroundedModel& model,
                                              const LabeledDataset& dataset,
                                              CoverageBasis basis = CoverageBasis::Top1,
                                              std::chrono::milliseconds timeout = std::chrono::milliseconds(10000)) {
    std::map<int, bool> valid;
    auto train = dataset.split_indices(Split::Train);
    for (int id : rules.used_predicates()) {
        const auto& reps = model.predicates[static_cast<std::size_t>(id)].representatives;
        bool ok = false;
        std::size_t limit = basis == CoverageBasis::Top1 ? std::min<std::size_t>(1, reps.size()) : reps.size();
        for (std::size_t i = 0; i < limit && !ok; ++i)
            ok = fragment_is_valid(reps[i].subgraph, dataset, train, reps[i].source_graph, timeout, nullptr);
        valid[id] = ok;
    }
    return valid;
}

/// Re-evaluates the rules with invalid predicates forced to 0 and returns the
/// fraction of class-c instances still uniquely and correctly predicted.
inline double coverage(const std::vector<InferenceOutcome>& outcomes, const DnfRuleSet& rules,
                       const std::map<int, bool>& predicate_valid, int klass) {
    std::size_t total = 0, covered = 0;
    for (const auto& o : outcomes) {
        if (o.timed_out || o.y_hat != klass) continue;
        ++total;
        auto bits = o.bits;
        for (const auto& [id, ok] : predicate_valid)
            if (!ok) bits[static_cast<std::size_t>(id)] = 0;
        if (rules.eval(bits).verdict == klass) ++covered;
    }
    if (total == 0) return 0.0;
    return static_cast<double>(covered) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// Aggregate report
// ---------------------------------------------------------------------------

struct EvaluationReport {
    double fidelity = 0.0;
    std::vector<double> coverage_per_class;
    std::optional<double> stability_value; // only when >= 2 runs supplied
    ValidityReport validity_report;
    PrfReport prf;
    std::size_t evaluated = 0;
    std::size_t timeouts = 0;
    std::size_t ambiguous = 0;
    double wall_seconds = 0.0; // reported via the run manifest, never in the
                               // JSON report, so identical inputs give
                               // byte-identical reports

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["fid_d"] = fidelity;
        j["coverage"] = coverage_per_class;
        if (stability_value) j["stability"] = *stability_value;
        j["validity"] = {{"fraction", validity_report.fraction},
                         {"valid", validity_report.valid},
                         {"total", validity_report.total},
                         {"timeouts", validity_report.timeouts}};
        j["accuracy"] = prf.accuracy;
        j["precision"] = prf.precision;
        j["recall"] = prf.recall;
        j["f1"] = prf.f1;
        j["evaluated"] = evaluated;
        j["timeouts"] = timeouts;
        j["ambiguous"] = ambiguous;
        return j;
    }

    std::string to_text() const {
        char buf[256];
        std::string out;
        out += "metric        value\n";
        out += "------------  ------------\n";
        std::snprintf(buf, sizeof(buf), "Fid_D         %.4f\n", fidelity);
        out += buf;
        for (std::size_t c = 0; c < coverage_per_class.size(); ++c) {
            std::snprintf(buf, sizeof(buf), "coverage[%zu]   %.4f\n", c, coverage_per_class[c]);
            out += buf;
        }
        if (stability_value) {
            std::snprintf(buf, sizeof(buf), "stability     %.4f\n", *stability_value);
            out += buf;
        }
        std::snprintf(buf, sizeof(buf), "validity      %.4f (%zu/%zu, %zu timeouts)\n",
                      validity_report.fraction, validity_report.valid, validity_report.total,
                      validity_report.timeouts);
        out += buf;
        std::snprintf(buf, sizeof(buf), "accuracy      %.4f\nprecision     %.4f\nrecall        %.4f\nf1            %.4f\n",
                      prf.accuracy, prf.precision, prf.recall, prf.f1);
        out += buf;
        std::snprintf(buf, sizeof(buf), "evaluated     %zu (%zu ambiguous, %zu timeouts)\n",
                      evaluated, ambiguous, timeouts);
        out += buf;
        return out;
    }
};

} // namespace logicx
