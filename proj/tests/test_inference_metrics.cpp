// Grounded inference and every evaluation metric against hand-computed
// fixtures: fidelity weighting, ambiguity handling, coverage pruning,
// stability and validity formulas.

#include <logicx/inference.hpp>
#include <logicx/metrics.hpp>

#include "toy_fixture.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace logicx;

namespace {

struct ToyPipeline {
    toy::Fixture fixture;
    PredicateSet set;
    GroundedModel model;
    DnfRuleSet rules;
};

ToyPipeline toy_pipeline(int depth = 1) {
    ToyPipeline p{toy::build(), {}, {}, {}};
    p.set = mine_predicates(p.fixture.dataset, p.fixture.embeddings, {1}, {0.18}, 1);
    p.model = ground_predicates(p.set, p.fixture.dataset, p.fixture.embeddings);
    auto matrix = build_matrix(p.set, p.fixture.dataset, p.fixture.embeddings);
    p.rules = learn_rules(matrix, depth);
    return p;
}

InferenceOutcome outcome(int y_hat, int verdict, bool timed_out = false) {
    InferenceOutcome o;
    o.y_hat = y_hat;
    o.verdict = verdict;
    o.timed_out = timed_out;
    return o;
}

} // namespace

TEST(Inference, GroundedBitsReproduceEmbeddingRowsOnTraining) {
    auto p = toy_pipeline();
    std::vector<int> all_ids;
    for (std::size_t i = 0; i < p.set.size(); ++i) all_ids.push_back(static_cast<int>(i));
    for (GraphIndex g = 0; g < p.fixture.dataset.size(); ++g) {
        auto by_emb = predicate_row(p.set, p.fixture.dataset.graphs[g],
                                    p.fixture.embeddings.node_embeddings[g]);
        auto grounded = grounded_bits(p.model, p.fixture.dataset.graphs[g], all_ids);
        EXPECT_EQ(grounded, by_emb) << "graph " << g;
    }
}

TEST(Inference, NoMatchingHashGivesZero) {
    auto p = toy_pipeline();
    // K5 node neighborhoods hash to K5, which never occurs in training
    auto k5 = toy::make("k5", 5,
                        {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}},
                        "A");
    for (std::size_t i = 0; i < p.set.size(); ++i)
        EXPECT_FALSE(evaluate_predicate_grounded(p.model, static_cast<int>(i), k5));
    auto isolated = toy::make("iso", 1, {}, "A");
    for (std::size_t i = 0; i < p.set.size(); ++i)
        EXPECT_FALSE(evaluate_predicate_grounded(p.model, static_cast<int>(i), isolated));
}

TEST(Inference, ToyVerdictsFollowTheDepthOneRule) {
    auto p = toy_pipeline();
    for (GraphIndex g = 0; g < p.fixture.dataset.size(); ++g) {
        auto out = infer(p.rules, p.model, p.fixture.dataset.graphs[g],
                         p.fixture.embeddings.predictions[g]);
        EXPECT_EQ(out.verdict, p.fixture.dataset.class_labels[g]);
        EXPECT_EQ(out.verdict, out.y_hat);
    }
}

TEST(Inference, GroundedModeGeneralizesToNovelLabelCombination) {
    // Training: P2 ends labeled (A,A) with bit 0, (B,B) and (C,C) with bit 1.
    // A test edge labeled (B,C) satisfies the grounding rule (no A present)
    // in grounded mode but matches no stored representative in strict mode.
    LabeledDataset ds;
    EmbeddingTable table;
    table.dim = 1;
    table.layers = 1;
    auto add = [&](const std::string& s1, const std::string& s2, double emb, int label) {
        Graph g;
        g.id = "e" + std::to_string(ds.graphs.size());
        g.num_nodes = 2;
        g.edges = {{0, 1}};
        g.node_labels = {s1, s2};
        auto onehot = [](const std::string& s) {
            return std::vector<double>{s == "A" ? 1.0 : 0.0, s == "B" ? 1.0 : 0.0, s == "C" ? 1.0 : 0.0};
        };
        g.node_features = {onehot(s1), onehot(s2)};
        ds.graphs.push_back(std::move(g));
        ds.class_labels.push_back(label);
        table.node_embeddings.push_back({{emb}, {emb}});
        table.predictions.push_back(label);
    };
    add("A", "A", 0.1, 0);
    add("A", "A", 0.1, 0);
    add("B", "B", 0.9, 1);
    add("B", "B", 0.9, 1);
    add("C", "C", 0.9, 1);
    add("C", "C", 0.9, 1);
    ds.split_assignment.assign(6, Split::Train);
    ds.num_classes = 2;
    ds.feature_kind = infer_feature_kinds(ds.graphs);

    auto set = mine_predicates(ds, table, {0}, {0.5}, 1);
    ASSERT_EQ(set.size(), 2u);
    auto model = ground_predicates(set, ds, table);
    ASSERT_EQ(model.predicates[1].kind, GroundingKind::FeatureRule);

    Graph novel;
    novel.id = "novel";
    novel.num_nodes = 2;
    novel.edges = {{0, 1}};
    novel.node_labels = {"B", "C"};
    novel.node_features = {{0, 1, 0}, {0, 0, 1}};

    InferenceConfig grounded;
    InferenceConfig strict;
    strict.mode = PredicateMatchMode::Structural;
    EXPECT_TRUE(evaluate_predicate_grounded(model, 1, novel, grounded));
    bool strict_hit = evaluate_predicate_grounded(model, 1, novel, strict);
    EXPECT_FALSE(strict_hit);
}

TEST(Inference, ModeDominanceOnSupporters) {
    // on graphs that support a predicate, the grounded bit is at least the
    // strict-representative bit (rule-satisfying supersets)
    auto p = toy_pipeline();
    std::vector<int> ids;
    for (std::size_t i = 0; i < p.set.size(); ++i) ids.push_back(static_cast<int>(i));
    InferenceConfig strict;
    strict.mode = PredicateMatchMode::Structural;
    for (GraphIndex g = 0; g < p.fixture.dataset.size(); ++g) {
        auto supporters = predicate_row(p.set, p.fixture.dataset.graphs[g],
                                        p.fixture.embeddings.node_embeddings[g]);
        auto grounded = grounded_bits(p.model, p.fixture.dataset.graphs[g], ids);
        auto structural = grounded_bits(p.model, p.fixture.dataset.graphs[g], ids, nullptr, strict);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (supporters[i]) {
                EXPECT_GE(grounded[i], structural[i]) << "graph " << g << " pred " << i;
            }
        }
    }
}

TEST(Metrics, FidAllCorrectIsOne) {
    std::vector<InferenceOutcome> outs = {outcome(0, 0), outcome(1, 1), outcome(0, 0)};
    EXPECT_DOUBLE_EQ(fid_d(outs), 1.0);
}

TEST(Metrics, FidClassWeightedHandExample) {
    // class 0: three correct; class 1: one incorrect -> (1 + 0) / 2
    std::vector<InferenceOutcome> outs = {outcome(0, 0), outcome(0, 0), outcome(0, 0), outcome(1, 0)};
    EXPECT_DOUBLE_EQ(fid_d(outs), 0.5);
}

TEST(Metrics, AmbiguousCountsAsIncorrect) {
    std::vector<InferenceOutcome> outs = {outcome(0, kAmbiguous), outcome(0, 0), outcome(1, 1)};
    // class 0 match rate 1/2, class 1 match rate 1 -> (0.5 + 1)/2
    EXPECT_DOUBLE_EQ(fid_d(outs), 0.75);
}

TEST(Metrics, TimeoutsExcludedAndTallied) {
    std::vector<InferenceOutcome> outs = {outcome(0, 0), outcome(0, 1, true), outcome(1, 1)};
    std::size_t timeouts = 0;
    EXPECT_DOUBLE_EQ(fid_d(outs, &timeouts), 1.0);
    EXPECT_EQ(timeouts, 1u);
}

TEST(Metrics, PrfPerfectAndAllAmbiguous) {
    std::vector<InferenceOutcome> perfect = {outcome(0, 0), outcome(1, 1)};
    auto p = weighted_prf(perfect);
    EXPECT_DOUBLE_EQ(p.accuracy, 1.0);
    EXPECT_DOUBLE_EQ(p.precision, 1.0);
    EXPECT_DOUBLE_EQ(p.recall, 1.0);
    EXPECT_DOUBLE_EQ(p.f1, 1.0);

    std::vector<InferenceOutcome> ambiguous = {outcome(0, kAmbiguous), outcome(1, kAmbiguous)};
    auto a = weighted_prf(ambiguous);
    EXPECT_DOUBLE_EQ(a.accuracy, 0.0);
    EXPECT_DOUBLE_EQ(a.recall, 0.0);
    EXPECT_EQ(a.undefined_precision_classes.size(), 2u);
}

TEST(Metrics, PrfHandConfusionMatrix) {
    std::vector<InferenceOutcome> outs = {outcome(0, 0), outcome(0, 0), outcome(0, 1),
                                          outcome(1, 1), outcome(1, kAmbiguous)};
    auto p = weighted_prf(outs);
    EXPECT_DOUBLE_EQ(p.accuracy, 0.6);
    EXPECT_NEAR(p.recall, 7.0 / 12.0, 1e-12);
    EXPECT_NEAR(p.precision, 0.75, 1e-12);
    EXPECT_NEAR(p.f1, 0.65, 1e-12);
    EXPECT_NEAR(fid_d(outs), p.recall, 1e-12);
}

TEST(Metrics, FidEqualsWeightedRecallOnRandomFixtures) {
    std::mt19937_64 rng(123);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<InferenceOutcome> outs;
        int classes = 2 + static_cast<int>(rng() % 3);
        for (int c = 0; c < classes; ++c) outs.push_back(outcome(c, static_cast<int>(rng() % classes)));
        for (int i = 0; i < 40; ++i) {
            int y = static_cast<int>(rng() % classes);
            int v = rng() % 5 == 0 ? kAmbiguous : static_cast<int>(rng() % classes);
            outs.push_back(outcome(y, v));
        }
        EXPECT_NEAR(fid_d(outs), weighted_prf(outs).recall, 1e-12);
    }
}

TEST(Metrics, StabilityFormula) {
    std::set<std::string> a = {"x", "y", "z", "w"};
    EXPECT_DOUBLE_EQ(stability({a, a, a}), 1.0);
    std::set<std::string> b = {"p", "q"};
    EXPECT_DOUBLE_EQ(stability({a, b}), 0.0);
    // sizes 4, 5, 6 with 3 common forms -> 3/6
    std::set<std::string> r1 = {"c1", "c2", "c3", "a1"};
    std::set<std::string> r2 = {"c1", "c2", "c3", "b1", "b2"};
    std::set<std::string> r3 = {"c1", "c2", "c3", "d1", "d2", "d3"};
    EXPECT_DOUBLE_EQ(stability({r1, r2, r3}), 0.5);
    EXPECT_DOUBLE_EQ(stability({a, {}}), 0.0); // empty run warns and returns 0
}

TEST(Metrics, ValidityCountsFabricatedFragmentInvalid) {
    auto p = toy_pipeline();
    std::vector<Representative> frags;
    for (int id : {0, 2, 4})
        frags.push_back(p.model.predicates[id].representatives[0]);
    // fabricated: a triangle labeled with a symbol pattern that never occurs
    Representative fake;
    fake.subgraph = toy::make("fake", 3, {{0, 1}, {1, 2}, {0, 2}}, "B");
    fake.anchor = 0;
    fake.canonical = "fake";
    frags.push_back(fake);
    auto report = validity(frags, p.fixture.dataset);
    EXPECT_EQ(report.total, 4u);
    EXPECT_EQ(report.valid, 3u);
    EXPECT_DOUBLE_EQ(report.fraction, 0.75);
}

TEST(Metrics, PipelineRepresentativesAllValid) {
    auto p = toy_pipeline();
    std::vector<Representative> frags;
    for (const auto& gp : p.model.predicates)
        for (const auto& rep : gp.representatives) frags.push_back(rep);
    auto report = validity(frags, p.fixture.dataset);
    EXPECT_DOUBLE_EQ(report.fraction, 1.0);
}

TEST(Metrics, CoverageWithInvalidPredicatePruned) {
    DnfRuleSet rules;
    rules.num_classes = 2;
    rules.width = 2;
    rules.per_class.resize(2);
    rules.per_class[1] = {{{0, false}}, {{0, true}, {1, false}}}; // p0 or (!p0 and p1)
    rules.per_class[0] = {{{0, true}, {1, true}}};                 // neither
    auto with_bits = [](int y, std::vector<std::uint8_t> bits, int verdict) {
        InferenceOutcome o;
        o.y_hat = y;
        o.bits = std::move(bits);
        o.verdict = verdict;
        return o;
    };
    std::vector<InferenceOutcome> outs = {
        with_bits(1, {1, 0}, 1),
        with_bits(1, {0, 1}, 1),
        with_bits(0, {0, 0}, 0),
        with_bits(1, {0, 1}, 1),
    };
    std::map<int, bool> valid = {{0, true}, {1, false}};
    // forcing p1 off: first graph still correct, the two (0,1) graphs fall to class 0
    EXPECT_NEAR(coverage(outs, rules, valid, 1), 1.0 / 3.0, 1e-12);
    EXPECT_DOUBLE_EQ(coverage(outs, rules, valid, 0), 1.0);
    // all predicates valid: coverage equals the per-class accuracy
    std::map<int, bool> all_valid = {{0, true}, {1, true}};
    EXPECT_DOUBLE_EQ(coverage(outs, rules, all_valid, 1), 1.0);
    // a class-1 rule referencing only invalid predicates covers nothing
    DnfRuleSet only_invalid;
    only_invalid.num_classes = 2;
    only_invalid.width = 2;
    only_invalid.per_class.resize(2);
    only_invalid.per_class[1] = {{{1, false}}};
    only_invalid.per_class[0] = {{{1, true}}};
    EXPECT_DOUBLE_EQ(coverage(outs, only_invalid, valid, 1), 0.0);
}

TEST(Metrics, PredicateValidityOnToyPipeline) {
    auto p = toy_pipeline();
    auto valid = predicate_validity(p.rules, p.model, p.fixture.dataset);
    for (const auto& [id, ok] : valid) EXPECT_TRUE(ok) << "predicate " << id;
}

TEST(Inference, DeterministicAcrossJobCounts) {
    auto p = toy_pipeline();
    auto idx = p.fixture.dataset.split_indices(Split::Train);
    InferenceConfig one;
    one.jobs = 1;
    InferenceConfig four;
    four.jobs = 4;
    auto a = infer_all(p.rules, p.model, p.fixture.dataset, idx, p.fixture.embeddings.predictions, one);
    auto b = infer_all(p.rules, p.model, p.fixture.dataset, idx, p.fixture.embeddings.predictions, four);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].verdict, b[i].verdict);
        EXPECT_EQ(a[i].bits, b[i].bits);
    }
}
