// Command-line front end wiring the pipeline:
//   synth | ingest -> (train-ref-gnn | imported embeddings) -> extract ->
//   ground -> infer -> evaluate -> export-dot
// Every stage writes self-describing JSON artifacts plus a run manifest, so
// the pipeline can be resumed from any stage.

#include <CLI11.hpp>

#include <logicx/logicx.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace logicx;

namespace {

constexpr int kSchemaVersion = 1;

struct RunContext {
    std::string command;
    std::uint64_t seed = 0;
    fs::path out_dir;
    std::map<std::string, std::string> flags;
    std::map<std::string, double> timings_ms;

    void note(const std::string& key, const std::string& value) { flags[key] = value; }

    json stamp(json payload) const {
        payload["schema_version"] = kSchemaVersion;
        payload["producer"] = command;
        payload["seed"] = seed;
        return payload;
    }

    void write_artifact(const fs::path& path, json payload) const {
        std::ofstream out(path);
        if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
        out << stamp(std::move(payload)).dump(2) << "\n";
    }

    void write_manifest() const {
        json j;
        j["schema_version"] = kSchemaVersion;
        j["command"] = command;
        j["seed"] = seed;
        j["flags"] = flags;
        j["timings_ms"] = timings_ms;
        std::ofstream out(out_dir / ("manifest-" + command + ".json"));
        out << j.dump(2) << "\n";
    }
};

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        fail(ErrorKind::Parse, path.string() + ": " + e.what());
    }
    return j;
}

LabeledDataset load_dataset_auto(const fs::path& path, const LoadOptions& options = {}) {
    return load_dataset(path, fs::is_directory(path) ? "tu-dir" : "jsonl", options);
}

Split parse_split(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "test") return Split::Test;
    fail(ErrorKind::Contract, "bad --split value: " + s);
}

std::vector<GraphIndex> split_or_all(const LabeledDataset& ds, const std::string& split) {
    if (split == "all") {
        std::vector<GraphIndex> all(ds.size());
        std::iota(all.begin(), all.end(), 0);
        return all;
    }
    return ds.split_indices(parse_split(split));
}

InferenceConfig make_inference_config(const std::string& mode, double timeout_s, unsigned jobs) {
    InferenceConfig cfg;
    if (mode == "structural") cfg.mode = PredicateMatchMode::Structural;
    else if (mode != "grounded") fail(ErrorKind::Contract, "bad --match-mode: " + mode);
    cfg.match_timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000.0));
    cfg.jobs = jobs;
    return cfg;
}

json outcomes_to_json(const std::vector<InferenceOutcome>& outcomes) {
    json arr = json::array();
    for (const auto& o : outcomes) {
        json bits = json::array();
        for (auto b : o.bits) bits.push_back(static_cast<int>(b));
        arr.push_back({{"graph_id", o.graph_id},
                       {"bits", std::move(bits)},
                       {"satisfied", o.satisfied},
                       {"verdict", o.verdict},
                       {"y_hat", o.y_hat},
                       {"timed_out", o.timed_out}});
    }
    return arr;
}

// ---------------------------------------------------------------------------

void run_synth(RunContext& ctx, const SynthConfig& config, double noise) {
    StageTimer timer;
    fs::create_directories(ctx.out_dir);
    auto result = generate_synthetic(config);
    save_dataset_jsonl(result.dataset, ctx.out_dir / "dataset.jsonl");
    auto table = oracle_embeddings(result.dataset, result.truth, noise, config.seed);
    save_embeddings(table, result.dataset, ctx.out_dir / "embeddings.jsonl");
    json truth;
    truth["rule"] = config.rule.to_string();
    json bits = json::array();
    for (GraphIndex g = 0; g < result.dataset.size(); ++g) {
        bits.push_back({{"graph_id", result.dataset.graphs[g].id},
                        {"house", result.truth.graph_bits[g][0]},
                        {"wheel", result.truth.graph_bits[g][1]},
                        {"grid", result.truth.graph_bits[g][2]},
                        {"membership", result.truth.node_membership[g]}});
    }
    truth["graphs"] = std::move(bits);
    ctx.write_artifact(ctx.out_dir / "motifs.json", std::move(truth));
    ctx.timings_ms["synth"] = timer.elapsed_ms();
    ctx.write_manifest();
    std::cout << "synth: wrote " << result.dataset.size() << " graphs to " << ctx.out_dir << "\n";
}

void run_ingest(RunContext& ctx, const fs::path& input, const std::string& format,
                const LoadOptions& options) {
    StageTimer timer;
    fs::create_directories(ctx.out_dir);
    auto ds = format == "auto" ? load_dataset_auto(input, options) : load_dataset(input, format, options);
    save_dataset_jsonl(ds, ctx.out_dir / "dataset.jsonl");
    ctx.timings_ms["ingest"] = timer.elapsed_ms();
    ctx.write_manifest();
    std::cout << "ingest: " << ds.size() << " graphs, " << ds.num_classes << " classes, d0 = "
              << ds.feature_dim() << "\n";
}

void run_train(RunContext& ctx, const fs::path& dataset_path, const GcnTrainConfig& config,
               const fs::path& model_out, const fs::path& emb_out, unsigned jobs) {
    StageTimer timer;
    auto ds = load_dataset_auto(dataset_path);
    auto trained = gcn_train(ds, config);
    ctx.timings_ms["train"] = timer.elapsed_ms();

    StageTimer t_export;
    json model_json = trained.model.to_json();
    model_json["train_accuracy"] = trained.train_accuracy;
    model_json["final_loss"] = trained.final_loss;
    model_json["config"] = {{"layers", config.layers},
                            {"hidden", config.hidden},
                            {"lr", config.learning_rate},
                            {"epochs", config.epochs}};
    ctx.write_artifact(model_out, std::move(model_json));
    if (!emb_out.empty()) {
        auto table = make_embedding_table(trained.model, ds, jobs);
        save_embeddings(table, ds, emb_out);
    }
    ctx.timings_ms["export"] = t_export.elapsed_ms();
    ctx.write_manifest();
    std::cout << "train-ref-gnn: train accuracy " << trained.train_accuracy << "\n";
}

void run_extract(RunContext& ctx, const fs::path& dataset_path, const fs::path& emb_path,
                 const ExtractConfig& config) {
    auto ds = load_dataset_auto(dataset_path);
    auto table = load_embeddings(emb_path, ds);
    auto result = extract_pipeline(ds, table, config);
    ctx.timings_ms = {result.timings_ms.begin(), result.timings_ms.end()};

    fs::create_directories(ctx.out_dir);
    ctx.write_artifact(ctx.out_dir / "predicates.json", result.predicates.to_json());
    ctx.write_artifact(ctx.out_dir / "rules.json", result.rules.to_json());
    json matrix;
    matrix["width"] = result.matrix.width;
    json rows = json::array();
    for (std::size_t i = 0; i < result.matrix.rows.size(); ++i) {
        std::string bits;
        for (auto b : result.matrix.rows[i]) bits.push_back(b ? '1' : '0');
        rows.push_back({{"graph_id", result.matrix.graph_ids[i]},
                        {"y_hat", result.matrix.row_labels[i]},
                        {"bits", std::move(bits)}});
    }
    matrix["rows"] = std::move(rows);
    ctx.write_artifact(ctx.out_dir / "matrix.json", std::move(matrix));
    ctx.note("informative_dims", std::to_string(result.dims.size()));
    ctx.note("dim_tree_accuracy", std::to_string(result.dim_tree_accuracy));
    ctx.note("dim_tree_reached_target", result.dim_tree_reached_target ? "yes" : "no");
    ctx.write_manifest();
    std::cout << "extract: " << result.predicates.size() << " predicates, "
              << result.matrix.rows.size() << " matrix rows, rules depth " << config.rule_depth << "\n";
    for (int c = 0; c < result.rules.num_classes; ++c) std::cout << "  " << result.rules.pretty(c) << "\n";
}

void run_ground(RunContext& ctx, const fs::path& dataset_path, const fs::path& emb_path,
                const fs::path& predicates_path, const GroundingConfig& config) {
    StageTimer timer;
    auto ds = load_dataset_auto(dataset_path);
    auto table = load_embeddings(emb_path, ds);
    auto set = PredicateSet::from_json(read_json_file(predicates_path));
    auto model = ground_predicates(set, ds, table, config);
    ctx.timings_ms["grounding"] = timer.elapsed_ms();
    fs::create_directories(ctx.out_dir);
    ctx.write_artifact(ctx.out_dir / "grounded.json", model.to_json());
    ctx.write_manifest();
    std::size_t feature_rules = 0;
    for (const auto& gp : model.predicates)
        if (gp.kind == GroundingKind::FeatureRule) ++feature_rules;
    std::cout << "ground: " << model.predicates.size() << " predicates grounded, " << feature_rules
              << " with feature rules\n";
}

void run_infer(RunContext& ctx, const fs::path& dataset_path, const fs::path& rules_path,
               const fs::path& grounded_path, const std::string& split, const InferenceConfig& config,
               const fs::path& emb_path) {
    StageTimer timer;
    auto ds = load_dataset_auto(dataset_path);
    auto rules = DnfRuleSet::from_json(read_json_file(rules_path));
    auto model = GroundedModel::from_json(read_json_file(grounded_path));
    std::vector<int> y_hat(ds.size(), -1);
    if (!emb_path.empty()) y_hat = load_embeddings(emb_path, ds).predictions;
    auto indices = split_or_all(ds, split);
    auto outcomes = infer_all(rules, model, ds, indices, y_hat, config);
    ctx.timings_ms["inference"] = timer.elapsed_ms();
    fs::create_directories(ctx.out_dir);
    ctx.write_artifact(ctx.out_dir / "outcomes.json", json{{"outcomes", outcomes_to_json(outcomes)}});
    ctx.write_manifest();
    std::size_t ambiguous = 0;
    for (const auto& o : outcomes)
        if (o.verdict == kAmbiguous) ++ambiguous;
    std::cout << "infer: " << outcomes.size() << " graphs, " << ambiguous << " ambiguous\n";
}

void run_evaluate(RunContext& ctx, const fs::path& dataset_path, const fs::path& emb_path,
                  const fs::path& rules_path, const fs::path& grounded_path,
                  const EvaluateConfig& base_config, const std::vector<fs::path>& stability_dirs) {
    auto ds = load_dataset_auto(dataset_path);
    auto table = load_embeddings(emb_path, ds);
    auto rules = DnfRuleSet::from_json(read_json_file(rules_path));
    auto model = GroundedModel::from_json(read_json_file(grounded_path));
    EvaluateConfig config = base_config;
    for (const auto& dir : stability_dirs) {
        auto other_rules = DnfRuleSet::from_json(read_json_file(dir / "rules.json"));
        auto other_model = GroundedModel::from_json(read_json_file(dir / "grounded.json"));
        config.stability_runs.push_back(explanation_forms(other_rules, other_model));
    }
    auto result = evaluate_pipeline(ds, table, rules, model, config);
    ctx.timings_ms["evaluate"] = result.report.wall_seconds * 1000.0;
    fs::create_directories(ctx.out_dir);
    ctx.write_artifact(ctx.out_dir / "report.json", result.report.to_json());
    {
        std::ofstream txt(ctx.out_dir / "report.txt");
        txt << result.report.to_text();
    }
    ctx.write_artifact(ctx.out_dir / "outcomes.json",
                       json{{"outcomes", outcomes_to_json(result.outcomes)}});
    ctx.write_manifest();
    std::cout << result.report.to_text();
    std::printf("time          %.2fs\n", result.report.wall_seconds);
}

void run_export_dot(RunContext& ctx, const fs::path& grounded_path, const fs::path& rules_path) {
    StageTimer timer;
    auto model = GroundedModel::from_json(read_json_file(grounded_path));
    std::vector<int> ids;
    if (!rules_path.empty()) {
        ids = DnfRuleSet::from_json(read_json_file(rules_path)).used_predicates();
    } else {
        for (std::size_t i = 0; i < model.predicates.size(); ++i) ids.push_back(static_cast<int>(i));
    }
    export_dot(model, ids, ctx.out_dir / "dot");
    ctx.timings_ms["export_dot"] = timer.elapsed_ms();
    ctx.write_manifest();
    std::cout << "export-dot: wrote " << ids.size() << " predicate folders under "
              << (ctx.out_dir / "dot") << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"logicx: structure-and-embedding predicate rules for GNN explanations"};
    app.require_subcommand(1);

    // shared flags, bound per subcommand
    std::string dataset_path, emb_path, out_dir = ".", split = "test";
    std::string match_mode = "grounded", coverage_basis = "top1";
    double match_timeout = 10.0;
    std::uint64_t seed = 0;
    unsigned jobs = std::thread::hardware_concurrency();

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out-dir", out_dir, "output directory");
        sub->add_option("--seed", seed, "run seed");
        sub->add_option("--jobs", jobs, "worker threads for parallel-safe stages");
    };

    // synth
    auto* synth = app.add_subcommand("synth", "generate a planted-motif benchmark with oracle embeddings");
    SynthConfig synth_cfg;
    double synth_noise = 0.2;
    std::string synth_motifs = "house,wheel,grid", synth_rule = "(H&W)|(H&G)|(W&G)", synth_config_file;
    synth->add_option("--config", synth_config_file, "JSON config file; flags override its values");
    synth->add_option("--n-graphs", synth_cfg.n_graphs, "number of graphs");
    synth->add_option("--base-n", synth_cfg.base_n, "total node budget per graph");
    synth->add_option("--attach-m", synth_cfg.attach_m, "BA attachments per node");
    synth->add_option("--motifs", synth_motifs, "comma list from house,wheel,grid");
    synth->add_option("--rule", synth_rule, "label rule DNF over H,W,G");
    synth->add_option("--motif-prob", synth_cfg.motif_prob, "plant probability per motif");
    synth->add_option("--noise", synth_noise, "oracle embedding noise amplitude");
    synth->add_option("--test-fraction", synth_cfg.test_fraction, "test split fraction");
    add_common(synth);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "load a dataset and write canonical JSONL");
    std::string ingest_input, ingest_format = "auto", ingest_symbols;
    bool degree_feature = false;
    double test_fraction = 0.2;
    ingest->add_option("--input", ingest_input, "dataset file or TU directory")->required();
    ingest->add_option("--format", ingest_format, "jsonl | tu-dir | auto");
    ingest->add_option("--symbols", ingest_symbols, "comma symbol table for one-hot node labels");
    ingest->add_option("--test-fraction", test_fraction, "test split fraction");
    ingest->add_flag("--degree-feature", degree_feature, "append node degree as a feature dimension");
    add_common(ingest);

    // train-ref-gnn
    auto* train = app.add_subcommand("train-ref-gnn", "train the reference GCN and export embeddings");
    GcnTrainConfig train_cfg;
    std::string model_out = "model.json", emb_out = "embeddings.jsonl";
    train->add_option("--dataset", dataset_path, "dataset path")->required();
    train->add_option("--layers,-L", train_cfg.layers, "message-passing layers");
    train->add_option("--hidden", train_cfg.hidden, "hidden width");
    train->add_option("--lr", train_cfg.learning_rate, "learning rate");
    train->add_option("--epochs", train_cfg.epochs, "full-batch epochs");
    train->add_option("--out", model_out, "model JSON path");
    train->add_option("--emb-out", emb_out, "embedding file path");
    add_common(train);

    // extract
    auto* extract = app.add_subcommand("extract", "informative dims, predicates, matrix and rules");
    ExtractConfig extract_cfg;
    std::string anchor_center = "on";
    extract->add_option("--dataset", dataset_path, "dataset path")->required();
    extract->add_option("--embeddings", emb_path, "embedding file")->required();
    extract->add_option("--depth", extract_cfg.rule_depth, "rule tree depth");
    extract->add_option("--min-support", extract_cfg.min_support, "minimum predicate support");
    extract->add_option("--anchor-center", anchor_center, "on | off: seed WL hash at the center");
    extract->add_option("--dim-depth-cap", extract_cfg.dim_tree_depth_cap,
                        "depth cap for the informative-dimension tree");
    add_common(extract);

    // ground
    auto* ground = app.add_subcommand("ground", "orbit templates, grounding trees, representatives");
    GroundingConfig ground_cfg;
    std::string predicates_path;
    ground->add_option("--dataset", dataset_path, "dataset path")->required();
    ground->add_option("--embeddings", emb_path, "embedding file")->required();
    ground->add_option("--predicates", predicates_path, "predicates.json from extract")->required();
    ground->add_option("--ground-depth", ground_cfg.depth, "grounding tree depth");
    ground->add_option("--orbit-cap", ground_cfg.orbit_cap, "node cap for exact orbit computation");
    ground->add_option("--top-k", ground_cfg.top_k, "representatives per predicate");
    add_common(ground);

    // infer
    auto* infer_cmd = app.add_subcommand("infer", "grounded rule inference over a split");
    std::string rules_path, grounded_path;
    infer_cmd->add_option("--dataset", dataset_path, "dataset path")->required();
    infer_cmd->add_option("--rules", rules_path, "rules.json")->required();
    infer_cmd->add_option("--grounded", grounded_path, "grounded.json")->required();
    infer_cmd->add_option("--embeddings", emb_path, "embedding file (for y_hat reference)");
    infer_cmd->add_option("--split", split, "train | test | all");
    infer_cmd->add_option("--match-mode", match_mode, "grounded | structural");
    infer_cmd->add_option("--match-timeout", match_timeout, "seconds per structural match");
    add_common(infer_cmd);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "fidelity, coverage, stability, validity report");
    std::vector<std::string> stability_runs;
    evaluate->add_option("--dataset", dataset_path, "dataset path")->required();
    evaluate->add_option("--embeddings", emb_path, "embedding file")->required();
    evaluate->add_option("--rules", rules_path, "rules.json")->required();
    evaluate->add_option("--grounded", grounded_path, "grounded.json")->required();
    evaluate->add_option("--split", split, "train | test");
    evaluate->add_option("--match-mode", match_mode, "grounded | structural");
    evaluate->add_option("--match-timeout", match_timeout, "seconds per structural match");
    evaluate->add_option("--coverage-basis", coverage_basis, "top1 | any");
    std::string fid_weights = "test";
    evaluate->add_option("--fid-weights", fid_weights, "test | train: class-frequency source for Fid_D");
    evaluate->add_option("--stability-run", stability_runs,
                         "directory of another run (rules.json + grounded.json); repeatable");
    add_common(evaluate);

    // export-dot
    auto* dot = app.add_subcommand("export-dot", "DOT files for templates and representatives");
    std::string dot_rules;
    dot->add_option("--grounded", grounded_path, "grounded.json")->required();
    dot->add_option("--rules", dot_rules, "restrict to predicates used by these rules");
    add_common(dot);

    CLI11_PARSE(app, argc, argv);

    try {
        RunContext ctx;
        ctx.seed = seed;
        ctx.out_dir = out_dir;
        auto record_flags = [&](CLI::App* sub) {
            ctx.command = sub->get_name();
            for (const auto* opt : sub->get_options()) {
                if (opt->count() == 0) continue;
                std::string joined;
                for (const auto& r : opt->results()) joined += (joined.empty() ? "" : ",") + r;
                ctx.flags[opt->get_name()] = joined;
            }
        };

        if (*synth) {
            record_flags(synth);
            if (!synth_config_file.empty()) {
                auto j = read_json_file(synth_config_file);
                if (j.contains("n_graphs") && !synth->count("--n-graphs"))
                    synth_cfg.n_graphs = j["n_graphs"].get<std::size_t>();
                if (j.contains("base_n") && !synth->count("--base-n"))
                    synth_cfg.base_n = j["base_n"].get<std::size_t>();
                if (j.contains("attach_m") && !synth->count("--attach-m"))
                    synth_cfg.attach_m = j["attach_m"].get<std::size_t>();
                if (j.contains("motifs") && !synth->count("--motifs")) {
                    synth_motifs.clear();
                    for (const auto& m : j["motifs"])
                        synth_motifs += (synth_motifs.empty() ? "" : ",") + m.get<std::string>();
                }
                if (j.contains("rule") && !synth->count("--rule")) synth_rule = j["rule"].get<std::string>();
                if (j.contains("motif_prob") && !synth->count("--motif-prob"))
                    synth_cfg.motif_prob = j["motif_prob"].get<double>();
                if (j.contains("noise") && !synth->count("--noise")) synth_noise = j["noise"].get<double>();
                if (j.contains("seed") && !synth->count("--seed")) seed = j["seed"].get<std::uint64_t>();
                if (j.contains("test_fraction") && !synth->count("--test-fraction"))
                    synth_cfg.test_fraction = j["test_fraction"].get<double>();
                ctx.seed = seed;
            }
            synth_cfg.seed = seed;
            synth_cfg.motifs.clear();
            std::stringstream ss(synth_motifs);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                if (tok == "house") synth_cfg.motifs.push_back(Motif::House);
                else if (tok == "wheel") synth_cfg.motifs.push_back(Motif::Wheel);
                else if (tok == "grid") synth_cfg.motifs.push_back(Motif::Grid);
                else fail(ErrorKind::Contract, "unknown motif: " + tok);
            }
            synth_cfg.rule = MotifRule::parse(synth_rule);
            run_synth(ctx, synth_cfg, synth_noise);
        } else if (*ingest) {
            record_flags(ingest);
            LoadOptions options;
            options.seed = seed;
            options.test_fraction = test_fraction;
            options.append_degree_feature = degree_feature;
            if (!ingest_symbols.empty()) {
                std::stringstream ss(ingest_symbols);
                std::string tok;
                while (std::getline(ss, tok, ',')) options.symbols.push_back(tok);
            }
            run_ingest(ctx, ingest_input, ingest_format, options);
        } else if (*train) {
            record_flags(train);
            train_cfg.seed = seed;
            run_train(ctx, dataset_path, train_cfg, model_out, emb_out, jobs);
        } else if (*extract) {
            record_flags(extract);
            extract_cfg.jobs = jobs;
            extract_cfg.anchor_center = anchor_center != "off";
            run_extract(ctx, dataset_path, emb_path, extract_cfg);
        } else if (*ground) {
            record_flags(ground);
            ground_cfg.jobs = jobs;
            run_ground(ctx, dataset_path, emb_path, predicates_path, ground_cfg);
        } else if (*infer_cmd) {
            record_flags(infer_cmd);
            run_infer(ctx, dataset_path, rules_path, grounded_path, split,
                      make_inference_config(match_mode, match_timeout, jobs), emb_path);
        } else if (*evaluate) {
            record_flags(evaluate);
            EvaluateConfig cfg;
            cfg.split = parse_split(split);
            cfg.inference = make_inference_config(match_mode, match_timeout, jobs);
            cfg.coverage_basis = coverage_basis == "any" ? CoverageBasis::Any : CoverageBasis::Top1;
            cfg.fid_train_weights = fid_weights == "train";
            std::vector<fs::path> dirs(stability_runs.begin(), stability_runs.end());
            run_evaluate(ctx, dataset_path, emb_path, rules_path, grounded_path, cfg, dirs);
        } else if (*dot) {
            record_flags(dot);
            run_export_dot(ctx, grounded_path, dot_rules.empty() ? fs::path() : fs::path(dot_rules));
        }
    } catch (const Error& e) {
        json err{{"error", {{"kind", to_string(e.kind())}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        json err{{"error", {{"kind", "internal"}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
