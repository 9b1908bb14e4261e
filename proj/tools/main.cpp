#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pathmamba/baselines.hpp"
#include "pathmamba/checkpoint.hpp"
#include "pathmamba/dataset.hpp"
#include "pathmamba/explainer.hpp"
#include "pathmamba/graph_export.hpp"
#include "pathmamba/metrics.hpp"
#include "pathmamba/parallel.hpp"
#include "pathmamba/model.hpp"
#include "pathmamba/rng.hpp"
#include "pathmamba/train.hpp"
#include "pathmamba/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pathmamba;

namespace {

void write_text(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

// PATHMAMBA_OUT overrides --out; the only environment knob.
std::string resolve_out(const std::string& flag_value) {
    const char* env = std::getenv("PATHMAMBA_OUT");
    if (env && env[0]) return env;
    return flag_value;
}

// Every command leaves its fully-resolved configuration next to its outputs.
void write_run_config(const fs::path& out_dir, const std::string& command, json flags) {
    json j;
    j["command"] = command;
    j["tool_version"] = kVersion;
    j["flags"] = std::move(flags);
    write_text(out_dir / "run_config.json", j.dump(2) + "\n");
}

struct GraphInput {
    std::string id;
    Graph graph;
    nd::Tensor features;
};

// A graph either by id from a dataset directory or from explicit files.
GraphInput resolve_graph(const std::string& data_dir, const std::string& graph_id,
                         const std::string& edges_path, const std::string& features_path) {
    if (!data_dir.empty()) {
        Dataset ds = load_dataset(data_dir);
        if (graph_id.empty()) {
            throw std::runtime_error("--graph <id> is required with --data");
        }
        for (LabeledGraph& g : ds.graphs) {
            if (g.id == graph_id) return GraphInput{g.id, g.graph, g.features};
        }
        throw std::runtime_error("graph '" + graph_id + "' not found in " + data_dir);
    }
    if (edges_path.empty() || features_path.empty()) {
        throw std::runtime_error("need either --data/--graph or --edges/--features");
    }
    GraphInput in;
    in.id = fs::path(edges_path).stem().string();
    in.features = read_feature_file(features_path, in.id);
    std::vector<Edge> edges = read_edge_file(edges_path, in.id);
    for (Edge& e : edges) {
        if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges.begin(), edges.end(),
              [](const Edge& a, const Edge& b) { return a.u < b.u || (a.u == b.u && a.v < b.v); });
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    in.graph = Graph(static_cast<int>(in.features.rows()), std::move(edges));
    return in;
}

json ranking_to_json(const NodeRanking& r, const std::string& graph_id) {
    json j;
    j["format_version"] = 1;
    j["graph_id"] = graph_id;
    j["method"] = baseline_method_name(r.method);
    j["scores"] = r.scores;
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid GIN + pathway-wise selective-SSM graph classifier and explainer"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "Generate a planted-motif synthetic dataset");
    std::string synth_out;
    uint64_t synth_seed = 0;
    SyntheticSpec spec;
    synth->add_option("--out", synth_out, "Output dataset directory")->required();
    synth->add_option("--seed", synth_seed, "RNG seed")->required();
    synth->add_option("--classes", spec.classes, "Number of classes");
    synth->add_option("--graphs-per-class", spec.num_graphs_per_class, "Graphs per class");
    synth->add_option("--background-nodes", spec.background_nodes, "Background node count");
    synth->add_option("--edge-prob", spec.background_edge_prob, "Background edge probability");
    synth->add_option("--motif-length", spec.motif_length, "Planted path length in nodes");
    synth->add_option("--feature-dim", spec.feature_dim, "Feature dimension");
    synth->add_option("--signal", spec.feature_signal, "Motif feature mean shift");

    // ---- preprocess ----
    auto* prep = app.add_subcommand("preprocess", "Clean a raw dataset directory");
    std::string prep_in, prep_out;
    prep->add_option("--in", prep_in, "Raw dataset directory")->required();
    prep->add_option("--out", prep_out, "Cleaned dataset directory")->required();

    // ---- train ----
    auto* train_cmd = app.add_subcommand("train", "Cross-validate and fit the classifier");
    std::string train_data, train_out;
    ModelConfig mc;
    TrainConfig tc;
    std::string optimizer_name = "adam";
    train_cmd->add_option("--data", train_data, "Dataset directory")->required();
    train_cmd->add_option("--out", train_out, "Output directory")->required();
    train_cmd->add_option("--seed", tc.seed, "RNG seed")->required();
    train_cmd->add_option("--layers", mc.num_layers, "Number of layers");
    train_cmd->add_option("--hidden", mc.hidden, "Hidden width");
    train_cmd->add_option("--walk-length", mc.walk_length, "Pathway walk length");
    train_cmd->add_option("--pe-steps", mc.pe_steps, "Positional encoding steps (0 disables)");
    train_cmd->add_option("--d-state", mc.d_state, "Selective-scan state width");
    train_cmd->add_option("--folds", tc.folds, "Cross-validation folds");
    train_cmd->add_option("--repeats", tc.repeats, "Cross-validation repeats");
    train_cmd->add_option("--epochs", tc.epochs, "Training epochs");
    train_cmd->add_option("--batch", tc.batch_size, "Batch size");
    train_cmd->add_option("--lr", tc.optimizer.learning_rate, "Learning rate");
    train_cmd->add_option("--weight-decay", tc.optimizer.weight_decay, "Weight decay");
    train_cmd->add_option("--optimizer", optimizer_name, "adam or sgd");
    train_cmd->add_option("--jobs", tc.jobs, "Parallel fold jobs");

    // ---- predict ----
    auto* pred = app.add_subcommand("predict", "Classify one graph");
    std::string pred_model, pred_edges, pred_features, pred_data, pred_graph, pred_out;
    uint64_t pred_seed = 0;
    int pred_average = 1;
    bool pred_dump_paths = false;
    pred->add_option("--model", pred_model, "Model checkpoint")->required();
    pred->add_option("--data", pred_data, "Dataset directory");
    pred->add_option("--graph", pred_graph, "Graph id inside --data");
    pred->add_option("--edges", pred_edges, "Edge list file");
    pred->add_option("--features", pred_features, "Feature matrix file");
    pred->add_option("--seed", pred_seed, "Inference walk seed")->required();
    pred->add_option("--average", pred_average, "Average over this many walk draws");
    pred->add_option("--out", pred_out, "Output directory")->required();
    pred->add_flag("--dump-paths", pred_dump_paths, "Also write the sampled pathways");

    // ---- explain ----
    auto* expl = app.add_subcommand("explain", "Learn a pathway mask for one graph");
    std::string expl_model, expl_data, expl_graph, expl_edges, expl_features, expl_out;
    std::string expl_format;
    uint64_t expl_seed = 0;
    MaskConfig mask_config;
    double expl_keep = 0.1;
    bool expl_dump_paths = false;
    expl->add_option("--model", expl_model, "Model checkpoint")->required();
    expl->add_option("--data", expl_data, "Dataset directory");
    expl->add_option("--graph", expl_graph, "Graph id inside --data");
    expl->add_option("--edges", expl_edges, "Edge list file");
    expl->add_option("--features", expl_features, "Feature matrix file");
    expl->add_option("--seed", expl_seed, "Seed for walks and mask init")->required();
    expl->add_option("--lambda", mask_config.lambda, "Sparsity weight");
    expl->add_option("--epochs", mask_config.epochs, "Mask training epochs");
    expl->add_option("--mask-lr", mask_config.learning_rate, "Mask learning rate");
    expl->add_option("--keep-ratio", expl_keep, "Fraction of top nodes to keep");
    expl->add_option("--format", expl_format, "Also export the subgraph (graphml, dot, json)");
    expl->add_option("--out", expl_out, "Output directory")->required();
    expl->add_flag("--dump-paths", expl_dump_paths, "Also write the sampled pathways");

    // ---- baseline ----
    auto* base = app.add_subcommand("baseline", "Run a comparison explainer");
    std::string base_method, base_data, base_graph, base_edges, base_features, base_model,
        base_out;
    uint64_t base_seed = 0;
    MaskConfig base_mask_config;
    base->add_option("--method", base_method, "rss, ppr, mds, saliency, edge-mask")->required();
    base->add_option("--data", base_data, "Dataset directory");
    base->add_option("--graph", base_graph, "Graph id inside --data");
    base->add_option("--edges", base_edges, "Edge list file");
    base->add_option("--features", base_features, "Feature matrix file");
    base->add_option("--model", base_model, "Model checkpoint (saliency, edge-mask)");
    base->add_option("--seed", base_seed, "RNG seed")->required();
    base->add_option("--lambda", base_mask_config.lambda, "Sparsity weight (edge-mask)");
    base->add_option("--epochs", base_mask_config.epochs, "Mask epochs (edge-mask)");
    base->add_option("--out", base_out, "Output directory")->required();

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "Score a model, optionally with explanations");
    std::string eval_model, eval_data, eval_out, eval_method, eval_go, eval_universe;
    uint64_t eval_seed = 0;
    double eval_keep = 0.1, eval_alpha = 0.05, eval_top_ratio = 0.30;
    MaskConfig eval_mask_config;
    int eval_limit = 0;
    eval_cmd->add_option("--model", eval_model, "Model checkpoint")->required();
    eval_cmd->add_option("--data", eval_data, "Dataset directory")->required();
    eval_cmd->add_option("--seed", eval_seed, "Inference seed")->required();
    eval_cmd->add_option("--out", eval_out, "Output directory")->required();
    eval_cmd->add_option("--explain-method", eval_method,
                         "pathmask, rss, ppr, mds, saliency, edge-mask");
    eval_cmd->add_option("--keep-ratio", eval_keep, "Fraction of nodes kept per explanation");
    eval_cmd->add_option("--lambda", eval_mask_config.lambda, "Mask sparsity weight");
    eval_cmd->add_option("--mask-epochs", eval_mask_config.epochs, "Mask training epochs");
    eval_cmd->add_option("--go", eval_go, "gene<TAB>term mapping for enrichment metrics");
    eval_cmd->add_option("--universe", eval_universe, "Explicit gene universe file");
    eval_cmd->add_option("--alpha", eval_alpha, "Enrichment acceptance threshold");
    eval_cmd->add_option("--top-ratio", eval_top_ratio, "Top-gene ratio for the ECS metric");
    eval_cmd->add_option("--limit", eval_limit, "Explain at most this many graphs (0 = all)");

    // ---- export ----
    auto* exp_cmd = app.add_subcommand("export", "Convert scored graphs between formats");
    std::string exp_edges, exp_scores, exp_format = "graphml", exp_out;
    exp_cmd->add_option("--edges", exp_edges, "Edge list file")->required();
    exp_cmd->add_option("--scores", exp_scores,
                        "JSON with node_scores and edge_scores arrays (explanation.json works)")
        ->required();
    exp_cmd->add_option("--format", exp_format, "graphml, dot, or json");
    exp_cmd->add_option("--out", exp_out, "Output file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            synth_out = resolve_out(synth_out);
            Dataset ds = generate_synthetic(spec, synth_seed);
            save_dataset(ds, synth_out);
            json flags{{"seed", synth_seed},
                       {"classes", spec.classes},
                       {"graphs_per_class", spec.num_graphs_per_class},
                       {"background_nodes", spec.background_nodes},
                       {"edge_prob", spec.background_edge_prob},
                       {"motif_length", spec.motif_length},
                       {"feature_dim", spec.feature_dim},
                       {"signal", spec.feature_signal}};
            write_run_config(synth_out, "synth", flags);
            DatasetSummary s = summarize(ds);
            std::cout << "wrote " << s.graph_count << " graphs (mean nodes " << s.mean_nodes
                      << ", mean edges " << s.mean_edges << ") to " << synth_out << "\n";
        } else if (*prep) {
            prep_out = resolve_out(prep_out);
            Dataset ds = load_and_preprocess_dataset(prep_in);
            save_dataset(ds, prep_out);
            write_run_config(prep_out, "preprocess", json{{"in", prep_in}});
            std::cout << "preprocessed " << ds.graphs.size() << " graphs into " << prep_out
                      << "\n";
        } else if (*train_cmd) {
            train_out = resolve_out(train_out);
            if (optimizer_name == "sgd") {
                tc.optimizer.kind = nd::OptimizerKind::sgd;
            } else if (optimizer_name != "adam") {
                throw std::runtime_error("unknown optimizer '" + optimizer_name + "'");
            }
            Dataset ds = load_dataset(train_data);
            TrainResult result = train(ds, mc, tc);
            fs::create_directories(train_out);
            save_model(result.model, (fs::path(train_out) / "model.json").string());
            write_text(fs::path(train_out) / "cv_report.json", result.report.to_json());
            json flags{{"data", train_data},       {"seed", tc.seed},
                       {"layers", mc.num_layers},  {"hidden", mc.hidden},
                       {"walk_length", mc.walk_length}, {"pe_steps", mc.pe_steps},
                       {"d_state", mc.d_state},    {"folds", tc.folds},
                       {"repeats", tc.repeats},    {"epochs", tc.epochs},
                       {"batch", tc.batch_size},   {"lr", tc.optimizer.learning_rate},
                       {"weight_decay", tc.optimizer.weight_decay},
                       {"optimizer", optimizer_name}, {"jobs", tc.jobs}};
            write_run_config(train_out, "train", flags);
            std::cout << "cv accuracy " << result.report.accuracy_mean << " +- "
                      << result.report.accuracy_std << "\n";
        } else if (*pred) {
            pred_out = resolve_out(pred_out);
            Model model = load_model(pred_model);
            GraphInput gin = resolve_graph(pred_data, pred_graph, pred_edges, pred_features);
            Prediction p =
                pred_average > 1
                    ? predict_averaged(model, gin.graph, gin.features, pred_seed, pred_average)
                    : predict(model, gin.graph, gin.features, pred_seed);
            json j{{"format_version", 1},
                   {"graph_id", gin.id},
                   {"label", p.label},
                   {"probabilities", p.probabilities}};
            fs::create_directories(pred_out);
            write_text(fs::path(pred_out) / "prediction.json", j.dump(2) + "\n");
            if (pred_dump_paths) {
                PathwaySet paths =
                    sample_pathways(gin.graph, model.config.walk_length, pred_seed);
                write_text(fs::path(pred_out) / "paths.json", pathways_to_json(paths));
            }
            write_run_config(pred_out, "predict",
                             json{{"model", pred_model},
                                  {"graph_id", gin.id},
                                  {"seed", pred_seed},
                                  {"average", pred_average}});
            std::cout << "label " << p.label << "\n";
        } else if (*expl) {
            expl_out = resolve_out(expl_out);
            Model model = load_model(expl_model);
            GraphInput gin = resolve_graph(expl_data, expl_graph, expl_edges, expl_features);
            mask_config.seed = expl_seed;
            PathwaySet paths =
                sample_pathways(gin.graph, model.config.walk_length, expl_seed);
            PathwayMask mask = learn_mask(model, gin.graph, gin.features, paths, mask_config);
            Explanation ex = extract_subgraph(gin.graph, mask_node_scores(gin.graph, paths, mask),
                                              mask_edge_scores(gin.graph, paths, mask), expl_keep);
            Prediction p = predict(model, gin.graph, gin.features, expl_seed);
            fs::create_directories(expl_out);
            write_text(fs::path(expl_out) / "explanation.json", ex.to_json(gin.id, p.label));
            if (!expl_format.empty()) {
                ExportFormat fmt = parse_export_format(expl_format);
                std::vector<double> sub_node_scores, sub_edge_scores;
                for (int v : ex.kept_nodes) {
                    sub_node_scores.push_back(ex.node_scores[static_cast<size_t>(v)]);
                }
                for (const Edge& e : ex.subgraph.edges()) {
                    int orig = gin.graph.edge_index(ex.kept_nodes[static_cast<size_t>(e.u)],
                                                    ex.kept_nodes[static_cast<size_t>(e.v)]);
                    sub_edge_scores.push_back(ex.edge_scores[static_cast<size_t>(orig)]);
                }
                write_text(fs::path(expl_out) / ("subgraph." + expl_format),
                           export_scored_graph(ex.subgraph, sub_node_scores, sub_edge_scores,
                                               fmt));
            }
            if (expl_dump_paths) {
                write_text(fs::path(expl_out) / "paths.json", pathways_to_json(paths));
            }
            write_run_config(expl_out, "explain",
                             json{{"model", expl_model},
                                  {"graph_id", gin.id},
                                  {"seed", expl_seed},
                                  {"lambda", mask_config.lambda},
                                  {"epochs", mask_config.epochs},
                                  {"mask_lr", mask_config.learning_rate},
                                  {"keep_ratio", expl_keep}});
            std::cout << "kept " << ex.kept_nodes.size() << " of " << gin.graph.node_count()
                      << " nodes\n";
        } else if (*base) {
            base_out = resolve_out(base_out);
            BaselineMethod method = parse_baseline_method(base_method);
            GraphInput gin = resolve_graph(base_data, base_graph, base_edges, base_features);
            NodeRanking ranking;
            switch (method) {
                case BaselineMethod::rss:
                    ranking = rss(gin.graph, base_seed);
                    break;
                case BaselineMethod::ppr:
                    ranking = ppr(gin.graph);
                    break;
                case BaselineMethod::mds:
                    ranking = mds(gin.graph);
                    break;
                case BaselineMethod::saliency: {
                    if (base_model.empty()) throw std::runtime_error("saliency needs --model");
                    Model model = load_model(base_model);
                    ranking = saliency(model, gin.graph, gin.features, base_seed);
                    break;
                }
                case BaselineMethod::edge_mask: {
                    if (base_model.empty()) throw std::runtime_error("edge-mask needs --model");
                    Model model = load_model(base_model);
                    base_mask_config.seed = base_seed;
                    PathwaySet paths =
                        sample_pathways(gin.graph, model.config.walk_length, base_seed);
                    auto edge_scores = edge_mask_explainer(model, gin.graph, gin.features, paths,
                                                           base_mask_config);
                    ranking = edge_mask_node_ranking(gin.graph, edge_scores);
                    break;
                }
            }
            fs::create_directories(base_out);
            write_text(fs::path(base_out) / "ranking.json",
                       ranking_to_json(ranking, gin.id).dump(2) + "\n");
            write_run_config(base_out, "baseline",
                             json{{"method", base_method},
                                  {"graph_id", gin.id},
                                  {"seed", base_seed}});
            std::cout << "ranked " << ranking.scores.size() << " nodes\n";
        } else if (*eval_cmd) {
            eval_out = resolve_out(eval_out);
            Model model = load_model(eval_model);
            Dataset ds = load_dataset(eval_data);
            json report;
            report["format_version"] = 1;

            std::vector<int> labels, predictions;
            for (size_t i = 0; i < ds.graphs.size(); ++i) {
                Prediction p = predict(model, ds.graphs[i].graph, ds.graphs[i].features,
                                       inference_walk_seed(eval_seed, static_cast<int>(i)));
                labels.push_back(ds.graphs[i].label);
                predictions.push_back(p.label);
            }
            ClassificationReport cr =
                classification_report(predictions, labels, ds.num_classes());
            json cls;
            cls["accuracy"] = cr.accuracy;
            json per_class = json::array();
            for (int c = 0; c < ds.num_classes(); ++c) {
                per_class.push_back({{"class", ds.class_names[static_cast<size_t>(c)]},
                                     {"precision", cr.precision[static_cast<size_t>(c)]},
                                     {"recall", cr.recall[static_cast<size_t>(c)]},
                                     {"precision_degenerate",
                                      static_cast<bool>(cr.precision_degenerate[static_cast<size_t>(c)])}});
            }
            cls["per_class"] = per_class;
            report["classification"] = cls;

            if (!eval_method.empty()) {
                const size_t count = eval_limit > 0
                                         ? std::min(ds.graphs.size(),
                                                    static_cast<size_t>(eval_limit))
                                         : ds.graphs.size();
                struct PerGraphExplanation {
                    Explanation explanation;
                    double auc = -1.0;
                };
                std::vector<PerGraphExplanation> per_graph(count);
                // Explanations for different graphs are independent; the
                // frozen model is shared read-only.
                parallel_for(static_cast<int64_t>(count), [&](int64_t gi) {
                    const size_t i = static_cast<size_t>(gi);
                    const LabeledGraph& g = ds.graphs[i];
                    const uint64_t walk_seed = inference_walk_seed(eval_seed, static_cast<int>(i));
                    std::vector<double> node_scores;
                    std::vector<double> edge_scores(static_cast<size_t>(g.graph.edge_count()),
                                                    0.0);
                    if (eval_method == "pathmask") {
                        PathwaySet paths =
                            sample_pathways(g.graph, model.config.walk_length, walk_seed);
                        MaskConfig mcfg = eval_mask_config;
                        mcfg.seed = walk_seed;
                        PathwayMask mask = learn_mask(model, g.graph, g.features, paths, mcfg);
                        node_scores = mask_node_scores(g.graph, paths, mask);
                        edge_scores = mask_edge_scores(g.graph, paths, mask);
                    } else {
                        BaselineMethod method = parse_baseline_method(eval_method);
                        NodeRanking r;
                        switch (method) {
                            case BaselineMethod::rss: r = rss(g.graph, walk_seed); break;
                            case BaselineMethod::ppr: r = ppr(g.graph); break;
                            case BaselineMethod::mds: r = mds(g.graph); break;
                            case BaselineMethod::saliency:
                                r = saliency(model, g.graph, g.features, walk_seed);
                                break;
                            case BaselineMethod::edge_mask: {
                                PathwaySet paths = sample_pathways(
                                    g.graph, model.config.walk_length, walk_seed);
                                MaskConfig mcfg = eval_mask_config;
                                mcfg.seed = walk_seed;
                                edge_scores = edge_mask_explainer(model, g.graph, g.features,
                                                                  paths, mcfg);
                                r = edge_mask_node_ranking(g.graph, edge_scores);
                                break;
                            }
                        }
                        node_scores = r.scores;
                    }
                    PerGraphExplanation& slot = per_graph[i];
                    slot.explanation =
                        extract_subgraph(g.graph, node_scores, edge_scores, eval_keep);
                    if (!g.motif_edges.empty() &&
                        (eval_method == "pathmask" || eval_method == "edge-mask")) {
                        std::vector<bool> positive(edge_scores.size(), false);
                        for (const Edge& e : g.motif_edges) {
                            positive[static_cast<size_t>(g.graph.edge_index(e.u, e.v))] = true;
                        }
                        slot.auc = ranking_auc(edge_scores, positive);
                    }
                });
                std::vector<FidelityItem> items;
                std::vector<Graph> subgraphs;
                std::vector<EnrichmentInput> enrich_inputs;
                double auc_sum = 0.0;
                int auc_count = 0;
                for (size_t i = 0; i < count; ++i) {
                    const LabeledGraph& g = ds.graphs[i];
                    const Explanation& ex = per_graph[i].explanation;
                    items.push_back(FidelityItem{&g.graph, &g.features, ex.kept_nodes});
                    subgraphs.push_back(ex.subgraph);
                    if (per_graph[i].auc >= 0.0) {
                        auc_sum += per_graph[i].auc;
                        ++auc_count;
                    }
                    if (!eval_go.empty()) {
                        EnrichmentInput in;
                        for (int v : ex.kept_nodes) {
                            in.genes.push_back(g.graph.name_of(v));
                            in.node_scores.push_back(ex.node_scores[static_cast<size_t>(v)]);
                        }
                        enrich_inputs.push_back(std::move(in));
                    }
                }
                PredictProbFn prob_fn = [&](const Graph& graph, const nd::Tensor& feats) {
                    return predict(model, graph, feats, mix_seed(eval_seed, 0x6669ULL))
                        .probabilities;
                };
                FidelityReport fr = fidelity_report(prob_fn, items);
                json ex_report;
                ex_report["method"] = eval_method;
                ex_report["keep_ratio"] = eval_keep;
                ex_report["graphs"] = count;
                ex_report["fidelity_plus"] = fr.fidelity_plus;
                ex_report["fidelity_minus"] = fr.fidelity_minus;
                ex_report["max_path_length"] = max_path_length(subgraphs);
                ex_report["avg_diameter"] = avg_diameter(subgraphs);
                if (auc_count > 0) ex_report["motif_auc"] = auc_sum / auc_count;
                if (!eval_go.empty()) {
                    GoMapping go = GoMapping::load(eval_go, eval_universe);
                    EnrichmentReport er =
                        enrichment_report(enrich_inputs, go, eval_alpha, eval_top_ratio);
                    ex_report["enrichment"] = {{"ebf_mean", er.ebf_mean},
                                               {"ecs", er.ecs},
                                               {"mean_p", er.mean_p}};
                }
                report["explanation"] = ex_report;
            }
            fs::create_directories(eval_out);
            write_text(fs::path(eval_out) / "eval_report.json", report.dump(2) + "\n");
            write_run_config(eval_out, "eval",
                             json{{"model", eval_model},
                                  {"data", eval_data},
                                  {"seed", eval_seed},
                                  {"explain_method", eval_method},
                                  {"keep_ratio", eval_keep}});
            std::cout << "accuracy " << cr.accuracy << "\n";
        } else if (*exp_cmd) {
            std::ifstream in(exp_scores);
            if (!in) throw std::runtime_error("cannot read scores: " + exp_scores);
            json sj = json::parse(in);
            auto node_scores = sj.at("node_scores").get<std::vector<double>>();
            auto edge_scores = sj.at("edge_scores").get<std::vector<double>>();
            std::vector<Edge> edges = read_edge_file(exp_edges);
            Graph graph(static_cast<int>(node_scores.size()), edges);
            ExportFormat fmt = parse_export_format(exp_format);
            write_text(exp_out, export_scored_graph(graph, node_scores, edge_scores, fmt));
            std::cout << "wrote " << exp_out << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
