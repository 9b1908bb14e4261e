#include "pathmamba/explainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "pathmamba/optimizer.hpp"
#include "pathmamba/rng.hpp"

namespace pathmamba {

namespace {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

constexpr double kInitLogit = 2.0;  // sigma(2) ~ 0.88: start mostly open

}  // namespace

PathwayCoverage build_coverage(const Graph& graph, const PathwaySet& paths) {
    if (static_cast<int>(paths.pathways.size()) != graph.node_count()) {
        throw std::invalid_argument("coverage: pathway count " +
                                    std::to_string(paths.pathways.size()) + " != node count " +
                                    std::to_string(graph.node_count()));
    }
    PathwayCoverage cover;
    cover.edge_cover.assign(static_cast<size_t>(graph.edge_count()), {});
    cover.node_cover.assign(static_cast<size_t>(graph.node_count()), {});
    for (size_t p = 0; p < paths.pathways.size(); ++p) {
        const auto& nodes = paths.pathways[p].nodes;
        std::vector<bool> seen_node(static_cast<size_t>(graph.node_count()), false);
        std::vector<bool> seen_edge(static_cast<size_t>(graph.edge_count()), false);
        for (size_t t = 0; t < nodes.size(); ++t) {
            if (!seen_node[static_cast<size_t>(nodes[t])]) {
                seen_node[static_cast<size_t>(nodes[t])] = true;
                cover.node_cover[static_cast<size_t>(nodes[t])].push_back(static_cast<int>(p));
            }
            if (t == 0) continue;
            int e = graph.edge_index(nodes[t - 1], nodes[t]);
            if (e < 0) throw std::invalid_argument("coverage: walk uses a non-edge");
            if (!seen_edge[static_cast<size_t>(e)]) {
                seen_edge[static_cast<size_t>(e)] = true;
                cover.edge_cover[static_cast<size_t>(e)].push_back(static_cast<int>(p));
            }
        }
    }
    return cover;
}

std::vector<int64_t> edge_logit_selection(const Graph& graph, const PathwayCoverage& cover,
                                          const nd::Tensor& logits) {
    const int64_t background = static_cast<int64_t>(logits.rows()) - 1;
    std::vector<int64_t> ix(static_cast<size_t>(graph.edge_count()), background);
    for (int e = 0; e < graph.edge_count(); ++e) {
        const auto& covering = cover.edge_cover[static_cast<size_t>(e)];
        if (covering.empty()) continue;
        int best = covering.front();
        for (int p : covering) {
            if (logits[p] > logits[best]) best = p;  // ties keep the lower id
        }
        ix[static_cast<size_t>(e)] = best;
    }
    return ix;
}

nd::Tensor apply_mask(const Graph& graph, const PathwaySet& paths, const PathwayMask& mask) {
    if (mask.logits.rows() != graph.node_count() + 1 || mask.logits.cols() != 1) {
        throw std::invalid_argument("apply_mask: logits " + mask.logits.shape_str() +
                                    " do not match node count " +
                                    std::to_string(graph.node_count()));
    }
    PathwayCoverage cover = build_coverage(graph, paths);
    std::vector<int64_t> ix = edge_logit_selection(graph, cover, mask.logits);
    const int n = graph.node_count();
    nd::Tensor soft(n, n);
    for (int e = 0; e < graph.edge_count(); ++e) {
        const Edge& ed = graph.edges()[static_cast<size_t>(e)];
        const double w = sigmoid(mask.logits[ix[static_cast<size_t>(e)]]);
        soft.at(ed.u, ed.v) = w;
        soft.at(ed.v, ed.u) = w;
    }
    return soft;
}

std::vector<double> mask_edge_scores(const Graph& graph, const PathwaySet& paths,
                                     const PathwayMask& mask) {
    PathwayCoverage cover = build_coverage(graph, paths);
    std::vector<int64_t> ix = edge_logit_selection(graph, cover, mask.logits);
    std::vector<double> scores(static_cast<size_t>(graph.edge_count()), 0.0);
    for (int e = 0; e < graph.edge_count(); ++e) {
        scores[static_cast<size_t>(e)] = sigmoid(mask.logits[ix[static_cast<size_t>(e)]]);
    }
    return scores;
}

std::vector<double> mask_node_scores(const Graph& graph, const PathwaySet& paths,
                                     const PathwayMask& mask) {
    PathwayCoverage cover = build_coverage(graph, paths);
    const int64_t background = static_cast<int64_t>(mask.logits.rows()) - 1;
    std::vector<double> scores(static_cast<size_t>(graph.node_count()), 0.0);
    for (int v = 0; v < graph.node_count(); ++v) {
        const auto& covering = cover.node_cover[static_cast<size_t>(v)];
        double best = covering.empty() ? mask.logits[background] : mask.logits[covering.front()];
        for (int p : covering) best = std::max(best, mask.logits[p]);
        scores[static_cast<size_t>(v)] = sigmoid(best);
    }
    return scores;
}

PathwayMask learn_mask(const Model& model, const Graph& graph, const nd::Tensor& features,
                       const PathwaySet& paths, const MaskConfig& config) {
    const int n = graph.node_count();
    PathwayCoverage cover = build_coverage(graph, paths);

    nd::Tensor pe;
    const nd::Tensor* pe_ptr = nullptr;
    if (model.config.pe_steps > 0) {
        pe = rwse(graph, model.config.pe_steps);
        pe_ptr = &pe;
    }

    // The explained label is the model's own prediction on the unmasked
    // graph, evaluated with the same pathway set.
    int label;
    {
        nd::Tape tape;
        TapedModel staged = stage_model(tape, model, false);
        ForwardInputs in;
        in.graph = &graph;
        in.features = &features;
        in.pe = pe_ptr;
        in.paths = &paths;
        nd::Var logits = model_logits(tape, model, staged, in);
        auto probs = nd::softmax_values(logits.value());
        label = static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    }

    PathwayMask mask;
    mask.lambda = config.lambda;
    mask.logits = nd::Tensor(n + 1, 1);
    Rng init_rng(mix_seed(config.seed, 0x6d61736bULL));
    for (int i = 0; i < n; ++i) {
        mask.logits[i] = kInitLogit + 0.1 * init_rng.next_normal();
    }
    mask.logits[n] = kInitLogit;

    nd::OptimizerConfig oc;
    oc.kind = nd::OptimizerKind::adam;
    oc.learning_rate = config.learning_rate;
    oc.weight_decay = 0.0;  // sparsity comes from the explicit L1 term only
    nd::Optimizer opt(oc);

    // Training-time surrogate for the max over covering pathways: a smooth
    // maximum, so every covering pathway receives gradient in proportion to
    // its weight. Reported scores use the hard max.
    std::vector<std::vector<int>> edge_segments(static_cast<size_t>(graph.edge_count()));
    for (int e = 0; e < graph.edge_count(); ++e) {
        const auto& covering = cover.edge_cover[static_cast<size_t>(e)];
        edge_segments[static_cast<size_t>(e)] =
            covering.empty() ? std::vector<int>{n} : covering;
    }
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        try {
            nd::Tape tape;
            nd::Var logit_var = tape.input(mask.logits, true);
            nd::Var edge_w = nd::sigmoid(nd::segment_logsumexp(logit_var, edge_segments));
            TapedModel staged = stage_model(tape, model, false);
            ForwardInputs in;
            in.graph = &graph;
            in.features = &features;
            in.pe = pe_ptr;
            in.paths = &paths;
            in.edge_weights = edge_w;
            nd::Var logits = model_logits(tape, model, staged, in);
            // L1 on the realized edge weights: a pathway pays for every edge
            // it keeps open, so clean covers beat polluting ones.
            nd::Var loss = nd::add(nd::softmax_cross_entropy(logits, label),
                                   nd::scale(nd::sum_all(edge_w), config.lambda));
            tape.backward(loss);
            nd::Tensor grad = tape.grad(logit_var);
            std::vector<nd::Tensor*> params{&mask.logits};
            opt.step(params, {grad});
        } catch (const std::runtime_error& e) {
            throw std::runtime_error("learn_mask: diverged at epoch " + std::to_string(epoch) +
                                     ": " + e.what());
        }
    }
    return mask;
}

Explanation extract_subgraph(const Graph& graph, const std::vector<double>& node_scores,
                             const std::vector<double>& edge_scores, double keep_ratio) {
    const int n = graph.node_count();
    if (!(keep_ratio > 0.0 && keep_ratio <= 1.0)) {
        throw std::invalid_argument("extract_subgraph: keep_ratio must be in (0,1]");
    }
    if (static_cast<int>(node_scores.size()) != n) {
        throw std::invalid_argument("extract_subgraph: node score count mismatch");
    }
    const int keep = static_cast<int>(std::ceil(keep_ratio * static_cast<double>(n)));
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return node_scores[static_cast<size_t>(a)] > node_scores[static_cast<size_t>(b)];
    });
    Explanation ex;
    ex.keep_ratio = keep_ratio;
    ex.node_scores = node_scores;
    ex.edge_scores = edge_scores;
    ex.kept_nodes.assign(order.begin(), order.begin() + keep);
    std::sort(ex.kept_nodes.begin(), ex.kept_nodes.end());

    std::vector<int> new_index(static_cast<size_t>(n), -1);
    std::vector<std::string> names;
    for (size_t k = 0; k < ex.kept_nodes.size(); ++k) {
        new_index[static_cast<size_t>(ex.kept_nodes[k])] = static_cast<int>(k);
        names.push_back(graph.name_of(ex.kept_nodes[k]));
    }
    std::vector<Edge> sub_edges;
    for (const Edge& e : graph.edges()) {
        int nu = new_index[static_cast<size_t>(e.u)];
        int nv = new_index[static_cast<size_t>(e.v)];
        if (nu >= 0 && nv >= 0) sub_edges.push_back(Edge{nu, nv});
    }
    ex.subgraph = Graph(keep, std::move(sub_edges), std::move(names));
    return ex;
}

Explanation explain_graph(const Model& model, const Graph& graph, const nd::Tensor& features,
                          double keep_ratio, const MaskConfig& config, uint64_t walk_seed) {
    PathwaySet paths = sample_pathways(graph, model.config.walk_length, walk_seed);
    PathwayMask mask = learn_mask(model, graph, features, paths, config);
    return extract_subgraph(graph, mask_node_scores(graph, paths, mask),
                            mask_edge_scores(graph, paths, mask), keep_ratio);
}

std::string Explanation::to_json(const std::string& graph_id, int predicted_label) const {
    nlohmann::json j;
    j["format_version"] = 1;
    j["graph_id"] = graph_id;
    j["predicted_label"] = predicted_label;
    j["keep_ratio"] = keep_ratio;
    j["node_scores"] = node_scores;
    j["edge_scores"] = edge_scores;
    j["kept_nodes"] = kept_nodes;
    nlohmann::json sub;
    sub["node_count"] = subgraph.node_count();
    nlohmann::json names = nlohmann::json::array();
    for (int v = 0; v < subgraph.node_count(); ++v) names.push_back(subgraph.name_of(v));
    sub["node_names"] = names;
    nlohmann::json edges = nlohmann::json::array();
    for (const Edge& e : subgraph.edges()) edges.push_back({e.u, e.v});
    sub["edges"] = edges;
    j["subgraph"] = sub;
    return j.dump(2) + "\n";
}

}  // namespace pathmamba
