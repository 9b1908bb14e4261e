#include "pathmamba/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pathmamba/optimizer.hpp"
#include "pathmamba/rng.hpp"

namespace pathmamba {

BaselineMethod parse_baseline_method(const std::string& name) {
    if (name == "rss") return BaselineMethod::rss;
    if (name == "ppr") return BaselineMethod::ppr;
    if (name == "mds") return BaselineMethod::mds;
    if (name == "saliency") return BaselineMethod::saliency;
    if (name == "edge-mask" || name == "edge_mask") return BaselineMethod::edge_mask;
    throw std::invalid_argument("unknown baseline method '" + name +
                                "' (expected rss, ppr, mds, saliency, edge-mask)");
}

std::string baseline_method_name(BaselineMethod m) {
    switch (m) {
        case BaselineMethod::rss: return "rss";
        case BaselineMethod::ppr: return "ppr";
        case BaselineMethod::mds: return "mds";
        case BaselineMethod::saliency: return "saliency";
        case BaselineMethod::edge_mask: return "edge-mask";
    }
    return "?";
}

NodeRanking rss(const Graph& graph, uint64_t seed) {
    Rng rng(mix_seed(seed, 0x727373ULL));
    NodeRanking r;
    r.method = BaselineMethod::rss;
    r.scores.resize(static_cast<size_t>(graph.node_count()));
    double sum = 0.0;
    for (double& s : r.scores) {
        s = rng.next_double();
        sum += s;
    }
    for (double& s : r.scores) s /= sum;
    return r;
}

NodeRanking ppr(const Graph& graph, double damping, double tol,
                const std::vector<double>* restart) {
    const int n = graph.node_count();
    if (n == 0) throw std::invalid_argument("ppr: empty graph");
    std::vector<double> r(static_cast<size_t>(n), 1.0 / n);
    if (restart) {
        if (static_cast<int>(restart->size()) != n) {
            throw std::invalid_argument("ppr: restart vector size mismatch");
        }
        r = *restart;
    }
    std::vector<double> s = r;
    std::vector<double> next(static_cast<size_t>(n), 0.0);
    constexpr int kMaxIterations = 10000;
    for (int it = 0; it < kMaxIterations; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int u = 0; u < n; ++u) {
            const int deg = graph.degree(u);
            if (deg == 0) continue;
            const double share = damping * s[static_cast<size_t>(u)] / deg;
            for (int w : graph.neighbors(u)) next[static_cast<size_t>(w)] += share;
        }
        double delta = 0.0;
        for (int v = 0; v < n; ++v) {
            next[static_cast<size_t>(v)] += (1.0 - damping) * r[static_cast<size_t>(v)];
            delta = std::max(delta, std::abs(next[static_cast<size_t>(v)] -
                                             s[static_cast<size_t>(v)]));
        }
        s.swap(next);
        if (delta < tol) {
            double sum = 0.0;
            for (double x : s) sum += x;
            for (double& x : s) x /= sum;
            NodeRanking out;
            out.method = BaselineMethod::ppr;
            out.scores = std::move(s);
            return out;
        }
    }
    throw std::runtime_error("ppr: no convergence after 10000 iterations");
}

NodeRanking mds(const Graph& graph) {
    const int n = graph.node_count();
    std::vector<bool> covered(static_cast<size_t>(n), false);
    NodeRanking out;
    out.method = BaselineMethod::mds;
    out.scores.assign(static_cast<size_t>(n), 0.0);
    int remaining = n;
    while (remaining > 0) {
        int best = -1, best_gain = -1;
        for (int v = 0; v < n; ++v) {
            int gain = covered[static_cast<size_t>(v)] ? 0 : 1;
            for (int w : graph.neighbors(v)) {
                if (!covered[static_cast<size_t>(w)]) ++gain;
            }
            if (gain > best_gain) {  // strict: ties keep the lower index
                best_gain = gain;
                best = v;
            }
        }
        out.scores[static_cast<size_t>(best)] = 1.0;
        if (!covered[static_cast<size_t>(best)]) {
            covered[static_cast<size_t>(best)] = true;
            --remaining;
        }
        for (int w : graph.neighbors(best)) {
            if (!covered[static_cast<size_t>(w)]) {
                covered[static_cast<size_t>(w)] = true;
                --remaining;
            }
        }
    }
    return out;
}

NodeRanking saliency(const Model& model, const Graph& graph, const nd::Tensor& features,
                     uint64_t walk_seed) {
    return saliency(model, graph, features,
                    sample_pathways(graph, model.config.walk_length, walk_seed));
}

NodeRanking saliency(const Model& model, const Graph& graph, const nd::Tensor& features,
                     const PathwaySet& paths) {
    nd::Tape tape;
    TapedModel staged = stage_model(tape, model, false);
    nd::Tensor pe;
    const nd::Tensor* pe_ptr = nullptr;
    if (model.config.pe_steps > 0) {
        pe = rwse(graph, model.config.pe_steps);
        pe_ptr = &pe;
    }

    // Rebuild the input path so the feature matrix is a differentiable leaf.
    nd::Var feat_var = tape.input(features, true);
    nd::Var x;
    if (model.config.pe_steps > 0) {
        x = nd::matmul(nd::concat_columns(feat_var, tape.input(*pe_ptr)), staged.input_proj);
    } else {
        x = nd::matmul(feat_var, staged.input_proj);
    }
    for (const TapedLayer& layer : staged.layers) {
        x = pathmamba_layer(tape, x, graph, paths, layer);
    }
    nd::Var logits = readout_logits(tape, x, staged);
    auto probs = nd::softmax_values(logits.value());
    const int pred = static_cast<int>(std::max_element(probs.begin(), probs.end()) -
                                      probs.begin());
    // Select the predicted-class logit as the scalar to differentiate.
    nd::Tensor pick(model.config.classes, 1);
    pick[pred] = 1.0;
    nd::Var target = nd::matmul(logits, tape.input(pick));
    tape.backward(target);
    nd::Tensor grad = tape.grad(feat_var);

    NodeRanking out;
    out.method = BaselineMethod::saliency;
    out.scores.resize(static_cast<size_t>(graph.node_count()));
    double sum = 0.0;
    for (int i = 0; i < graph.node_count(); ++i) {
        double sq = 0.0;
        for (int64_t j = 0; j < grad.cols(); ++j) sq += grad.at(i, j) * grad.at(i, j);
        out.scores[static_cast<size_t>(i)] = std::sqrt(sq);
        sum += out.scores[static_cast<size_t>(i)];
    }
    if (sum <= 0.0) {
        // Degenerate zero-gradient model: fall back to uniform.
        const double u = 1.0 / graph.node_count();
        for (double& s : out.scores) s = u;
    } else {
        for (double& s : out.scores) s /= sum;
    }
    return out;
}

std::vector<double> edge_mask_explainer(const Model& model, const Graph& graph,
                                        const nd::Tensor& features, const PathwaySet& paths,
                                        const MaskConfig& config) {
    const int e_count = graph.edge_count();
    nd::Tensor pe;
    const nd::Tensor* pe_ptr = nullptr;
    if (model.config.pe_steps > 0) {
        pe = rwse(graph, model.config.pe_steps);
        pe_ptr = &pe;
    }
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

    nd::Tensor logits_t(e_count, 1);
    Rng init_rng(mix_seed(config.seed, 0x65646765ULL));
    for (int e = 0; e < e_count; ++e) logits_t[e] = 2.0 + 0.1 * init_rng.next_normal();

    nd::OptimizerConfig oc;
    oc.kind = nd::OptimizerKind::adam;
    oc.learning_rate = config.learning_rate;
    oc.weight_decay = 0.0;
    nd::Optimizer opt(oc);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        try {
            nd::Tape tape;
            nd::Var lv = tape.input(logits_t, true);
            nd::Var sig = nd::sigmoid(lv);
            TapedModel staged = stage_model(tape, model, false);
            ForwardInputs in;
            in.graph = &graph;
            in.features = &features;
            in.pe = pe_ptr;
            in.paths = &paths;
            in.edge_weights = sig;
            nd::Var logits = model_logits(tape, model, staged, in);
            nd::Var loss = nd::add(nd::softmax_cross_entropy(logits, label),
                                   nd::scale(nd::sum_all(sig), config.lambda));
            tape.backward(loss);
            nd::Tensor grad = tape.grad(lv);
            std::vector<nd::Tensor*> params{&logits_t};
            opt.step(params, {grad});
        } catch (const std::runtime_error& e) {
            throw std::runtime_error("edge_mask_explainer: diverged at epoch " +
                                     std::to_string(epoch) + ": " + e.what());
        }
    }
    std::vector<double> scores(static_cast<size_t>(e_count));
    for (int e = 0; e < e_count; ++e) {
        scores[static_cast<size_t>(e)] =
            1.0 / (1.0 + std::exp(-logits_t[e]));
    }
    return scores;
}

NodeRanking edge_mask_node_ranking(const Graph& graph, const std::vector<double>& edge_scores) {
    if (static_cast<int>(edge_scores.size()) != graph.edge_count()) {
        throw std::invalid_argument("edge_mask_node_ranking: edge score count mismatch");
    }
    NodeRanking out;
    out.method = BaselineMethod::edge_mask;
    out.scores.assign(static_cast<size_t>(graph.node_count()), 0.0);
    for (int e = 0; e < graph.edge_count(); ++e) {
        const Edge& ed = graph.edges()[static_cast<size_t>(e)];
        const double s = edge_scores[static_cast<size_t>(e)];
        out.scores[static_cast<size_t>(ed.u)] = std::max(out.scores[static_cast<size_t>(ed.u)], s);
        out.scores[static_cast<size_t>(ed.v)] = std::max(out.scores[static_cast<size_t>(ed.v)], s);
    }
    return out;
}

}  // namespace pathmamba
