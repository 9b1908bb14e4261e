#include "pathmamba/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "pathmamba/rng.hpp"

namespace pathmamba {

using nd::Tape;
using nd::Tensor;
using nd::Var;

void ModelConfig::validate() const {
    if (num_layers < 1) throw std::invalid_argument("model: num_layers must be >= 1");
    if (hidden < 1) throw std::invalid_argument("model: hidden size must be >= 1");
    if (walk_length < 1) throw std::invalid_argument("model: walk_length must be >= 1");
    if (pe_steps < 0) throw std::invalid_argument("model: pe_steps must be >= 0");
    if (d_state < 1) throw std::invalid_argument("model: d_state must be >= 1");
    if (classes < 2) throw std::invalid_argument("model: need at least 2 classes");
    if (feature_dim < 1) throw std::invalid_argument("model: feature_dim must be >= 1");
}

namespace {

Tensor glorot(int64_t rows, int64_t cols, Rng& rng) {
    Tensor t(rows, cols);
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = (2.0 * rng.next_double() - 1.0) * limit;
    return t;
}

// Small random bias init. Exact zeros can leave a whole layer parked on the
// ReLU kink (dead output that is identically zero), which stalls training
// and puts pre-activations on the subgradient boundary.
Tensor bias_init(int64_t cols, Rng& rng) {
    Tensor t(1, cols);
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = 0.01 * (2.0 * rng.next_double() - 1.0);
    return t;
}

}  // namespace

Model init_model(const ModelConfig& config, uint64_t seed) {
    config.validate();
    Rng rng(mix_seed(seed, 0x6d6f64656cULL));  // one stream for the whole init
    Model m;
    m.config = config;
    const int d_in = config.feature_dim + config.pe_steps;
    const int h = config.hidden;
    const int s = config.d_state;
    m.input_proj = glorot(d_in, h, rng);
    m.layers.resize(static_cast<size_t>(config.num_layers));
    for (LayerParams& layer : m.layers) {
        layer.gin.weight = glorot(h, h, rng);
        layer.gin.epsilon = Tensor::scalar(0.0);
        layer.mamba.w_delta = glorot(h, 1, rng);
        layer.mamba.b_delta = bias_init(1, rng);
        layer.mamba.w_b = glorot(h, s, rng);
        layer.mamba.b_b = bias_init(s, rng);
        layer.mamba.w_c = glorot(h, s, rng);
        layer.mamba.b_c = bias_init(s, rng);
        layer.mamba.decay = Tensor::full(1, s, 1.0);
        layer.mamba.out_proj = glorot(s, h, rng);
        layer.combine.w1 = glorot(h, h, rng);
        layer.combine.b1 = bias_init(h, rng);
        layer.combine.w2 = glorot(h, h, rng);
        layer.combine.b2 = bias_init(h, rng);
    }
    m.readout.w1 = glorot(h, h, rng);
    m.readout.b1 = bias_init(h, rng);
    m.readout.w2 = glorot(h, config.classes, rng);
    m.readout.b2 = bias_init(config.classes, rng);
    return m;
}

template <typename ModelT, typename TensorPtr>
static std::vector<std::pair<std::string, TensorPtr>> list_params(ModelT& m) {
    std::vector<std::pair<std::string, TensorPtr>> out;
    out.emplace_back("input_proj", &m.input_proj);
    for (size_t l = 0; l < m.layers.size(); ++l) {
        auto& layer = m.layers[l];
        const std::string p = "layer" + std::to_string(l) + ".";
        out.emplace_back(p + "gin.weight", &layer.gin.weight);
        out.emplace_back(p + "gin.epsilon", &layer.gin.epsilon);
        out.emplace_back(p + "mamba.w_delta", &layer.mamba.w_delta);
        out.emplace_back(p + "mamba.b_delta", &layer.mamba.b_delta);
        out.emplace_back(p + "mamba.w_b", &layer.mamba.w_b);
        out.emplace_back(p + "mamba.b_b", &layer.mamba.b_b);
        out.emplace_back(p + "mamba.w_c", &layer.mamba.w_c);
        out.emplace_back(p + "mamba.b_c", &layer.mamba.b_c);
        out.emplace_back(p + "mamba.decay", &layer.mamba.decay);
        out.emplace_back(p + "mamba.out_proj", &layer.mamba.out_proj);
        out.emplace_back(p + "combine.w1", &layer.combine.w1);
        out.emplace_back(p + "combine.b1", &layer.combine.b1);
        out.emplace_back(p + "combine.w2", &layer.combine.w2);
        out.emplace_back(p + "combine.b2", &layer.combine.b2);
    }
    out.emplace_back("readout.w1", &m.readout.w1);
    out.emplace_back("readout.b1", &m.readout.b1);
    out.emplace_back("readout.w2", &m.readout.w2);
    out.emplace_back("readout.b2", &m.readout.b2);
    return out;
}

std::vector<std::pair<std::string, Tensor*>> Model::parameters() {
    return list_params<Model, Tensor*>(*this);
}

std::vector<std::pair<std::string, const Tensor*>> Model::parameters() const {
    return list_params<const Model, const Tensor*>(*this);
}

TapedModel stage_model(Tape& tape, const Model& model, bool requires_grad) {
    TapedModel staged;
    auto put = [&](const Tensor& t) {
        Var v = tape.input(t, requires_grad);
        staged.ordered.push_back(v);
        return v;
    };
    staged.input_proj = put(model.input_proj);
    for (const LayerParams& layer : model.layers) {
        TapedLayer tl;
        tl.gin_weight = put(layer.gin.weight);
        tl.gin_epsilon = put(layer.gin.epsilon);
        tl.mamba.w_delta = put(layer.mamba.w_delta);
        tl.mamba.b_delta = put(layer.mamba.b_delta);
        tl.mamba.w_b = put(layer.mamba.w_b);
        tl.mamba.b_b = put(layer.mamba.b_b);
        tl.mamba.w_c = put(layer.mamba.w_c);
        tl.mamba.b_c = put(layer.mamba.b_c);
        tl.mamba.decay = put(layer.mamba.decay);
        tl.mamba.out_proj = put(layer.mamba.out_proj);
        tl.mlp_w1 = put(layer.combine.w1);
        tl.mlp_b1 = put(layer.combine.b1);
        tl.mlp_w2 = put(layer.combine.w2);
        tl.mlp_b2 = put(layer.combine.b2);
        staged.layers.push_back(tl);
    }
    staged.ro_w1 = put(model.readout.w1);
    staged.ro_b1 = put(model.readout.b1);
    staged.ro_w2 = put(model.readout.w2);
    staged.ro_b2 = put(model.readout.b2);
    return staged;
}

Var gin_layer(Tape& tape, Var x, const Graph& graph, Var weight, Var epsilon,
              std::optional<Var> edge_weights) {
    Var self = nd::mul_scalar_var(x, nd::add_scalar(epsilon, 1.0));
    Var nbr = nd::neighbor_sum(x, graph, edge_weights ? *edge_weights : Var{});
    Var agg = nd::add(self, nbr);
    return nd::relu(nd::matmul(agg, weight));
}

namespace {

// Shared scan body: advances the hidden state over one step for a batch of
// walks. `xt` is m x d'.
struct ScanStep {
    Var delta;  // m x 1
    Var b;      // m x S
};

ScanStep project_step(Tape& tape, Var xt, const TapedMamba& p) {
    ScanStep s;
    s.delta = nd::softplus(nd::add_rowvec(nd::matmul(xt, p.w_delta), p.b_delta));
    s.b = nd::add_rowvec(nd::matmul(xt, p.w_b), p.b_b);
    return s;
}

Var advance_state(Tape& tape, std::optional<Var> h_prev, const ScanStep& s,
                  const TapedMamba& p) {
    Var update = nd::mul_colvec(s.b, s.delta);
    if (!h_prev) return update;  // h_0 = 0
    Var keep = nd::rsub_const(1.0, nd::outer(s.delta, p.decay));
    return nd::add(nd::elementwise_mul(keep, *h_prev), update);
}

Var scan_readout(Tape& tape, Var x_last, Var h_last, const TapedMamba& p) {
    Var c = nd::add_rowvec(nd::matmul(x_last, p.w_c), p.b_c);
    return nd::matmul(nd::elementwise_mul(c, h_last), p.out_proj);
}

}  // namespace

Var mamba_scan(Tape& tape, Var path_features, const TapedMamba& params) {
    const int64_t t_count = path_features.rows();
    if (t_count < 1) throw std::invalid_argument("mamba_scan: empty sequence");
    std::optional<Var> h;
    Var xt;
    for (int64_t t = 0; t < t_count; ++t) {
        xt = nd::gather_rows(path_features, {t});
        h = advance_state(tape, h, project_step(tape, xt, params), params);
    }
    return scan_readout(tape, xt, *h, params);
}

namespace {

Var global_layer_grouped(Tape& tape, Var x, const Graph& graph, const PathwaySet& paths,
                         const TapedMamba& params, std::optional<Var> edge_weights) {
    const int n = graph.node_count();
    // Group walks by length so each group scans as one dense batch.
    std::map<size_t, std::vector<int>> by_length;
    for (int i = 0; i < n; ++i) {
        by_length[paths.pathways[static_cast<size_t>(i)].nodes.size()].push_back(i);
    }
    std::optional<Var> out;
    for (const auto& [len, members] : by_length) {
        std::optional<Var> h;
        std::optional<Var> gate;  // cumulative transition weight per walk
        Var xt;
        for (size_t t = 0; t < len; ++t) {
            std::vector<int64_t> idx;
            idx.reserve(members.size());
            for (int i : members) {
                idx.push_back(paths.pathways[static_cast<size_t>(i)].nodes[t]);
            }
            xt = nd::gather_rows(x, std::move(idx));
            if (edge_weights && t > 0) {
                // A masked transition suppresses everything the walk carries
                // from there on, the soft version of not being able to cross
                // the edge at all.
                std::vector<int64_t> eix;
                eix.reserve(members.size());
                for (int i : members) {
                    const auto& nodes = paths.pathways[static_cast<size_t>(i)].nodes;
                    int e = graph.edge_index(nodes[t - 1], nodes[t]);
                    if (e < 0) {
                        throw std::invalid_argument("global_layer: walk uses a non-edge");
                    }
                    eix.push_back(e);
                }
                Var step_w = nd::gather_rows(*edge_weights, std::move(eix));
                gate = gate ? nd::elementwise_mul(*gate, step_w) : step_w;
                xt = nd::mul_colvec(xt, *gate);
            }
            h = advance_state(tape, h, project_step(tape, xt, params), params);
        }
        Var rows = scan_readout(tape, xt, *h, params);
        std::vector<int64_t> starts(members.begin(), members.end());
        Var scattered = nd::scatter_rows(rows, std::move(starts), n);
        out = out ? nd::add(*out, scattered) : scattered;
    }
    return *out;
}

}  // namespace

Var global_layer(Tape& tape, Var x, const Graph& graph, const PathwaySet& paths,
                 const TapedMamba& params, std::optional<Var> edge_weights) {
    if (static_cast<int>(paths.pathways.size()) != graph.node_count()) {
        throw std::invalid_argument("global_layer: pathway count " +
                                    std::to_string(paths.pathways.size()) +
                                    " != node count " + std::to_string(graph.node_count()));
    }
    return global_layer_grouped(tape, x, graph, paths, params, edge_weights);
}

Var global_layer_reference(Tape& tape, Var x, const Graph& graph, const PathwaySet& paths,
                           const TapedMamba& params, std::optional<Var> edge_weights) {
    const int n = graph.node_count();
    if (static_cast<int>(paths.pathways.size()) != n) {
        throw std::invalid_argument("global_layer_reference: pathway/node count mismatch");
    }
    std::optional<Var> out;
    for (int i = 0; i < n; ++i) {
        const Pathway& p = paths.pathways[static_cast<size_t>(i)];
        std::vector<int64_t> idx(p.nodes.begin(), p.nodes.end());
        Var seq = nd::gather_rows(x, std::move(idx));
        if (edge_weights && p.nodes.size() > 1) {
            // Gating column: 1 for the start node, then the cumulative
            // product of transition weights (a masked edge cuts the rest of
            // the walk).
            std::vector<int64_t> widx;
            for (size_t t = 1; t < p.nodes.size(); ++t) {
                int e = graph.edge_index(p.nodes[t - 1], p.nodes[t]);
                if (e < 0) throw std::invalid_argument("global_layer_reference: non-edge in walk");
                widx.push_back(e);
            }
            const size_t steps = widx.size();
            Var wcol = nd::gather_rows(*edge_weights, std::move(widx));  // (T-1) x 1
            Tensor head(static_cast<int64_t>(p.nodes.size()), 1);
            head[0] = 1.0;
            Var wfull = tape.input(head);
            std::optional<Var> running;
            for (size_t t = 0; t < steps; ++t) {
                Var step = nd::gather_rows(wcol, {static_cast<int64_t>(t)});
                running = running ? nd::elementwise_mul(*running, step) : step;
                wfull = nd::add(wfull, nd::scatter_rows(*running, {static_cast<int64_t>(t + 1)},
                                                        static_cast<int64_t>(p.nodes.size())));
            }
            seq = nd::mul_colvec(seq, wfull);
        }
        Var row = mamba_scan(tape, seq, params);
        Var scattered = nd::scatter_rows(row, {i}, n);
        out = out ? nd::add(*out, scattered) : scattered;
    }
    return *out;
}

namespace {

Var two_layer_mlp(Tape& tape, Var x, Var w1, Var b1, Var w2, Var b2) {
    Var h = nd::relu(nd::add_rowvec(nd::matmul(x, w1), b1));
    return nd::add_rowvec(nd::matmul(h, w2), b2);
}

}  // namespace

Var pathmamba_layer(Tape& tape, Var x, const Graph& graph, const PathwaySet& paths,
                    const TapedLayer& params, std::optional<Var> edge_weights) {
    Var local = gin_layer(tape, x, graph, params.gin_weight, params.gin_epsilon, edge_weights);
    Var global = global_layer(tape, x, graph, paths, params.mamba, edge_weights);
    return two_layer_mlp(tape, nd::add(local, global), params.mlp_w1, params.mlp_b1,
                         params.mlp_w2, params.mlp_b2);
}

Var readout_logits(Tape& tape, Var x, const TapedModel& staged) {
    Var pooled = nd::rowwise_max_pool(x);
    return two_layer_mlp(tape, pooled, staged.ro_w1, staged.ro_b1, staged.ro_w2, staged.ro_b2);
}

Var model_logits(Tape& tape, const Model& model, const TapedModel& staged,
                 const ForwardInputs& in) {
    const ModelConfig& cfg = model.config;
    if (in.features->cols() != cfg.feature_dim) {
        throw std::invalid_argument("model_logits: feature dim " +
                                    std::to_string(in.features->cols()) + " != configured " +
                                    std::to_string(cfg.feature_dim));
    }
    if (in.features->rows() != in.graph->node_count()) {
        throw std::invalid_argument("model_logits: feature rows do not match node count");
    }
    Var x;
    Var feats = tape.input(*in.features);
    if (cfg.pe_steps > 0) {
        if (!in.pe || in.pe->cols() != cfg.pe_steps) {
            throw std::invalid_argument("model_logits: positional encoding missing or wrong width");
        }
        Var pe = tape.input(*in.pe);
        x = nd::matmul(nd::concat_columns(feats, pe), staged.input_proj);
    } else {
        x = nd::matmul(feats, staged.input_proj);
    }
    for (const TapedLayer& layer : staged.layers) {
        x = pathmamba_layer(tape, x, *in.graph, *in.paths, layer, in.edge_weights);
    }
    return readout_logits(tape, x, staged);
}

namespace {

Prediction predict_once(const Model& model, const Graph& graph, const Tensor& features,
                        uint64_t walk_seed, const Tensor* pe) {
    Tape tape;
    TapedModel staged = stage_model(tape, model, false);
    PathwaySet paths = sample_pathways(graph, model.config.walk_length, walk_seed);
    ForwardInputs in;
    in.graph = &graph;
    in.features = &features;
    in.pe = pe;
    in.paths = &paths;
    Var logits = model_logits(tape, model, staged, in);
    Prediction p;
    p.probabilities = nd::softmax_values(logits.value());
    p.label = static_cast<int>(std::max_element(p.probabilities.begin(),
                                                p.probabilities.end()) -
                               p.probabilities.begin());
    return p;
}

}  // namespace

Prediction predict(const Model& model, const Graph& graph, const Tensor& features,
                   uint64_t walk_seed) {
    Tensor pe;
    const Tensor* pe_ptr = nullptr;
    if (model.config.pe_steps > 0) {
        pe = rwse(graph, model.config.pe_steps);
        pe_ptr = &pe;
    }
    return predict_once(model, graph, features, walk_seed, pe_ptr);
}

Prediction predict_averaged(const Model& model, const Graph& graph, const Tensor& features,
                            uint64_t walk_seed, int draws) {
    if (draws < 1) throw std::invalid_argument("predict_averaged: draws must be >= 1");
    Tensor pe;
    const Tensor* pe_ptr = nullptr;
    if (model.config.pe_steps > 0) {
        pe = rwse(graph, model.config.pe_steps);
        pe_ptr = &pe;
    }
    std::vector<double> acc(static_cast<size_t>(model.config.classes), 0.0);
    for (int s = 0; s < draws; ++s) {
        Prediction p = predict_once(model, graph, features,
                                    mix_seed(walk_seed, static_cast<uint64_t>(s)), pe_ptr);
        for (size_t c = 0; c < acc.size(); ++c) acc[c] += p.probabilities[c];
    }
    for (double& v : acc) v /= draws;
    Prediction p;
    p.probabilities = std::move(acc);
    p.label = static_cast<int>(std::max_element(p.probabilities.begin(), p.probabilities.end()) -
                               p.probabilities.begin());
    return p;
}

}  // namespace pathmamba
