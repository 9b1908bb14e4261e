#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pathmamba/graph.hpp"
#include "pathmamba/pathsampler.hpp"
#include "pathmamba/tape.hpp"
#include "pathmamba/tensor.hpp"

namespace pathmamba {

// X_L = ReLU(((1+eps) X + sum_{j in N(i)} X_j) W)
struct GinParams {
    nd::Tensor weight;   // d' x d'
    nd::Tensor epsilon;  // 1 x 1
};

// Selective-scan gates over a walk's feature sequence:
//   delta_t = softplus(f_delta(x_t))        scalar per step
//   B_t     = f_B(x_t), C_t = f_C(x_t)      state-width vectors
//   h_t     = (1 - delta_t * decay) . h_{t-1} + delta_t * B_t
//   readout = C_last . h_last, projected back to d' by out_proj.
struct MambaParams {
    nd::Tensor w_delta, b_delta;  // d' x 1, 1 x 1
    nd::Tensor w_b, b_b;          // d' x S, 1 x S
    nd::Tensor w_c, b_c;          // d' x S, 1 x S
    nd::Tensor decay;             // 1 x S
    nd::Tensor out_proj;          // S x d'
};

struct MlpParams {
    nd::Tensor w1, b1, w2, b2;
};

struct LayerParams {
    GinParams gin;
    MambaParams mamba;
    MlpParams combine;  // two-layer MLP d' -> d'
};

struct ModelConfig {
    int num_layers = 1;
    int hidden = 64;       // d'
    int walk_length = 8;   // L
    int pe_steps = 4;      // K; 0 disables positional encoding
    int d_state = 16;
    int classes = 2;
    int feature_dim = 0;   // d, taken from the data

    void validate() const;
};

struct Model {
    ModelConfig config;
    nd::Tensor input_proj;  // (d + K) x d'
    std::vector<LayerParams> layers;
    MlpParams readout;      // d' -> d' -> C

    // Canonical (name, tensor) list; ordering is the checkpoint and
    // optimizer contract.
    std::vector<std::pair<std::string, nd::Tensor*>> parameters();
    std::vector<std::pair<std::string, const nd::Tensor*>> parameters() const;
};

Model init_model(const ModelConfig& config, uint64_t seed);

// Parameters registered on a tape for one forward/backward pass.
struct TapedMamba {
    nd::Var w_delta, b_delta, w_b, b_b, w_c, b_c, decay, out_proj;
};
struct TapedLayer {
    nd::Var gin_weight, gin_epsilon;
    TapedMamba mamba;
    nd::Var mlp_w1, mlp_b1, mlp_w2, mlp_b2;
};
struct TapedModel {
    nd::Var input_proj;
    std::vector<TapedLayer> layers;
    nd::Var ro_w1, ro_b1, ro_w2, ro_b2;
    // Vars aligned with Model::parameters() order, for gradient extraction.
    std::vector<nd::Var> ordered;
};

TapedModel stage_model(nd::Tape& tape, const Model& model, bool requires_grad);

// ---- layer ops ----
// `edge_weights` (E x 1), when present, scales both the GIN neighbor sums
// and the walk transitions; this is how the explainer's soft mask enters.

nd::Var gin_layer(nd::Tape& tape, nd::Var x, const Graph& graph, nd::Var weight,
                  nd::Var epsilon, std::optional<nd::Var> edge_weights = {});

// One walk: path_features is T x d' (T = walk node count), result 1 x d'.
nd::Var mamba_scan(nd::Tape& tape, nd::Var path_features, const TapedMamba& params);

// All walks at once, batched per step across walks of equal length.
nd::Var global_layer(nd::Tape& tape, nd::Var x, const Graph& graph, const PathwaySet& paths,
                     const TapedMamba& params, std::optional<nd::Var> edge_weights = {});
// Walk-at-a-time route, kept as the reference for the batched kernel.
nd::Var global_layer_reference(nd::Tape& tape, nd::Var x, const Graph& graph,
                               const PathwaySet& paths, const TapedMamba& params,
                               std::optional<nd::Var> edge_weights = {});

nd::Var pathmamba_layer(nd::Tape& tape, nd::Var x, const Graph& graph, const PathwaySet& paths,
                        const TapedLayer& params, std::optional<nd::Var> edge_weights = {});

// softmax(MLP(columnwise max over nodes)); returns logits (1 x C).
nd::Var readout_logits(nd::Tape& tape, nd::Var x, const TapedModel& staged);

struct ForwardInputs {
    const Graph* graph = nullptr;
    const nd::Tensor* features = nullptr;  // N x d
    const nd::Tensor* pe = nullptr;        // N x K, ignored when pe_steps == 0
    const PathwaySet* paths = nullptr;
    // Soft mask weights (E x 1): scale the GIN neighbor sums and gate the
    // walk transitions cumulatively.
    std::optional<nd::Var> edge_weights;
};

nd::Var model_logits(nd::Tape& tape, const Model& model, const TapedModel& staged,
                     const ForwardInputs& in);

struct Prediction {
    std::vector<double> probabilities;
    int label = 0;
};

// Deterministic given walk_seed; walks are part of the model's randomness.
Prediction predict(const Model& model, const Graph& graph, const nd::Tensor& features,
                   uint64_t walk_seed);
// Averages probabilities over `draws` independent walk draws.
Prediction predict_averaged(const Model& model, const Graph& graph, const nd::Tensor& features,
                            uint64_t walk_seed, int draws);

}  // namespace pathmamba
