#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathmamba/graph.hpp"
#include "pathmamba/model.hpp"
#include "pathmamba/pathsampler.hpp"
#include "pathmamba/tensor.hpp"

namespace pathmamba {

// One logit per sampled pathway plus a shared background logit (row N) for
// edges no pathway traverses. sigma(logit) is the keep-probability a pathway
// contributes to every edge it walks.
struct PathwayMask {
    nd::Tensor logits;  // (N+1) x 1, last row = background
    double lambda = 0.0;
};

struct MaskConfig {
    double lambda = 0.005;
    int epochs = 100;
    // Adam moves each logit by about learning_rate per step, so 100 epochs
    // need steps this large to traverse the sigmoid's active range.
    double learning_rate = 0.1;
    uint64_t seed = 0;
};

// Which pathways traverse each edge / contain each node. Pathway ids are
// their start nodes.
struct PathwayCoverage {
    std::vector<std::vector<int>> edge_cover;  // per canonical edge
    std::vector<std::vector<int>> node_cover;  // per node
};

PathwayCoverage build_coverage(const Graph& graph, const PathwaySet& paths);

// Per-edge mask weights: max sigma over covering pathways, background for
// uncovered edges. The argmax is taken on the current logits, so gradient
// flows to the strongest covering pathway (ties toward the lower id).
std::vector<int64_t> edge_logit_selection(const Graph& graph, const PathwayCoverage& cover,
                                          const nd::Tensor& logits);

// Soft adjacency G (.) sigma(M): symmetric, zero exactly on non-edges.
nd::Tensor apply_mask(const Graph& graph, const PathwaySet& paths, const PathwayMask& mask);

std::vector<double> mask_edge_scores(const Graph& graph, const PathwaySet& paths,
                                     const PathwayMask& mask);
std::vector<double> mask_node_scores(const Graph& graph, const PathwaySet& paths,
                                     const PathwayMask& mask);

// Learns the pathway mask against the model's own prediction on the
// unmasked graph: cross-entropy on the soft-masked forward pass plus an L1
// penalty on sigma(logits). Model parameters stay frozen.
PathwayMask learn_mask(const Model& model, const Graph& graph, const nd::Tensor& features,
                       const PathwaySet& paths, const MaskConfig& config);

struct Explanation {
    std::vector<double> node_scores;
    std::vector<double> edge_scores;   // aligned with graph.edges()
    std::vector<int> kept_nodes;       // ascending original indices
    Graph subgraph;                    // induced on kept nodes, reindexed
    double keep_ratio = 0.0;

    std::string to_json(const std::string& graph_id, int predicted_label) const;
};

// Selects ceil(keep_ratio * N) top-scoring nodes (ties toward the lower
// index) and induces their edges.
Explanation extract_subgraph(const Graph& graph, const std::vector<double>& node_scores,
                             const std::vector<double>& edge_scores, double keep_ratio);

// Full pipeline for one graph: sample paths, learn the mask, extract.
Explanation explain_graph(const Model& model, const Graph& graph, const nd::Tensor& features,
                          double keep_ratio, const MaskConfig& config, uint64_t walk_seed);

}  // namespace pathmamba
