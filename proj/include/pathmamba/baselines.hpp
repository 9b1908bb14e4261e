#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathmamba/explainer.hpp"
#include "pathmamba/graph.hpp"
#include "pathmamba/model.hpp"

namespace pathmamba {

enum class BaselineMethod { rss, ppr, mds, saliency, edge_mask };

BaselineMethod parse_baseline_method(const std::string& name);
std::string baseline_method_name(BaselineMethod m);

struct NodeRanking {
    std::vector<double> scores;
    BaselineMethod method = BaselineMethod::rss;
};

// Uniform random scores normalized to sum 1.
NodeRanking rss(const Graph& graph, uint64_t seed);

// Uniform-restart PageRank by power iteration:
//   s <- (1 - damping) * restart + damping * W^T s,  W the random-walk matrix.
// Converges per connected component; scores sum to 1.
NodeRanking ppr(const Graph& graph, double damping = 0.85, double tol = 1e-10,
                const std::vector<double>* restart = nullptr);

// Greedy dominating set: repeatedly take the node covering the most
// uncovered nodes (ties toward the lower index). Members score 1.
NodeRanking mds(const Graph& graph);

// L2 norm of d(predicted-class logit)/d(x_i), normalized to sum 1; uniform
// when every gradient is zero.
NodeRanking saliency(const Model& model, const Graph& graph, const nd::Tensor& features,
                     uint64_t walk_seed);
NodeRanking saliency(const Model& model, const Graph& graph, const nd::Tensor& features,
                     const PathwaySet& paths);

// GNNExplainer-style control: the learn_mask loss with one logit per edge
// instead of per pathway.
std::vector<double> edge_mask_explainer(const Model& model, const Graph& graph,
                                        const nd::Tensor& features, const PathwaySet& paths,
                                        const MaskConfig& config);

// Node ranking induced from per-edge scores (max over incident edges).
NodeRanking edge_mask_node_ranking(const Graph& graph, const std::vector<double>& edge_scores);

}  // namespace pathmamba
