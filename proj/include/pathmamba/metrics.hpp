#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pathmamba/dataset.hpp"
#include "pathmamba/graph.hpp"
#include "pathmamba/tensor.hpp"

namespace pathmamba {

// Probability vector of a deterministic classifier for a (graph, features)
// pair; the caller binds model and walk seed.
using PredictProbFn =
    std::function<std::vector<double>(const Graph&, const nd::Tensor&)>;

struct FidelityItem {
    const Graph* graph = nullptr;
    const nd::Tensor* features = nullptr;
    std::vector<int> kept_nodes;  // the explanation's selected node set S
};

// f(.) is the probability of the model's own predicted class on the full
// graph. Removal deletes S's incident edges and zeroes S's features;
// retention keeps only S's induced edges and features.
struct FidelityReport {
    struct PerGraph {
        double f_full = 0.0;
        double f_removed = 0.0;
        double f_kept = 0.0;
    };
    double fidelity_plus = 0.0;   // mean f(G) - f(G \ S)
    double fidelity_minus = 0.0;  // mean f(S) - f(G)
    std::vector<PerGraph> per_graph;
};

FidelityReport fidelity_report(const PredictProbFn& predict,
                               const std::vector<FidelityItem>& items);
double fidelity_plus(const PredictProbFn& predict, const std::vector<FidelityItem>& items);
double fidelity_minus(const PredictProbFn& predict, const std::vector<FidelityItem>& items);

// Graph surgery used by the fidelity metrics (node count unchanged).
Graph remove_selected(const Graph& g, const std::vector<int>& selected);
Graph induce_selected(const Graph& g, const std::vector<int>& selected);
nd::Tensor zero_rows(const nd::Tensor& features, const std::vector<int>& rows);
nd::Tensor keep_rows(const nd::Tensor& features, const std::vector<int>& rows);

// Exact longest simple path (edge count) via pruned DFS; graphs are capped
// at 64 nodes.
int max_path_length(const Graph& subgraph);
// Table-style aggregate: the maximum over all subgraphs.
int max_path_length(const std::vector<Graph>& subgraphs);

// Diameter of the largest connected component (0 for edgeless graphs).
int graph_diameter(const Graph& g);
double avg_diameter(const std::vector<Graph>& subgraphs);

struct ClassificationReport {
    std::vector<double> precision;
    std::vector<double> recall;
    // True where a class had no predictions (precision reported as 0).
    std::vector<bool> precision_degenerate;
    double accuracy = 0.0;
    std::vector<std::vector<int>> confusion;  // [true][predicted]
};

ClassificationReport classification_report(const std::vector<int>& predictions,
                                           const std::vector<int>& labels, int num_classes);

// ---- enrichment ----

struct GoMapping {
    // gene -> associated terms
    std::map<std::string, std::set<std::string>> gene_terms;
    std::vector<std::string> background;

    // Lines "gene<TAB>term"; background defaults to all genes seen, or the
    // explicit universe file (one gene per line) when given.
    static GoMapping load(const std::string& path, const std::string& universe_path = "");
    static GoMapping from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs,
                                const std::vector<std::string>& universe = {});
};

// One-sided over-representation tail P(X >= observed) for a hypergeometric
// draw: population N, term size K, sample n.
double hypergeom_tail(int population, int term_size, int draws, int observed);

struct EnrichedTerm {
    std::string term;
    int overlap = 0;
    double p_value = 0.0;
};

// Terms accepted at p < alpha, most significant first. With
// benjamini_hochberg the acceptance threshold is rank-adjusted instead.
std::vector<EnrichedTerm> hypergeom_enrich(const std::vector<std::string>& genes,
                                           const GoMapping& go, double alpha = 0.05,
                                           bool benjamini_hochberg = false);

int ebf(const std::vector<std::string>& subgraph_genes, const GoMapping& go, double alpha = 0.05);

struct EnrichmentInput {
    std::vector<std::string> genes;   // one per subgraph node
    std::vector<double> node_scores;  // aligned with genes
};

struct EnrichmentReport {
    double ebf_mean = 0.0;
    double ecs = 0.0;
    double mean_p = 1.0;  // mean p over accepted terms; 1 when none accepted
    std::vector<std::vector<EnrichedTerm>> per_subgraph;
};

EnrichmentReport enrichment_report(const std::vector<EnrichmentInput>& subgraphs,
                                   const GoMapping& go, double alpha = 0.05,
                                   double top_ratio = 0.30);

// ---- small statistics helpers ----

// Area under the ROC curve of `scores` against the positive flags,
// tie-aware (Mann-Whitney).
double ranking_auc(const std::vector<double>& scores, const std::vector<bool>& positive);

// One-sided sign test: P(Bin(trials, 1/2) >= successes).
double sign_test_p(int successes, int trials);

}  // namespace pathmamba
