#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathmamba/graph.hpp"
#include "pathmamba/tensor.hpp"

namespace pathmamba {

// One classified graph with its node features. For synthetic data the
// planted motif is kept alongside as ground truth for explanation scoring.
struct LabeledGraph {
    std::string id;
    Graph graph;
    nd::Tensor features;  // N x d
    int label = 0;
    std::vector<int> motif_nodes;
    std::vector<Edge> motif_edges;

    void validate(int num_classes) const;
};

struct Dataset {
    std::vector<LabeledGraph> graphs;
    std::vector<std::string> class_names;
    uint64_t rng_seed = 0;

    int num_classes() const { return static_cast<int>(class_names.size()); }
    void validate() const;
};

struct DatasetSummary {
    int graph_count = 0;
    std::vector<int> class_counts;
    double mean_nodes = 0.0;
    double mean_edges = 0.0;
    int feature_dim = 0;
};

DatasetSummary summarize(const Dataset& dataset);

// On-disk layout under `root`:
//   manifest.tsv   first line: tab-separated class names
//                  then one line per graph: <graph_id>\t<label>
//   <id>.edges     one "u v" pair per line
//   <id>.feat      one whitespace-separated feature row per node
//   truth.json     optional planted-motif ground truth
Dataset load_dataset(const std::string& root);
void save_dataset(const Dataset& dataset, const std::string& root);

// Raw variant used by the preprocess command: tolerates self-loops,
// duplicate/directed edge pairs and isolated nodes, cleans each graph and
// drops the feature rows of removed nodes.
Dataset load_and_preprocess_dataset(const std::string& root);

// Single-file readers shared by the CLI.
nd::Tensor read_feature_file(const std::string& path, const std::string& graph_id = "graph");
std::vector<Edge> read_edge_file(const std::string& path, const std::string& graph_id = "graph");

struct SyntheticSpec {
    int num_graphs_per_class = 10;
    int classes = 2;
    int background_nodes = 24;
    double background_edge_prob = 0.2;
    int motif_length = 5;
    int feature_dim = 8;
    double feature_signal = 2.0;

    void validate() const;
};

// Planted-motif generator: Erdos-Renyi background, preprocessed and required
// to come out connected (bounded retries), plus a class-labelled simple-path
// motif wired in as a chain. Motif node features get the class's mean shift;
// everything else is standard Gaussian. Bit-reproducible per (spec, seed).
Dataset generate_synthetic(const SyntheticSpec& spec, uint64_t seed);

}  // namespace pathmamba
