#include <stdexcept>
#include <string>

#include "pathmamba/dataset.hpp"
#include "pathmamba/rng.hpp"

namespace pathmamba {

namespace {

constexpr int kMaxRetries = 100;

// One attempt at an Erdos-Renyi background. Returns the preprocessed graph;
// the caller checks connectivity and retries with the same stream.
Graph sample_background(const SyntheticSpec& spec, Rng& rng) {
    std::vector<Edge> edges;
    for (int u = 0; u < spec.background_nodes; ++u) {
        for (int v = u + 1; v < spec.background_nodes; ++v) {
            if (rng.next_double() < spec.background_edge_prob) edges.push_back(Edge{u, v});
        }
    }
    if (edges.empty()) return Graph();
    return preprocess_graph(spec.background_nodes, edges).graph;
}

}  // namespace

void SyntheticSpec::validate() const {
    if (num_graphs_per_class < 1) throw std::invalid_argument("synthetic: num_graphs_per_class < 1");
    if (classes < 2) throw std::invalid_argument("synthetic: need at least 2 classes");
    if (background_nodes < 2) throw std::invalid_argument("synthetic: background_nodes < 2");
    if (!(background_edge_prob > 0.0 && background_edge_prob < 1.0)) {
        throw std::invalid_argument("synthetic: background_edge_prob must be in (0,1)");
    }
    if (motif_length < 2 || motif_length > background_nodes) {
        throw std::invalid_argument("synthetic: motif_length must be in [2, background_nodes]");
    }
    if (feature_dim < 1) throw std::invalid_argument("synthetic: feature_dim < 1");
    if (feature_signal < 0.0) throw std::invalid_argument("synthetic: feature_signal < 0");
}

Dataset generate_synthetic(const SyntheticSpec& spec, uint64_t seed) {
    spec.validate();
    Dataset ds;
    ds.rng_seed = seed;
    for (int c = 0; c < spec.classes; ++c) {
        ds.class_names.push_back("class_" + std::to_string(c));
    }

    int graph_index = 0;
    for (int c = 0; c < spec.classes; ++c) {
        for (int m = 0; m < spec.num_graphs_per_class; ++m, ++graph_index) {
            Rng rng(mix_seed(seed, static_cast<uint64_t>(c), static_cast<uint64_t>(m)));

            Graph background;
            int attempt = 0;
            for (;; ++attempt) {
                if (attempt >= kMaxRetries) {
                    throw std::runtime_error(
                        "generate_synthetic: no connected background after " +
                        std::to_string(kMaxRetries) + " attempts (class " + std::to_string(c) +
                        ", graph " + std::to_string(m) + "); raise background_edge_prob");
                }
                background = sample_background(spec, rng);
                if (background.node_count() >= spec.motif_length && is_connected(background)) {
                    break;
                }
            }
            const int n = background.node_count();

            // Motif: a simple path over `motif_length` distinct nodes, wired
            // in as a chain on top of whatever the background already has.
            std::vector<int> pool(static_cast<size_t>(n));
            for (int i = 0; i < n; ++i) pool[static_cast<size_t>(i)] = i;
            rng.shuffle(pool);
            std::vector<int> motif(pool.begin(), pool.begin() + spec.motif_length);

            std::vector<Edge> edges = background.edges();
            std::vector<Edge> motif_edges;
            for (size_t i = 0; i + 1 < motif.size(); ++i) {
                int u = motif[i], v = motif[i + 1];
                Edge e{std::min(u, v), std::max(u, v)};
                motif_edges.push_back(e);
                if (background.edge_index(e.u, e.v) < 0) edges.push_back(e);
            }

            LabeledGraph item;
            item.id = "g" + std::to_string(graph_index);
            item.label = c;
            item.graph = Graph(n, std::move(edges));
            item.motif_nodes = motif;
            item.motif_edges = std::move(motif_edges);

            // Features: standard Gaussian everywhere, plus the class's
            // mean shift on its designated coordinate for motif nodes.
            std::vector<bool> on_motif(static_cast<size_t>(n), false);
            for (int v : motif) on_motif[static_cast<size_t>(v)] = true;
            const int signal_coord = c % spec.feature_dim;
            nd::Tensor feats(n, spec.feature_dim);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < spec.feature_dim; ++j) {
                    double x = rng.next_normal();
                    if (on_motif[static_cast<size_t>(i)] && j == signal_coord) {
                        x += spec.feature_signal;
                    }
                    feats.at(i, j) = x;
                }
            }
            item.features = std::move(feats);
            ds.graphs.push_back(std::move(item));
        }
    }
    ds.validate();
    return ds;
}

}  // namespace pathmamba
