#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathmamba/graph.hpp"
#include "pathmamba/tensor.hpp"

namespace pathmamba {

// A sampled walk. Consecutive nodes are adjacent in the graph; revisits are
// allowed. Walks have exactly L steps except when the start node has no
// neighbors (possible on mutilated graphs during fidelity evaluation), in
// which case the walk is just the start node.
struct Pathway {
    std::vector<int> nodes;
    int start() const { return nodes.front(); }
    int steps() const { return static_cast<int>(nodes.size()) - 1; }
};

struct PathwaySet {
    std::vector<Pathway> pathways;  // exactly one per node, indexed by start
    int walk_length = 0;
    uint64_t seed = 0;
};

// Uniform random walk of L steps from every node. Each node draws from its
// own stream derived from (seed, node), so walks are independent of
// iteration order and stable under node-matched comparisons.
PathwaySet sample_pathways(const Graph& graph, int walk_length, uint64_t seed);

// K-step random-walk return probabilities: entry (i, k-1) is the probability
// that a uniform walk from i is back at i after exactly k steps, i.e. the
// i-th diagonal entry of (D^-1 A)^k. Computed per node with sparse
// propagation; rwse_dense_reference is the dense-matrix-power route kept for
// testing.
nd::Tensor rwse(const Graph& graph, int steps);
nd::Tensor rwse_dense_reference(const Graph& graph, int steps);

std::string pathways_to_json(const PathwaySet& paths);

}  // namespace pathmamba
