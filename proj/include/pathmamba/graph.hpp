#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace pathmamba {

// Undirected edge, stored canonically with u < v.
struct Edge {
    int u = 0;
    int v = 0;
    friend bool operator==(const Edge& a, const Edge& b) {
        return a.u == b.u && a.v == b.v;
    }
};

// Simple undirected graph over nodes 0..N-1. Construction enforces the
// invariants every algorithm here relies on: no self-loops, no duplicate
// edges, all endpoints in range. Edges are kept sorted so edge indices are
// canonical and reproducible.
class Graph {
public:
    Graph() = default;
    Graph(int node_count, std::vector<Edge> edges,
          std::vector<std::string> node_names = {});

    int node_count() const { return node_count_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<int>& neighbors(int v) const { return adj_[static_cast<size_t>(v)]; }
    int degree(int v) const { return static_cast<int>(adj_[static_cast<size_t>(v)].size()); }

    bool has_edge(int u, int v) const { return edge_index(u, v) >= 0; }
    // Canonical edge index, -1 if the edge is absent.
    int edge_index(int u, int v) const;

    const std::vector<std::string>& node_names() const { return node_names_; }
    // Name of node v, falling back to its index.
    std::string name_of(int v) const;

private:
    int node_count_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> adj_;
    std::unordered_map<int64_t, int> edge_ix_;
    std::vector<std::string> node_names_;
};

// Connected components as a component id per node.
std::vector<int> connected_components(const Graph& g, int* count = nullptr);
bool is_connected(const Graph& g);

struct PreprocessResult {
    Graph graph;
    // old node index -> new index, -1 for dropped (isolated) nodes.
    std::vector<int> old_to_new;
};

// Cleans a raw edge list: drops self-loops, merges duplicate/directed pairs
// into single undirected edges, removes isolated nodes and reindexes the
// rest densely. Throws if nothing with structure remains.
PreprocessResult preprocess_graph(int node_count, const std::vector<Edge>& raw_edges,
                                  const std::vector<std::string>& node_names = {});

}  // namespace pathmamba
