#include "pathmamba/graph.hpp"

#include <algorithm>
#include <stdexcept>

namespace pathmamba {

namespace {

int64_t edge_key(int node_count, int u, int v) {
    return static_cast<int64_t>(u) * node_count + v;
}

}  // namespace

Graph::Graph(int node_count, std::vector<Edge> edges, std::vector<std::string> node_names)
    : node_count_(node_count), edges_(std::move(edges)), node_names_(std::move(node_names)) {
    if (node_count_ < 0) throw std::invalid_argument("Graph: negative node count");
    if (!node_names_.empty() && static_cast<int>(node_names_.size()) != node_count_) {
        throw std::invalid_argument("Graph: node_names size does not match node count");
    }
    for (Edge& e : edges_) {
        if (e.u > e.v) std::swap(e.u, e.v);
        if (e.u == e.v) {
            throw std::invalid_argument("Graph: self-loop at node " + std::to_string(e.u));
        }
        if (e.u < 0 || e.v >= node_count_) {
            throw std::invalid_argument("Graph: edge (" + std::to_string(e.u) + "," +
                                        std::to_string(e.v) + ") out of range for N=" +
                                        std::to_string(node_count_));
        }
    }
    std::sort(edges_.begin(), edges_.end(),
              [](const Edge& a, const Edge& b) { return a.u < b.u || (a.u == b.u && a.v < b.v); });
    for (size_t i = 1; i < edges_.size(); ++i) {
        if (edges_[i] == edges_[i - 1]) {
            throw std::invalid_argument("Graph: duplicate edge (" + std::to_string(edges_[i].u) +
                                        "," + std::to_string(edges_[i].v) + ")");
        }
    }
    adj_.assign(static_cast<size_t>(node_count_), {});
    edge_ix_.reserve(edges_.size());
    for (size_t i = 0; i < edges_.size(); ++i) {
        const Edge& e = edges_[i];
        adj_[static_cast<size_t>(e.u)].push_back(e.v);
        adj_[static_cast<size_t>(e.v)].push_back(e.u);
        edge_ix_[edge_key(node_count_, e.u, e.v)] = static_cast<int>(i);
    }
    for (auto& nbrs : adj_) std::sort(nbrs.begin(), nbrs.end());
}

int Graph::edge_index(int u, int v) const {
    if (u == v || u < 0 || v < 0 || u >= node_count_ || v >= node_count_) return -1;
    if (u > v) std::swap(u, v);
    auto it = edge_ix_.find(edge_key(node_count_, u, v));
    return it == edge_ix_.end() ? -1 : it->second;
}

std::string Graph::name_of(int v) const {
    if (!node_names_.empty()) return node_names_[static_cast<size_t>(v)];
    return std::to_string(v);
}

std::vector<int> connected_components(const Graph& g, int* count) {
    std::vector<int> comp(static_cast<size_t>(g.node_count()), -1);
    int next = 0;
    std::vector<int> stack;
    for (int s = 0; s < g.node_count(); ++s) {
        if (comp[static_cast<size_t>(s)] >= 0) continue;
        comp[static_cast<size_t>(s)] = next;
        stack.push_back(s);
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int w : g.neighbors(v)) {
                if (comp[static_cast<size_t>(w)] < 0) {
                    comp[static_cast<size_t>(w)] = next;
                    stack.push_back(w);
                }
            }
        }
        ++next;
    }
    if (count) *count = next;
    return comp;
}

bool is_connected(const Graph& g) {
    if (g.node_count() == 0) return false;
    int count = 0;
    connected_components(g, &count);
    return count == 1;
}

PreprocessResult preprocess_graph(int node_count, const std::vector<Edge>& raw_edges,
                                  const std::vector<std::string>& node_names) {
    if (node_count < 0) throw std::invalid_argument("preprocess_graph: negative node count");
    std::vector<Edge> cleaned;
    cleaned.reserve(raw_edges.size());
    for (Edge e : raw_edges) {
        if (e.u == e.v) continue;  // non-functional self-loop
        if (e.u > e.v) std::swap(e.u, e.v);
        if (e.u < 0 || e.v >= node_count) {
            throw std::invalid_argument("preprocess_graph: edge (" + std::to_string(e.u) + "," +
                                        std::to_string(e.v) + ") out of range");
        }
        cleaned.push_back(e);
    }
    std::sort(cleaned.begin(), cleaned.end(),
              [](const Edge& a, const Edge& b) { return a.u < b.u || (a.u == b.u && a.v < b.v); });
    cleaned.erase(std::unique(cleaned.begin(), cleaned.end()), cleaned.end());

    std::vector<int> degree(static_cast<size_t>(node_count), 0);
    for (const Edge& e : cleaned) {
        ++degree[static_cast<size_t>(e.u)];
        ++degree[static_cast<size_t>(e.v)];
    }
    std::vector<int> old_to_new(static_cast<size_t>(node_count), -1);
    std::vector<std::string> kept_names;
    int next = 0;
    for (int v = 0; v < node_count; ++v) {
        if (degree[static_cast<size_t>(v)] > 0) {
            old_to_new[static_cast<size_t>(v)] = next++;
            if (!node_names.empty()) kept_names.push_back(node_names[static_cast<size_t>(v)]);
        }
    }
    if (next == 0) throw std::runtime_error("preprocess_graph: no informative structure");

    for (Edge& e : cleaned) {
        e.u = old_to_new[static_cast<size_t>(e.u)];
        e.v = old_to_new[static_cast<size_t>(e.v)];
    }
    return PreprocessResult{Graph(next, std::move(cleaned), std::move(kept_names)),
                            std::move(old_to_new)};
}

}  // namespace pathmamba
