#include "pathmamba/pathsampler.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

#include "pathmamba/parallel.hpp"
#include "pathmamba/rng.hpp"

namespace pathmamba {

PathwaySet sample_pathways(const Graph& graph, int walk_length, uint64_t seed) {
    if (walk_length < 1) {
        throw std::invalid_argument("sample_pathways: walk length must be >= 1, got " +
                                    std::to_string(walk_length));
    }
    PathwaySet set;
    set.walk_length = walk_length;
    set.seed = seed;
    set.pathways.resize(static_cast<size_t>(graph.node_count()));
    parallel_for(graph.node_count(), 16, [&](int64_t start) {
        Rng rng(mix_seed(seed, static_cast<uint64_t>(start)));
        Pathway& p = set.pathways[static_cast<size_t>(start)];
        p.nodes.reserve(static_cast<size_t>(walk_length) + 1);
        int cur = static_cast<int>(start);
        p.nodes.push_back(cur);
        for (int t = 0; t < walk_length; ++t) {
            const auto& nbrs = graph.neighbors(cur);
            if (nbrs.empty()) break;  // stranded start node; walk stays put
            cur = nbrs[rng.next_index(nbrs.size())];
            p.nodes.push_back(cur);
        }
    });
    return set;
}

nd::Tensor rwse(const Graph& graph, int steps) {
    if (steps < 1) {
        throw std::invalid_argument("rwse: steps must be >= 1, got " + std::to_string(steps));
    }
    const int n = graph.node_count();
    nd::Tensor pe(n, steps);
    parallel_for(n, 4, [&](int64_t i) {
        // Walk distribution from node i, pushed one step at a time.
        std::vector<double> cur(static_cast<size_t>(n), 0.0);
        std::vector<double> next(static_cast<size_t>(n), 0.0);
        cur[static_cast<size_t>(i)] = 1.0;
        for (int k = 0; k < steps; ++k) {
            std::fill(next.begin(), next.end(), 0.0);
            for (int u = 0; u < n; ++u) {
                const double mass = cur[static_cast<size_t>(u)];
                if (mass == 0.0) continue;
                const auto& nbrs = graph.neighbors(u);
                if (nbrs.empty()) continue;  // degree-0: the walk is stuck
                const double share = mass / static_cast<double>(nbrs.size());
                for (int w : nbrs) next[static_cast<size_t>(w)] += share;
            }
            std::swap(cur, next);
            pe.at(i, k) = cur[static_cast<size_t>(i)];
        }
    });
    return pe;
}

nd::Tensor rwse_dense_reference(const Graph& graph, int steps) {
    const int n = graph.node_count();
    // Row-stochastic transition matrix D^-1 A; degree-0 rows stay zero.
    nd::Tensor m(n, n);
    for (int u = 0; u < n; ++u) {
        const auto& nbrs = graph.neighbors(u);
        if (nbrs.empty()) continue;
        const double share = 1.0 / static_cast<double>(nbrs.size());
        for (int w : nbrs) m.at(u, w) = share;
    }
    nd::Tensor power = m;
    nd::Tensor pe(n, steps);
    for (int k = 0; k < steps; ++k) {
        if (k > 0) {
            nd::Tensor nextp(n, n);
            for (int i = 0; i < n; ++i) {
                for (int kk = 0; kk < n; ++kk) {
                    const double a = power.at(i, kk);
                    if (a == 0.0) continue;
                    for (int j = 0; j < n; ++j) nextp.at(i, j) += a * m.at(kk, j);
                }
            }
            power = std::move(nextp);
        }
        for (int i = 0; i < n; ++i) pe.at(i, k) = power.at(i, i);
    }
    return pe;
}

std::string pathways_to_json(const PathwaySet& paths) {
    nlohmann::json j;
    j["walk_length"] = paths.walk_length;
    j["seed"] = paths.seed;
    nlohmann::json walks = nlohmann::json::array();
    for (const Pathway& p : paths.pathways) walks.push_back(p.nodes);
    j["pathways"] = walks;
    return j.dump(2) + "\n";
}

}  // namespace pathmamba
