#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pathmamba/pathsampler.hpp"
#include "pathmamba/rng.hpp"

using namespace pathmamba;

TEST_CASE("walk on a single edge is forced") {
    Graph k2(2, {{0, 1}});
    for (uint64_t seed : {1ull, 42ull, 999ull}) {
        PathwaySet set = sample_pathways(k2, 3, seed);
        CHECK(set.pathways[0].nodes == std::vector<int>{0, 1, 0, 1});
        CHECK(set.pathways[1].nodes == std::vector<int>{1, 0, 1, 0});
    }
}

TEST_CASE("walk length below one is rejected") {
    Graph k2(2, {{0, 1}});
    CHECK_THROWS_AS(sample_pathways(k2, 0, 1), std::invalid_argument);
}

TEST_CASE("identical inputs give identical pathway sets") {
    Graph tri(3, {{0, 1}, {1, 2}, {0, 2}});
    PathwaySet a = sample_pathways(tri, 8, 123);
    PathwaySet b = sample_pathways(tri, 8, 123);
    for (size_t i = 0; i < a.pathways.size(); ++i) {
        CHECK(a.pathways[i].nodes == b.pathways[i].nodes);
    }
}

TEST_CASE("first step on a triangle is uniform over both neighbors") {
    Graph tri(3, {{0, 1}, {1, 2}, {0, 2}});
    int to_1 = 0;
    const int trials = 10000;
    for (int seed = 0; seed < trials; ++seed) {
        PathwaySet set = sample_pathways(tri, 2, static_cast<uint64_t>(seed));
        if (set.pathways[0].nodes[1] == 1) ++to_1;
    }
    CHECK(std::abs(to_1 / static_cast<double>(trials) - 0.5) < 0.02);
}

TEST_CASE("walk steps always follow edges") {
    Rng rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Edge> edges;
        const int n = 10;
        for (int u = 0; u < n; ++u) {
            for (int v = u + 1; v < n; ++v) {
                if (rng.next_double() < 0.3) edges.push_back(Edge{u, v});
            }
        }
        PreprocessResult pre = preprocess_graph(n, edges);
        PathwaySet set = sample_pathways(pre.graph, 6, rng.next_u64());
        for (const Pathway& p : set.pathways) {
            for (size_t t = 1; t < p.nodes.size(); ++t) {
                CHECK(pre.graph.has_edge(p.nodes[t - 1], p.nodes[t]));
            }
        }
    }
}

TEST_CASE("stranded start nodes yield single-node walks") {
    Graph g(3, {{1, 2}});  // node 0 isolated (allowed outside preprocessing)
    PathwaySet set = sample_pathways(g, 4, 5);
    CHECK(set.pathways[0].nodes == std::vector<int>{0});
    CHECK(set.pathways[1].nodes.size() == 5);
}

TEST_CASE("rwse step one is zero without self-loops") {
    Graph tri(3, {{0, 1}, {1, 2}, {0, 2}});
    nd::Tensor pe = rwse(tri, 3);
    for (int v = 0; v < 3; ++v) CHECK(pe.at(v, 0) == 0.0);
}

TEST_CASE("rwse exact values on cycles") {
    Graph tri(3, {{0, 1}, {1, 2}, {0, 2}});
    nd::Tensor pe3 = rwse(tri, 3);
    for (int v = 0; v < 3; ++v) {
        CHECK(pe3.at(v, 1) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(pe3.at(v, 2) == doctest::Approx(0.25).epsilon(1e-12));
    }
    Graph hex(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}});
    nd::Tensor pe6 = rwse(hex, 3);
    for (int v = 0; v < 6; ++v) CHECK(pe6.at(v, 2) == 0.0);  // bipartite: odd return impossible
}

TEST_CASE("rwse separates the hexagon from two disjoint triangles") {
    Graph hex(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}});
    Graph two_tri(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
    nd::Tensor a = rwse(hex, 4);
    nd::Tensor b = rwse(two_tri, 4);
    // Both graphs are 2-regular (1-WL cannot tell them apart) but the k=3
    // return probabilities differ.
    CHECK(a.at(0, 2) == 0.0);
    CHECK(b.at(0, 2) == doctest::Approx(0.25));
}

TEST_CASE("rwse rows of automorphic nodes coincide") {
    Graph hex(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}});
    nd::Tensor pe = rwse(hex, 5);
    for (int v = 1; v < 6; ++v) {
        for (int k = 0; k < 5; ++k) CHECK(pe.at(v, k) == doctest::Approx(pe.at(0, k)).epsilon(1e-12));
    }
}

TEST_CASE("sparse rwse matches the dense matrix-power reference") {
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Edge> edges;
        const int n = 12;
        for (int u = 0; u < n; ++u) {
            for (int v = u + 1; v < n; ++v) {
                if (rng.next_double() < 0.3) edges.push_back(Edge{u, v});
            }
        }
        PreprocessResult pre = preprocess_graph(n, edges);
        nd::Tensor fast = rwse(pre.graph, 6);
        nd::Tensor slow = rwse_dense_reference(pre.graph, 6);
        for (int64_t i = 0; i < fast.numel(); ++i) {
            CHECK(std::abs(fast[i] - slow[i]) < 1e-12);
            CHECK(fast[i] >= 0.0);
            CHECK(fast[i] <= 1.0);
        }
    }
}

TEST_CASE("pathway set serializes to json") {
    Graph k2(2, {{0, 1}});
    PathwaySet set = sample_pathways(k2, 2, 9);
    std::string j = pathways_to_json(set);
    CHECK(j.find("\"walk_length\": 2") != std::string::npos);
    CHECK(j.find("pathways") != std::string::npos);
}
