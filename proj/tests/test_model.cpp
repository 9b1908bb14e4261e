#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pathmamba/dataset.hpp"
#include "pathmamba/model.hpp"
#include "pathmamba/rng.hpp"
#include "test_util.hpp"

using namespace pathmamba;
using nd::Tape;
using nd::Tensor;
using nd::Var;

namespace {

MambaParams make_mamba(int hidden, int d_state, uint64_t seed) {
    Rng rng(seed);
    MambaParams p;
    p.w_delta = testutil::random_tensor(hidden, 1, rng, 0.4);
    p.b_delta = testutil::random_tensor(1, 1, rng, 0.2);
    p.w_b = testutil::random_tensor(hidden, d_state, rng, 0.4);
    p.b_b = testutil::random_tensor(1, d_state, rng, 0.2);
    p.w_c = testutil::random_tensor(hidden, d_state, rng, 0.4);
    p.b_c = testutil::random_tensor(1, d_state, rng, 0.2);
    p.decay = testutil::random_tensor(1, d_state, rng, 0.3);
    p.out_proj = testutil::random_tensor(d_state, hidden, rng, 0.4);
    return p;
}

TapedMamba stage_mamba(Tape& tape, const MambaParams& p) {
    TapedMamba tm;
    tm.w_delta = tape.input(p.w_delta);
    tm.b_delta = tape.input(p.b_delta);
    tm.w_b = tape.input(p.w_b);
    tm.b_b = tape.input(p.b_b);
    tm.w_c = tape.input(p.w_c);
    tm.b_c = tape.input(p.b_c);
    tm.decay = tape.input(p.decay);
    tm.out_proj = tape.input(p.out_proj);
    return tm;
}

double softplus_ref(double x) { return x > 30 ? x : std::log1p(std::exp(x)); }

// Plain-double re-evaluation of the recurrence, independent of the tape.
std::vector<double> scan_reference(const Tensor& seq, const MambaParams& p) {
    const int64_t s = p.decay.cols();
    const int64_t h = seq.cols();
    std::vector<double> state(static_cast<size_t>(s), 0.0);
    std::vector<double> b(static_cast<size_t>(s));
    double delta = 0.0;
    for (int64_t t = 0; t < seq.rows(); ++t) {
        double pre = p.b_delta[0];
        for (int64_t j = 0; j < h; ++j) pre += seq.at(t, j) * p.w_delta[j];
        delta = softplus_ref(pre);
        for (int64_t k = 0; k < s; ++k) {
            double bk = p.b_b[k];
            for (int64_t j = 0; j < h; ++j) bk += seq.at(t, j) * p.w_b.at(j, k);
            b[static_cast<size_t>(k)] = bk;
            state[static_cast<size_t>(k)] =
                (1.0 - delta * p.decay[k]) * state[static_cast<size_t>(k)] + delta * bk;
        }
    }
    std::vector<double> out(static_cast<size_t>(h), 0.0);
    for (int64_t k = 0; k < s; ++k) {
        double ck = p.b_c[k];
        for (int64_t j = 0; j < h; ++j) ck += seq.at(seq.rows() - 1, j) * p.w_c.at(j, k);
        const double readout = ck * state[static_cast<size_t>(k)];
        for (int64_t j = 0; j < h; ++j) out[static_cast<size_t>(j)] += readout * p.out_proj.at(k, j);
    }
    return out;
}

}  // namespace

TEST_CASE("gin layer on a star matches the hand computation") {
    // K1,3: center 0 with feature 0, leaves with feature 1; eps=0, W=I.
    Graph star(4, {{0, 1}, {0, 2}, {0, 3}});
    Tape tape;
    Var x = tape.input(Tensor(4, 1, {0.0, 1.0, 1.0, 1.0}));
    Var w = tape.input(Tensor(1, 1, {1.0}));
    Var eps = tape.input(Tensor::scalar(0.0));
    const Tensor& out = gin_layer(tape, x, star, w, eps).value();
    CHECK(out.at(0, 0) == doctest::Approx(3.0));
    CHECK(out.at(1, 0) == doctest::Approx(1.0));
    CHECK(out.at(2, 0) == doctest::Approx(1.0));
    CHECK(out.at(3, 0) == doctest::Approx(1.0));
}

TEST_CASE("gin layer maps zero features to zero") {
    Graph tri(3, {{0, 1}, {1, 2}, {0, 2}});
    Tape tape;
    Var x = tape.input(Tensor(3, 2));
    Rng rng(3);
    Var w = tape.input(testutil::random_tensor(2, 2, rng));
    Var eps = tape.input(Tensor::scalar(0.5));
    const Tensor& out = gin_layer(tape, x, tri, w, eps).value();
    for (int64_t i = 0; i < out.numel(); ++i) CHECK(out[i] == 0.0);
}

TEST_CASE("gin layer is permutation equivariant") {
    Graph g(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 2}});
    const std::vector<int> perm{2, 0, 3, 1};  // new index of old node i
    std::vector<Edge> pedges;
    for (const Edge& e : g.edges()) pedges.push_back(Edge{perm[e.u], perm[e.v]});
    Graph pg(4, pedges);
    Rng rng(9);
    Tensor x0 = testutil::random_tensor(4, 3, rng);
    Tensor w0 = testutil::random_tensor(3, 3, rng);
    Tensor px0(4, 3);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 3; ++j) px0.at(perm[i], j) = x0.at(i, j);
    }
    Tape tape;
    Var eps = tape.input(Tensor::scalar(0.3));
    const Tensor& out = gin_layer(tape, tape.input(x0), g, tape.input(w0), eps).value();
    const Tensor& pout = gin_layer(tape, tape.input(px0), pg, tape.input(w0), eps).value();
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 3; ++j) {
            CHECK(out.at(i, j) == doctest::Approx(pout.at(perm[i], j)).epsilon(1e-12));
        }
    }
}

TEST_CASE("scan of zero input with zero biases is zero") {
    MambaParams p = make_mamba(3, 4, 1);
    p.b_delta.fill(0.0);
    p.b_b.fill(0.0);
    p.b_c.fill(0.0);
    Tape tape;
    Var seq = tape.input(Tensor(5, 3));
    const Tensor& out = mamba_scan(tape, seq, stage_mamba(tape, p)).value();
    for (int64_t i = 0; i < out.numel(); ++i) CHECK(out[i] == 0.0);
}

TEST_CASE("scan is memoryless when delta * decay is one") {
    // Constant delta: zero the delta projection and pick the bias; then
    // decay = 1/delta makes the forgetting term vanish.
    MambaParams p = make_mamba(3, 4, 2);
    p.w_delta.fill(0.0);
    p.b_delta[0] = 0.8;
    const double delta = softplus_ref(0.8);
    p.decay.fill(1.0 / delta);
    Rng rng(12);
    Tensor seq = testutil::random_tensor(6, 3, rng);
    Tape tape;
    const Tensor& out = mamba_scan(tape, tape.input(seq), stage_mamba(tape, p)).value();
    // Memoryless: h_last = delta * B_last, so only the last step matters.
    std::vector<double> expect(3, 0.0);
    for (int64_t k = 0; k < 4; ++k) {
        double bk = p.b_b[k], ck = p.b_c[k];
        for (int64_t j = 0; j < 3; ++j) {
            bk += seq.at(5, j) * p.w_b.at(j, k);
            ck += seq.at(5, j) * p.w_c.at(j, k);
        }
        for (int64_t j = 0; j < 3; ++j) expect[j] += ck * delta * bk * p.out_proj.at(k, j);
    }
    for (int64_t j = 0; j < 3; ++j) CHECK(out[j] == doctest::Approx(expect[j]).epsilon(1e-10));
}

TEST_CASE("scan matches the unrolled reference within 1e-10") {
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        MambaParams p = make_mamba(4, 3, seed);
        Rng rng(seed * 31);
        Tensor seq = testutil::random_tensor(5, 4, rng);
        Tape tape;
        const Tensor& out = mamba_scan(tape, tape.input(seq), stage_mamba(tape, p)).value();
        std::vector<double> ref = scan_reference(seq, p);
        for (int64_t j = 0; j < out.numel(); ++j) {
            CHECK(std::abs(out[j] - ref[static_cast<size_t>(j)]) < 1e-10);
        }
    }
}

TEST_CASE("batched global layer equals the walk-at-a-time reference") {
    Rng rng(17);
    Graph g(7, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {0, 6}, {1, 5}, {2, 6}});
    MambaParams p = make_mamba(4, 3, 5);
    Tensor x0 = testutil::random_tensor(7, 4, rng);
    PathwaySet paths = sample_pathways(g, 5, 77);

    Tape tape;
    Var x = tape.input(x0);
    TapedMamba tm = stage_mamba(tape, p);
    const Tensor& fast = global_layer(tape, x, g, paths, tm).value();
    const Tensor& ref = global_layer_reference(tape, x, g, paths, tm).value();
    REQUIRE(fast.numel() == ref.numel());
    for (int64_t i = 0; i < fast.numel(); ++i) CHECK(fast[i] == doctest::Approx(ref[i]).epsilon(1e-13));

    // And with soft edge weights (the explainer's masked route).
    Tensor w0(g.edge_count(), 1);
    for (int64_t i = 0; i < w0.numel(); ++i) w0[i] = 0.1 + 0.8 * rng.next_double();
    Var w = tape.input(w0);
    const Tensor& fast_w = global_layer(tape, x, g, paths, tm, w).value();
    const Tensor& ref_w = global_layer_reference(tape, x, g, paths, tm, w).value();
    for (int64_t i = 0; i < fast_w.numel(); ++i) {
        CHECK(fast_w[i] == doctest::Approx(ref_w[i]).epsilon(1e-13));
    }
}

TEST_CASE("global layer handles mixed walk lengths") {
    Graph g(4, {{1, 2}, {2, 3}});  // node 0 stranded
    MambaParams p = make_mamba(3, 2, 8);
    Rng rng(2);
    Tensor x0 = testutil::random_tensor(4, 3, rng);
    PathwaySet paths = sample_pathways(g, 3, 4);
    REQUIRE(paths.pathways[0].nodes.size() == 1);
    Tape tape;
    Var x = tape.input(x0);
    TapedMamba tm = stage_mamba(tape, p);
    const Tensor& fast = global_layer(tape, x, g, paths, tm).value();
    const Tensor& ref = global_layer_reference(tape, x, g, paths, tm).value();
    for (int64_t i = 0; i < fast.numel(); ++i) CHECK(fast[i] == doctest::Approx(ref[i]).epsilon(1e-13));
}

TEST_CASE("single-node pathway depends only on that node") {
    Graph g(2, {});  // both nodes stranded: walks are single nodes
    MambaParams p = make_mamba(3, 2, 3);
    Rng rng(6);
    Tensor a = testutil::random_tensor(2, 3, rng);
    Tensor b = a;
    b.at(1, 0) += 5.0;  // perturb the other node only
    PathwaySet paths = sample_pathways(g, 4, 9);
    Tape tape;
    TapedMamba tm = stage_mamba(tape, p);
    const Tensor& ra = global_layer(tape, tape.input(a), g, paths, tm).value();
    const Tensor& rb = global_layer(tape, tape.input(b), g, paths, tm).value();
    for (int64_t j = 0; j < 3; ++j) CHECK(ra.at(0, j) == rb.at(0, j));
}

TEST_CASE("identical features and walks give identical global rows") {
    // Nodes 0 and 3 start walks that traverse identical feature sequences.
    Graph g(4, {{0, 1}, {3, 1}, {1, 2}});
    MambaParams p = make_mamba(2, 3, 10);
    Tensor x0(4, 2, {1.0, 2.0, 0.5, -1.0, 3.0, 0.25, 1.0, 2.0});  // rows 0 and 3 equal
    PathwaySet paths;
    paths.walk_length = 2;
    paths.pathways.resize(4);
    paths.pathways[0].nodes = {0, 1, 2};
    paths.pathways[1].nodes = {1, 2, 1};
    paths.pathways[2].nodes = {2, 1, 0};
    paths.pathways[3].nodes = {3, 1, 2};  // same feature sequence as walk 0
    Tape tape;
    TapedMamba tm = stage_mamba(tape, p);
    const Tensor& out = global_layer(tape, tape.input(x0), g, paths, tm).value();
    for (int64_t j = 0; j < 2; ++j) CHECK(out.at(0, j) == out.at(3, j));
}

TEST_CASE("global layer keeps the N x hidden shape") {
    SyntheticSpec spec;
    spec.num_graphs_per_class = 1;
    spec.background_nodes = 32;
    spec.background_edge_prob = 0.2;
    spec.motif_length = 4;
    Dataset ds = generate_synthetic(spec, 5);
    const Graph& g = ds.graphs[0].graph;
    MambaParams p = make_mamba(6, 4, 4);
    Rng rng(8);
    Tensor x0 = testutil::random_tensor(g.node_count(), 6, rng);
    PathwaySet paths = sample_pathways(g, 8, 3);
    Tape tape;
    const Tensor& out = global_layer(tape, tape.input(x0), g, paths, stage_mamba(tape, p)).value();
    CHECK(out.rows() == g.node_count());
    CHECK(out.cols() == 6);
}

TEST_CASE("pathway/node count mismatch is rejected") {
    Graph g(3, {{0, 1}, {1, 2}});
    PathwaySet paths = sample_pathways(g, 2, 1);
    Graph bigger(4, {{0, 1}, {1, 2}, {2, 3}});
    MambaParams p = make_mamba(2, 2, 1);
    Tape tape;
    Var x = tape.input(Tensor(4, 2));
    CHECK_THROWS_AS(global_layer(tape, x, bigger, paths, stage_mamba(tape, p)),
                    std::invalid_argument);
}

namespace {

struct TinySetup {
    ModelConfig config;
    Model model;
    Graph graph;
    Tensor features;
    Tensor pe;
    PathwaySet paths;

    explicit TinySetup(uint64_t seed = 42, int n_layers = 1)
        : config{}, model{}, graph(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}, {1, 4}}) {
        config.num_layers = n_layers;
        config.hidden = 5;
        config.walk_length = 3;
        config.pe_steps = 2;
        config.d_state = 3;
        config.classes = 2;
        config.feature_dim = 3;
        model = init_model(config, seed);
        Rng rng(seed + 1);
        features = testutil::random_tensor(6, 3, rng);
        pe = rwse(graph, config.pe_steps);
        paths = sample_pathways(graph, config.walk_length, seed + 2);
    }

    ForwardInputs inputs() const {
        ForwardInputs in;
        in.graph = &graph;
        in.features = &features;
        in.pe = &pe;
        in.paths = &paths;
        return in;
    }
};

}  // namespace

TEST_CASE("layer with zero mlp weights is zero") {
    TinySetup s;
    Model m = s.model;
    m.layers[0].combine.w1.fill(0.0);
    m.layers[0].combine.b1.fill(0.0);
    m.layers[0].combine.w2.fill(0.0);
    m.layers[0].combine.b2.fill(0.0);
    Tape tape;
    TapedModel staged = stage_model(tape, m, false);
    Var x = tape.input(s.features);
    Var embedded = nd::matmul(nd::concat_columns(x, tape.input(s.pe)), staged.input_proj);
    const Tensor& out =
        pathmamba_layer(tape, embedded, s.graph, s.paths, staged.layers[0]).value();
    for (int64_t i = 0; i < out.numel(); ++i) CHECK(out[i] == 0.0);
}

TEST_CASE("zeroing the global output projection reduces the layer to MLP of GIN") {
    TinySetup s;
    Model m = s.model;
    m.layers[0].mamba.out_proj.fill(0.0);
    Tape tape;
    TapedModel staged = stage_model(tape, m, false);
    Var x = tape.input(s.features);
    Var embedded = nd::matmul(nd::concat_columns(x, tape.input(s.pe)), staged.input_proj);
    const Tensor& full =
        pathmamba_layer(tape, embedded, s.graph, s.paths, staged.layers[0]).value();

    const TapedLayer& tl = staged.layers[0];
    Var local = gin_layer(tape, embedded, s.graph, tl.gin_weight, tl.gin_epsilon);
    Var h = nd::relu(nd::add_rowvec(nd::matmul(local, tl.mlp_w1), tl.mlp_b1));
    const Tensor& gin_only = nd::add_rowvec(nd::matmul(h, tl.mlp_w2), tl.mlp_b2).value();
    for (int64_t i = 0; i < full.numel(); ++i) CHECK(full[i] == gin_only[i]);
}

TEST_CASE("readout on a single node is the identity pooling") {
    TinySetup s;
    Tape tape;
    TapedModel staged = stage_model(tape, s.model, false);
    Rng rng(5);
    Tensor row = testutil::random_tensor(1, 5, rng);
    Tensor repeated(3, 5);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 5; ++j) repeated.at(i, j) = row.at(0, j);
    }
    const Tensor& single = readout_logits(tape, tape.input(row), staged).value();
    const Tensor& multi = readout_logits(tape, tape.input(repeated), staged).value();
    for (int64_t i = 0; i < single.numel(); ++i) CHECK(single[i] == multi[i]);
}

TEST_CASE("duplicating the max row leaves readout probabilities unchanged") {
    TinySetup s;
    Tape tape;
    TapedModel staged = stage_model(tape, s.model, false);
    Rng rng(6);
    Tensor x = testutil::random_tensor(4, 5, rng);
    // Append a row that dominates every column, twice.
    Tensor big(5, 5), bigger(6, 5);
    for (int j = 0; j < 5; ++j) {
        double mx = x.at(0, j);
        for (int i = 1; i < 4; ++i) mx = std::max(mx, x.at(i, j));
        big.at(4, j) = mx + 1.0;
        bigger.at(4, j) = mx + 1.0;
        bigger.at(5, j) = mx + 1.0;
    }
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 5; ++j) {
            big.at(i, j) = x.at(i, j);
            bigger.at(i, j) = x.at(i, j);
        }
    }
    const Tensor& a = readout_logits(tape, tape.input(big), staged).value();
    const Tensor& b = readout_logits(tape, tape.input(bigger), staged).value();
    for (int64_t i = 0; i < a.numel(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("uniform logits give probability 1/C") {
    auto p = nd::softmax_values(Tensor(1, 4, {0.3, 0.3, 0.3, 0.3}));
    for (double v : p) CHECK(v == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("full model gradients match finite differences on a 6-node graph") {
    TinySetup s(7, 2);
    auto params = s.model.parameters();
    auto loss_fn = [&](const Model& m) {
        Tape tape;
        TapedModel staged = stage_model(tape, m, false);
        Var logits = model_logits(tape, m, staged, s.inputs());
        return nd::softmax_cross_entropy(logits, 1).value()[0];
    };
    Tape tape;
    TapedModel staged = stage_model(tape, s.model, true);
    Var logits = model_logits(tape, s.model, staged, s.inputs());
    Var loss = nd::softmax_cross_entropy(logits, 1);
    tape.backward(loss);

    double worst = 0.0;
    const double h = 1e-5;
    Model probe = s.model;
    auto probe_params = probe.parameters();
    for (size_t k = 0; k < params.size(); ++k) {
        Tensor analytic = tape.grad(staged.ordered[k]);
        Tensor* pt = probe_params[k].second;
        for (int64_t i = 0; i < pt->numel(); ++i) {
            const double orig = (*pt)[i];
            (*pt)[i] = orig + h;
            const double fp = loss_fn(probe);
            (*pt)[i] = orig - h;
            const double fm = loss_fn(probe);
            (*pt)[i] = orig;
            const double fd = (fp - fm) / (2 * h);
            const double ad = analytic[i];
            if (std::abs(fd - ad) < 1e-8) continue;
            worst = std::max(worst,
                             std::abs(fd - ad) / std::max({std::abs(fd), std::abs(ad), 1e-6}));
        }
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("probabilities sum to one") {
    TinySetup s;
    Prediction p = predict(s.model, s.graph, s.features, 99);
    double sum = 0.0;
    for (double v : p.probabilities) sum += v;
    CHECK(std::abs(sum - 1.0) < 1e-9);
}

TEST_CASE("prediction rejects mismatched feature dimensions") {
    TinySetup s;
    Tensor wrong(6, 2);
    CHECK_THROWS_AS(predict(s.model, s.graph, wrong, 1), std::invalid_argument);
}

TEST_CASE("node permutation with matched walks leaves probabilities unchanged") {
    TinySetup s;
    const std::vector<int> perm{3, 5, 0, 2, 4, 1};
    std::vector<Edge> pedges;
    for (const Edge& e : s.graph.edges()) pedges.push_back(Edge{perm[e.u], perm[e.v]});
    Graph pg(6, pedges);
    Tensor pfeat(6, 3);
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 3; ++j) pfeat.at(perm[i], j) = s.features.at(i, j);
    }
    Tensor ppe = rwse(pg, s.config.pe_steps);
    PathwaySet ppaths;
    ppaths.walk_length = s.paths.walk_length;
    ppaths.pathways.resize(6);
    for (int i = 0; i < 6; ++i) {
        for (int v : s.paths.pathways[i].nodes) {
            ppaths.pathways[perm[i]].nodes.push_back(perm[v]);
        }
    }
    Tape tape;
    TapedModel staged = stage_model(tape, s.model, false);
    Var base = model_logits(tape, s.model, staged, s.inputs());
    ForwardInputs pin;
    pin.graph = &pg;
    pin.features = &pfeat;
    pin.pe = &ppe;
    pin.paths = &ppaths;
    Var permuted = model_logits(tape, s.model, staged, pin);
    auto pa = nd::softmax_values(base.value());
    auto pb = nd::softmax_values(permuted.value());
    for (size_t c = 0; c < pa.size(); ++c) CHECK(pa[c] == doctest::Approx(pb[c]).epsilon(1e-9));
}

TEST_CASE("averaged prediction is deterministic and normalized") {
    TinySetup s;
    Prediction a = predict_averaged(s.model, s.graph, s.features, 11, 8);
    Prediction b = predict_averaged(s.model, s.graph, s.features, 11, 8);
    CHECK(a.probabilities == b.probabilities);
    double sum = 0.0;
    for (double v : a.probabilities) sum += v;
    CHECK(std::abs(sum - 1.0) < 1e-9);
}

TEST_CASE("input embedding follows the projection matrix") {
    Graph g(3, {{0, 1}, {1, 2}});
    Rng rng(14);
    Tensor feats = testutil::random_tensor(3, 4, rng);
    Tensor pe = rwse(g, 2);
    Tape tape;
    // Zero projection: embedding rows vanish.
    Var zero_proj = tape.input(Tensor(6, 5));
    Var x = nd::matmul(nd::concat_columns(tape.input(feats), tape.input(pe)), zero_proj);
    for (int64_t i = 0; i < x.value().numel(); ++i) CHECK(x.value()[i] == 0.0);
    // Identity projection without positional encoding: embedding equals input.
    Tensor eye(4, 4);
    for (int j = 0; j < 4; ++j) eye.at(j, j) = 1.0;
    Var same = nd::matmul(tape.input(feats), tape.input(eye));
    for (int64_t i = 0; i < feats.numel(); ++i) CHECK(same.value()[i] == feats[i]);
}

TEST_CASE("embedding output shape is N x hidden") {
    SyntheticSpec spec;
    spec.num_graphs_per_class = 1;
    spec.background_nodes = 32;
    spec.background_edge_prob = 0.2;
    spec.motif_length = 4;
    spec.feature_dim = 16;
    Dataset ds = generate_synthetic(spec, 2);
    const Graph& g = ds.graphs[0].graph;
    Tensor pe = rwse(g, 8);
    Rng rng(3);
    Tensor proj = testutil::random_tensor(16 + 8, 64, rng);
    Tape tape;
    Var x = nd::matmul(nd::concat_columns(tape.input(ds.graphs[0].features), tape.input(pe)),
                       tape.input(proj));
    CHECK(x.value().rows() == g.node_count());
    CHECK(x.value().cols() == 64);
}
