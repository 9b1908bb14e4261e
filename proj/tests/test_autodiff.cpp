#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "pathmamba/optimizer.hpp"
#include "pathmamba/rng.hpp"
#include "pathmamba/tape.hpp"
#include "test_util.hpp"

using namespace pathmamba;
using nd::Tape;
using nd::Tensor;
using nd::Var;

TEST_CASE("d/dx x*x at 3 is 6") {
    Tape tape;
    Var x = tape.input(Tensor::scalar(3.0), true);
    Var y = nd::elementwise_mul(x, x);
    tape.backward(y);
    CHECK(tape.grad(x)[0] == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("backward requires a scalar loss") {
    Tape tape;
    Var x = tape.input(Tensor(2, 2), true);
    CHECK_THROWS_AS(tape.backward(x), std::invalid_argument);
}

TEST_CASE("unused parameters receive zero gradient") {
    Tape tape;
    Var used = tape.input(Tensor::scalar(2.0), true);
    Var unused = tape.input(Tensor(3, 2), true);
    Var loss = nd::elementwise_mul(used, used);
    tape.backward(loss);
    Tensor g = tape.grad(unused);
    for (int64_t i = 0; i < g.numel(); ++i) CHECK(g[i] == 0.0);
}

namespace {

// Scalarizes op(x) by a fixed random projection so every output entry
// contributes to the finite-difference probe.
double fd_check_unary(const std::function<Var(Tape&, Var)>& op, int64_t rows, int64_t cols,
                      uint64_t seed) {
    Rng rng(seed);
    Tensor x0 = testutil::random_tensor(rows, cols, rng);
    Tape probe;
    Tensor w;
    {
        Var out = op(probe, probe.input(x0));
        w = testutil::random_tensor(out.value().rows(), out.value().cols(), rng);
    }
    auto f = [&](const std::vector<double>& flat) {
        Tape t;
        Var x = t.input(Tensor(rows, cols, flat));
        Var out = op(t, x);
        double s = 0.0;
        const Tensor& ov = out.value();
        for (int64_t i = 0; i < ov.numel(); ++i) s += ov[i] * w[i];
        return s;
    };
    Tape t;
    Var x = t.input(x0, true);
    Var out = op(t, x);
    Var loss = nd::sum_all(nd::elementwise_mul(out, t.input(w)));
    t.backward(loss);
    Tensor g = t.grad(x);
    return testutil::max_rel_grad_error(f, x0.values(),
                                        std::vector<double>(g.data(), g.data() + g.numel()));
}

}  // namespace

TEST_CASE("every differentiable op passes randomized finite differences") {
    // rel tol 1e-4, 10 seeds each.
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        CHECK(fd_check_unary([](Tape& t, Var x) { return nd::relu(x); }, 3, 4, seed) < 1e-4);
        CHECK(fd_check_unary([](Tape& t, Var x) { return nd::sigmoid(x); }, 3, 4, seed) < 1e-4);
        CHECK(fd_check_unary([](Tape& t, Var x) { return nd::softplus(x); }, 3, 4, seed) < 1e-4);
        CHECK(fd_check_unary([](Tape& t, Var x) { return nd::scale(nd::add_scalar(x, 0.7), -1.3); },
                             2, 5, seed) < 1e-4);
        CHECK(fd_check_unary([](Tape& t, Var x) { return nd::rsub_const(1.0, x); }, 2, 3, seed) <
              1e-4);
        CHECK(fd_check_unary(
                  [](Tape& t, Var x) {
                      Var w = t.input(Tensor(4, 3, {1, 2, 0, -1, 0.5, 1, 2, -2, 0.25, 1, 1, -1}));
                      return nd::matmul(x, w);
                  },
                  3, 4, seed) < 1e-4);
        CHECK(fd_check_unary(
                  [](Tape& t, Var x) {
                      Var both = nd::elementwise_mul(x, nd::add_scalar(x, 0.2));
                      return nd::concat_columns(both, x);
                  },
                  3, 2, seed) < 1e-4);
        CHECK(fd_check_unary([](Tape& t, Var x) { return nd::gather_rows(x, {2, 0, 2, 1}); }, 3, 3,
                             seed) < 1e-4);
        CHECK(fd_check_unary([](Tape& t, Var x) { return nd::scatter_rows(x, {2, 0, 3}, 5); }, 3, 2,
                             seed) < 1e-4);
        CHECK(fd_check_unary([](Tape& t, Var x) { return nd::rowwise_max_pool(x); }, 4, 3, seed) <
              1e-4);
        CHECK(fd_check_unary([](Tape& t, Var x) { return nd::sum_all(x); }, 3, 3, seed) < 1e-4);
        CHECK(fd_check_unary(
                  [](Tape& t, Var x) {
                      Var c = t.input(Tensor(3, 1, {0.5, -1.0, 2.0}));
                      return nd::mul_colvec(x, c);
                  },
                  3, 4, seed) < 1e-4);
        CHECK(fd_check_unary(
                  [](Tape& t, Var x) {
                      Var r = t.input(Tensor(1, 4, {0.5, -1.0, 2.0, 0.1}));
                      return nd::add_rowvec(nd::mul_rowvec(x, r), r);
                  },
                  3, 4, seed) < 1e-4);
        CHECK(fd_check_unary(
                  [](Tape& t, Var x) {
                      Var r = t.input(Tensor(1, 4, {0.5, -1.0, 2.0, 0.1}));
                      return nd::outer(x, r);
                  },
                  3, 1, seed) < 1e-4);
        CHECK(fd_check_unary(
                  [](Tape& t, Var x) {
                      Var s = t.input(Tensor::scalar(1.7));
                      return nd::mul_scalar_var(x, s);
                  },
                  2, 3, seed) < 1e-4);
        Graph tri(3, {{0, 1}, {1, 2}, {0, 2}});
        CHECK(fd_check_unary([&tri](Tape& t, Var x) { return nd::neighbor_sum(x, tri); }, 3, 2,
                             seed) < 1e-4);
        CHECK(fd_check_unary(
                  [&tri](Tape& t, Var x) {
                      Var w = t.input(Tensor(3, 1, {0.3, 0.9, 0.5}));
                      return nd::neighbor_sum(x, tri, w);
                  },
                  3, 2, seed) < 1e-4);
    }
}

TEST_CASE("cross-entropy gradient matches finite differences") {
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        Tensor x0 = testutil::random_tensor(1, 4, rng);
        auto f = [&](const std::vector<double>& flat) {
            Tape t;
            return nd::softmax_cross_entropy(t.input(Tensor(1, 4, flat)), 2).value()[0];
        };
        Tape t;
        Var x = t.input(x0, true);
        Var loss = nd::softmax_cross_entropy(x, 2);
        t.backward(loss);
        Tensor g = t.grad(x);
        CHECK(testutil::max_rel_grad_error(
                  f, x0.values(), std::vector<double>(g.data(), g.data() + g.numel())) < 1e-4);
    }
}

TEST_CASE("gradient of a matmul chain matches finite differences") {
    Rng rng(99);
    Tensor a0 = testutil::random_tensor(3, 4, rng);
    Tensor b0 = testutil::random_tensor(4, 2, rng);
    Tensor c0 = testutil::random_tensor(2, 3, rng);
    auto f = [&](const std::vector<double>& flat) {
        Tape t;
        Var a = t.input(Tensor(3, 4, flat));
        Var out = nd::matmul(nd::relu(nd::matmul(a, t.input(b0))), t.input(c0));
        return nd::sum_all(out).value()[0];
    };
    Tape t;
    Var a = t.input(a0, true);
    Var loss = nd::sum_all(nd::matmul(nd::relu(nd::matmul(a, t.input(b0))), t.input(c0)));
    t.backward(loss);
    Tensor g = t.grad(a);
    CHECK(testutil::max_rel_grad_error(f, a0.values(),
                                       std::vector<double>(g.data(), g.data() + g.numel())) <
          1e-4);
}

TEST_CASE("max pool routes gradient to the lowest tied row") {
    Tape tape;
    Var x = tape.input(Tensor(3, 1, {7.0, 7.0, 3.0}), true);
    tape.backward(nd::sum_all(nd::rowwise_max_pool(x)));
    Tensor g = tape.grad(x);
    CHECK(g[0] == 1.0);
    CHECK(g[1] == 0.0);
    CHECK(g[2] == 0.0);
}

TEST_CASE("backward twice on the same tape is reproducible") {
    Rng rng(5);
    Tensor x0 = testutil::random_tensor(3, 3, rng);
    auto run = [&]() {
        Tape t;
        Var x = t.input(x0, true);
        Var loss = nd::sum_all(nd::sigmoid(nd::matmul(x, x)));
        t.backward(loss);
        return t.grad(x);
    };
    Tensor g1 = run();
    Tensor g2 = run();
    for (int64_t i = 0; i < g1.numel(); ++i) CHECK(g1[i] == g2[i]);
}

TEST_CASE("sgd step follows the update rule") {
    nd::OptimizerConfig cfg;
    cfg.kind = nd::OptimizerKind::sgd;
    cfg.learning_rate = 0.1;
    cfg.weight_decay = 0.0;
    nd::Optimizer opt(cfg);
    Tensor p = Tensor::scalar(1.0);
    opt.step({&p}, {Tensor::scalar(1.0)});
    CHECK(p[0] == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("adam's first step moves by about lr regardless of gradient scale") {
    for (double g : {1.0, 1e-3, 1e3}) {
        nd::OptimizerConfig cfg;
        cfg.kind = nd::OptimizerKind::adam;
        cfg.learning_rate = 0.01;
        cfg.weight_decay = 0.0;
        nd::Optimizer opt(cfg);
        Tensor p = Tensor::scalar(0.0);
        opt.step({&p}, {Tensor::scalar(g)});
        CHECK(p[0] == doctest::Approx(-0.01).epsilon(1e-4));
    }
}

TEST_CASE("200 sgd steps minimize (p-2)^2") {
    nd::OptimizerConfig cfg;
    cfg.kind = nd::OptimizerKind::sgd;
    cfg.learning_rate = 0.1;
    cfg.weight_decay = 0.0;
    nd::Optimizer opt(cfg);
    Tensor p = Tensor::scalar(0.0);
    for (int i = 0; i < 200; ++i) {
        Tensor g = Tensor::scalar(2.0 * (p[0] - 2.0));
        opt.step({&p}, {g});
    }
    CHECK(std::abs(p[0] - 2.0) < 1e-3);
}

TEST_CASE("non-finite gradients abort the optimizer step") {
    nd::Optimizer opt(nd::OptimizerConfig{});
    Tensor p = Tensor::scalar(1.0);
    Tensor g = Tensor::scalar(std::numeric_limits<double>::quiet_NaN());
    CHECK_THROWS_AS(opt.step({&p}, {g}), std::runtime_error);
}
