#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pathmamba/tape.hpp"
#include "pathmamba/tensor.hpp"

using namespace pathmamba;
using nd::Tape;
using nd::Tensor;
using nd::Var;

TEST_CASE("tensor shape bookkeeping") {
    Tensor t(2, 3);
    CHECK(t.rows() == 2);
    CHECK(t.cols() == 3);
    CHECK(t.numel() == 6);
    CHECK(t.shape_str() == "(2x3)");
    CHECK_THROWS(Tensor(2, 3, {1.0, 2.0}));
}

TEST_CASE("closed-form activation values") {
    Tape tape;
    Var x = tape.input(Tensor(1, 3, {0.0, -3.0, 2.0}));
    CHECK(nd::softplus(x).value()[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(nd::sigmoid(x).value()[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(nd::relu(x).value()[1] == 0.0);
    CHECK(nd::relu(x).value()[2] == 2.0);
}

TEST_CASE("softplus and sigmoid stay finite in the tails") {
    Tape tape;
    Var x = tape.input(Tensor(1, 2, {800.0, -800.0}));
    const Tensor& sp = nd::softplus(x).value();
    CHECK(sp[0] == 800.0);
    CHECK(sp[1] == doctest::Approx(0.0));
    const Tensor& sg = nd::sigmoid(x).value();
    CHECK(sg[0] == doctest::Approx(1.0));
    CHECK(sg[1] == doctest::Approx(0.0));
}

TEST_CASE("cross-entropy of uniform logits is ln C") {
    Tape tape;
    Var logits = tape.input(Tensor(1, 2, {0.0, 0.0}));
    CHECK(nd::softmax_cross_entropy(logits, 0).value()[0] ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
    Var four = tape.input(Tensor(1, 4, {1.5, 1.5, 1.5, 1.5}));
    CHECK(nd::softmax_cross_entropy(four, 3).value()[0] ==
          doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("shape mismatches name both shapes") {
    Tape tape;
    Var a = tape.input(Tensor(2, 3));
    Var b = tape.input(Tensor(3, 2));
    CHECK_THROWS_WITH_AS(nd::add(a, b), doctest::Contains("(2x3)"), std::invalid_argument);
    CHECK_THROWS_AS(nd::matmul(a, a), std::invalid_argument);
    CHECK_THROWS_AS(nd::softmax_cross_entropy(a, 0), std::invalid_argument);
    CHECK_THROWS_AS(nd::softmax_cross_entropy(tape.input(Tensor(1, 2)), 5),
                    std::invalid_argument);
}

TEST_CASE("matmul forward matches a hand example") {
    Tape tape;
    Var a = tape.input(Tensor(2, 2, {1, 2, 3, 4}));
    Var b = tape.input(Tensor(2, 2, {5, 6, 7, 8}));
    const Tensor& c = nd::matmul(a, b).value();
    CHECK(c.at(0, 0) == 19);
    CHECK(c.at(0, 1) == 22);
    CHECK(c.at(1, 0) == 43);
    CHECK(c.at(1, 1) == 50);
}

TEST_CASE("concat, gather, scatter shapes and values") {
    Tape tape;
    Var a = tape.input(Tensor(2, 2, {1, 2, 3, 4}));
    Var b = tape.input(Tensor(2, 1, {9, 8}));
    const Tensor& cat = nd::concat_columns(a, b).value();
    CHECK(cat.cols() == 3);
    CHECK(cat.at(0, 2) == 9);

    const Tensor& g = nd::gather_rows(a, {1, 0, 1}).value();
    CHECK(g.rows() == 3);
    CHECK(g.at(0, 0) == 3);
    CHECK(g.at(2, 1) == 4);

    Var rows = tape.input(Tensor(2, 2, {1, 1, 2, 2}));
    const Tensor& sc = nd::scatter_rows(rows, {2, 0}, 3).value();
    CHECK(sc.at(0, 0) == 2);
    CHECK(sc.at(1, 0) == 0);
    CHECK(sc.at(2, 0) == 1);
    CHECK_THROWS_AS(nd::scatter_rows(rows, {0, 0}, 3), std::invalid_argument);
}

TEST_CASE("rowwise max pool takes columnwise maxima") {
    Tape tape;
    Var a = tape.input(Tensor(3, 2, {1, 5, 4, 2, 3, 3}));
    const Tensor& m = nd::rowwise_max_pool(a).value();
    CHECK(m.rows() == 1);
    CHECK(m.at(0, 0) == 4);
    CHECK(m.at(0, 1) == 5);
}

TEST_CASE("neighbor_sum aggregates along edges") {
    Graph path(3, {{0, 1}, {1, 2}});
    Tape tape;
    Var x = tape.input(Tensor(3, 1, {1.0, 10.0, 100.0}));
    const Tensor& s = nd::neighbor_sum(x, path).value();
    CHECK(s.at(0, 0) == 10.0);
    CHECK(s.at(1, 0) == 101.0);
    CHECK(s.at(2, 0) == 10.0);

    Var w = tape.input(Tensor(2, 1, {0.5, 2.0}));
    const Tensor& ws = nd::neighbor_sum(x, path, w).value();
    CHECK(ws.at(0, 0) == 5.0);
    CHECK(ws.at(1, 0) == 0.5 + 200.0);
    CHECK(ws.at(2, 0) == 20.0);
}

TEST_CASE("non-finite results are rejected with the op named") {
    Tape tape;
    Var big = tape.input(Tensor(1, 1, {1e308}));
    CHECK_THROWS_WITH_AS(nd::elementwise_mul(big, big), doctest::Contains("elementwise_mul"),
                         std::runtime_error);
}
