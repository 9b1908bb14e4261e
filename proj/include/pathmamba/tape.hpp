#pragma once

#include <deque>
#include <functional>
#include <vector>

#include "pathmamba/graph.hpp"
#include "pathmamba/tensor.hpp"

namespace pathmamba::nd {

class Tape;

// Handle to a node on a tape. Cheap to copy; the tape owns all storage.
struct Var {
    Tape* tape = nullptr;
    size_t id = 0;

    bool valid() const { return tape != nullptr; }
    const Tensor& value() const;
    int64_t rows() const { return value().rows(); }
    int64_t cols() const { return value().cols(); }
};

// Reverse-mode differentiation tape. Nodes are appended in forward order,
// which is already a topological order, so the backward pass is a single
// reverse sweep visiting each node exactly once. A tape is single-threaded;
// independent tapes (one per graph in a batch, one per fold) run in
// parallel without shared mutable state.
class Tape {
public:
    Var input(Tensor value, bool requires_grad = false);

    const Tensor& value(const Var& v) const { return nodes_[v.id].value; }
    Tensor& mutable_value(const Var& v) { return nodes_[v.id].value; }

    // Gradient of the last backward() target w.r.t. v. Zero tensor if the
    // node was never reached (unused parameters get zero gradient).
    Tensor grad(const Var& v) const;

    // Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse. `loss` must
    // be scalar.
    void backward(const Var& loss);

    size_t size() const { return nodes_.size(); }

    // --- used by op implementations ---
    Var make_node(const char* op_name, Tensor value,
                  std::function<void(Tape&)> backward_fn, bool requires_grad);
    bool grad_defined(size_t id) const { return !nodes_[id].grad.empty(); }
    const Tensor& grad_at(size_t id) const { return nodes_[id].grad; }
    // Accumulation target; allocates zeros on first touch.
    Tensor& grad_acc(size_t id);
    bool requires_grad(size_t id) const { return nodes_[id].requires_grad; }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::function<void(Tape&)> backward_fn;
        bool requires_grad = false;
    };
    // Deque keeps value/grad references stable while later ops append nodes.
    std::deque<Node> nodes_;
};

// ---- differentiable operations ----
// Shapes are checked up front; mismatches throw with both shapes named.
// Every op validates that its result is finite.

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var elementwise_mul(Var a, Var b);
Var add_scalar(Var a, double c);
Var scale(Var a, double c);
// c - a, elementwise.
Var rsub_const(double c, Var a);

Var matmul(Var a, Var b);

Var relu(Var a);
Var sigmoid(Var a);
Var softplus(Var a);

// out[i][k] = a[i][k] * col[i][0]   (col is Nx1)
Var mul_colvec(Var a, Var col);
// out[i][k] = a[i][k] * row[0][k]   (row is 1xK)
Var mul_rowvec(Var a, Var row);
// out[i][k] = a[i][k] + row[0][k]
Var add_rowvec(Var a, Var row);
// out[i][k] = col[i][0] * row[0][k]
Var outer(Var col, Var row);
// out = a * s where s is a 1x1 scalar variable.
Var mul_scalar_var(Var a, Var s);

Var concat_columns(Var a, Var b);
// out[m] = a[idx[m]]; rows may repeat, the adjoint scatter-adds.
Var gather_rows(Var a, std::vector<int64_t> idx);
// out[idx[m]] = a[m]; each target row written at most once, the rest zero.
Var scatter_rows(Var a, std::vector<int64_t> idx, int64_t out_rows);

// Column-wise max over rows -> 1xK. Gradient flows to the argmax entry of
// each column; ties break toward the lowest row index.
Var rowwise_max_pool(Var a);

Var sum_all(Var a);

// out[s] = log sum_{i in segments[s]} exp(a[i]) for a column vector `a`.
// Smooth maximum used by the mask training path; gradient spreads over each
// segment by softmax weight. Segments must be non-empty.
Var segment_logsumexp(Var a, std::vector<std::vector<int>> segments);

// Cross-entropy of softmax(logits) against `label`; logits is 1xC.
Var softmax_cross_entropy(Var logits, int label);

// out[i] = sum_{j in N(i)} w_ij * x[j], with w_ij taken from `edge_weights`
// (Ex1, aligned to graph.edges()). Pass an invalid Var for unit weights.
// This is the O(E d) aggregation used by the GIN layer; the dense-adjacency
// route is kept in tests as the reference.
Var neighbor_sum(Var x, const Graph& graph, Var edge_weights = {});

// Plain (non-tape) softmax of a 1xC tensor.
std::vector<double> softmax_values(const Tensor& logits);

}  // namespace pathmamba::nd
