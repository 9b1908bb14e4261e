#include "pathmamba/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pathmamba::nd {

namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_str() +
                                " vs " + b.shape_str());
}

void check_same_tape(const char* op, const Var& a, const Var& b) {
    if (a.tape != b.tape) {
        throw std::invalid_argument(std::string(op) + ": operands live on different tapes");
    }
}

double stable_softplus(double x) {
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

double stable_sigmoid(double x) {
    if (x >= 0.0) {
        double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

const Tensor& Var::value() const { return tape->value(*this); }

Var Tape::input(Tensor value, bool requires_grad) {
    return make_node("input", std::move(value), nullptr, requires_grad);
}

Var Tape::make_node(const char* op_name, Tensor value,
                    std::function<void(Tape&)> backward_fn, bool requires_grad) {
    if (!value.all_finite()) {
        throw std::runtime_error(std::string("non-finite result in op '") + op_name + "'");
    }
    Node node;
    node.value = std::move(value);
    node.backward_fn = std::move(backward_fn);
    node.requires_grad = requires_grad;
    nodes_.push_back(std::move(node));
    return Var{this, nodes_.size() - 1};
}

Tensor Tape::grad(const Var& v) const {
    const Node& n = nodes_[v.id];
    if (n.grad.empty()) return Tensor::zeros(n.value.rows(), n.value.cols());
    return n.grad;
}

Tensor& Tape::grad_acc(size_t id) {
    Node& n = nodes_[id];
    if (n.grad.empty()) n.grad = Tensor::zeros(n.value.rows(), n.value.cols());
    return n.grad;
}

void Tape::backward(const Var& loss) {
    if (loss.tape != this) throw std::invalid_argument("backward: loss from another tape");
    if (value(loss).numel() != 1) {
        throw std::invalid_argument("backward: loss must be scalar, got " +
                                    value(loss).shape_str());
    }
    for (Node& n : nodes_) n.grad = Tensor();
    grad_acc(loss.id)[0] = 1.0;
    for (size_t i = nodes_.size(); i-- > 0;) {
        Node& n = nodes_[i];
        if (n.backward_fn && !n.grad.empty()) n.backward_fn(*this);
    }
}

// ---- binary elementwise ----

Var add(Var a, Var b) {
    check_same_tape("add", a, b);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (!av.same_shape(bv)) shape_error("add", av, bv);
    Tensor out(av.rows(), av.cols());
    for (int64_t i = 0; i < av.numel(); ++i) out[i] = av[i] + bv[i];
    Tape* tape = a.tape;
    size_t aid = a.id, bid = b.id;
    size_t rid = tape->size();
    return tape->make_node("add", std::move(out), [aid, bid, rid](Tape& t) {
        const Tensor& g = t.grad_at(rid);
        Tensor& ga = t.grad_acc(aid);
        Tensor& gb = t.grad_acc(bid);
        for (int64_t i = 0; i < g.numel(); ++i) {
            ga[i] += g[i];
            gb[i] += g[i];
        }
    }, false);
}

Var sub(Var a, Var b) {
    check_same_tape("sub", a, b);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (!av.same_shape(bv)) shape_error("sub", av, bv);
    Tensor out(av.rows(), av.cols());
    for (int64_t i = 0; i < av.numel(); ++i) out[i] = av[i] - bv[i];
    Tape* tape = a.tape;
    size_t aid = a.id, bid = b.id;
    size_t rid = tape->size();
    return tape->make_node("sub", std::move(out), [aid, bid, rid](Tape& t) {
        const Tensor& g = t.grad_at(rid);
        Tensor& ga = t.grad_acc(aid);
        Tensor& gb = t.grad_acc(bid);
        for (int64_t i = 0; i < g.numel(); ++i) {
            ga[i] += g[i];
            gb[i] -= g[i];
        }
    }, false);
}

Var elementwise_mul(Var a, Var b) {
    check_same_tape("elementwise_mul", a, b);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (!av.same_shape(bv)) shape_error("elementwise_mul", av, bv);
    Tensor out(av.rows(), av.cols());
    for (int64_t i = 0; i < av.numel(); ++i) out[i] = av[i] * bv[i];
    Tape* tape = a.tape;
    size_t aid = a.id, bid = b.id;
    size_t rid = tape->size();
    return tape->make_node("elementwise_mul", std::move(out), [aid, bid, rid](Tape& t) {
        const Tensor& g = t.grad_at(rid);
        const Tensor& av = t.value(Var{&t, aid});
        const Tensor& bv = t.value(Var{&t, bid});
        Tensor& ga = t.grad_acc(aid);
        Tensor& gb = t.grad_acc(bid);
        for (int64_t i = 0; i < g.numel(); ++i) {
            ga[i] += g[i] * bv[i];
            gb[i] += g[i] * av[i];
        }
    }, false);
}

Var add_scalar(Var a, double c) {
    const Tensor& av = a.value();
    Tensor out(av.rows(), av.cols());
    for (int64_t i = 0; i < av.numel(); ++i) out[i] = av[i] + c;
    Tape* tape = a.tape;
    size_t aid = a.id;
    size_t rid = tape->size();
    return tape->make_node("add_scalar", std::move(out), [aid, rid](Tape& t) {
        const Tensor& g = t.grad_at(rid);
        Tensor& ga = t.grad_acc(aid);
        for (int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i];
    }, false);
}

Var scale(Var a, double c) {
    const Tensor& av = a.value();
    Tensor out(av.rows(), av.cols());
    for (int64_t i = 0; i < av.numel(); ++i) out[i] = av[i] * c;
    Tape* tape = a.tape;
    size_t aid = a.id;
    size_t rid = tape->size();
    return tape->make_node("scale", std::move(out), [aid, rid, c](Tape& t) {
        const Tensor& g = t.grad_at(rid);
        Tensor& ga = t.grad_acc(aid);
        for (int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * c;
    }, false);
}

Var rsub_const(double c, Var a) {
    const Tensor& av = a.value();
    Tensor out(av.rows(), av.cols());
    for (int64_t i = 0; i < av.numel(); ++i) out[i] = c - av[i];
    Tape* tape = a.tape;
    size_t aid = a.id;
    size_t rid = tape->size();
    return tape->make_node("rsub_const", std::move(out), [aid, rid](Tape& t) {
        const Tensor& g = t.grad_at(rid);
        Tensor& ga = t.grad_acc(aid);
        for (int64_t i = 0; i < g.numel(); ++i) ga[i] -= g[i];
    }, false);
}

// ---- matmul ----

Var matmul(Var a, Var b) {
    check_same_tape("matmul", a, b);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (av.cols() != bv.rows()) shape_error("matmul", av, bv);
    const int64_t m = av.rows(), k = av.cols(), n = bv.cols();
    Tensor out(m, n);
    for (int64_t i = 0; i < m; ++i) {
        double* orow = out.data() + i * n;
        const double* arow = av.data() + i * k;
        for (int64_t kk = 0; kk < k; ++kk) {
            const double aik = arow[kk];
            const double* brow = bv.data() + kk * n;
            for (int64_t j = 0; j < n; ++j) orow[j] += aik * brow[j];
        }
    }
    Tape* tape = a.tape;
    size_t aid = a.id, bid = b.id;
    size_t rid = tape->size();
    return tape->make_node("matmul", std::move(out), [aid, bid, rid, m, k, n](Tape& t) {
        const Tensor& g = t.grad_at(rid);
        const Tensor& av = t.value(Var{&t, aid});
        const Tensor& bv = t.value(Var{&t, bid});
        Tensor& ga = t.grad_acc(aid);  // dA = G * B^T
        Tensor& gb = t.grad_acc(bid);  // dB = A^T * G
        for (int64_t i = 0; i < m; ++i) {
            const double* grow = g.data() + i * n;
            double* garow = ga.data() + i * k;
            for (int64_t kk = 0; kk < k; ++kk) {
                const double* brow = bv.data() + kk * n;
                double acc = 0.0;
                for (int64_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
                garow[kk] += acc;
            }
        }
        for (int64_t kk = 0; kk < k; ++kk) {
            double* gbrow = gb.data() + kk * n;
            for (int64_t i = 0; i < m; ++i) {
                const double aik = av.data()[i * k + kk];
                const double* grow = g.data() + i * n;
                for (int64_t j = 0; j < n; ++j) gbrow[j] += aik * grow[j];
            }
        }
    }, false);
}

// ---- activations ----

Var relu(Var a) {
    const Tensor& av = a.value();
    Tensor out(av.rows(), av.cols());
    for (int64_t i = 0; i < av.numel(); ++i) out[i] = av[i] > 0.0 ? av[i] : 0.0;
    Tape* tape = a.tape;
    size_t aid = a.id;
    size_t rid = tape->size();
    return tape->make_node("relu", std::move(out), [aid, rid](Tape& t) {
        const Tensor& g = t.grad_at(rid);
        const Tensor& av = t.value(Var{&t, aid});
        Tensor& ga = t.grad_acc(aid);
        for (int64_t i = 0; i < g.numel(); ++i) {
            if (av[i] > 0.0) ga[i] += g[i];
        }
    }, false);
}

Var sigmoid(Var a) {
    const Tensor& av = a.value();
    Tensor out(av.rows(), av.cols());
    for (int64_t i = 0; i < av.numel(); ++i) out[i] = stable_sigmoid(av[i]);
    Tape* tape = a.tape;
    size_t aid = a.id;
    size_t rid = tape->size();
    return tape->make_node("sigmoid", std::move(out), [aid, rid](Tape& t) {
        const Tensor& g = t.grad_at(rid);
        const Tensor& ov = t.value(Var{&t, rid});
        Tensor& ga = t.grad_acc(aid);
        for (int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * ov[i] * (1.0 - ov[i]);
    }, false);
}

Var softplus(Var a) {
    const Tensor& av = a.value();
    Tensor out(av.rows(), av.cols());
    for (int64_t i = 0; i < av.numel(); ++i) out[i] = stable_softplus(av[i]);
    Tape* tape = a.tape;
    size_t aid = a.id;
    size_t rid = tape->size();
    return tape->make_node("softplus", std::move(out), [aid, rid](Tape& t) {
        const Tensor& g = t.grad_at(rid);
        const Tensor& av = t.value(Var{&t, aid});
        Tensor& ga = t.grad_acc(aid);
        for (int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * stable_sigmoid(av[i]);
    }, false);
}

// ---- broadcasting ----

Var mul_colvec(Var a, Var col) {
    check_same_tape("mul_colvec", a, col);
    const Tensor& av = a.value();
    const Tensor& cv = col.value();
    if (cv.cols() != 1 || cv.rows() != av.rows()) shape_error("mul_colvec", av, cv);
    Tensor out(av.rows(), av.cols());
    for (int64_t i = 0; i < av.rows(); ++i) {
        for (int64_t j = 0; j < av.cols(); ++j) out.at(i, j) = av.at(i, j) * cv[i];
    }
    Tape* tape = a.tape;
    size_t aid = a.id, cid = col.id;
    size_t rid = tape->size();
    return tape->make_node("mul_colvec", std::move(out), [aid, cid, rid](Tape& t) {
        const Tensor& g = t.grad_at(rid);
        const Tensor& av = t.value(Var{&t, aid});
        const Tensor& cv = t.value(Var{&t, cid});
        Tensor& ga = t.grad_acc(aid);
        Tensor& gc = t.grad_acc(cid);
        for (int64_t i = 0; i < av.rows(); ++i) {
            double acc = 0.0;
            for (int64_t j = 0; j < av.cols(); ++j) {
                ga.at(i, j) += g.at(i, j) * cv[i];
                acc += g.at(i, j) * av.at(i, j);
            }
            gc[i] += acc;
        }
    }, false);
}

Var mul_rowvec(Var a, Var row) {
    check_same_tape("mul_rowvec", a, row);
    const Tensor& av = a.value();
    const Tensor& rv = row.value();
    if (rv.rows() != 1 || rv.cols() != av.cols()) shape_error("mul_rowvec", av, rv);
    Tensor out(av.rows(), av.cols());
    for (int64_t i = 0; i < av.rows(); ++i) {
        for (int64_t j = 0; j < av.cols(); ++j) out.at(i, j) = av.at(i, j) * rv[j];
    }
    Tape* tape = a.tape;
    size_t aid = a.id, rowid = row.id;
    size_t rid = tape->size();
    return tape->make_node("mul_rowvec", std::move(out), [aid, rowid, rid](Tape& t) {
        const Tensor& g = t.grad_at(rid);
        const Tensor& av = t.value(Var{&t, aid});
        const Tensor& rv = t.value(Var{&t, rowid});
        Tensor& ga = t.grad_acc(aid);
        Tensor& gr = t.grad_acc(rowid);
        for (int64_t i = 0; i < av.rows(); ++i) {
            for (int64_t j = 0; j < av.cols(); ++j) {
                ga.at(i, j) += g.at(i, j) * rv[j];
                gr[j] += g.at(i, j) * av.at(i, j);
            }
        }
    }, false);
}

Var add_rowvec(Var a, Var row) {
    check_same_tape("add_rowvec", a, row);
    const Tensor& av = a.value();
    const Tensor& rv = row.value();
    if (rv.rows() != 1 || rv.cols() != av.cols()) shape_error("add_rowvec", av, rv);
    Tensor out(av.rows(), av.cols());
    for (int64_t i = 0; i < av.rows(); ++i) {
        for (int64_t j = 0; j < av.cols(); ++j) out.at(i, j) = av.at(i, j) + rv[j];
    }
    Tape* tape = a.tape;
    size_t aid = a.id, rowid = row.id;
    size_t rid = tape->size();
    return tape->make_node("add_rowvec", std::move(out), [aid, rowid, rid](Tape& t) {
        const Tensor& g = t.grad_at(rid);
        Tensor& ga = t.grad_acc(aid);
        Tensor& gr = t.grad_acc(rowid);
        for (int64_t i = 0; i < g.rows(); ++i) {
            for (int64_t j = 0; j < g.cols(); ++j) {
                ga.at(i, j) += g.at(i, j);
                gr[j] += g.at(i, j);
            }
        }
    }, false);
}

Var outer(Var col, Var row) {
    check_same_tape("outer", col, row);
    const Tensor& cv = col.value();
    const Tensor& rv = row.value();
    if (cv.cols() != 1 || rv.rows() != 1) shape_error("outer", cv, rv);
    Tensor out(cv.rows(), rv.cols());
    for (int64_t i = 0; i < cv.rows(); ++i) {
        for (int64_t j = 0; j < rv.cols(); ++j) out.at(i, j) = cv[i] * rv[j];
    }
    Tape* tape = col.tape;
    size_t cid = col.id, rowid = row.id;
    size_t rid = tape->size();
    return tape->make_node("outer", std::move(out), [cid, rowid, rid](Tape& t) {
        const Tensor& g = t.grad_at(rid);
        const Tensor& cv = t.value(Var{&t, cid});
        const Tensor& rv = t.value(Var{&t, rowid});
        Tensor& gc = t.grad_acc(cid);
        Tensor& gr = t.grad_acc(rowid);
        for (int64_t i = 0; i < g.rows(); ++i) {
            double acc = 0.0;
            for (int64_t j = 0; j < g.cols(); ++j) {
                acc += g.at(i, j) * rv[j];
                gr[j] += g.at(i, j) * cv[i];
            }
            gc[i] += acc;
        }
    }, false);
}

Var mul_scalar_var(Var a, Var s) {
    check_same_tape("mul_scalar_var", a, s);
    const Tensor& av = a.value();
    const Tensor& sv = s.value();
    if (sv.numel() != 1) shape_error("mul_scalar_var", av, sv);
    const double sval = sv[0];
    Tensor out(av.rows(), av.cols());
    for (int64_t i = 0; i < av.numel(); ++i) out[i] = av[i] * sval;
    Tape* tape = a.tape;
    size_t aid = a.id, sid = s.id;
    size_t rid = tape->size();
    return tape->make_node("mul_scalar_var", std::move(out), [aid, sid, rid](Tape& t) {
        const Tensor& g = t.grad_at(rid);
        const Tensor& av = t.value(Var{&t, aid});
        const double sval = t.value(Var{&t, sid})[0];
        Tensor& ga = t.grad_acc(aid);
        Tensor& gs = t.grad_acc(sid);
        double acc = 0.0;
        for (int64_t i = 0; i < g.numel(); ++i) {
            ga[i] += g[i] * sval;
            acc += g[i] * av[i];
        }
        gs[0] += acc;
    }, false);
}

// ---- structural ----

Var concat_columns(Var a, Var b) {
    check_same_tape("concat_columns", a, b);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (av.rows() != bv.rows()) shape_error("concat_columns", av, bv);
    const int64_t ac = av.cols(), bc = bv.cols();
    Tensor out(av.rows(), ac + bc);
    for (int64_t i = 0; i < av.rows(); ++i) {
        for (int64_t j = 0; j < ac; ++j) out.at(i, j) = av.at(i, j);
        for (int64_t j = 0; j < bc; ++j) out.at(i, ac + j) = bv.at(i, j);
    }
    Tape* tape = a.tape;
    size_t aid = a.id, bid = b.id;
    size_t rid = tape->size();
    return tape->make_node("concat_columns", std::move(out), [aid, bid, rid, ac, bc](Tape& t) {
        const Tensor& g = t.grad_at(rid);
        Tensor& ga = t.grad_acc(aid);
        Tensor& gb = t.grad_acc(bid);
        for (int64_t i = 0; i < g.rows(); ++i) {
            for (int64_t j = 0; j < ac; ++j) ga.at(i, j) += g.at(i, j);
            for (int64_t j = 0; j < bc; ++j) gb.at(i, j) += g.at(i, ac + j);
        }
    }, false);
}

Var gather_rows(Var a, std::vector<int64_t> idx) {
    const Tensor& av = a.value();
    for (int64_t i : idx) {
        if (i < 0 || i >= av.rows()) {
            throw std::out_of_range("gather_rows: index " + std::to_string(i) +
                                    " out of range for " + av.shape_str());
        }
    }
    Tensor out(static_cast<int64_t>(idx.size()), av.cols());
    for (size_t m = 0; m < idx.size(); ++m) {
        for (int64_t j = 0; j < av.cols(); ++j) {
            out.at(static_cast<int64_t>(m), j) = av.at(idx[m], j);
        }
    }
    Tape* tape = a.tape;
    size_t aid = a.id;
    size_t rid = tape->size();
    return tape->make_node("gather_rows", std::move(out),
                           [aid, rid, idx = std::move(idx)](Tape& t) {
        const Tensor& g = t.grad_at(rid);
        Tensor& ga = t.grad_acc(aid);
        for (size_t m = 0; m < idx.size(); ++m) {
            for (int64_t j = 0; j < g.cols(); ++j) {
                ga.at(idx[m], j) += g.at(static_cast<int64_t>(m), j);
            }
        }
    }, false);
}

Var scatter_rows(Var a, std::vector<int64_t> idx, int64_t out_rows) {
    const Tensor& av = a.value();
    if (static_cast<int64_t>(idx.size()) != av.rows()) {
        throw std::invalid_argument("scatter_rows: index count " + std::to_string(idx.size()) +
                                    " does not match rows of " + av.shape_str());
    }
    std::vector<bool> seen(static_cast<size_t>(out_rows), false);
    for (int64_t i : idx) {
        if (i < 0 || i >= out_rows || seen[static_cast<size_t>(i)]) {
            throw std::invalid_argument("scatter_rows: indices must hit each target row at most once");
        }
        seen[static_cast<size_t>(i)] = true;
    }
    // Rows not mentioned stay zero.
    Tensor out(out_rows, av.cols());
    for (size_t m = 0; m < idx.size(); ++m) {
        for (int64_t j = 0; j < av.cols(); ++j) {
            out.at(idx[m], j) = av.at(static_cast<int64_t>(m), j);
        }
    }
    Tape* tape = a.tape;
    size_t aid = a.id;
    size_t rid = tape->size();
    return tape->make_node("scatter_rows", std::move(out),
                           [aid, rid, idx = std::move(idx)](Tape& t) {
        const Tensor& g = t.grad_at(rid);
        Tensor& ga = t.grad_acc(aid);
        for (size_t m = 0; m < idx.size(); ++m) {
            for (int64_t j = 0; j < g.cols(); ++j) {
                ga.at(static_cast<int64_t>(m), j) += g.at(idx[m], j);
            }
        }
    }, false);
}

Var rowwise_max_pool(Var a) {
    const Tensor& av = a.value();
    if (av.rows() < 1) {
        throw std::invalid_argument("rowwise_max_pool: needs at least one row");
    }
    Tensor out(1, av.cols());
    std::vector<int64_t> argmax(static_cast<size_t>(av.cols()), 0);
    for (int64_t j = 0; j < av.cols(); ++j) {
        double best = av.at(0, j);
        int64_t best_i = 0;
        for (int64_t i = 1; i < av.rows(); ++i) {
            if (av.at(i, j) > best) {  // strict: ties keep the lowest row
                best = av.at(i, j);
                best_i = i;
            }
        }
        out.at(0, j) = best;
        argmax[static_cast<size_t>(j)] = best_i;
    }
    Tape* tape = a.tape;
    size_t aid = a.id;
    size_t rid = tape->size();
    return tape->make_node("rowwise_max_pool", std::move(out),
                           [aid, rid, argmax = std::move(argmax)](Tape& t) {
        const Tensor& g = t.grad_at(rid);
        Tensor& ga = t.grad_acc(aid);
        for (int64_t j = 0; j < g.cols(); ++j) {
            ga.at(argmax[static_cast<size_t>(j)], j) += g.at(0, j);
        }
    }, false);
}

Var sum_all(Var a) {
    const Tensor& av = a.value();
    double s = 0.0;
    for (int64_t i = 0; i < av.numel(); ++i) s += av[i];
    Tape* tape = a.tape;
    size_t aid = a.id;
    size_t rid = tape->size();
    return tape->make_node("sum_all", Tensor::scalar(s), [aid, rid](Tape& t) {
        const double g = t.grad_at(rid)[0];
        Tensor& ga = t.grad_acc(aid);
        for (int64_t i = 0; i < ga.numel(); ++i) ga[i] += g;
    }, false);
}

Var segment_logsumexp(Var a, std::vector<std::vector<int>> segments) {
    const Tensor& av = a.value();
    if (av.cols() != 1) {
        throw std::invalid_argument("segment_logsumexp: expects a column vector, got " +
                                    av.shape_str());
    }
    Tensor out(static_cast<int64_t>(segments.size()), 1);
    for (size_t s = 0; s < segments.size(); ++s) {
        const auto& seg = segments[s];
        if (seg.empty()) throw std::invalid_argument("segment_logsumexp: empty segment");
        double m = av[seg.front()];
        for (int i : seg) m = std::max(m, av[i]);
        double sum = 0.0;
        for (int i : seg) sum += std::exp(av[i] - m);
        out[static_cast<int64_t>(s)] = m + std::log(sum);
    }
    Tape* tape = a.tape;
    size_t aid = a.id;
    size_t rid = tape->size();
    return tape->make_node("segment_logsumexp", std::move(out),
                           [aid, rid, segments = std::move(segments)](Tape& t) {
        const Tensor& g = t.grad_at(rid);
        const Tensor& av = t.value(Var{&t, aid});
        const Tensor& ov = t.value(Var{&t, rid});
        Tensor& ga = t.grad_acc(aid);
        for (size_t s = 0; s < segments.size(); ++s) {
            const double gs = g[static_cast<int64_t>(s)];
            if (gs == 0.0) continue;
            const double lse = ov[static_cast<int64_t>(s)];
            for (int i : segments[s]) ga[i] += gs * std::exp(av[i] - lse);
        }
    }, false);
}

Var softmax_cross_entropy(Var logits, int label) {
    const Tensor& lv = logits.value();
    if (lv.rows() != 1) {
        throw std::invalid_argument("softmax_cross_entropy: logits must be 1xC, got " +
                                    lv.shape_str());
    }
    if (label < 0 || label >= lv.cols()) {
        throw std::invalid_argument("softmax_cross_entropy: label " + std::to_string(label) +
                                    " out of range for C=" + std::to_string(lv.cols()));
    }
    double maxv = lv[0];
    for (int64_t j = 1; j < lv.cols(); ++j) maxv = std::max(maxv, lv[j]);
    double lse = 0.0;
    for (int64_t j = 0; j < lv.cols(); ++j) lse += std::exp(lv[j] - maxv);
    lse = std::log(lse) + maxv;
    const double loss = lse - lv[label];
    Tape* tape = logits.tape;
    size_t lid = logits.id;
    size_t rid = tape->size();
    return tape->make_node("softmax_cross_entropy", Tensor::scalar(loss),
                           [lid, rid, label, lse](Tape& t) {
        const double g = t.grad_at(rid)[0];
        const Tensor& lv = t.value(Var{&t, lid});
        Tensor& gl = t.grad_acc(lid);
        for (int64_t j = 0; j < lv.cols(); ++j) {
            double p = std::exp(lv[j] - lse);
            gl[j] += g * (p - (j == label ? 1.0 : 0.0));
        }
    }, false);
}

Var neighbor_sum(Var x, const Graph& graph, Var edge_weights) {
    const Tensor& xv = x.value();
    if (xv.rows() != graph.node_count()) {
        throw std::invalid_argument("neighbor_sum: feature rows " + std::to_string(xv.rows()) +
                                    " != node count " + std::to_string(graph.node_count()));
    }
    const bool weighted = edge_weights.valid();
    if (weighted) {
        check_same_tape("neighbor_sum", x, edge_weights);
        const Tensor& wv = edge_weights.value();
        if (wv.rows() != graph.edge_count() || wv.cols() != 1) {
            throw std::invalid_argument("neighbor_sum: edge weights " + wv.shape_str() +
                                        " do not match edge count " +
                                        std::to_string(graph.edge_count()));
        }
    }
    const int64_t d = xv.cols();
    Tensor out(xv.rows(), d);
    const Tensor* wv = weighted ? &edge_weights.value() : nullptr;
    for (int e = 0; e < graph.edge_count(); ++e) {
        const Edge& ed = graph.edges()[static_cast<size_t>(e)];
        const double w = wv ? (*wv)[e] : 1.0;
        for (int64_t j = 0; j < d; ++j) {
            out.at(ed.u, j) += w * xv.at(ed.v, j);
            out.at(ed.v, j) += w * xv.at(ed.u, j);
        }
    }
    Tape* tape = x.tape;
    size_t xid = x.id;
    size_t wid = weighted ? edge_weights.id : 0;
    size_t rid = tape->size();
    // Copy of the edge list so the closure does not dangle if the graph dies.
    std::vector<Edge> edges = graph.edges();
    return tape->make_node("neighbor_sum", std::move(out),
                           [xid, wid, rid, weighted, edges = std::move(edges), d](Tape& t) {
        const Tensor& g = t.grad_at(rid);
        const Tensor& xv = t.value(Var{&t, xid});
        Tensor& gx = t.grad_acc(xid);
        Tensor* gw = weighted ? &t.grad_acc(wid) : nullptr;
        const Tensor* wv = weighted ? &t.value(Var{&t, wid}) : nullptr;
        for (size_t e = 0; e < edges.size(); ++e) {
            const Edge& ed = edges[e];
            const double w = wv ? (*wv)[static_cast<int64_t>(e)] : 1.0;
            double wacc = 0.0;
            for (int64_t j = 0; j < d; ++j) {
                gx.at(ed.v, j) += w * g.at(ed.u, j);
                gx.at(ed.u, j) += w * g.at(ed.v, j);
                if (gw) {
                    wacc += g.at(ed.u, j) * xv.at(ed.v, j) + g.at(ed.v, j) * xv.at(ed.u, j);
                }
            }
            if (gw) (*gw)[static_cast<int64_t>(e)] += wacc;
        }
    }, false);
}

std::vector<double> softmax_values(const Tensor& logits) {
    std::vector<double> p(static_cast<size_t>(logits.numel()));
    double maxv = logits[0];
    for (int64_t j = 1; j < logits.numel(); ++j) maxv = std::max(maxv, logits[j]);
    double z = 0.0;
    for (int64_t j = 0; j < logits.numel(); ++j) {
        p[static_cast<size_t>(j)] = std::exp(logits[j] - maxv);
        z += p[static_cast<size_t>(j)];
    }
    for (double& v : p) v /= z;
    return p;
}

}  // namespace pathmamba::nd
