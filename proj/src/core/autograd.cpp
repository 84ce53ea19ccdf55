#include "autograd.hpp"

#include <cmath>
#include <stdexcept>

namespace aka {

double softplus(double x) {
    // ln(1 + e^x) without overflow
    if (x > 35.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double logistic(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

void softmax_row_inplace(double* row, int n) {
    double m = row[0];
    for (int i = 1; i < n; ++i) m = std::max(m, row[i]);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        row[i] = std::exp(row[i] - m);
        s += row[i];
    }
    for (int i = 0; i < n; ++i) row[i] /= s;
}

Var Tape::push(Matrix value, bool requires_grad,
               std::function<void(Tape&, const Matrix&)> backward_fn) {
    nodes_.push_back(Node{std::move(value), Matrix(), requires_grad, std::move(backward_fn)});
    return Var{static_cast<int>(nodes_.size()) - 1};
}

bool Tape::any_requires(std::initializer_list<Var> vs) const {
    for (Var v : vs)
        if (node(v.id).requires_grad) return true;
    return false;
}

Var Tape::leaf(Matrix value, bool requires_grad) {
    return push(std::move(value), requires_grad, nullptr);
}

Var Tape::scalar(double v, bool requires_grad) {
    Matrix m(1, 1);
    m(0, 0) = v;
    return push(std::move(m), requires_grad, nullptr);
}

Var Tape::detach(Var v) { return push(node(v.id).value, false, nullptr); }

double Tape::scalar_value(Var v) const {
    const Matrix& m = node(v.id).value;
    if (m.rows() != 1 || m.cols() != 1)
        throw std::invalid_argument("scalar_value: node is not 1x1");
    return m(0, 0);
}

Matrix Tape::grad(Var v) const {
    const Node& n = node(v.id);
    if (n.grad.empty()) return Matrix(n.value.rows(), n.value.cols());
    return n.grad;
}

void Tape::zero_grad() {
    for (Node& n : nodes_) n.grad = Matrix();
}

void Tape::accumulate_grad(Var v, const Matrix& g) {
    Node& n = node(v.id);
    if (!n.requires_grad) return;
    if (n.grad.empty()) {
        n.grad = g;
    } else {
        for (size_t i = 0; i < n.grad.size(); ++i) n.grad.raw()[i] += g.raw()[i];
    }
}

void Tape::backward(Var loss) {
    const Node& l = node(loss.id);
    if (l.value.rows() != 1 || l.value.cols() != 1)
        throw std::invalid_argument("backward: loss must be scalar (1x1)");
    zero_grad();
    Matrix one(1, 1);
    one(0, 0) = 1.0;
    node(loss.id).grad = one;
    for (int id = loss.id; id >= 0; --id) {
        Node& n = node(id);
        if (!n.requires_grad || n.grad.empty() || !n.backward_fn) continue;
        n.backward_fn(*this, n.grad);
    }
}

Var Tape::custom(std::vector<Var> parents, Matrix value,
                 std::function<void(Tape&, const Matrix&)> backward) {
    bool req = false;
    for (Var p : parents) req = req || node(p.id).requires_grad;
    return push(std::move(value), req, req ? std::move(backward) : nullptr);
}

// --- primitives --------------------------------------------------------------

Var Tape::matmul(Var a, Var b) {
    Matrix out = aka::matmul(node(a.id).value, node(b.id).value);
    const bool req = any_requires({a, b});
    return push(std::move(out), req, [a, b](Tape& t, const Matrix& g) {
        const Matrix& av = t.value(a);
        const Matrix& bv = t.value(b);
        if (t.requires_grad(a)) t.accumulate_grad(a, aka::matmul(g, bv.transposed()));
        if (t.requires_grad(b)) t.accumulate_grad(b, aka::matmul(av.transposed(), g));
    });
}

Var Tape::add(Var a, Var b) {
    Matrix out = aka::add(node(a.id).value, node(b.id).value);
    return push(std::move(out), any_requires({a, b}), [a, b](Tape& t, const Matrix& g) {
        t.accumulate_grad(a, g);
        t.accumulate_grad(b, g);
    });
}

Var Tape::sub(Var a, Var b) {
    Matrix out = aka::sub(node(a.id).value, node(b.id).value);
    return push(std::move(out), any_requires({a, b}), [a, b](Tape& t, const Matrix& g) {
        t.accumulate_grad(a, g);
        t.accumulate_grad(b, aka::scale(g, -1.0));
    });
}

Var Tape::scale(Var a, double s) {
    Matrix out = aka::scale(node(a.id).value, s);
    return push(std::move(out), node(a.id).requires_grad, [a, s](Tape& t, const Matrix& g) {
        t.accumulate_grad(a, aka::scale(g, s));
    });
}

Var Tape::add_rowvec(Var m, Var row) {
    const Matrix& mv = node(m.id).value;
    const Matrix& rv = node(row.id).value;
    if (rv.rows() != 1 || rv.cols() != mv.cols())
        throw std::invalid_argument("add_rowvec: row must be (1 x cols)");
    Matrix out = mv;
    for (int r = 0; r < out.rows(); ++r)
        for (int c = 0; c < out.cols(); ++c) out(r, c) += rv(0, c);
    return push(std::move(out), any_requires({m, row}), [m, row](Tape& t, const Matrix& g) {
        t.accumulate_grad(m, g);
        if (t.requires_grad(row)) {
            Matrix rg(1, g.cols());
            for (int r = 0; r < g.rows(); ++r)
                for (int c = 0; c < g.cols(); ++c) rg(0, c) += g(r, c);
            t.accumulate_grad(row, rg);
        }
    });
}

Var Tape::add_scalar(Var m, Var s) {
    const Matrix& sv = node(s.id).value;
    if (sv.rows() != 1 || sv.cols() != 1)
        throw std::invalid_argument("add_scalar: s must be (1 x 1)");
    Matrix out = node(m.id).value;
    for (double& v : out.raw()) v += sv(0, 0);
    return push(std::move(out), any_requires({m, s}), [m, s](Tape& t, const Matrix& g) {
        t.accumulate_grad(m, g);
        if (t.requires_grad(s)) {
            Matrix sg(1, 1);
            for (double v : g.raw()) sg(0, 0) += v;
            t.accumulate_grad(s, sg);
        }
    });
}

Var Tape::relu(Var a) {
    Matrix out = node(a.id).value;
    for (double& v : out.raw()) v = v > 0.0 ? v : 0.0;
    return push(std::move(out), node(a.id).requires_grad, [a](Tape& t, const Matrix& g) {
        const Matrix& av = t.value(a);
        Matrix ag = g;
        for (size_t i = 0; i < ag.size(); ++i)
            if (av.raw()[i] <= 0.0) ag.raw()[i] = 0.0;
        t.accumulate_grad(a, ag);
    });
}

Var Tape::sigmoid(Var a) {
    Matrix out = node(a.id).value;
    for (double& v : out.raw()) v = logistic(v);
    Var r = push(std::move(out), node(a.id).requires_grad, nullptr);
    // capture own id to reuse forward values in the backward pass
    node(r.id).backward_fn = [a, r](Tape& t, const Matrix& g) {
        const Matrix& y = t.value(r);
        Matrix ag = g;
        for (size_t i = 0; i < ag.size(); ++i) {
            const double s = y.raw()[i];
            ag.raw()[i] *= s * (1.0 - s);
        }
        t.accumulate_grad(a, ag);
    };
    return r;
}

Var Tape::transpose(Var a) {
    return push(node(a.id).value.transposed(), node(a.id).requires_grad,
                [a](Tape& t, const Matrix& g) { t.accumulate_grad(a, g.transposed()); });
}

Var Tape::vstack(Var top, Var bottom) {
    const Matrix& tv = node(top.id).value;
    const Matrix& bv = node(bottom.id).value;
    if (tv.cols() != bv.cols()) throw std::invalid_argument("vstack: column mismatch");
    Matrix out(tv.rows() + bv.rows(), tv.cols());
    for (int r = 0; r < tv.rows(); ++r)
        std::copy(tv.row_ptr(r), tv.row_ptr(r) + tv.cols(), out.row_ptr(r));
    for (int r = 0; r < bv.rows(); ++r)
        std::copy(bv.row_ptr(r), bv.row_ptr(r) + bv.cols(), out.row_ptr(tv.rows() + r));
    const int nt = tv.rows();
    return push(std::move(out), any_requires({top, bottom}),
                [top, bottom, nt](Tape& t, const Matrix& g) {
                    Matrix gt(nt, g.cols());
                    Matrix gb(g.rows() - nt, g.cols());
                    for (int r = 0; r < nt; ++r)
                        std::copy(g.row_ptr(r), g.row_ptr(r) + g.cols(), gt.row_ptr(r));
                    for (int r = nt; r < g.rows(); ++r)
                        std::copy(g.row_ptr(r), g.row_ptr(r) + g.cols(), gb.row_ptr(r - nt));
                    t.accumulate_grad(top, gt);
                    t.accumulate_grad(bottom, gb);
                });
}

Var Tape::hstack(Var left, Var right) {
    const Matrix& lv = node(left.id).value;
    const Matrix& rv = node(right.id).value;
    if (lv.rows() != rv.rows()) throw std::invalid_argument("hstack: row mismatch");
    Matrix out(lv.rows(), lv.cols() + rv.cols());
    for (int r = 0; r < lv.rows(); ++r) {
        std::copy(lv.row_ptr(r), lv.row_ptr(r) + lv.cols(), out.row_ptr(r));
        std::copy(rv.row_ptr(r), rv.row_ptr(r) + rv.cols(), out.row_ptr(r) + lv.cols());
    }
    const int nl = lv.cols();
    return push(std::move(out), any_requires({left, right}),
                [left, right, nl](Tape& t, const Matrix& g) {
                    Matrix gl(g.rows(), nl);
                    Matrix gr(g.rows(), g.cols() - nl);
                    for (int r = 0; r < g.rows(); ++r) {
                        std::copy(g.row_ptr(r), g.row_ptr(r) + nl, gl.row_ptr(r));
                        std::copy(g.row_ptr(r) + nl, g.row_ptr(r) + g.cols(), gr.row_ptr(r));
                    }
                    t.accumulate_grad(left, gl);
                    t.accumulate_grad(right, gr);
                });
}

Var Tape::rows(Var a, int start, int count) {
    const Matrix& av = node(a.id).value;
    if (start < 0 || count < 0 || start + count > av.rows())
        throw std::invalid_argument("rows: slice out of range");
    Matrix out(count, av.cols());
    for (int r = 0; r < count; ++r)
        std::copy(av.row_ptr(start + r), av.row_ptr(start + r) + av.cols(), out.row_ptr(r));
    return push(std::move(out), node(a.id).requires_grad,
                [a, start, count](Tape& t, const Matrix& g) {
                    const Matrix& av = t.value(a);
                    Matrix ag(av.rows(), av.cols());
                    for (int r = 0; r < count; ++r)
                        std::copy(g.row_ptr(r), g.row_ptr(r) + g.cols(), ag.row_ptr(start + r));
                    t.accumulate_grad(a, ag);
                });
}

Var Tape::sum(Var a) {
    Matrix out(1, 1);
    for (double v : node(a.id).value.raw()) out(0, 0) += v;
    return push(std::move(out), node(a.id).requires_grad, [a](Tape& t, const Matrix& g) {
        const Matrix& av = t.value(a);
        Matrix ag(av.rows(), av.cols(), g(0, 0));
        t.accumulate_grad(a, ag);
    });
}

Var Tape::weighted_sum(Var a, const Matrix& w) {
    const Matrix& av = node(a.id).value;
    if (!av.same_shape(w)) throw std::invalid_argument("weighted_sum: shape mismatch");
    Matrix out(1, 1);
    for (size_t i = 0; i < av.size(); ++i) out(0, 0) += av.raw()[i] * w.raw()[i];
    return push(std::move(out), node(a.id).requires_grad, [a, w](Tape& t, const Matrix& g) {
        t.accumulate_grad(a, aka::scale(w, g(0, 0)));
    });
}

}  // namespace aka
