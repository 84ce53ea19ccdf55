#include "graph_memory.hpp"

#include <cmath>
#include <stdexcept>

#include "rng.hpp"

namespace aka {

GraphMemory GraphMemory::init(int num_vertices, int dim, uint64_t seed) {
    if (num_vertices < 1 || dim < 1)
        throw std::invalid_argument("GraphMemory::init: num_vertices and dim must be >= 1");
    Rng rng(derive_seed(seed, "graph_memory"));
    GraphMemory g;
    g.vertices = rng.normal_matrix(num_vertices, dim, 1.0 / std::sqrt(static_cast<double>(dim)));
    g.w_isg = rng.normal_matrix(1, dim, 0.01);
    g.b_isg = Matrix(1, 1);
    g.w_akg = rng.normal_matrix(1, dim, 0.01);
    g.b_akg = Matrix(1, 1);
    g.w_gcn = rng.normal_matrix(dim, dim, 0.01);
    return g;
}

Var l1_gram(Tape& t, Var v, Var w) {
    const Matrix& vv = t.value(v);
    const Matrix& wv = t.value(w);
    if (wv.rows() != 1 || wv.cols() != vv.cols())
        throw std::invalid_argument("l1_gram: weight must be (1 x d)");
    if (!vv.all_finite() || !wv.all_finite())
        throw std::runtime_error("l1_gram: non-finite input");
    const int n = vv.rows();
    const int d = vv.cols();
    Matrix out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < d; ++k) s += wv(0, k) * std::abs(vv(i, k) - vv(j, k));
            out(i, j) = s;
        }
    return t.custom({v, w}, std::move(out), [v, w, n, d](Tape& tp, const Matrix& g) {
        const Matrix& vv = tp.value(v);
        const Matrix& wv = tp.value(w);
        if (tp.requires_grad(v)) {
            Matrix gv(n, d);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const double gij = g(i, j) + g(j, i);
                    if (gij == 0.0) continue;
                    for (int k = 0; k < d; ++k) {
                        const double diff = vv(i, k) - vv(j, k);
                        const double sgn = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
                        gv(i, k) += gij * wv(0, k) * sgn;
                    }
                }
            tp.accumulate_grad(v, gv);
        }
        if (tp.requires_grad(w)) {
            Matrix gw(1, d);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const double gij = g(i, j);
                    if (gij == 0.0) continue;
                    for (int k = 0; k < d; ++k) gw(0, k) += gij * std::abs(vv(i, k) - vv(j, k));
                }
            tp.accumulate_grad(w, gw);
        }
    });
}

Var neg_half_sqdist(Tape& t, Var a, Var b) {
    const Matrix& av = t.value(a);
    const Matrix& bv = t.value(b);
    if (av.cols() != bv.cols()) throw std::invalid_argument("neg_half_sqdist: dim mismatch");
    const int n = av.rows(), m = bv.rows(), d = av.cols();
    Matrix out(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            out(i, j) = -0.5 * squared_distance(av.row_ptr(i), bv.row_ptr(j), d);
    return t.custom({a, b}, std::move(out), [a, b, n, m, d](Tape& tp, const Matrix& g) {
        const Matrix& av = tp.value(a);
        const Matrix& bv = tp.value(b);
        Matrix ga(n, d), gb(m, d);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) {
                const double gij = g(i, j);
                if (gij == 0.0) continue;
                for (int k = 0; k < d; ++k) {
                    const double diff = av(i, k) - bv(j, k);
                    ga(i, k) -= gij * diff;
                    gb(j, k) += gij * diff;
                }
            }
        tp.accumulate_grad(a, ga);
        tp.accumulate_grad(b, gb);
    });
}

Var softmax_rows(Tape& t, Var scores) {
    Matrix out = t.value(scores);
    for (int r = 0; r < out.rows(); ++r) softmax_row_inplace(out.row_ptr(r), out.cols());
    const Matrix p = out;  // forward output, reused in backward
    return t.custom({scores}, std::move(out), [scores, p](Tape& tp, const Matrix& g) {
        Matrix gs(p.rows(), p.cols());
        for (int r = 0; r < p.rows(); ++r) {
            double dotgp = 0.0;
            for (int c = 0; c < p.cols(); ++c) dotgp += g(r, c) * p(r, c);
            for (int c = 0; c < p.cols(); ++c) gs(r, c) = p(r, c) * (g(r, c) - dotgp);
        }
        tp.accumulate_grad(scores, gs);
    });
}

Var pairwise_adjacency(Tape& t, Var v, Var w, Var b) {
    return t.sigmoid(t.add_scalar(l1_gram(t, v, w), b));
}

Var cross_weights_op(Tape& t, Var v_s, Var v_k) {
    if (t.value(v_k).rows() < 1) throw std::invalid_argument("cross_weights: N^K must be >= 1");
    return softmax_rows(t, neg_half_sqdist(t, v_s, v_k));
}

Var assemble_joint_adjacency(Tape& t, Var a_s, Var a_c, Var a_k) {
    const Matrix& s = t.value(a_s);
    const Matrix& c = t.value(a_c);
    const Matrix& k = t.value(a_k);
    if (s.rows() != s.cols() || k.rows() != k.cols() || c.rows() != s.rows() ||
        c.cols() != k.rows())
        throw std::invalid_argument("assemble_joint: inconsistent block shapes");
    return t.vstack(t.hstack(a_s, a_c), t.hstack(t.transpose(a_c), a_k));
}

Var propagate_op(Tape& t, Var a_j, Var v_j, Var w_j) {
    const Matrix& w = t.value(w_j);
    if (w.rows() != t.value(v_j).cols() || w.cols() != w.rows())
        throw std::invalid_argument("propagate: W^J must be (d x d)");
    return t.relu(t.matmul(a_j, t.matmul(v_j, w_j)));
}

GraphForward graph_forward(Tape& t, Var v_s, const GraphMemoryVars& g) {
    const int nb = t.value(v_s).rows();
    if (nb < 2) throw std::invalid_argument("graph_forward: batch must have N^b >= 2");
    GraphForward fw;
    fw.isg_adjacency = pairwise_adjacency(t, v_s, g.w_isg, g.b_isg);
    fw.akg_adjacency = pairwise_adjacency(t, g.vertices, g.w_akg, g.b_akg);
    fw.cross = cross_weights_op(t, v_s, g.vertices);
    fw.joint_adjacency = assemble_joint_adjacency(t, fw.isg_adjacency, fw.cross, fw.akg_adjacency);
    fw.joint_vertices = t.vstack(v_s, g.vertices);
    fw.propagated_all = propagate_op(t, fw.joint_adjacency, fw.joint_vertices, g.w_gcn);
    fw.propagated = t.rows(fw.propagated_all, 0, nb);
    fw.aggregated = t.scale(t.add(v_s, fw.propagated), 0.5);
    return fw;
}

GraphMemoryVars bind_graph_memory(Tape& t, const GraphMemory& g, bool requires_grad) {
    GraphMemoryVars v;
    v.vertices = t.leaf(g.vertices, requires_grad);
    v.w_isg = t.leaf(g.w_isg, requires_grad);
    v.b_isg = t.leaf(g.b_isg, requires_grad);
    v.w_akg = t.leaf(g.w_akg, requires_grad);
    v.b_akg = t.leaf(g.b_akg, requires_grad);
    v.w_gcn = t.leaf(g.w_gcn, requires_grad);
    return v;
}

// --- plain wrappers ------------------------------------------------------------

SimilarityGraph build_isg(const Matrix& v_s, const Matrix& w, double b) {
    if (v_s.rows() < 2) throw std::invalid_argument("build_isg: N^b must be >= 2");
    Tape t;
    Var bv = t.scalar(b);
    Var adj = pairwise_adjacency(t, t.constant(v_s), t.constant(w), bv);
    return SimilarityGraph{v_s, t.value(adj)};
}

Matrix akg_adjacency(const Matrix& v_k, const Matrix& w, double b) {
    if (v_k.rows() < 1) throw std::invalid_argument("akg_adjacency: N^K must be >= 1");
    Tape t;
    Var adj = pairwise_adjacency(t, t.constant(v_k), t.constant(w), t.scalar(b));
    return t.value(adj);
}

Matrix cross_weights(const Matrix& v_s, const Matrix& v_k) {
    Tape t;
    return t.value(cross_weights_op(t, t.constant(v_s), t.constant(v_k)));
}

JointGraph assemble_joint(const SimilarityGraph& isg, const Matrix& a_k, const Matrix& a_c,
                          const Matrix& v_k) {
    if (isg.vertices.cols() != v_k.cols())
        throw std::invalid_argument("assemble_joint: feature dim mismatch");
    Tape t;
    Var adj = assemble_joint_adjacency(t, t.constant(isg.adjacency), t.constant(a_c),
                                       t.constant(a_k));
    Var vj = t.vstack(t.constant(isg.vertices), t.constant(v_k));
    return JointGraph{t.value(adj), t.value(vj), isg.vertices.rows()};
}

Matrix propagate(const JointGraph& joint, const Matrix& w_gcn) {
    Tape t;
    return t.value(propagate_op(t, t.constant(joint.adjacency), t.constant(joint.vertices),
                                t.constant(w_gcn)));
}

EnhancedBatch enhance(const Matrix& v_s, const Matrix& v_bar) {
    if (!v_s.same_shape(v_bar)) throw std::invalid_argument("enhance: shape mismatch");
    return EnhancedBatch{v_bar, scale(add(v_s, v_bar), 0.5)};
}

EnhancedBatch enhance_batch(const Matrix& v_s, const GraphMemory& g) {
    Tape t;
    GraphMemoryVars gv = bind_graph_memory(t, g, false);
    GraphForward fw = graph_forward(t, t.constant(v_s), gv);
    return EnhancedBatch{t.value(fw.propagated), t.value(fw.aggregated)};
}

EnhancedBatch enhance_independent(const Matrix& v_s, const GraphMemory& g) {
    // single-sample joint graph, written in closed form for the whole matrix:
    // vbar_i = relu(sigmoid(b_isg) * (v_i W^J) + sum_k A^C_ik (V^K_k W^J))
    Tape t;
    Var v = t.constant(v_s);
    GraphMemoryVars gv = bind_graph_memory(t, g, false);
    Var cross = cross_weights_op(t, v, gv.vertices);
    Var self_term = t.scale(t.matmul(v, gv.w_gcn), logistic(g.b_isg(0, 0)));
    Var memory_term = t.matmul(cross, t.matmul(gv.vertices, gv.w_gcn));
    Var vbar = t.relu(t.add(self_term, memory_term));
    return EnhancedBatch{t.value(vbar), t.value(t.scale(t.add(v, vbar), 0.5))};
}

Matrix cosine_matrix(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw std::invalid_argument("cosine_matrix: dim mismatch");
    Matrix out(a.rows(), b.rows());
    for (int i = 0; i < a.rows(); ++i) {
        const double na = std::sqrt(dot(a.row_ptr(i), a.row_ptr(i), a.cols()));
        for (int j = 0; j < b.rows(); ++j) {
            const double nb = std::sqrt(dot(b.row_ptr(j), b.row_ptr(j), b.cols()));
            if (na == 0.0 || nb == 0.0) {
                out(i, j) = 0.0;
            } else {
                out(i, j) = dot(a.row_ptr(i), b.row_ptr(j), a.cols()) / (na * nb);
            }
        }
    }
    return out;
}

}  // namespace aka
