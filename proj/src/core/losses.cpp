#include "losses.hpp"

#include <cmath>
#include <stdexcept>

namespace aka {

Var cross_entropy_op(Tape& t, Var logits, const std::vector<int>& labels) {
    const Matrix& z = t.value(logits);
    const int n = z.rows(), c = z.cols();
    if (static_cast<int>(labels.size()) != n)
        throw std::invalid_argument("cross_entropy: labels/logits row mismatch");
    for (int y : labels)
        if (y < 0 || y >= c) throw std::invalid_argument("cross_entropy: label out of range");
    Matrix probs = z;
    for (int r = 0; r < n; ++r) softmax_row_inplace(probs.row_ptr(r), c);
    Matrix out(1, 1);
    for (int r = 0; r < n; ++r) out(0, 0) -= std::log(probs(r, labels[r]));
    out(0, 0) /= n;
    return t.custom({logits}, std::move(out), [logits, labels, probs, n](Tape& tp, const Matrix& g) {
        Matrix gz = probs;
        for (int r = 0; r < n; ++r) gz(r, labels[r]) -= 1.0;
        const double s = g(0, 0) / n;
        for (double& v : gz.raw()) v *= s;
        tp.accumulate_grad(logits, gz);
    });
}

Var distillation_op(Tape& t, Var new_logits, const Matrix& old_logits, int n_old) {
    const Matrix& z = t.value(new_logits);
    const int n = z.rows();
    if (n_old < 1) throw std::invalid_argument("distillation: n_old must be >= 1 (skip at t=1)");
    if (z.cols() < n_old || old_logits.cols() < n_old || old_logits.rows() != n)
        throw std::invalid_argument("distillation: logit shapes incompatible with n_old");
    // softmax over the first n_old columns only, for both models
    Matrix p(n, n_old), q(n, n_old);
    for (int r = 0; r < n; ++r) {
        for (int j = 0; j < n_old; ++j) {
            p(r, j) = old_logits(r, j);
            q(r, j) = z(r, j);
        }
        softmax_row_inplace(p.row_ptr(r), n_old);
        softmax_row_inplace(q.row_ptr(r), n_old);
    }
    Matrix out(1, 1);
    for (int r = 0; r < n; ++r)
        for (int j = 0; j < n_old; ++j) out(0, 0) -= p(r, j) * std::log(q(r, j));
    out(0, 0) /= n;
    const int cols = z.cols();
    return t.custom({new_logits}, std::move(out),
                    [new_logits, p, q, n, n_old, cols](Tape& tp, const Matrix& g) {
                        Matrix gz(n, cols);
                        const double s = g(0, 0) / n;
                        for (int r = 0; r < n; ++r)
                            for (int j = 0; j < n_old; ++j)
                                gz(r, j) = s * (q(r, j) - p(r, j));
                        tp.accumulate_grad(new_logits, gz);
                    });
}

Var plasticity_op(Tape& t, Var f, const std::vector<Triplet>& triplets, int batch_size) {
    const Matrix& fv = t.value(f);
    const int d = fv.cols();
    if (batch_size < 1) throw std::invalid_argument("plasticity: batch_size must be >= 1");
    Matrix out(1, 1);
    for (const Triplet& tr : triplets) {
        const double dap = squared_distance(fv.row_ptr(tr.anchor), fv.row_ptr(tr.positive), d);
        const double dan = squared_distance(fv.row_ptr(tr.anchor), fv.row_ptr(tr.negative), d);
        out(0, 0) += softplus(dap - dan);
    }
    out(0, 0) /= batch_size;
    return t.custom({f}, std::move(out), [f, triplets, batch_size, d](Tape& tp, const Matrix& g) {
        const Matrix& fv = tp.value(f);
        Matrix gf(fv.rows(), d);
        const double s = g(0, 0) / batch_size;
        for (const Triplet& tr : triplets) {
            const double* fa = fv.row_ptr(tr.anchor);
            const double* fp = fv.row_ptr(tr.positive);
            const double* fn = fv.row_ptr(tr.negative);
            const double m = squared_distance(fa, fp, d) - squared_distance(fa, fn, d);
            const double w = s * logistic(m);
            for (int k = 0; k < d; ++k) {
                const double dap_k = 2.0 * (fa[k] - fp[k]);
                const double dan_k = 2.0 * (fa[k] - fn[k]);
                gf(tr.anchor, k) += w * (dap_k - dan_k);
                gf(tr.positive, k) -= w * dap_k;
                gf(tr.negative, k) += w * dan_k;
            }
        }
        tp.accumulate_grad(f, gf);
    });
}

Var stability_op(Tape& t, Var v_k, const Matrix& v_k_snapshot) {
    const Matrix& vk = t.value(v_k);
    if (!vk.same_shape(v_k_snapshot))
        throw std::invalid_argument("stability: snapshot shape mismatch");
    const int n = vk.rows(), d = vk.cols();
    Matrix out(1, 1);
    for (int i = 0; i < n; ++i)
        out(0, 0) += softplus(squared_distance(vk.row_ptr(i), v_k_snapshot.row_ptr(i), d));
    out(0, 0) /= n;
    return t.custom({v_k}, std::move(out), [v_k, v_k_snapshot, n, d](Tape& tp, const Matrix& g) {
        const Matrix& vk = tp.value(v_k);
        Matrix gv(n, d);
        const double s = g(0, 0) / n;
        for (int i = 0; i < n; ++i) {
            const double dist = squared_distance(vk.row_ptr(i), v_k_snapshot.row_ptr(i), d);
            const double w = s * logistic(dist);
            for (int k = 0; k < d; ++k)
                gv(i, k) = w * 2.0 * (vk(i, k) - v_k_snapshot(i, k));
        }
        tp.accumulate_grad(v_k, gv);
    });
}

std::vector<Triplet> mine_triplets(const Matrix& f, const std::vector<int>& labels) {
    const int n = f.rows();
    if (static_cast<int>(labels.size()) != n)
        throw std::invalid_argument("mine_triplets: labels/features row mismatch");
    std::vector<Triplet> out;
    for (int a = 0; a < n; ++a) {
        int best_p = -1, best_n = -1;
        double worst_pos = -1.0, best_neg = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == a) continue;
            const double dist = squared_distance(f.row_ptr(a), f.row_ptr(j), f.cols());
            if (labels[j] == labels[a]) {
                if (dist > worst_pos) {
                    worst_pos = dist;
                    best_p = j;
                }
            } else if (best_n < 0 || dist < best_neg) {
                best_neg = dist;
                best_n = j;
            }
        }
        if (best_p >= 0 && best_n >= 0) out.push_back(Triplet{a, best_p, best_n});
    }
    return out;
}

double cross_entropy(const Matrix& logits, const std::vector<int>& labels) {
    Tape t;
    return t.scalar_value(cross_entropy_op(t, t.constant(logits), labels));
}

double distillation(const Matrix& new_logits, const Matrix& old_logits, int n_old) {
    Tape t;
    return t.scalar_value(distillation_op(t, t.constant(new_logits), old_logits, n_old));
}

double base_loss(double l_c, double l_d, double gamma) { return l_c + gamma * l_d; }

double plasticity_loss(const Matrix& f, const std::vector<Triplet>& triplets, int batch_size) {
    if (triplets.empty()) return 0.0;
    Tape t;
    return t.scalar_value(plasticity_op(t, t.constant(f), triplets, batch_size));
}

double stability_loss(const Matrix& v_k, const Matrix& v_k_snapshot) {
    Tape t;
    return t.scalar_value(stability_op(t, t.constant(v_k), v_k_snapshot));
}

double total_loss(double l_base, double l_p, double l_s, const LossWeights& w) {
    return l_base + w.lambda_p * l_p + w.lambda_s * l_s;
}

}  // namespace aka
