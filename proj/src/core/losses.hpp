#pragma once

#include <vector>

#include "autograd.hpp"
#include "matrix.hpp"

namespace aka {

struct LossWeights {
    double gamma = 1.0;      // distillation weight
    double lambda_p = 1.0;   // plasticity weight
    double lambda_s = 10.0;  // stability weight
};

struct Triplet {
    int anchor = -1;
    int positive = -1;
    int negative = -1;
};

// --- tape ops -------------------------------------------------------------------

// Mean over the batch of -log softmax(logits)[label].
Var cross_entropy_op(Tape& t, Var logits, const std::vector<int>& labels);

// -sum_j softmax(old)_j log softmax(new)_j over the first n_old columns of both
// logit matrices, averaged over the batch. Old logits are frozen (no gradient).
Var distillation_op(Tape& t, Var new_logits, const Matrix& old_logits, int n_old);

// (1/batch_size) * sum over triplets of softplus(d(F_a,F_p) - d(F_a,F_n)),
// with d the squared Euclidean distance. The 1/N^b prefactor is kept even when
// the mined triplet count differs from N^b.
Var plasticity_op(Tape& t, Var f, const std::vector<Triplet>& triplets, int batch_size);

// (1/N^K) * sum_i softplus(||V^K_i - Vhat^K_i||^2); floor is ln 2 at zero movement.
Var stability_op(Tape& t, Var v_k, const Matrix& v_k_snapshot);

// --- mining and scalar wrappers ---------------------------------------------------

// Batch-hard mining under squared Euclidean distance: per valid anchor, the
// farthest positive and the nearest negative. Ties break to the lowest index.
// Anchors without a positive or a negative yield no triplet.
std::vector<Triplet> mine_triplets(const Matrix& f, const std::vector<int>& labels);

double cross_entropy(const Matrix& logits, const std::vector<int>& labels);
double distillation(const Matrix& new_logits, const Matrix& old_logits, int n_old);
double base_loss(double l_c, double l_d, double gamma);
double plasticity_loss(const Matrix& f, const std::vector<Triplet>& triplets, int batch_size);
double stability_loss(const Matrix& v_k, const Matrix& v_k_snapshot);
double total_loss(double l_base, double l_p, double l_s, const LossWeights& w);

}  // namespace aka
