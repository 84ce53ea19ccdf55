#pragma once

#include <cstdint>

#include "autograd.hpp"
#include "matrix.hpp"

namespace aka {

// Persistent graph-memory parameters: the AKG vertex matrix plus the learnable
// edge weights of both graphs and the GCN weight. This is the state that
// survives across domain steps while the backbone is re-fit.
struct GraphMemory {
    Matrix vertices;  // (N^K x d) learnable vertex matrix
    Matrix w_isg;     // (1 x d) ISG edge weight
    Matrix b_isg;     // (1 x 1) ISG edge bias
    Matrix w_akg;     // (1 x d) AKG edge weight
    Matrix b_akg;     // (1 x 1) AKG edge bias
    Matrix w_gcn;     // (d x d) GCN weight

    int num_vertices() const { return vertices.rows(); }
    int dim() const { return vertices.cols(); }

    // Vertices ~ N(0, 1/sqrt(d)); edge weights ~ N(0, 0.01); biases zero.
    static GraphMemory init(int num_vertices, int dim, uint64_t seed);

    // Immutable copy of V^K taken at a domain-step boundary.
    Matrix snapshot_vertices() const { return vertices; }
};

// Tape-side graph memory parameters (bound leaves).
struct GraphMemoryVars {
    Var vertices, w_isg, b_isg, w_akg, b_akg, w_gcn;
};

// Everything the forward chain produces, kept for losses and diagnostics.
struct GraphForward {
    Var isg_adjacency;    // A^S (N^b x N^b)
    Var akg_adjacency;    // A^K (N^K x N^K)
    Var cross;            // A^C (N^b x N^K)
    Var joint_adjacency;  // A^J
    Var joint_vertices;   // V^J
    Var propagated_all;   // V^G ((N^b+N^K) x d)
    Var propagated;       // V-bar^S, top N^b rows of V^G
    Var aggregated;       // F = (V^S + V-bar^S) / 2
};

// --- tape ops (differentiable) ------------------------------------------------

// D_ij = sum_d w_d * |v_i,d - v_j,d|; w is (1 x d).
Var l1_gram(Tape& t, Var v, Var w);

// S_ij = -1/2 * || a_i - b_j ||^2
Var neg_half_sqdist(Tape& t, Var a, Var b);

Var softmax_rows(Tape& t, Var scores);

// A_ij = sigmoid(w . |v_i - v_j| + b); used for both the ISG and the AKG.
Var pairwise_adjacency(Tape& t, Var v, Var w, Var b);

// Row-stochastic cross-graph weights between batch features and AKG vertices.
Var cross_weights_op(Tape& t, Var v_s, Var v_k);

Var assemble_joint_adjacency(Tape& t, Var a_s, Var a_c, Var a_k);

// One GCN layer: relu(A^J (V^J W^J)).
Var propagate_op(Tape& t, Var a_j, Var v_j, Var w_j);

// Full chain for a (possibly detached) batch of features.
GraphForward graph_forward(Tape& t, Var v_s, const GraphMemoryVars& g);

GraphMemoryVars bind_graph_memory(Tape& t, const GraphMemory& g, bool requires_grad);

// --- plain (value-only) API, shares the tape implementation -------------------

struct SimilarityGraph {
    Matrix vertices;   // V^S
    Matrix adjacency;  // A^S
};

struct JointGraph {
    Matrix adjacency;  // A^J, block [[A^S, A^C], [A^C^T, A^K]]
    Matrix vertices;   // V^J = [V^S; V^K]
    int batch_rows = 0;
};

struct EnhancedBatch {
    Matrix propagated;  // V-bar^S
    Matrix aggregated;  // F
};

SimilarityGraph build_isg(const Matrix& v_s, const Matrix& w, double b);
Matrix akg_adjacency(const Matrix& v_k, const Matrix& w, double b);
Matrix cross_weights(const Matrix& v_s, const Matrix& v_k);
JointGraph assemble_joint(const SimilarityGraph& isg, const Matrix& a_k, const Matrix& a_c,
                          const Matrix& v_k);
Matrix propagate(const JointGraph& joint, const Matrix& w_gcn);
EnhancedBatch enhance(const Matrix& v_s, const Matrix& v_bar);

// F and V-bar for a feature batch against the current memory, no gradients.
EnhancedBatch enhance_batch(const Matrix& v_s, const GraphMemory& g);

// Test-time enhancement: each row is propagated through the joint graph built
// over that single sample and the AKG, so the embedding of a sample never
// depends on which other samples are evaluated alongside it. Equals
// enhance_batch on a batch of size one, applied row by row.
EnhancedBatch enhance_independent(const Matrix& v_s, const GraphMemory& g);

// C_ij = cosine(a_i, b_j); zero rows give 0. Diagnostics (detach-effect heatmap).
Matrix cosine_matrix(const Matrix& a, const Matrix& b);

}  // namespace aka
