#pragma once

#include <functional>
#include <vector>

#include "matrix.hpp"

namespace aka {

class Tape;

// Handle to a node on a tape. Cheap to copy; owns nothing.
struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

// Reverse-mode autodiff over Matrix values. Nodes are appended in evaluation
// order, so creation order is a topological order and backward() is a single
// reverse sweep. Tapes are built per forward pass and discarded.
class Tape {
public:
    Var leaf(Matrix value, bool requires_grad);
    Var constant(Matrix value) { return leaf(std::move(value), false); }
    Var scalar(double v, bool requires_grad = false);

    // Copies the current value of `v` into a fresh no-grad leaf. Gradients of
    // anything built on top stop here; this implements the detachment between
    // the backbone output and the graph-memory chain.
    Var detach(Var v);

    const Matrix& value(Var v) const { return node(v.id).value; }
    double scalar_value(Var v) const;
    // Gradient accumulated by the last backward(); zeros if none reached v.
    Matrix grad(Var v) const;
    bool requires_grad(Var v) const { return node(v.id).requires_grad; }

    void zero_grad();
    void backward(Var loss);

    // --- primitive ops -----------------------------------------------------
    Var matmul(Var a, Var b);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var scale(Var a, double s);
    Var add_rowvec(Var m, Var row);   // row is (1 x cols), broadcast over rows
    Var add_scalar(Var m, Var s);     // s is (1 x 1), broadcast over all entries
    Var relu(Var a);
    Var sigmoid(Var a);
    Var transpose(Var a);
    Var vstack(Var top, Var bottom);
    Var hstack(Var left, Var right);
    Var rows(Var a, int start, int count);
    Var sum(Var a);                          // (1 x 1)
    Var weighted_sum(Var a, const Matrix& w);  // (1 x 1): sum_ij w_ij * a_ij

    // Escape hatch for fused domain ops (graph adjacencies, losses). The
    // backward callback receives the upstream gradient and must accumulate
    // into the parents via accumulate_grad().
    Var custom(std::vector<Var> parents, Matrix value,
               std::function<void(Tape&, const Matrix& out_grad)> backward);

    void accumulate_grad(Var v, const Matrix& g);
    size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Matrix value;
        Matrix grad;  // empty until touched
        bool requires_grad = false;
        std::function<void(Tape&, const Matrix&)> backward_fn;
    };

    Node& node(int id) { return nodes_.at(static_cast<size_t>(id)); }
    const Node& node(int id) const { return nodes_.at(static_cast<size_t>(id)); }
    Var push(Matrix value, bool requires_grad,
             std::function<void(Tape&, const Matrix&)> backward_fn);
    bool any_requires(std::initializer_list<Var> vs) const;

    std::vector<Node> nodes_;
};

// Numerically stable helpers shared by losses and adjacency ops.
double softplus(double x);
double logistic(double x);
void softmax_row_inplace(double* row, int n);

}  // namespace aka
