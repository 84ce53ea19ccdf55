#pragma once

#include <cstdint>
#include <vector>

#include "autograd.hpp"
#include "matrix.hpp"

namespace aka {

// A mini-batch of extracted features V^S with their identity labels.
struct FeatureBatch {
    Matrix features;          // (N^b x d)
    std::vector<int> labels;  // global identity indices
    int batch_size() const { return features.rows(); }
};

struct LinearLayer {
    Matrix weight;  // (in x out)
    Matrix bias;    // (1 x out)
};

// Desk-scale feature extractor h(.;theta): a small MLP over vector inputs,
// ReLU between hidden layers, linear output of width d.
class Mlp {
public:
    Mlp() = default;
    static Mlp init(int input_dim, const std::vector<int>& hidden_dims, int output_dim,
                    uint64_t seed);
    static Mlp from_layers(std::vector<LinearLayer> layers);

    int input_dim() const { return input_dim_; }
    int output_dim() const { return output_dim_; }
    std::vector<LinearLayer>& layers() { return layers_; }
    const std::vector<LinearLayer>& layers() const { return layers_; }

    struct Bound {
        std::vector<std::pair<Var, Var>> layers;  // (weight, bias)
    };
    Bound bind(Tape& t, bool requires_grad) const;
    Var forward(Tape& t, const Bound& b, Var x) const;

    // Evaluation-mode extraction: pure function of (input, parameters).
    Matrix features(const Matrix& inputs) const;

private:
    int input_dim_ = 0;
    int output_dim_ = 0;
    std::vector<LinearLayer> layers_;
};

// Classifier g(.;phi) mapping d-dim features to C logits. The class count
// grows as domains arrive; old columns are never modified by growth.
class Classifier {
public:
    Classifier() = default;
    explicit Classifier(int feature_dim) : weight_(feature_dim, 0), bias_(1, 0) {}

    int feature_dim() const { return weight_.rows(); }
    int num_classes() const { return weight_.cols(); }
    Matrix& weight() { return weight_; }
    Matrix& bias() { return bias_; }
    const Matrix& weight() const { return weight_; }
    const Matrix& bias() const { return bias_; }

    // Appends new_classes columns initialized N(0, 0.01); existing columns are
    // preserved bit-exactly.
    void grow(int new_classes, uint64_t seed);

    struct Bound {
        Var weight, bias;
    };
    Bound bind(Tape& t, bool requires_grad) const;
    Var forward(Tape& t, const Bound& b, Var features) const;

    Matrix logits(const Matrix& features) const;

private:
    Matrix weight_;  // (d x C)
    Matrix bias_;    // (1 x C)
};

Matrix extract_features(const Matrix& inputs, const Mlp& backbone);
Matrix classify(const FeatureBatch& batch, const Classifier& clf);

// Frozen copy of the model at a domain-step boundary: backbone, classifier and
// (when the graph memory is in play) the AKG vertices.
struct ModelSnapshot {
    Mlp backbone;
    Classifier classifier;
    Matrix akg_vertices;  // empty when the method has no graph memory
    int step = 0;
};

ModelSnapshot snapshot(const Mlp& backbone, const Classifier& classifier, int step);

}  // namespace aka
