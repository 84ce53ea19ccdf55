#include "backbone.hpp"

#include <cmath>
#include <stdexcept>

#include "rng.hpp"

namespace aka {

Mlp Mlp::init(int input_dim, const std::vector<int>& hidden_dims, int output_dim, uint64_t seed) {
    if (input_dim < 1 || output_dim < 1)
        throw std::invalid_argument("Mlp::init: dimensions must be positive");
    Rng rng(derive_seed(seed, "backbone"));
    Mlp m;
    m.input_dim_ = input_dim;
    m.output_dim_ = output_dim;
    int in = input_dim;
    std::vector<int> dims = hidden_dims;
    dims.push_back(output_dim);
    for (int out : dims) {
        if (out < 1) throw std::invalid_argument("Mlp::init: hidden dim must be positive");
        LinearLayer layer;
        layer.weight = rng.normal_matrix(in, out, std::sqrt(2.0 / in));
        layer.bias = Matrix(1, out);
        m.layers_.push_back(std::move(layer));
        in = out;
    }
    return m;
}

Mlp Mlp::from_layers(std::vector<LinearLayer> layers) {
    if (layers.empty()) throw std::invalid_argument("Mlp::from_layers: no layers");
    Mlp m;
    m.input_dim_ = layers.front().weight.rows();
    m.output_dim_ = layers.back().weight.cols();
    m.layers_ = std::move(layers);
    return m;
}

Mlp::Bound Mlp::bind(Tape& t, bool requires_grad) const {
    Bound b;
    for (const LinearLayer& l : layers_)
        b.layers.emplace_back(t.leaf(l.weight, requires_grad), t.leaf(l.bias, requires_grad));
    return b;
}

Var Mlp::forward(Tape& t, const Bound& b, Var x) const {
    if (t.value(x).cols() != input_dim_)
        throw std::invalid_argument("Mlp::forward: input width " +
                                    std::to_string(t.value(x).cols()) + " != configured " +
                                    std::to_string(input_dim_));
    if (t.value(x).rows() < 1) throw std::invalid_argument("Mlp::forward: empty batch");
    Var h = x;
    for (size_t i = 0; i < b.layers.size(); ++i) {
        h = t.add_rowvec(t.matmul(h, b.layers[i].first), b.layers[i].second);
        if (i + 1 < b.layers.size()) h = t.relu(h);
    }
    if (!t.value(h).all_finite()) throw std::runtime_error("Mlp::forward: non-finite features");
    return h;
}

Matrix Mlp::features(const Matrix& inputs) const {
    Tape t;
    Bound b = bind(t, false);
    return t.value(forward(t, b, t.constant(inputs)));
}

void Classifier::grow(int new_classes, uint64_t seed) {
    if (new_classes < 1) throw std::invalid_argument("Classifier::grow: new_classes must be >= 1");
    Rng rng(derive_seed(seed, "classifier_grow", static_cast<uint64_t>(num_classes())));
    const int d = weight_.rows();
    const int old_c = weight_.cols();
    Matrix w(d, old_c + new_classes);
    Matrix b(1, old_c + new_classes);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < old_c; ++c) w(r, c) = weight_(r, c);
    for (int c = 0; c < old_c; ++c) b(0, c) = bias_(0, c);
    for (int r = 0; r < d; ++r)
        for (int c = old_c; c < w.cols(); ++c) w(r, c) = rng.normal(0.0, 0.01);
    weight_ = std::move(w);
    bias_ = std::move(b);
}

Classifier::Bound Classifier::bind(Tape& t, bool requires_grad) const {
    return Bound{t.leaf(weight_, requires_grad), t.leaf(bias_, requires_grad)};
}

Var Classifier::forward(Tape& t, const Bound& b, Var features) const {
    if (t.value(features).cols() != weight_.rows())
        throw std::invalid_argument("Classifier::forward: feature width mismatch");
    if (num_classes() < 1) throw std::invalid_argument("Classifier::forward: no classes yet");
    return t.add_rowvec(t.matmul(features, b.weight), b.bias);
}

Matrix Classifier::logits(const Matrix& features) const {
    Tape t;
    Bound b = bind(t, false);
    return t.value(forward(t, b, t.constant(features)));
}

Matrix extract_features(const Matrix& inputs, const Mlp& backbone) {
    return backbone.features(inputs);
}

Matrix classify(const FeatureBatch& batch, const Classifier& clf) {
    return clf.logits(batch.features);
}

ModelSnapshot snapshot(const Mlp& backbone, const Classifier& classifier, int step) {
    return ModelSnapshot{backbone, classifier, Matrix(), step};
}

}  // namespace aka
