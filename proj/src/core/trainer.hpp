#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "backbone.hpp"
#include "checkpoint.hpp"
#include "data.hpp"
#include "evaluation.hpp"
#include "graph_memory.hpp"
#include "losses.hpp"

namespace aka {

enum class Method { Sft, Lwf, Spd, Aka };

Method parse_method(const std::string& name);
std::string method_name(Method m);

struct TrainConfig {
    int epochs = 10;
    double learning_rate = 3.5e-4;
    std::vector<double> lr_decay_fractions = {0.5, 0.7};  // of total epochs
    double lr_decay_factor = 0.1;
    int identities_per_batch = 8;  // P
    int samples_per_identity = 4;  // K
    uint64_t seed = 1;
    LossWeights weights;
    int num_vertices = 16;  // N^K
    int feature_dim = 64;   // d
    std::vector<int> hidden_dims = {128, 96};
    bool gcn_bypass = false;   // skip the graph chain entirely (ablation)
    bool diagnostics = true;   // per-epoch A^C and cosine dumps (aka only)

    int batch_size() const { return identities_per_batch * samples_per_identity; }
    void validate() const;
};

class AdamOptimizer {
public:
    explicit AdamOptimizer(double lr, double beta1 = 0.9, double beta2 = 0.999,
                           double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads,
              double lr_scale);

private:
    double lr_, beta1_, beta2_, eps_;
    int64_t t_ = 0;
    std::vector<Matrix> m_, v_;
};

struct StepLosses {
    int step = 0;   // domain step (1-based)
    int epoch = 0;  // epoch within the domain
    double l_c = 0.0;
    double l_d = 0.0;  // distillation (or SPD similarity) component
    double l_p = 0.0;
    double l_s = 0.0;
    double total = 0.0;
};

// Sequential domain-incremental trainer. One instance owns the model state
// (backbone theta, classifier phi, graph memory psi) across the whole stream.
class Trainer {
public:
    Trainer(Method method, const TrainConfig& cfg, int input_dim);

    // Trains one domain: grows the classifier, runs the epoch loop, then takes
    // the boundary snapshot. Steps must be trained in order starting at 1.
    void train_domain(int step_index, DomainDataset& dataset);

    // Full protocol: trains every domain in order, evaluates all test sets
    // plus the unseen pool after each step, writes metrics/checkpoints under
    // out_dir (pass "" to keep everything in memory).
    MetricsReport run_stream(DomainStream& stream, const std::string& out_dir);

    // P*K batch of train-sample indices: P distinct identities, K samples
    // each, with replacement only for identities holding fewer than K samples.
    static std::vector<int> sample_batch(const DomainDataset& dataset, int p, int k, Rng& rng);

    // Evaluation-mode embedding (backbone features; retrieval is Euclidean
    // distance over these for every method).
    Matrix embed(const Matrix& inputs) const;
    RetrievalTask make_task(const DomainDataset& dataset) const;

    Method method() const { return method_; }
    const TrainConfig& config() const { return cfg_; }
    Mlp& backbone() { return backbone_; }
    Classifier& classifier() { return classifier_; }
    GraphMemory& graph() { return graph_; }
    const std::optional<ModelSnapshot>& model_snapshot() const { return snapshot_; }
    const std::vector<StepLosses>& loss_history() const { return loss_history_; }
    uint64_t snapshot_forward_count() const { return snapshot_forwards_; }
    int trained_steps() const { return trained_steps_; }

    Checkpoint make_checkpoint() const;

    // learning-rate multiplier for an epoch under the decay schedule
    double lr_factor(int epoch) const;

private:
    struct BatchOutcome;
    BatchOutcome train_one_batch(const Matrix& inputs, const std::vector<int>& labels,
                                 double lr_scale, AdamOptimizer& adam);
    void write_diagnostics(const std::string& dir, int step, int epoch) const;

    Method method_;
    TrainConfig cfg_;
    int input_dim_ = 0;
    Mlp backbone_;
    Classifier classifier_;
    GraphMemory graph_;
    std::optional<ModelSnapshot> snapshot_;
    int trained_steps_ = 0;
    std::vector<StepLosses> loss_history_;
    uint64_t snapshot_forwards_ = 0;
    std::string diag_dir_;  // set by run_stream when diagnostics are on
    Matrix last_vs_, last_vbar_, last_crossw_;  // most recent aka batch, for dumps
};

// Baseline factory: sft = cross-entropy only, lwf = + distillation,
// spd = + similarity-preserving feature distillation, aka = full objective
// with the graph memory.
Trainer make_baseline(Method variant, const TrainConfig& cfg, int input_dim);

// Reconstructs the evaluation-relevant part of a model from a checkpoint.
struct EvalModel {
    Mlp backbone;
    GraphMemory graph;
    Method method = Method::Sft;
    bool gcn_bypass = false;

    Matrix embed(const Matrix& inputs, bool enhance);
};
EvalModel load_eval_model(const Checkpoint& ck);

// Similarity-preserving feature distillation (the spd harness baseline):
// Frobenius gap between row-normalized batch Gram matrices, scaled by 1/N^2.
Var spd_loss_op(Tape& t, Var feats, const Matrix& old_feats);

}  // namespace aka
