#include "trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace aka {

Method parse_method(const std::string& name) {
    if (name == "sft") return Method::Sft;
    if (name == "lwf") return Method::Lwf;
    if (name == "spd") return Method::Spd;
    if (name == "aka") return Method::Aka;
    throw std::invalid_argument("unknown method variant: " + name +
                                " (expected sft|lwf|spd|aka)");
}

std::string method_name(Method m) {
    switch (m) {
        case Method::Sft: return "sft";
        case Method::Lwf: return "lwf";
        case Method::Spd: return "spd";
        case Method::Aka: return "aka";
    }
    return "?";
}

void TrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
    if (learning_rate <= 0.0) throw std::invalid_argument("config: learning_rate must be > 0");
    if (identities_per_batch < 2)
        throw std::invalid_argument("config: need >= 2 identities per batch");
    if (samples_per_identity < 1)
        throw std::invalid_argument("config: need >= 1 sample per identity");
    if (num_vertices < 1) throw std::invalid_argument("config: num_vertices must be >= 1");
    if (feature_dim < 1) throw std::invalid_argument("config: feature_dim must be >= 1");
    if (weights.gamma < 0.0 || weights.lambda_p < 0.0 || weights.lambda_s < 0.0)
        throw std::invalid_argument("config: loss weights must be >= 0");
}

void AdamOptimizer::step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads,
                         double lr_scale) {
    if (params.size() != grads.size())
        throw std::invalid_argument("adam: params/grads length mismatch");
    if (m_.empty()) {
        for (Matrix* p : params) {
            m_.emplace_back(p->rows(), p->cols());
            v_.emplace_back(p->rows(), p->cols());
        }
    }
    if (m_.size() != params.size()) throw std::logic_error("adam: parameter set changed");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    const double lr = lr_ * lr_scale;
    for (size_t i = 0; i < params.size(); ++i) {
        Matrix& p = *params[i];
        const Matrix& g = grads[i];
        for (size_t j = 0; j < p.size(); ++j) {
            const double gj = g.raw()[j];
            m_[i].raw()[j] = beta1_ * m_[i].raw()[j] + (1.0 - beta1_) * gj;
            v_[i].raw()[j] = beta2_ * v_[i].raw()[j] + (1.0 - beta2_) * gj * gj;
            const double mhat = m_[i].raw()[j] / bc1;
            const double vhat = v_[i].raw()[j] / bc2;
            p.raw()[j] -= lr * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

namespace {

// Similarity-preserving distillation (harness baseline): Frobenius gap between
// the row-normalized batch Gram matrices of new and old features.
Var row_l2_normalize(Tape& t, Var x) {
    const Matrix& xv = t.value(x);
    Matrix out = xv;
    std::vector<double> norms(xv.rows());
    for (int r = 0; r < xv.rows(); ++r) {
        norms[r] = std::sqrt(dot(xv.row_ptr(r), xv.row_ptr(r), xv.cols()));
        if (norms[r] > 0.0)
            for (int c = 0; c < xv.cols(); ++c) out(r, c) /= norms[r];
    }
    const Matrix y = out;
    return t.custom({x}, std::move(out), [x, y, norms](Tape& tp, const Matrix& g) {
        Matrix gx(y.rows(), y.cols());
        for (int r = 0; r < y.rows(); ++r) {
            if (norms[r] == 0.0) continue;
            double gy = 0.0;
            for (int c = 0; c < y.cols(); ++c) gy += g(r, c) * y(r, c);
            for (int c = 0; c < y.cols(); ++c) gx(r, c) = (g(r, c) - y(r, c) * gy) / norms[r];
        }
        tp.accumulate_grad(x, gx);
    });
}

Var sq_frobenius_gap(Tape& t, Var a, const Matrix& target, double scale) {
    const Matrix& av = t.value(a);
    Matrix out(1, 1);
    for (size_t i = 0; i < av.size(); ++i) {
        const double diff = av.raw()[i] - target.raw()[i];
        out(0, 0) += diff * diff;
    }
    out(0, 0) *= scale;
    return t.custom({a}, std::move(out), [a, target, scale](Tape& tp, const Matrix& g) {
        const Matrix& av = tp.value(a);
        Matrix ga(av.rows(), av.cols());
        for (size_t i = 0; i < av.size(); ++i)
            ga.raw()[i] = 2.0 * scale * (av.raw()[i] - target.raw()[i]) * g(0, 0);
        tp.accumulate_grad(a, ga);
    });
}

}  // namespace

Var spd_loss_op(Tape& t, Var feats, const Matrix& old_feats) {
    const int n = t.value(feats).rows();
    Tape ref;
    Var old_gram = ref.matmul(ref.constant(old_feats), ref.transpose(ref.constant(old_feats)));
    const Matrix old_gn = ref.value(row_l2_normalize(ref, old_gram));
    Var gram = t.matmul(feats, t.transpose(feats));
    Var gn = row_l2_normalize(t, gram);
    return sq_frobenius_gap(t, gn, old_gn, 1.0 / (static_cast<double>(n) * n));
}

namespace {

void write_matrix_csv(const Matrix& m, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    char buf[32];
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
            os << (c ? "," : "") << buf;
        }
        os << "\n";
    }
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

Trainer::Trainer(Method method, const TrainConfig& cfg, int input_dim)
    : method_(method), cfg_(cfg), input_dim_(input_dim) {
    cfg_.validate();
    if (input_dim < 1) throw std::invalid_argument("trainer: input_dim must be >= 1");
    backbone_ = Mlp::init(input_dim, cfg_.hidden_dims, cfg_.feature_dim, cfg_.seed);
    classifier_ = Classifier(cfg_.feature_dim);
    // initialized for every method so that checkpoints are uniform; only the
    // aka method binds it to the tape
    graph_ = GraphMemory::init(cfg_.num_vertices, cfg_.feature_dim, cfg_.seed);
}

Trainer make_baseline(Method variant, const TrainConfig& cfg, int input_dim) {
    return Trainer(variant, cfg, input_dim);
}

std::vector<int> Trainer::sample_batch(const DomainDataset& dataset, int p, int k, Rng& rng) {
    auto by_id = dataset.train_index_by_identity();
    if (static_cast<int>(by_id.size()) < p)
        throw std::invalid_argument("sample_batch: dataset has " + std::to_string(by_id.size()) +
                                    " identities, need P=" + std::to_string(p));
    std::vector<int> id_order = rng.permutation(static_cast<int>(by_id.size()));
    std::vector<int> out;
    out.reserve(static_cast<size_t>(p) * k);
    for (int pi = 0; pi < p; ++pi) {
        const std::vector<int>& pool = by_id[id_order[pi]].second;
        if (static_cast<int>(pool.size()) >= k) {
            std::vector<int> picks = rng.permutation(static_cast<int>(pool.size()));
            for (int s = 0; s < k; ++s) out.push_back(pool[picks[s]]);
        } else {
            for (int s = 0; s < k; ++s)
                out.push_back(pool[rng.uniform_int(pool.size())]);
        }
    }
    return out;
}

double Trainer::lr_factor(int epoch) const {
    double f = 1.0;
    for (double frac : cfg_.lr_decay_fractions)
        if (epoch >= static_cast<int>(frac * cfg_.epochs)) f *= cfg_.lr_decay_factor;
    return f;
}

struct Trainer::BatchOutcome {
    StepLosses losses;
};

Trainer::BatchOutcome Trainer::train_one_batch(const Matrix& inputs,
                                               const std::vector<int>& labels, double lr_scale,
                                               AdamOptimizer& adam) {
    Tape tape;
    Mlp::Bound bb = backbone_.bind(tape, true);
    Classifier::Bound cb = classifier_.bind(tape, true);
    Var features = backbone_.forward(tape, bb, tape.constant(inputs));
    Var logits = classifier_.forward(tape, cb, features);
    Var l_c = cross_entropy_op(tape, logits, labels);
    Var total = l_c;

    StepLosses rec;
    rec.l_c = tape.scalar_value(l_c);

    const bool distill = method_ != Method::Sft && snapshot_.has_value();
    if (distill) {
        ++snapshot_forwards_;
        const Matrix old_features = snapshot_->backbone.features(inputs);
        if (method_ == Method::Spd) {
            Var l_spd = spd_loss_op(tape, features, old_features);
            rec.l_d = tape.scalar_value(l_spd);
            total = tape.add(total, tape.scale(l_spd, cfg_.weights.gamma));
        } else {
            const Matrix old_logits = snapshot_->classifier.logits(old_features);
            Var l_d = distillation_op(tape, logits, old_logits,
                                      snapshot_->classifier.num_classes());
            rec.l_d = tape.scalar_value(l_d);
            total = tape.add(total, tape.scale(l_d, cfg_.weights.gamma));
        }
    }

    GraphMemoryVars gv;
    const bool use_graph = method_ == Method::Aka && !cfg_.gcn_bypass;
    if (use_graph) {
        // detachment: the plasticity/stability gradients update psi only
        Var detached = tape.detach(features);
        gv = bind_graph_memory(tape, graph_, true);
        GraphForward fw = graph_forward(tape, detached, gv);
        const std::vector<Triplet> triplets = mine_triplets(tape.value(fw.aggregated), labels);
        Var l_p = plasticity_op(tape, fw.aggregated, triplets, inputs.rows());
        rec.l_p = tape.scalar_value(l_p);
        total = tape.add(total, tape.scale(l_p, cfg_.weights.lambda_p));
        if (snapshot_.has_value() && !snapshot_->akg_vertices.empty()) {
            Var l_s = stability_op(tape, gv.vertices, snapshot_->akg_vertices);
            rec.l_s = tape.scalar_value(l_s);
            total = tape.add(total, tape.scale(l_s, cfg_.weights.lambda_s));
        }
        last_vs_ = tape.value(detached);
        last_vbar_ = tape.value(fw.propagated);
        last_crossw_ = tape.value(fw.cross);
    }

    rec.total = tape.scalar_value(total);
    tape.backward(total);

    std::vector<Matrix*> params;
    std::vector<Matrix> grads;
    for (size_t i = 0; i < backbone_.layers().size(); ++i) {
        params.push_back(&backbone_.layers()[i].weight);
        grads.push_back(tape.grad(bb.layers[i].first));
        params.push_back(&backbone_.layers()[i].bias);
        grads.push_back(tape.grad(bb.layers[i].second));
    }
    params.push_back(&classifier_.weight());
    grads.push_back(tape.grad(cb.weight));
    params.push_back(&classifier_.bias());
    grads.push_back(tape.grad(cb.bias));
    if (use_graph) {
        params.push_back(&graph_.vertices);
        grads.push_back(tape.grad(gv.vertices));
        params.push_back(&graph_.w_isg);
        grads.push_back(tape.grad(gv.w_isg));
        params.push_back(&graph_.b_isg);
        grads.push_back(tape.grad(gv.b_isg));
        params.push_back(&graph_.w_akg);
        grads.push_back(tape.grad(gv.w_akg));
        params.push_back(&graph_.b_akg);
        grads.push_back(tape.grad(gv.b_akg));
        params.push_back(&graph_.w_gcn);
        grads.push_back(tape.grad(gv.w_gcn));
    }
    adam.step(params, grads, lr_scale);
    return BatchOutcome{rec};
}

void Trainer::train_domain(int step_index, DomainDataset& dataset) {
    if (step_index != trained_steps_ + 1)
        throw std::logic_error("train_domain: steps must run in order; expected " +
                               std::to_string(trained_steps_ + 1) + ", got " +
                               std::to_string(step_index));
    if (step_index > 1 && !snapshot_.has_value())
        throw std::logic_error("train_domain: missing snapshot of the previous step");
    if (dataset.input_dim() != input_dim_)
        throw std::invalid_argument("train_domain: dataset input width mismatch");

    const int new_classes = dataset.train_identity_count();
    if (new_classes < 1) throw std::invalid_argument("train_domain: dataset has no identities");
    classifier_.grow(new_classes, derive_seed(cfg_.seed, "grow", step_index));
    for (int label : dataset.train_identities())
        if (label < 0 || label >= classifier_.num_classes())
            throw std::invalid_argument("train_domain: label " + std::to_string(label) +
                                        " outside the grown classifier range");

    const int iters = std::max<int>(
        1, static_cast<int>(dataset.train().size()) / cfg_.batch_size());
    Rng batch_rng(derive_seed(cfg_.seed, "batch", step_index));
    AdamOptimizer adam(cfg_.learning_rate);

    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
        const double scale = lr_factor(epoch);
        for (int it = 0; it < iters; ++it) {
            const std::vector<int> idx = sample_batch(dataset, cfg_.identities_per_batch,
                                                      cfg_.samples_per_identity, batch_rng);
            Matrix inputs(static_cast<int>(idx.size()), input_dim_);
            std::vector<int> labels(idx.size());
            for (size_t i = 0; i < idx.size(); ++i) {
                const Sample& s = dataset.train_sample(static_cast<size_t>(idx[i]));
                std::copy(s.input.begin(), s.input.end(), inputs.row_ptr(static_cast<int>(i)));
                labels[i] = s.label;
            }
            BatchOutcome out = train_one_batch(inputs, labels, scale, adam);
            out.losses.step = step_index;
            out.losses.epoch = epoch;
            loss_history_.push_back(out.losses);
        }
        if (!diag_dir_.empty() && method_ == Method::Aka && !cfg_.gcn_bypass)
            write_diagnostics(diag_dir_, step_index, epoch);
    }

    trained_steps_ = step_index;
    ModelSnapshot snap = snapshot(backbone_, classifier_, step_index);
    if (method_ == Method::Aka) snap.akg_vertices = graph_.snapshot_vertices();
    snapshot_ = std::move(snap);
}

void Trainer::write_diagnostics(const std::string& dir, int step, int epoch) const {
    if (last_vs_.empty()) return;
    fs::create_directories(dir);
    const std::string base =
        dir + "/step" + std::to_string(step) + "_epoch" + std::to_string(epoch);
    write_matrix_csv(cosine_matrix(last_vs_, last_vbar_), base + "_cos.csv");
    write_matrix_csv(last_crossw_, base + "_crossw.csv");
}

Matrix Trainer::embed(const Matrix& inputs) const {
    // every method retrieves on backbone features; the graph memory shapes its
    // own state through the plasticity/stability objectives and its enhanced
    // embedding stays available through EvalModel::embed(…, enhance = true)
    return backbone_.features(inputs);
}

RetrievalTask Trainer::make_task(const DomainDataset& dataset) const {
    RetrievalTask task;
    task.query = embed(samples_to_matrix(dataset.query));
    task.query_labels = sample_labels(dataset.query);
    task.gallery = embed(samples_to_matrix(dataset.gallery));
    task.gallery_labels = sample_labels(dataset.gallery);
    const std::vector<int> qc = sample_cameras(dataset.query);
    const std::vector<int> gc = sample_cameras(dataset.gallery);
    const bool any_cam = std::any_of(qc.begin(), qc.end(), [](int c) { return c >= 0; }) ||
                         std::any_of(gc.begin(), gc.end(), [](int c) { return c >= 0; });
    if (any_cam) {
        task.query_cameras = qc;
        task.gallery_cameras = gc;
    }
    return task;
}

Checkpoint Trainer::make_checkpoint() const {
    Checkpoint ck;
    ck.set_meta_int("step", trained_steps_);
    ck.set_meta_int("classes", classifier_.num_classes());
    ck.set_meta_int("dim", cfg_.feature_dim);
    ck.set_meta_int("input_dim", input_dim_);
    ck.set_meta_int("num_vertices", cfg_.num_vertices);
    ck.set_meta_int("gcn_bypass", cfg_.gcn_bypass ? 1 : 0);
    ck.metadata["seed"] = std::to_string(cfg_.seed);
    ck.metadata["method"] = method_name(method_);
    for (size_t i = 0; i < backbone_.layers().size(); ++i) {
        const std::string base = "backbone.layer" + std::to_string(i);
        ck.tensors[base + ".weight"] = backbone_.layers()[i].weight;
        ck.tensors[base + ".bias"] = backbone_.layers()[i].bias;
    }
    ck.set_meta_int("backbone_layers", static_cast<int64_t>(backbone_.layers().size()));
    ck.tensors["classifier.weight"] = classifier_.weight();
    ck.tensors["classifier.bias"] = classifier_.bias();
    ck.tensors["graph.vertices"] = graph_.vertices;
    ck.tensors["graph.w_isg"] = graph_.w_isg;
    ck.tensors["graph.b_isg"] = graph_.b_isg;
    ck.tensors["graph.w_akg"] = graph_.w_akg;
    ck.tensors["graph.b_akg"] = graph_.b_akg;
    ck.tensors["graph.w_gcn"] = graph_.w_gcn;
    return ck;
}

EvalModel load_eval_model(const Checkpoint& ck) {
    EvalModel m;
    const int nlayers = static_cast<int>(ck.meta_int("backbone_layers"));
    std::vector<LinearLayer> layers;
    for (int i = 0; i < nlayers; ++i) {
        const std::string base = "backbone.layer" + std::to_string(i);
        layers.push_back(LinearLayer{ck.tensor(base + ".weight"), ck.tensor(base + ".bias")});
    }
    m.backbone = Mlp::from_layers(std::move(layers));
    m.graph.vertices = ck.tensor("graph.vertices");
    m.graph.w_isg = ck.tensor("graph.w_isg");
    m.graph.b_isg = ck.tensor("graph.b_isg");
    m.graph.w_akg = ck.tensor("graph.w_akg");
    m.graph.b_akg = ck.tensor("graph.b_akg");
    m.graph.w_gcn = ck.tensor("graph.w_gcn");
    m.method = parse_method(ck.metadata.at("method"));
    m.gcn_bypass = ck.meta_int("gcn_bypass") != 0;
    return m;
}

Matrix EvalModel::embed(const Matrix& inputs, bool enhance) {
    const Matrix features = backbone.features(inputs);
    if (enhance) return enhance_independent(features, graph).aggregated;
    return features;
}

MetricsReport Trainer::run_stream(DomainStream& stream, const std::string& out_dir) {
    if (stream.domains.empty()) throw std::invalid_argument("run_stream: empty stream");
    for (const DomainDataset& d : stream.domains)
        if (d.input_dim() != input_dim_)
            throw std::invalid_argument("run_stream: domain '" + d.name +
                                        "' input width mismatch");

    const bool persist = !out_dir.empty();
    std::ofstream metrics_csv, losses_csv;
    if (persist) {
        fs::create_directories(out_dir);
        metrics_csv.open(fs::path(out_dir) / "metrics.csv");
        losses_csv.open(fs::path(out_dir) / "losses.csv");
        if (!metrics_csv || !losses_csv)
            throw std::runtime_error("run_stream: cannot write into " + out_dir);
        metrics_csv << "step,domain,split,mAP,rank1\n";
        losses_csv << "step,epoch,L_c,L_d,L_p,L_s,L_total\n";
        if (cfg_.diagnostics && method_ == Method::Aka && !cfg_.gcn_bypass)
            diag_dir_ = (fs::path(out_dir) / "diag").string();
    }

    MetricsReport report;
    const int total_steps = static_cast<int>(stream.domains.size());
    size_t losses_written = 0;
    for (int t = 1; t <= total_steps; ++t) {
        train_domain(t, stream.domains[t - 1]);
        if (persist) {
            make_checkpoint().save((fs::path(out_dir) / ("step_" + std::to_string(t) + ".ckpt"))
                                       .string());
            for (; losses_written < loss_history_.size(); ++losses_written) {
                const StepLosses& l = loss_history_[losses_written];
                losses_csv << l.step << "," << l.epoch << "," << fmt(l.l_c) << "," << fmt(l.l_d)
                           << "," << fmt(l.l_p) << "," << fmt(l.l_s) << "," << fmt(l.total)
                           << "\n";
            }
            losses_csv.flush();
        }
        // evaluate every stream test set plus the unseen pool at every step;
        // rows go to disk immediately so an aborted run keeps a partial report
        auto record = [&](const MetricsEntry& e) {
            report.entries.push_back(e);
            if (persist) {
                metrics_csv << e.step << "," << e.domain << "," << e.split << ","
                            << fmt(e.mean_ap) << "," << fmt(e.rank1) << "\n";
                metrics_csv.flush();
            }
        };
        for (const DomainDataset& d : stream.domains) {
            const TaskMetrics m = evaluate_task(make_task(d));
            record(MetricsEntry{t, d.name, "seen", m.mean_ap, m.rank1});
        }
        if (!stream.unseen.query.empty()) {
            const TaskMetrics m = evaluate_task(make_task(stream.unseen));
            record(MetricsEntry{t, stream.unseen.name, "unseen", m.mean_ap, m.rank1});
        }
        // previous training data is never read again
        stream.domains[t - 1].release_train();
    }

    report.final_step = total_steps;
    std::vector<std::string> seen_names, unseen_names;
    for (const DomainDataset& d : stream.domains) seen_names.push_back(d.name);
    if (!stream.unseen.query.empty()) unseen_names.push_back(stream.unseen.name);
    report.aggregates = aggregate(report.entries, seen_names, unseen_names, total_steps);
    if (persist) {
        metrics_csv << total_steps << ",all,sbar," << fmt(report.aggregates.sbar_map) << ","
                    << fmt(report.aggregates.sbar_rank1) << "\n";
        if (!unseen_names.empty())
            metrics_csv << total_steps << ",all,ubar," << fmt(report.aggregates.ubar_map) << ","
                        << fmt(report.aggregates.ubar_rank1) << "\n";
        metrics_csv.flush();
    }
    return report;
}

}  // namespace aka
