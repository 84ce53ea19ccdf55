#include "experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace aka {
namespace {

[[noreturn]] void config_fail(const std::string& msg) { throw ConfigError(msg); }

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, _] : obj.items())
        if (!known.count(key)) config_fail("config: unknown key '" + key + "' in " + where);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Matrix read_matrix_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
        rows.push_back(std::move(row));
    }
    return Matrix::from_rows(rows);
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) config_fail("config: cannot open " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return from_json_text(ss.str(), path);
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text,
                                                  const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        config_fail("config: " + origin + ": " + e.what());
    }
    ExperimentConfig cfg;
    try {
        reject_unknown_keys(j, {"method", "seed", "out_dir", "order", "stream", "train"},
                            origin);
        if (j.contains("method")) cfg.method = parse_method(j["method"].get<std::string>());
        if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
        if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
        if (j.contains("order")) {
            if (j["order"].is_array()) {
                cfg.order = j["order"].get<std::vector<int>>();
                cfg.order_label = "custom";
            } else {
                cfg.order_label = j["order"].get<std::string>();
            }
        }
        if (j.contains("stream")) {
            const json& s = j["stream"];
            reject_unknown_keys(
                s,
                {"type", "train_domains", "unseen_domains", "identities_per_domain",
                 "test_identities", "samples_per_identity", "query_per_identity",
                 "gallery_per_identity", "input_dim", "signal_dim", "nuisance_scale",
                 "separation", "noise", "shift_rotation",
                 "shift_translation", "noise_scale_growth", "seed", "train_paths",
                 "unseen_paths"},
                origin + " stream");
            if (s.contains("type")) cfg.stream.type = s["type"].get<std::string>();
            if (s.contains("train_domains"))
                cfg.stream.train_domains = s["train_domains"].get<int>();
            if (s.contains("unseen_domains"))
                cfg.stream.unseen_domains = s["unseen_domains"].get<int>();
            SyntheticSpec& sp = cfg.stream.synthetic;
            if (s.contains("identities_per_domain"))
                sp.train_identities = s["identities_per_domain"].get<int>();
            if (s.contains("test_identities"))
                sp.test_identities = s["test_identities"].get<int>();
            if (s.contains("samples_per_identity")) {
                if (s["samples_per_identity"].is_array()) {
                    auto v = s["samples_per_identity"].get<std::vector<int>>();
                    if (v.size() != 2) config_fail("config: samples_per_identity wants [min,max]");
                    sp.min_samples = v[0];
                    sp.max_samples = v[1];
                } else {
                    sp.min_samples = sp.max_samples = s["samples_per_identity"].get<int>();
                }
            }
            if (s.contains("query_per_identity"))
                sp.query_per_identity = s["query_per_identity"].get<int>();
            if (s.contains("gallery_per_identity"))
                sp.gallery_per_identity = s["gallery_per_identity"].get<int>();
            if (s.contains("input_dim")) sp.input_dim = s["input_dim"].get<int>();
            if (s.contains("signal_dim")) sp.signal_dim = s["signal_dim"].get<int>();
            if (s.contains("nuisance_scale"))
                sp.nuisance_scale = s["nuisance_scale"].get<double>();
            if (s.contains("separation")) sp.separation = s["separation"].get<double>();
            if (s.contains("noise")) sp.noise = s["noise"].get<double>();
            if (s.contains("shift_rotation"))
                sp.shift_rotation = s["shift_rotation"].get<double>();
            if (s.contains("shift_translation"))
                sp.shift_translation = s["shift_translation"].get<double>();
            if (s.contains("noise_scale_growth"))
                sp.noise_scale_growth = s["noise_scale_growth"].get<double>();
            if (s.contains("seed")) sp.seed = s["seed"].get<uint64_t>();
            if (s.contains("train_paths"))
                cfg.stream.train_paths = s["train_paths"].get<std::vector<std::string>>();
            if (s.contains("unseen_paths"))
                cfg.stream.unseen_paths = s["unseen_paths"].get<std::vector<std::string>>();
        }
        if (j.contains("train")) {
            const json& t = j["train"];
            reject_unknown_keys(
                t,
                {"epochs", "learning_rate", "lr_decay_fractions", "lr_decay_factor",
                 "identities_per_batch", "samples_per_identity", "feature_dim", "num_vertices",
                 "hidden_dims", "gamma", "lambda_p", "lambda_s", "gcn_bypass", "diagnostics"},
                origin + " train");
            TrainConfig& tc = cfg.train;
            if (t.contains("epochs")) tc.epochs = t["epochs"].get<int>();
            if (t.contains("learning_rate")) tc.learning_rate = t["learning_rate"].get<double>();
            if (t.contains("lr_decay_fractions"))
                tc.lr_decay_fractions = t["lr_decay_fractions"].get<std::vector<double>>();
            if (t.contains("lr_decay_factor"))
                tc.lr_decay_factor = t["lr_decay_factor"].get<double>();
            if (t.contains("identities_per_batch"))
                tc.identities_per_batch = t["identities_per_batch"].get<int>();
            if (t.contains("samples_per_identity"))
                tc.samples_per_identity = t["samples_per_identity"].get<int>();
            if (t.contains("feature_dim")) tc.feature_dim = t["feature_dim"].get<int>();
            if (t.contains("num_vertices")) tc.num_vertices = t["num_vertices"].get<int>();
            if (t.contains("hidden_dims"))
                tc.hidden_dims = t["hidden_dims"].get<std::vector<int>>();
            if (t.contains("gamma")) tc.weights.gamma = t["gamma"].get<double>();
            if (t.contains("lambda_p")) tc.weights.lambda_p = t["lambda_p"].get<double>();
            if (t.contains("lambda_s")) tc.weights.lambda_s = t["lambda_s"].get<double>();
            if (t.contains("gcn_bypass")) tc.gcn_bypass = t["gcn_bypass"].get<bool>();
            if (t.contains("diagnostics")) tc.diagnostics = t["diagnostics"].get<bool>();
        }
    } catch (const json::exception& e) {
        config_fail("config: " + origin + ": " + e.what());
    }
    return cfg;
}

std::string ExperimentConfig::to_json_text() const {
    json j;
    j["method"] = method_name(method);
    j["seed"] = seed;
    j["out_dir"] = out_dir;
    if (!order.empty())
        j["order"] = order;
    else
        j["order"] = order_label;
    json s;
    s["type"] = stream.type;
    if (stream.type == "synthetic") {
        const SyntheticSpec& sp = stream.synthetic;
        s["train_domains"] = stream.train_domains;
        s["unseen_domains"] = stream.unseen_domains;
        s["identities_per_domain"] = sp.train_identities;
        s["test_identities"] = sp.test_identities;
        s["samples_per_identity"] = {sp.min_samples, sp.max_samples};
        s["query_per_identity"] = sp.query_per_identity;
        s["gallery_per_identity"] = sp.gallery_per_identity;
        s["input_dim"] = sp.input_dim;
        s["signal_dim"] = sp.signal_dim;
        s["nuisance_scale"] = sp.nuisance_scale;
        s["separation"] = sp.separation;
        s["noise"] = sp.noise;
        s["shift_rotation"] = sp.shift_rotation;
        s["shift_translation"] = sp.shift_translation;
        s["noise_scale_growth"] = sp.noise_scale_growth;
        s["seed"] = sp.seed;
    } else {
        s["train_paths"] = stream.train_paths;
        s["unseen_paths"] = stream.unseen_paths;
    }
    j["stream"] = s;
    json t;
    t["epochs"] = train.epochs;
    t["learning_rate"] = train.learning_rate;
    t["lr_decay_fractions"] = train.lr_decay_fractions;
    t["lr_decay_factor"] = train.lr_decay_factor;
    t["identities_per_batch"] = train.identities_per_batch;
    t["samples_per_identity"] = train.samples_per_identity;
    t["feature_dim"] = train.feature_dim;
    t["num_vertices"] = train.num_vertices;
    t["hidden_dims"] = train.hidden_dims;
    t["gamma"] = train.weights.gamma;
    t["lambda_p"] = train.weights.lambda_p;
    t["lambda_s"] = train.weights.lambda_s;
    t["gcn_bypass"] = train.gcn_bypass;
    t["diagnostics"] = train.diagnostics;
    j["train"] = t;
    return j.dump(2) + "\n";
}

void ExperimentConfig::apply_override(const std::string& key, const std::string& value) {
    try {
        if (key == "seed") {
            seed = std::stoull(value);
        } else if (key == "method") {
            method = parse_method(value);
        } else if (key == "out") {
            out_dir = value;
        } else if (key == "order") {
            if (value.find(',') != std::string::npos) {
                order.clear();
                std::stringstream ss(value);
                std::string tok;
                while (std::getline(ss, tok, ',')) order.push_back(std::stoi(tok));
                order_label = "custom";
            } else {
                order.clear();
                order_label = value;
            }
        } else {
            config_fail("config: unknown override '" + key + "'");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        config_fail("config: bad value for override '" + key + "': " + e.what());
    }
}

std::vector<int> ExperimentConfig::resolved_order(int domain_count) const {
    if (!order.empty()) {
        if (static_cast<int>(order.size()) != domain_count)
            config_fail("config: order length " + std::to_string(order.size()) +
                        " != domain count " + std::to_string(domain_count));
        return order;
    }
    std::vector<int> perm(domain_count);
    for (int i = 0; i < domain_count; ++i) perm[i] = i;
    if (order_label == "order-1" || order_label.empty()) return perm;
    if (order_label == "order-2") {
        std::reverse(perm.begin(), perm.end());
        return perm;
    }
    config_fail("config: unknown order label '" + order_label +
                "' (use order-1, order-2, or a comma permutation)");
}

void ExperimentConfig::finalize() {
    train.seed = seed;
    if (stream.type == "synthetic") {
        if (stream.synthetic.seed == 0) stream.synthetic.seed = 20240501;  // data seed is fixed
        if (stream.train_domains < 1) config_fail("config: need >= 1 train domain");
        if (stream.unseen_domains < 0) config_fail("config: unseen_domains must be >= 0");
    } else if (stream.type == "paths") {
        if (stream.train_paths.empty()) config_fail("config: train_paths is empty");
    } else {
        config_fail("config: stream type must be 'synthetic' or 'paths'");
    }
    if (const char* root = std::getenv("AKA_OUT_ROOT"); root && root[0] != '\0') {
        if (!out_dir.empty() && !fs::path(out_dir).is_absolute())
            out_dir = (fs::path(root) / out_dir).string();
    }
    try {
        train.validate();
    } catch (const std::invalid_argument& e) {
        config_fail(e.what());
    }
}

DomainStream build_configured_stream(const ExperimentConfig& cfg) {
    std::vector<DomainDataset> train_domains, unseen_domains;
    if (cfg.stream.type == "synthetic") {
        for (int i = 0; i < cfg.stream.train_domains; ++i)
            train_domains.push_back(generate_domain(cfg.stream.synthetic, i));
        for (int i = 0; i < cfg.stream.unseen_domains; ++i)
            unseen_domains.push_back(
                generate_domain(cfg.stream.synthetic, cfg.stream.train_domains + i));
    } else {
        for (const std::string& p : cfg.stream.train_paths)
            train_domains.push_back(ingest_directory(p));
        for (const std::string& p : cfg.stream.unseen_paths)
            unseen_domains.push_back(ingest_directory(p));
    }
    const std::vector<int> order = cfg.resolved_order(static_cast<int>(train_domains.size()));
    return build_stream(std::move(train_domains), std::move(unseen_domains), order,
                        cfg.order_label);
}

namespace {

void emit_run_plots(const MetricsReport& report, const DomainStream& stream,
                    const std::string& out_dir) {
    const fs::path plots = fs::path(out_dir) / "plots";
    fs::create_directories(plots);
    for (const bool use_map : {true, false}) {
        const std::string metric = use_map ? "mAP" : "rank1";
        std::vector<Series> forgetting;
        for (const DomainDataset& d : stream.domains) {
            Series s;
            s.label = d.name;
            for (const auto& [step, v] : metric_trajectory(report.entries, d.name, use_map))
                s.points.emplace_back(step, v);
            forgetting.push_back(std::move(s));
        }
        write_line_chart((plots / ("forgetting_" + metric + ".svg")).string(),
                         "Seen-domain " + metric + " over training steps", "training step",
                         metric, forgetting);
        if (!stream.unseen.query.empty()) {
            Series s;
            s.label = "unseen pool";
            for (const auto& [step, v] :
                 metric_trajectory(report.entries, stream.unseen.name, use_map))
                s.points.emplace_back(step, v);
            write_line_chart((plots / ("generalization_" + metric + ".svg")).string(),
                             "Unseen-domain " + metric + " over training steps", "training step",
                             metric, {s});
        }
    }
}

}  // namespace

MetricsReport run_experiment(const ExperimentConfig& raw_cfg) {
    ExperimentConfig cfg = raw_cfg;
    cfg.finalize();
    if (cfg.out_dir.empty()) config_fail("config: out_dir is required for a run");
    DomainStream stream = build_configured_stream(cfg);
    fs::create_directories(cfg.out_dir);
    {
        std::ofstream os(fs::path(cfg.out_dir) / "config.json");
        if (!os) throw std::runtime_error("cannot write config copy into " + cfg.out_dir);
        os << cfg.to_json_text();
    }
    Trainer trainer = make_baseline(cfg.method, cfg.train, stream.domains.front().input_dim());
    MetricsReport report = trainer.run_stream(stream, cfg.out_dir);
    emit_run_plots(report, stream, cfg.out_dir);
    return report;
}

std::vector<MetricsEntry> read_metrics_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::vector<MetricsEntry> out;
    std::string line;
    if (!std::getline(is, line) || line != "step,domain,split,mAP,rank1")
        throw std::runtime_error(path + ": not a metrics.csv (bad header)");
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string step, domain, split, map_s, rank1_s;
        if (!std::getline(ss, step, ',') || !std::getline(ss, domain, ',') ||
            !std::getline(ss, split, ',') || !std::getline(ss, map_s, ',') ||
            !std::getline(ss, rank1_s, ','))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed row");
        MetricsEntry e;
        e.step = std::stoi(step);
        e.domain = domain;
        e.split = split;
        e.mean_ap = std::stod(map_s);
        e.rank1 = std::stod(rank1_s);
        out.push_back(std::move(e));
    }
    return out;
}

namespace {

struct RunData {
    std::string dir;
    std::string method;
    uint64_t seed = 0;
    std::vector<MetricsEntry> entries;
    int final_step = 0;
    std::vector<std::string> domains;  // seen domains in step order (step 1 row order)
    bool has_unseen = false;
};

RunData load_run(const std::string& dir) {
    RunData run;
    run.dir = dir;
    const fs::path cfg_path = fs::path(dir) / "config.json";
    if (!fs::exists(cfg_path)) config_fail("compare: missing config.json in " + dir);
    ExperimentConfig cfg = ExperimentConfig::load(cfg_path.string());
    run.method = method_name(cfg.method);
    run.seed = cfg.seed;
    const fs::path metrics_path = fs::path(dir) / "metrics.csv";
    if (!fs::exists(metrics_path)) config_fail("compare: missing metrics.csv in " + dir);
    run.entries = read_metrics_csv(metrics_path.string());
    for (const MetricsEntry& e : run.entries) {
        run.final_step = std::max(run.final_step, e.step);
        if (e.step == 1 && e.split == "seen") run.domains.push_back(e.domain);
        run.has_unseen = run.has_unseen || e.split == "unseen";
    }
    if (run.domains.empty()) config_fail("compare: no seen-domain rows in " + dir);
    return run;
}

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;
    int n = 0;
};

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd out;
    out.n = static_cast<int>(xs.size());
    if (xs.empty()) return out;
    for (double x : xs) out.mean += x;
    out.mean /= xs.size();
    double var = 0.0;
    for (double x : xs) var += (x - out.mean) * (x - out.mean);
    out.stddev = xs.size() > 1 ? std::sqrt(var / (xs.size() - 1)) : 0.0;
    return out;
}

double find_metric(const std::vector<MetricsEntry>& entries, int step, const std::string& domain,
                   const std::string& split, bool use_map) {
    for (const MetricsEntry& e : entries)
        if (e.step == step && e.domain == domain && e.split == split)
            return use_map ? e.mean_ap : e.rank1;
    throw std::runtime_error("compare: missing entry " + domain + " step " +
                             std::to_string(step));
}

}  // namespace

void compare_runs(const std::vector<std::string>& run_dirs, const std::string& out_dir) {
    if (run_dirs.empty()) config_fail("compare: no run directories given");
    std::vector<RunData> runs;
    for (const std::string& d : run_dirs) runs.push_back(load_run(d));
    for (const RunData& r : runs) {
        if (r.domains != runs.front().domains || r.final_step != runs.front().final_step ||
            r.has_unseen != runs.front().has_unseen)
            config_fail("compare: run " + r.dir + " covers a different domain set than " +
                        runs.front().dir);
    }
    const std::vector<std::string>& domains = runs.front().domains;
    const int final_step = runs.front().final_step;
    const bool has_unseen = runs.front().has_unseen;

    std::map<std::string, std::vector<const RunData*>> by_method;
    for (const RunData& r : runs) by_method[r.method].push_back(&r);

    fs::create_directories(out_dir);
    std::ofstream table_csv(fs::path(out_dir) / "table.csv");
    std::ofstream table_txt(fs::path(out_dir) / "table.txt");
    if (!table_csv || !table_txt) throw std::runtime_error("compare: cannot write " + out_dir);
    table_csv << "method,runs,domain,mAP_mean,mAP_std,rank1_mean,rank1_std\n";
    table_txt << "Final-step retrieval (mean +/- std over seeds)\n";
    char line[256];
    for (const auto& [method, group] : by_method) {
        auto cell = [&](const std::string& domain, const std::string& split, bool use_map) {
            std::vector<double> xs;
            for (const RunData* r : group)
                xs.push_back(find_metric(r->entries, final_step, domain, split, use_map));
            return mean_std(xs);
        };
        std::vector<std::pair<std::string, std::string>> rows;  // (domain, split)
        for (const std::string& d : domains) rows.emplace_back(d, "seen");
        if (has_unseen) rows.emplace_back("unseen", "unseen");
        rows.emplace_back("all", "sbar");
        if (has_unseen) rows.emplace_back("all", "ubar");
        for (const auto& [domain, split] : rows) {
            const std::string label = split == "seen" || split == "unseen" ? domain : split;
            MeanStd m = cell(domain, split, true);
            MeanStd r1 = cell(domain, split, false);
            table_csv << method << "," << group.size() << "," << label << "," << fmt(m.mean)
                      << "," << fmt(m.stddev) << "," << fmt(r1.mean) << "," << fmt(r1.stddev)
                      << "\n";
            std::snprintf(line, sizeof(line),
                          "%-6s %-14s mAP %6.3f +/- %5.3f   R-1 %6.3f +/- %5.3f (%zu runs)\n",
                          method.c_str(), label.c_str(), m.mean, m.stddev, r1.mean, r1.stddev,
                          group.size());
            table_txt << line;
        }
    }

    // forgetting curve per seen domain, one series per method (seed mean)
    for (const bool use_map : {true, false}) {
        const std::string metric = use_map ? "mAP" : "rank1";
        for (const std::string& domain : domains) {
            std::vector<Series> series;
            for (const auto& [method, group] : by_method) {
                Series s;
                s.label = method;
                for (int step = 1; step <= final_step; ++step) {
                    std::vector<double> xs;
                    for (const RunData* r : group)
                        xs.push_back(find_metric(r->entries, step, domain, "seen", use_map));
                    s.points.emplace_back(step, mean_std(xs).mean);
                }
                series.push_back(std::move(s));
            }
            write_line_chart(
                (fs::path(out_dir) / ("forgetting_" + domain + "_" + metric + ".svg")).string(),
                "Domain " + domain + " " + metric + " over steps", "training step", metric,
                series);
        }
        if (has_unseen) {
            std::vector<Series> series;
            for (const auto& [method, group] : by_method) {
                Series s;
                s.label = method;
                for (int step = 1; step <= final_step; ++step) {
                    std::vector<double> xs;
                    for (const RunData* r : group)
                        xs.push_back(find_metric(r->entries, step, "unseen", "unseen", use_map));
                    s.points.emplace_back(step, mean_std(xs).mean);
                }
                series.push_back(std::move(s));
            }
            write_line_chart((fs::path(out_dir) / ("generalization_" + metric + ".svg")).string(),
                             "Unseen-pool " + metric + " over steps", "training step", metric,
                             series);
        }
    }
}

void diagnose_run(const std::string& run_dir, const std::string& out_dir) {
    const fs::path diag = fs::path(run_dir) / "diag";
    if (!fs::is_directory(diag))
        config_fail("diagnose: no diagnostics in " + run_dir +
                    " (run with train.diagnostics = true and method aka)");
    // pick the last epoch's cosine dump per step
    std::map<int, std::pair<int, fs::path>> best;  // step -> (epoch, path)
    for (const auto& e : fs::directory_iterator(diag)) {
        const std::string name = e.path().filename().string();
        int step = 0, epoch = 0;
        if (std::sscanf(name.c_str(), "step%d_epoch%d_cos.csv", &step, &epoch) == 2) {
            auto it = best.find(step);
            if (it == best.end() || epoch > it->second.first) best[step] = {epoch, e.path()};
        }
    }
    if (best.empty()) config_fail("diagnose: no cosine dumps found under " + diag.string());
    fs::create_directories(out_dir);
    for (const auto& [step, ep] : best) {
        const Matrix cos = read_matrix_csv(ep.second.string());
        write_heatmap((fs::path(out_dir) / ("heatmap_step" + std::to_string(step) + ".svg"))
                          .string(),
                      "cos(V_S, V_bar_S), step " + std::to_string(step) + " epoch " +
                          std::to_string(ep.first),
                      cos, -1.0, 1.0);
    }
}

TaskMetrics evaluate_checkpoint(const std::string& checkpoint_path, const std::string& query_csv,
                                const std::string& gallery_csv, EnhanceMode enhance) {
    EvalModel model = load_eval_model(Checkpoint::load(checkpoint_path));
    const std::vector<Sample> query = load_samples_csv(query_csv);
    const std::vector<Sample> gallery = load_samples_csv(gallery_csv);
    if (query.empty() || gallery.empty())
        throw std::runtime_error("eval: empty query or gallery csv");
    // auto follows the training-time retrieval protocol: raw features
    bool use_enhance = enhance == EnhanceMode::On;
    if (use_enhance && model.gcn_bypass)
        throw std::runtime_error("eval: checkpoint was trained with the graph bypassed");
    RetrievalTask task;
    task.query = model.embed(samples_to_matrix(query), use_enhance);
    task.query_labels = sample_labels(query);
    task.gallery = model.embed(samples_to_matrix(gallery), use_enhance);
    task.gallery_labels = sample_labels(gallery);
    const std::vector<int> qc = sample_cameras(query);
    const std::vector<int> gc = sample_cameras(gallery);
    if (std::any_of(qc.begin(), qc.end(), [](int c) { return c >= 0; }) ||
        std::any_of(gc.begin(), gc.end(), [](int c) { return c >= 0; })) {
        task.query_cameras = qc;
        task.gallery_cameras = gc;
    }
    return evaluate_task(task);
}

}  // namespace aka
