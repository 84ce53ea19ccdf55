#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "data.hpp"
#include "evaluation.hpp"
#include "trainer.hpp"

namespace aka {

// User-facing configuration/usage problems (exit code 2 at the CLI), as
// opposed to runtime failures (exit code 1).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Stream source: either synthetic generation or on-disk dataset directories.
struct StreamSpec {
    std::string type = "synthetic";  // "synthetic" | "paths"
    // synthetic
    int train_domains = 5;
    int unseen_domains = 2;
    SyntheticSpec synthetic;
    // paths
    std::vector<std::string> train_paths;
    std::vector<std::string> unseen_paths;
};

struct ExperimentConfig {
    Method method = Method::Aka;
    uint64_t seed = 1;
    std::string out_dir;
    std::string order_label = "order-1";
    std::vector<int> order;  // explicit permutation; empty means derive from label
    StreamSpec stream;
    TrainConfig train;

    static ExperimentConfig load(const std::string& path);
    static ExperimentConfig from_json_text(const std::string& text, const std::string& origin);
    std::string to_json_text() const;

    // --seed/--method/--out/--order CLI overrides
    void apply_override(const std::string& key, const std::string& value);
    // resolves order label, propagates seed, applies AKA_OUT_ROOT; throws on
    // inconsistency. Called once before running.
    void finalize();

    std::vector<int> resolved_order(int domain_count) const;
};

DomainStream build_configured_stream(const ExperimentConfig& cfg);

// Runs the experiment and writes config copy, checkpoints, metrics.csv,
// losses.csv, diagnostics and plots under cfg.out_dir.
MetricsReport run_experiment(const ExperimentConfig& cfg);

// Method-comparison table and forgetting/generalization plots from finished
// run directories; repeated seeds of one method are reported as mean +/- std.
void compare_runs(const std::vector<std::string>& run_dirs, const std::string& out_dir);

// Cosine-similarity heatmaps (one per domain step) from a run's diagnostics.
void diagnose_run(const std::string& run_dir, const std::string& out_dir);

enum class EnhanceMode { Auto, On, Off };
TaskMetrics evaluate_checkpoint(const std::string& checkpoint_path, const std::string& query_csv,
                                const std::string& gallery_csv, EnhanceMode enhance);

// Parsed rows of a metrics.csv (aggregate rows included, domain == "all").
std::vector<MetricsEntry> read_metrics_csv(const std::string& path);

}  // namespace aka
