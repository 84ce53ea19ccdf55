#include "aka/aka.h"

#include <functional>
#include <string>

#include "core/experiment.hpp"

using namespace aka;

struct aka_experiment {
    ExperimentConfig config;
    std::string resolved_out_dir;
    bool ran = false;
};

namespace {

thread_local std::string g_last_error;

aka_status fail(aka_status code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

aka_status guard(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ConfigError& e) {
        return fail(AKA_ERR_CONFIG, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(AKA_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::exception& e) {
        return fail(AKA_ERR_RUNTIME, e.what());
    }
    g_last_error.clear();
    return AKA_OK;
}

}  // namespace

extern "C" {

const char* aka_version(void) { return "0.1.0"; }

const char* aka_last_error(void) { return g_last_error.c_str(); }

aka_status aka_experiment_open(const char* config_path, aka_experiment** out) {
    if (!config_path || !out) return fail(AKA_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    aka_experiment* exp = nullptr;
    const aka_status st = guard([&] {
        exp = new aka_experiment{ExperimentConfig::load(config_path), "", false};
    });
    if (st == AKA_OK) *out = exp;
    return st;
}

aka_status aka_experiment_set(aka_experiment* exp, const char* key, const char* value) {
    if (!exp || !key || !value) return fail(AKA_ERR_INVALID_ARGUMENT, "null argument");
    if (exp->ran) return fail(AKA_ERR_INVALID_ARGUMENT, "experiment already ran");
    return guard([&] { exp->config.apply_override(key, value); });
}

aka_status aka_experiment_run(aka_experiment* exp) {
    if (!exp) return fail(AKA_ERR_INVALID_ARGUMENT, "null experiment");
    if (exp->ran) return fail(AKA_ERR_INVALID_ARGUMENT, "experiment already ran");
    return guard([&] {
        ExperimentConfig cfg = exp->config;
        cfg.finalize();
        exp->resolved_out_dir = cfg.out_dir;
        run_experiment(exp->config);
        exp->ran = true;
    });
}

const char* aka_experiment_out_dir(const aka_experiment* exp) {
    if (!exp) return "";
    return exp->resolved_out_dir.c_str();
}

void aka_experiment_close(aka_experiment* exp) { delete exp; }

aka_status aka_compare(const char* const* run_dirs, size_t count, const char* out_dir) {
    if (!run_dirs || !out_dir || count == 0)
        return fail(AKA_ERR_INVALID_ARGUMENT, "null argument or empty run list");
    return guard([&] {
        std::vector<std::string> dirs;
        for (size_t i = 0; i < count; ++i) {
            if (!run_dirs[i]) throw std::invalid_argument("null run directory");
            dirs.emplace_back(run_dirs[i]);
        }
        compare_runs(dirs, out_dir);
    });
}

aka_status aka_diagnose(const char* run_dir, const char* out_dir) {
    if (!run_dir || !out_dir) return fail(AKA_ERR_INVALID_ARGUMENT, "null argument");
    return guard([&] { diagnose_run(run_dir, out_dir); });
}

aka_status aka_evaluate_checkpoint(const char* checkpoint_path, const char* query_csv,
                                   const char* gallery_csv, int enhance, aka_eval_result* out) {
    if (!checkpoint_path || !query_csv || !gallery_csv || !out)
        return fail(AKA_ERR_INVALID_ARGUMENT, "null argument");
    return guard([&] {
        const EnhanceMode mode = enhance < 0   ? EnhanceMode::Auto
                                 : enhance > 0 ? EnhanceMode::On
                                               : EnhanceMode::Off;
        const TaskMetrics m = evaluate_checkpoint(checkpoint_path, query_csv, gallery_csv, mode);
        out->mean_ap = m.mean_ap;
        out->rank1 = m.rank1;
        out->valid_queries = m.valid_queries;
        out->skipped_queries = m.skipped_queries;
    });
}

}  // extern "C"
