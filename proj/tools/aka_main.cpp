// Command-line front end; talks to the library through the C API only.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aka/aka.h"

namespace {

int exit_code(aka_status st) {
    if (st == AKA_OK) return 0;
    std::fprintf(stderr, "error: %s\n", aka_last_error());
    return st == AKA_ERR_RUNTIME ? 1 : 2;
}

int cmd_run(const std::string& config, const std::string& out, const std::string& seed,
            const std::string& method, const std::string& order) {
    aka_experiment* exp = nullptr;
    aka_status st = aka_experiment_open(config.c_str(), &exp);
    if (st != AKA_OK) return exit_code(st);
    auto set = [&](const char* key, const std::string& value) {
        if (st == AKA_OK && !value.empty()) st = aka_experiment_set(exp, key, value.c_str());
    };
    set("out", out);
    set("seed", seed);
    set("method", method);
    set("order", order);
    if (st == AKA_OK) st = aka_experiment_run(exp);
    if (st == AKA_OK) std::printf("run complete: %s\n", aka_experiment_out_dir(exp));
    aka_experiment_close(exp);
    return exit_code(st);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"aka: lifelong re-identification experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(aka_version()));

    std::string config, out, seed, method, order;
    CLI::App* run = app.add_subcommand("run", "train a domain stream from a config file");
    run->add_option("--config", config, "experiment config (json)")->required();
    run->add_option("--out", out, "output directory (overrides config)");
    run->add_option("--seed", seed, "training seed (overrides config)");
    run->add_option("--method", method, "sft|lwf|spd|aka (overrides config)");
    run->add_option("--order", order, "order-1, order-2, or comma permutation");

    std::vector<std::string> run_dirs;
    std::string cmp_out;
    CLI::App* compare = app.add_subcommand("compare", "tabulate and plot finished runs");
    compare->add_option("dirs", run_dirs, "run directories")->required()->expected(-1);
    compare->add_option("--out", cmp_out, "output directory")->required();

    std::string diag_run, diag_out;
    CLI::App* diagnose = app.add_subcommand("diagnose", "emit cosine-similarity heatmaps");
    diagnose->add_option("dir", diag_run, "run directory")->required();
    diagnose->add_option("--out", diag_out, "output directory")->required();

    std::string ckpt, query_csv, gallery_csv, enhance = "auto";
    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    eval->add_option("--checkpoint", ckpt, "checkpoint file")->required();
    eval->add_option("--query", query_csv, "query csv")->required();
    eval->add_option("--gallery", gallery_csv, "gallery csv")->required();
    eval->add_option("--enhance", enhance, "auto|on|off (default auto)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (run->parsed()) return cmd_run(config, out, seed, method, order);

    if (compare->parsed()) {
        std::vector<const char*> dirs;
        for (const std::string& d : run_dirs) dirs.push_back(d.c_str());
        return exit_code(aka_compare(dirs.data(), dirs.size(), cmp_out.c_str()));
    }

    if (diagnose->parsed()) return exit_code(aka_diagnose(diag_run.c_str(), diag_out.c_str()));

    if (eval->parsed()) {
        int mode = -1;
        if (enhance == "on") mode = 1;
        else if (enhance == "off") mode = 0;
        else if (enhance != "auto") {
            std::fprintf(stderr, "error: --enhance must be auto, on, or off\n");
            return 2;
        }
        aka_eval_result result;
        const aka_status st = aka_evaluate_checkpoint(ckpt.c_str(), query_csv.c_str(),
                                                      gallery_csv.c_str(), mode, &result);
        if (st == AKA_OK)
            std::printf("mAP=%.6f rank1=%.6f valid_queries=%d skipped_queries=%d\n",
                        result.mean_ap, result.rank1, result.valid_queries,
                        result.skipped_queries);
        return exit_code(st);
    }
    return 2;
}
