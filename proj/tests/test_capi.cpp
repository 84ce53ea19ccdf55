// Exercises the public extern-C surface through the shared library.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "aka/aka.h"

namespace fs = std::filesystem;

namespace {

std::string write_tiny_config(const fs::path& dir, const std::string& out_dir) {
    fs::create_directories(dir);
    const fs::path p = dir / "config.json";
    std::ofstream os(p);
    os << R"({
      "method": "lwf",
      "seed": 3,
      "out_dir": ")" << out_dir
       << R"(",
      "stream": {"type": "synthetic", "train_domains": 2, "unseen_domains": 1,
                 "identities_per_domain": 6, "test_identities": 4,
                 "samples_per_identity": 6, "input_dim": 10},
      "train": {"epochs": 1, "identities_per_batch": 3, "samples_per_identity": 2,
                "feature_dim": 8, "num_vertices": 4, "hidden_dims": [12]}
    })";
    return p.string();
}

}  // namespace

TEST_CASE("version and error state") {
    CHECK(std::strlen(aka_version()) > 0);
    CHECK(aka_last_error() != nullptr);
}

TEST_CASE("experiment lifecycle over the C API") {
    const fs::path root = fs::temp_directory_path() / "aka_capi_test";
    fs::remove_all(root);
    const std::string cfg = write_tiny_config(root, (root / "out").string());

    aka_experiment* exp = nullptr;
    REQUIRE(aka_experiment_open(cfg.c_str(), &exp) == AKA_OK);
    REQUIRE(exp != nullptr);
    CHECK(aka_experiment_set(exp, "method", "aka") == AKA_OK);
    CHECK(aka_experiment_set(exp, "seed", "9") == AKA_OK);
    CHECK(aka_experiment_set(exp, "bogus", "1") == AKA_ERR_CONFIG);
    CHECK(std::strlen(aka_last_error()) > 0);
    REQUIRE(aka_experiment_run(exp) == AKA_OK);
    CHECK(std::string(aka_experiment_out_dir(exp)) == (root / "out").string());
    CHECK(fs::exists(root / "out" / "metrics.csv"));
    CHECK(aka_experiment_run(exp) == AKA_ERR_INVALID_ARGUMENT);  // single shot
    aka_experiment_close(exp);

    SUBCASE("compare and diagnose") {
        const char* dirs[] = {(root / "out").string().c_str()};
        // note: the pointer must stay alive through the call
        const std::string run_dir = (root / "out").string();
        const std::string cmp_dir = (root / "cmp").string();
        const char* one[] = {run_dir.c_str()};
        CHECK(aka_compare(one, 1, cmp_dir.c_str()) == AKA_OK);
        CHECK(fs::exists(root / "cmp" / "table.csv"));
        (void)dirs;
        const std::string diag_dir = (root / "diag").string();
        CHECK(aka_diagnose(run_dir.c_str(), diag_dir.c_str()) == AKA_OK);
        CHECK(fs::exists(root / "diag" / "heatmap_step1.svg"));
    }
    SUBCASE("evaluate checkpoint error paths") {
        aka_eval_result result;
        CHECK(aka_evaluate_checkpoint(nullptr, "q", "g", -1, &result) ==
              AKA_ERR_INVALID_ARGUMENT);
        CHECK(aka_evaluate_checkpoint("/missing.ckpt", "q.csv", "g.csv", -1, &result) ==
              AKA_ERR_RUNTIME);
    }
    fs::remove_all(root);
}

TEST_CASE("open failures set the error code and message") {
    aka_experiment* exp = nullptr;
    CHECK(aka_experiment_open("/no/such/config.json", &exp) == AKA_ERR_CONFIG);
    CHECK(exp == nullptr);
    CHECK(std::string(aka_last_error()).find("config") != std::string::npos);
    CHECK(aka_experiment_open(nullptr, &exp) == AKA_ERR_INVALID_ARGUMENT);
    CHECK(aka_experiment_set(nullptr, "seed", "1") == AKA_ERR_INVALID_ARGUMENT);
    CHECK(aka_experiment_run(nullptr) == AKA_ERR_INVALID_ARGUMENT);
    const char* no_dirs[] = {nullptr};
    CHECK(aka_compare(no_dirs, 0, "out") == AKA_ERR_INVALID_ARGUMENT);
    CHECK(aka_diagnose("/nowhere", "/tmp/aka_nope") == AKA_ERR_CONFIG);
}
