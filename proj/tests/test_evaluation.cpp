#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/data.hpp"
#include "core/evaluation.hpp"
#include "core/rng.hpp"
#include "support/retrieval_oracle.hpp"

using namespace aka;

namespace {

RetrievalTask random_task(Rng& rng, int nq, int ng, int dim, int num_ids, bool cameras) {
    RetrievalTask task;
    task.query = rng.normal_matrix(nq, dim, 1.0);
    task.gallery = rng.normal_matrix(ng, dim, 1.0);
    for (int i = 0; i < nq; ++i) {
        task.query_labels.push_back(static_cast<int>(rng.uniform_int(num_ids)));
        if (cameras) task.query_cameras.push_back(static_cast<int>(rng.uniform_int(3)));
    }
    for (int i = 0; i < ng; ++i) {
        task.gallery_labels.push_back(static_cast<int>(rng.uniform_int(num_ids)));
        if (cameras) task.gallery_cameras.push_back(static_cast<int>(rng.uniform_int(3)));
    }
    // guarantee at least one cross-camera match per query label
    for (int i = 0; i < nq && i < ng; ++i) {
        task.gallery_labels[i] = task.query_labels[i];
        if (cameras) task.gallery_cameras[i] = (task.query_cameras[i] + 1) % 3;
    }
    return task;
}

}  // namespace

TEST_CASE("rank_gallery: basic ordering") {
    SUBCASE("the query itself ranks first") {
        Matrix gallery = Matrix::from_rows({{5.0, 0.0}, {1.0, 2.0}, {0.0, 0.0}});
        const double q[2] = {1.0, 2.0};
        std::vector<int> order = rank_gallery(q, 2, gallery);
        CHECK(order[0] == 1);
    }
    SUBCASE("single-element gallery") {
        Matrix gallery = Matrix::from_rows({{9.0}});
        const double q[1] = {0.0};
        std::vector<int> order = rank_gallery(q, 1, gallery);
        REQUIRE(order.size() == 1);
        CHECK(order[0] == 0);
    }
    SUBCASE("empty gallery rejected") {
        Matrix gallery;
        const double q[1] = {0.0};
        CHECK_THROWS_AS(rank_gallery(q, 1, gallery), std::invalid_argument);
    }
    SUBCASE("matches an exhaustive pairwise sort") {
        Rng rng(4);
        Matrix gallery = rng.normal_matrix(5, 3, 1.0);
        Matrix qm = rng.normal_matrix(1, 3, 1.0);
        std::vector<int> order = rank_gallery(qm.row_ptr(0), 3, gallery);
        // selection sort on distances, computed independently
        std::vector<double> dist(5);
        for (int i = 0; i < 5; ++i)
            dist[i] = std::sqrt(squared_distance(qm.row_ptr(0), gallery.row_ptr(i), 3));
        std::vector<int> expect;
        std::vector<bool> used(5, false);
        for (int k = 0; k < 5; ++k) {
            int best = -1;
            for (int i = 0; i < 5; ++i)
                if (!used[i] && (best < 0 || dist[i] < dist[best])) best = i;
            used[best] = true;
            expect.push_back(best);
        }
        CHECK(order == expect);
    }
    SUBCASE("exact ties break to the lower index") {
        Matrix gallery = Matrix::from_rows({{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}});
        const double q[2] = {0.0, 0.0};
        std::vector<int> order = rank_gallery(q, 2, gallery);
        CHECK(order[0] == 0);
        CHECK(order[1] == 1);
        CHECK(order[2] == 2);
    }
}

TEST_CASE("average_precision: closed forms") {
    CHECK(average_precision({1, 1, 1}) == 1.0);
    CHECK(average_precision({1, 0, 1}) == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0).epsilon(1e-15));
    // single relevant at rank r of N -> 1/r
    CHECK(average_precision({0, 0, 0, 1, 0}) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(average_precision({1, 0, 0, 0}) == 1.0);
    CHECK_THROWS_AS(average_precision({0, 0, 0}), std::invalid_argument);
}

TEST_CASE("evaluate_task: separable case is perfect") {
    // gallery duplicates each query vector once; nearest neighbour is the match
    Rng rng(8);
    RetrievalTask task;
    task.query = rng.normal_matrix(6, 4, 2.0);
    task.gallery = Matrix(6, 4);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 4; ++j) task.gallery(i, j) = task.query(i, j);
    for (int i = 0; i < 6; ++i) {
        task.query_labels.push_back(i);
        task.gallery_labels.push_back(i);
    }
    TaskMetrics m = evaluate_task(task);
    CHECK(m.mean_ap == 1.0);
    CHECK(m.rank1 == 1.0);
    CHECK(m.valid_queries == 6);
    CHECK(m.skipped_queries == 0);
}

TEST_CASE("evaluate_task: random features over 2 balanced classes give rank1 near 0.5") {
    // Monte-Carlo oracle: with iid features the top-1 item is a uniform draw
    // from the gallery, so P(hit) = fraction of same-class items = 0.5.
    Rng rng(2026);
    double hits = 0.0;
    int trials = 0;
    for (int t = 0; t < 300; ++t) {
        RetrievalTask task;
        task.query = rng.normal_matrix(2, 6, 1.0);
        task.gallery = rng.normal_matrix(10, 6, 1.0);
        task.query_labels = {0, 1};
        for (int g = 0; g < 10; ++g) task.gallery_labels.push_back(g % 2);
        TaskMetrics m = evaluate_task(task);
        hits += m.rank1 * m.valid_queries;
        trials += m.valid_queries;
    }
    const double mean = hits / trials;  // 600 Bernoulli(0.5) draws
    CHECK(mean > 0.42);
    CHECK(mean < 0.58);
}

TEST_CASE("evaluate_task: equals the brute-force oracle on random tasks") {
    Rng rng(99);
    for (int t = 0; t < 30; ++t) {
        const bool cameras = t % 2 == 1;
        RetrievalTask task = random_task(rng, 6, 15, 4, 4, cameras);
        TaskMetrics fast = evaluate_task(task);
        TaskMetrics brute = aka::testing::brute_force_metrics(task);
        CHECK(fast.valid_queries == brute.valid_queries);
        CHECK(fast.skipped_queries == brute.skipped_queries);
        CHECK(fast.mean_ap == brute.mean_ap);
        CHECK(fast.rank1 == brute.rank1);
    }
}

TEST_CASE("evaluate_task: camera filtering removes same-id same-camera items") {
    RetrievalTask task;
    task.query = Matrix::from_rows({{0.0, 0.0}});
    task.query_labels = {7};
    task.query_cameras = {1};
    // nearest item shares id and camera (excluded); next is a true cross-camera match
    task.gallery = Matrix::from_rows({{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}});
    task.gallery_labels = {7, 7, 3};
    task.gallery_cameras = {1, 2, 1};
    TaskMetrics m = evaluate_task(task);
    CHECK(m.rank1 == 1.0);
    CHECK(m.mean_ap == 1.0);
}

TEST_CASE("evaluate_task: queries with no valid match are dropped and counted") {
    RetrievalTask task;
    task.query = Matrix::from_rows({{0.0}, {1.0}});
    task.query_labels = {1, 2};
    task.gallery = Matrix::from_rows({{0.5}, {0.7}});
    task.gallery_labels = {1, 1};
    TaskMetrics m = evaluate_task(task);
    CHECK(m.valid_queries == 1);
    CHECK(m.skipped_queries == 1);
}

TEST_CASE("metrics are invariant under an orthogonal transform of all embeddings") {
    Rng rng(123);
    RetrievalTask task = random_task(rng, 5, 12, 6, 3, false);
    TaskMetrics before = evaluate_task(task);
    Matrix q = random_orthogonal(6, rng);
    RetrievalTask rotated = task;
    rotated.query = matmul(task.query, q);
    rotated.gallery = matmul(task.gallery, q);
    TaskMetrics after = evaluate_task(rotated);
    CHECK(before.mean_ap == doctest::Approx(after.mean_ap).epsilon(1e-12));
    CHECK(before.rank1 == doctest::Approx(after.rank1).epsilon(1e-12));
}

TEST_CASE("metrics are invariant under gallery permutation") {
    Rng rng(321);
    RetrievalTask task = random_task(rng, 5, 14, 4, 3, false);
    TaskMetrics before = evaluate_task(task);
    std::vector<int> perm = rng.permutation(14);
    RetrievalTask shuffled = task;
    for (int i = 0; i < 14; ++i) {
        for (int j = 0; j < 4; ++j) shuffled.gallery(perm[i], j) = task.gallery(i, j);
        shuffled.gallery_labels[perm[i]] = task.gallery_labels[i];
    }
    TaskMetrics after = evaluate_task(shuffled);
    CHECK(before.mean_ap == doctest::Approx(after.mean_ap).epsilon(1e-12));
    CHECK(before.rank1 == doctest::Approx(after.rank1).epsilon(1e-12));
}

TEST_CASE("single-relevant AP is 1 only at rank 1") {
    for (int r = 1; r <= 6; ++r) {
        std::vector<char> rel(6, 0);
        rel[r - 1] = 1;
        const double ap = average_precision(rel);
        CHECK(ap == doctest::Approx(1.0 / r).epsilon(1e-15));
        if (r == 1) CHECK(ap == 1.0);
        if (r > 1) CHECK(ap < 1.0);
    }
}

TEST_CASE("aggregate: means over final-step entries") {
    std::vector<MetricsEntry> entries = {
        {1, "d0", "seen", 0.9, 0.95}, {2, "d0", "seen", 0.6, 0.7},
        {1, "d1", "seen", 0.5, 0.55}, {2, "d1", "seen", 0.4, 0.5},
        {1, "unseen", "unseen", 0.3, 0.35}, {2, "unseen", "unseen", 0.45, 0.5},
    };
    SUBCASE("single seen domain: aggregate equals the metric") {
        Aggregates a = aggregate(entries, {"d0"}, {"unseen"}, 2);
        CHECK(a.sbar_map == 0.6);
        CHECK(a.ubar_map == 0.45);
    }
    SUBCASE("two seen domains") {
        Aggregates a = aggregate(entries, {"d0", "d1"}, {"unseen"}, 2);
        CHECK(a.sbar_map == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(a.sbar_rank1 == doctest::Approx(0.6).epsilon(1e-15));
    }
    SUBCASE("equal per-domain values collapse to that value") {
        std::vector<MetricsEntry> eq = {{3, "a", "seen", 0.7, 0.8}, {3, "b", "seen", 0.7, 0.8}};
        Aggregates a = aggregate(eq, {"a", "b"}, {}, 3);
        CHECK(a.sbar_map == doctest::Approx(0.7).epsilon(1e-15));
    }
    SUBCASE("missing entry is a protocol error") {
        CHECK_THROWS_AS(aggregate(entries, {"d0", "nope"}, {}, 2), std::runtime_error);
    }
    SUBCASE("forgetting trajectory is ordered by step") {
        auto traj = metric_trajectory(entries, "d0", true);
        REQUIRE(traj.size() == 2);
        CHECK(traj[0] == std::pair<int, double>{1, 0.9});
        CHECK(traj[1] == std::pair<int, double>{2, 0.6});
    }
}
