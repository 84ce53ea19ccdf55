#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "core/backbone.hpp"
#include "core/checkpoint.hpp"
#include "core/rng.hpp"

using namespace aka;

TEST_CASE("extract_features: zero output layer maps everything to zero") {
    Mlp m = Mlp::init(6, {8}, 4, 42);
    m.layers().back().weight.fill(0.0);
    m.layers().back().bias.fill(0.0);
    Rng rng(1);
    Matrix x = rng.normal_matrix(5, 6, 3.0);
    Matrix f = extract_features(x, m);
    for (double v : f.raw()) CHECK(v == 0.0);
}

TEST_CASE("extract_features: deterministic, duplicated inputs give identical rows") {
    Mlp m = Mlp::init(4, {6}, 3, 7);
    Matrix x = Matrix::from_rows({{1.0, -2.0, 0.5, 3.0}, {1.0, -2.0, 0.5, 3.0}});
    Matrix f = extract_features(x, m);
    for (int j = 0; j < 3; ++j) CHECK(f(0, j) == f(1, j));
    Matrix f2 = extract_features(x, m);
    CHECK(f == f2);
}

TEST_CASE("extract_features: shape and finiteness") {
    Mlp m = Mlp::init(10, {16, 12}, 8, 3);
    Rng rng(5);
    Matrix x = rng.normal_matrix(4, 10, 1.0);
    Matrix f = extract_features(x, m);
    CHECK(f.rows() == 4);
    CHECK(f.cols() == 8);
    CHECK(f.all_finite());
}

TEST_CASE("extract_features: input width mismatch is a configuration error") {
    Mlp m = Mlp::init(4, {}, 2, 1);
    Matrix x(3, 5);
    CHECK_THROWS_AS(extract_features(x, m), std::invalid_argument);
}

TEST_CASE("classify: hand-checked cases") {
    SUBCASE("zero features with zero bias give zero logits") {
        Classifier c(3);
        c.grow(4, 2);
        c.bias().fill(0.0);
        FeatureBatch b{Matrix(2, 3), {0, 1}};
        Matrix logits = classify(b, c);
        for (double v : logits.raw()) CHECK(v == 0.0);
    }
    SUBCASE("single class: softmax is exactly one") {
        Classifier c(2);
        c.grow(1, 9);
        Rng rng(2);
        FeatureBatch b{rng.normal_matrix(3, 2, 1.0), {0, 0, 0}};
        Matrix logits = classify(b, c);
        CHECK(logits.cols() == 1);
        for (int i = 0; i < 3; ++i) {
            double row = logits(i, 0);
            softmax_row_inplace(&row, 1);
            CHECK(row == 1.0);
        }
    }
    SUBCASE("2x2 hand-set weights match the manual product") {
        Classifier c(2);
        c.grow(2, 1);
        c.weight() = Matrix::from_rows({{1.0, 2.0}, {3.0, 4.0}});
        c.bias() = Matrix::from_rows({{0.5, -0.5}});
        FeatureBatch b{Matrix::from_rows({{1.0, 1.0}, {2.0, 0.0}}), {0, 1}};
        Matrix logits = classify(b, c);
        CHECK(logits(0, 0) == doctest::Approx(1.0 + 3.0 + 0.5));
        CHECK(logits(0, 1) == doctest::Approx(2.0 + 4.0 - 0.5));
        CHECK(logits(1, 0) == doctest::Approx(2.0 + 0.5));
        CHECK(logits(1, 1) == doctest::Approx(4.0 - 0.5));
    }
}

TEST_CASE("grow_classifier: composition and bit-exact preservation") {
    SUBCASE("first growth from an empty head") {
        Classifier c(4);
        CHECK(c.num_classes() == 0);
        c.grow(5, 3);
        CHECK(c.num_classes() == 5);
    }
    SUBCASE("500 + 500 identities, old weights untouched") {
        Classifier c(8);
        c.grow(500, 11);
        Matrix before_w = c.weight();
        Matrix before_b = c.bias();
        c.grow(500, 11);
        CHECK(c.num_classes() == 1000);
        for (int r = 0; r < 8; ++r)
            for (int k = 0; k < 500; ++k) CHECK(c.weight()(r, k) == before_w(r, k));
        for (int k = 0; k < 500; ++k) CHECK(c.bias()(0, k) == before_b(0, k));
    }
    SUBCASE("grow twice by 3 then 4") {
        Classifier c(2);
        c.grow(3, 1);
        c.grow(4, 1);
        CHECK(c.num_classes() == 7);
    }
    SUBCASE("non-positive growth rejected") {
        Classifier c(2);
        CHECK_THROWS_AS(c.grow(0, 1), std::invalid_argument);
    }
}

TEST_CASE("growth preserves old logits exactly") {
    Rng rng(6);
    Classifier c(5);
    c.grow(4, 21);
    Matrix feats = rng.normal_matrix(6, 5, 2.0);
    Matrix before = c.logits(feats);
    c.grow(3, 21);
    Matrix after = c.logits(feats);
    CHECK(after.cols() == 7);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 4; ++j) CHECK(after(i, j) == before(i, j));
}

TEST_CASE("snapshot: frozen copies survive parameter updates") {
    Mlp m = Mlp::init(3, {4}, 2, 13);
    Classifier c(2);
    c.grow(3, 13);
    ModelSnapshot snap = snapshot(m, c, 1);
    Matrix w0 = snap.backbone.layers()[0].weight;
    // simulate an optimizer step
    m.layers()[0].weight(0, 0) += 1.0;
    c.weight()(0, 0) += 1.0;
    CHECK(snap.backbone.layers()[0].weight == w0);
    CHECK(snap.classifier.weight()(0, 0) != c.weight()(0, 0));
    CHECK(snap.classifier.num_classes() == 3);
    ModelSnapshot snap2 = snapshot(m, c, 1);
    ModelSnapshot snap3 = snapshot(m, c, 1);
    CHECK(snap2.backbone.layers()[0].weight == snap3.backbone.layers()[0].weight);
    CHECK(snap2.classifier.weight() == snap3.classifier.weight());
}

TEST_CASE("checkpoint: bit-exact round-trip") {
    Rng rng(123);
    Checkpoint ck;
    ck.set_meta_int("step", 3);
    ck.set_meta_int("classes", 40);
    ck.set_meta_int("dim", 16);
    ck.metadata["seed"] = "987654321";
    ck.metadata["method"] = "aka";
    ck.tensors["backbone.layer0.weight"] = rng.normal_matrix(7, 5, 1.0);
    ck.tensors["backbone.layer0.bias"] = rng.normal_matrix(1, 5, 1.0);
    ck.tensors["graph.vertices"] = rng.normal_matrix(16, 16, 0.25);
    ck.tensors["empty"] = Matrix(0, 0);
    // adversarial payload: denormals, negative zero, extremes
    Matrix weird(1, 4);
    weird(0, 0) = -0.0;
    weird(0, 1) = 5e-324;
    weird(0, 2) = 1.7976931348623157e308;
    weird(0, 3) = -1.2345678901234567e-100;
    ck.tensors["weird"] = weird;

    const std::string path = (std::filesystem::temp_directory_path() / "aka_ck_test.ckpt").string();
    ck.save(path);
    Checkpoint back = Checkpoint::load(path);
    CHECK(back.meta_int("step") == 3);
    CHECK(back.metadata.at("method") == "aka");
    CHECK(back.metadata.size() == ck.metadata.size());
    REQUIRE(back.tensors.size() == ck.tensors.size());
    for (const auto& [k, m] : ck.tensors) {
        REQUIRE(back.has_tensor(k));
        CHECK(back.tensor(k) == m);
    }
    std::remove(path.c_str());
}

TEST_CASE("checkpoint: load errors are descriptive") {
    CHECK_THROWS_AS(Checkpoint::load("/nonexistent/nowhere.ckpt"), std::runtime_error);
    const std::string path = (std::filesystem::temp_directory_path() / "aka_bad.ckpt").string();
    {
        std::ofstream os(path, std::ios::binary);
        os << "not a checkpoint";
    }
    CHECK_THROWS_AS(Checkpoint::load(path), std::runtime_error);
    std::remove(path.c_str());
}
