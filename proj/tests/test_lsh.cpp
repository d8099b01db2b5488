#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "tim/embedding.hpp"
#include "tim/error.hpp"
#include "tim/lsh.hpp"

using tim::EmbeddingVector;
using tim::ProjectionMatrix;

namespace {

EmbeddingVector vec(std::vector<double> values) {
    EmbeddingVector v;
    v.values = std::move(values);
    return v;
}

}  // namespace

TEST_CASE("generate matches the frozen splitmix64 transcripts") {
    auto p1 = ProjectionMatrix::generate(2, 4, 7);
    CHECK(p1.entries() == oracle::kEntriesSeed7Dim2B4);
    CHECK(p1.dim() == 2);
    CHECK(p1.buckets() == 4);
    CHECK(p1.seed() == 7);
    CHECK_FALSE(p1.synthetic());

    auto p2 = ProjectionMatrix::generate(3, 6, 12345);
    CHECK(p2.entries() == oracle::kEntriesSeed12345Dim3B6);
}

TEST_CASE("generate is reproducible and seed-sensitive") {
    auto a = ProjectionMatrix::generate(16, 8, 99);
    auto b = ProjectionMatrix::generate(16, 8, 99);
    auto c = ProjectionMatrix::generate(16, 8, 100);
    CHECK(a == b);
    CHECK(a.entries() != c.entries());
    for (double e : a.entries()) CHECK((e == 1.0 || e == -1.0));
    CHECK(a.entries().size() == 16 * 4);
}

TEST_CASE("generate rejects invalid shapes") {
    CHECK_THROWS_AS(ProjectionMatrix::generate(0, 4, 1), tim::Error);
    CHECK_THROWS_AS(ProjectionMatrix::generate(4, 0, 1), tim::Error);
    CHECK_THROWS_AS(ProjectionMatrix::generate(4, 3, 1), tim::Error);
    CHECK_THROWS_AS(ProjectionMatrix::generate(4, 7, 1), tim::Error);
    try {
        ProjectionMatrix::generate(4, 3, 1);
        FAIL("expected error");
    } catch (const tim::Error& e) {
        CHECK(e.code() == tim::errc::invalid_dimension);
    }
}

TEST_CASE("worked example: identity-like entries") {
    // R = [[1, 0], [0, 1]] over dim 2, buckets 4.
    auto proj = ProjectionMatrix::with_entries(2, 4, {1.0, 0.0, 0.0, 1.0});
    CHECK(proj.synthetic());

    SUBCASE("x = (1, 0)") {
        auto x = vec({1.0, 0.0});
        CHECK(tim::lsh_bucket(x, proj) == 0);
        CHECK(tim::probe_order(x, proj) == std::vector<std::size_t>{0, 1, 3, 2});
    }
    SUBCASE("x = (0, -2)") {
        auto x = vec({0.0, -2.0});
        CHECK(tim::lsh_bucket(x, proj) == 3);
        CHECK(tim::probe_order(x, proj) == std::vector<std::size_t>{3, 0, 2, 1});
    }
    SUBCASE("tie goes to the lowest index") {
        auto x = vec({1.0, 1.0});
        CHECK(tim::lsh_bucket(x, proj) == 0);
    }
}

TEST_CASE("scores is the explicit concatenation [xR; -xR]") {
    auto proj = ProjectionMatrix::generate(6, 8, 2024);
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        auto x = oracle::random_unit(rng, 6);
        auto got = proj.scores(x);
        auto want = oracle::concat_scores(x.values, proj.entries(), 8);
        REQUIRE(got.size() == 8);
        for (std::size_t i = 0; i < 8; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
        for (std::size_t i = 0; i < 4; ++i) CHECK(got[i + 4] == doctest::Approx(-got[i]));
    }
}

TEST_CASE("bucket agrees with brute force over random inputs") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t dim = 2 + rng() % 30;
        std::size_t buckets = 2 * (1 + rng() % 16);
        auto proj = ProjectionMatrix::generate(dim, buckets, rng());
        auto x = oracle::random_unit(rng, dim);
        CHECK(tim::lsh_bucket(x, proj) ==
              oracle::brute_force_hash(x.values, proj.entries(), buckets));
    }
}

TEST_CASE("bucket is invariant under positive scaling") {
    std::mt19937_64 rng(7);
    auto proj = ProjectionMatrix::generate(12, 16, 3);
    for (int trial = 0; trial < 50; ++trial) {
        auto x = oracle::random_unit(rng, 12);
        std::size_t base = tim::lsh_bucket(x, proj);
        for (double c : {0.01, 1.0, 1000.0}) {
            auto scaled = x;
            for (double& v : scaled.values) v *= c;
            CHECK(tim::lsh_bucket(scaled, proj) == base);
        }
    }
}

TEST_CASE("probe order is a permutation led by the bucket") {
    std::mt19937_64 rng(11);
    auto proj = ProjectionMatrix::generate(10, 12, 77);
    for (int trial = 0; trial < 50; ++trial) {
        auto x = oracle::random_unit(rng, 10);
        auto order = tim::probe_order(x, proj);
        REQUIRE(order.size() == 12);
        CHECK(order.front() == tim::lsh_bucket(x, proj));
        std::vector<bool> seen(12, false);
        auto scores = proj.scores(x);
        for (std::size_t i = 0; i < order.size(); ++i) {
            CHECK_FALSE(seen[order[i]]);
            seen[order[i]] = true;
            if (i > 0) {
                // Non-increasing scores; equal scores keep index order.
                CHECK(scores[order[i - 1]] >= scores[order[i]]);
                if (scores[order[i - 1]] == scores[order[i]]) {
                    CHECK(order[i - 1] < order[i]);
                }
            }
        }
    }
}

TEST_CASE("invalid queries are rejected") {
    auto proj = ProjectionMatrix::generate(4, 4, 1);
    CHECK_THROWS_AS(tim::lsh_bucket(vec({1.0, 2.0}), proj), tim::Error);
    CHECK_THROWS_AS(tim::lsh_bucket(vec({0.0, 0.0, 0.0, 0.0}), proj), tim::Error);
    CHECK_THROWS_AS(tim::lsh_bucket(vec({1.0, 2.0, std::nan(""), 4.0}), proj), tim::Error);
    try {
        tim::lsh_bucket(vec({0.0, 0.0, 0.0, 0.0}), proj);
        FAIL("expected error");
    } catch (const tim::Error& e) {
        CHECK(e.code() == tim::errc::zero_vector);
    }
}

TEST_CASE("single-bucket layout degenerates cleanly") {
    auto proj = ProjectionMatrix::generate(4, 1, 9);
    CHECK(proj.entries().empty());
    auto x = vec({0.5, -0.5, 0.25, 1.0});
    CHECK(proj.scores(x) == std::vector<double>{0.0});
    CHECK(tim::lsh_bucket(x, proj) == 0);
    CHECK(tim::probe_order(x, proj) == std::vector<std::size_t>{0});
    // Validation still applies.
    CHECK_THROWS_AS(proj.scores(vec({0.0, 0.0, 0.0, 0.0})), tim::Error);
    CHECK_THROWS_AS(proj.scores(vec({1.0})), tim::Error);
}

TEST_CASE("with_entries validates the entry count") {
    CHECK_THROWS_AS(ProjectionMatrix::with_entries(2, 4, {1.0, 2.0, 3.0}), tim::Error);
    CHECK_NOTHROW(ProjectionMatrix::with_entries(2, 4, {1.0, 2.0, 3.0, 4.0}));
}
