#include <doctest.h>

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tim/bench.hpp"
#include "tim/error.hpp"
#include "tim/memory_store.hpp"

using tim::MemoryCache;
using tim::ProjectionMatrix;

TEST_CASE("random_unit_vector is unit length and seeded") {
    std::mt19937_64 a(9), b(9), c(10);
    auto va = tim::random_unit_vector(a, 32);
    auto vb = tim::random_unit_vector(b, 32);
    auto vc = tim::random_unit_vector(c, 32);
    CHECK(va == vb);
    CHECK(va.values != vc.values);
    CHECK(tim::l2_norm(va) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("full_scan_recall touches everything and matches the oracle") {
    std::mt19937_64 rng(21);
    MemoryCache cache(ProjectionMatrix::generate(16, 8, 4));
    for (int i = 0; i < 50; ++i) {
        cache.insert("h" + std::to_string(i), "r", "t", "x" + std::to_string(i), 1,
                     oracle::random_unit(rng, 16));
    }
    auto q = oracle::random_unit(rng, 16);
    auto got = tim::full_scan_recall(cache, q, 7);
    CHECK(got.comparisons == 50);
    CHECK(got.probed_buckets.size() == 8);
    auto want = oracle::full_scan(cache.all(), q, 7);
    REQUIRE(got.hits.size() == 7);
    for (std::size_t i = 0; i < 7; ++i) {
        CHECK(got.hits[i].thought.id == want[i].id);
        CHECK(got.hits[i].score == doctest::Approx(want[i].score).epsilon(1e-12));
    }
    CHECK_THROWS_AS(tim::full_scan_recall(cache, q, 0), tim::Error);
}

TEST_CASE("run_bench headline configuration") {
    auto report = tim::run_bench(140, 16, 64, 100, 5, 42);
    CHECK(report.n_thoughts == 140);
    CHECK(report.buckets == 16);
    CHECK(report.k == 5);
    // The baseline always scans the whole cache.
    CHECK(report.mean_comparisons_baseline == 140.0);
    // Two-stage recall stops after a prefix of the buckets.
    CHECK(report.mean_comparisons_tim < 70.0);
    CHECK(report.mean_comparisons_tim > 0.0);
    CHECK(report.mean_latency_baseline_us > 0.0);
    CHECK(report.mean_latency_tim_us > 0.0);
    CHECK(report.speedup_ratio > 0.0);
}

TEST_CASE("run_bench is deterministic in comparison counts") {
    auto a = tim::run_bench(100, 8, 32, 20, 3, 7);
    auto b = tim::run_bench(100, 8, 32, 20, 3, 7);
    CHECK(a.mean_comparisons_tim == b.mean_comparisons_tim);
    CHECK(a.mean_comparisons_baseline == b.mean_comparisons_baseline);
}

TEST_CASE("run_bench with a single bucket degenerates to the baseline") {
    auto report = tim::run_bench(140, 1, 64, 20, 5, 42);
    CHECK(report.mean_comparisons_tim == 140.0);
    CHECK(report.mean_comparisons_baseline == 140.0);
}

TEST_CASE("run_bench validates its arguments") {
    CHECK_THROWS_AS(tim::run_bench(10, 16, 64, 5, 5, 1), tim::Error);  // n < buckets
    CHECK_THROWS_AS(tim::run_bench(0, 1, 64, 5, 5, 1), tim::Error);
    CHECK_THROWS_AS(tim::run_bench(100, 16, 64, 0, 5, 1), tim::Error);
    CHECK_THROWS_AS(tim::run_bench(100, 16, 64, 5, 0, 1), tim::Error);
}

TEST_CASE("eval_topk at zero noise recovers every source exactly") {
    auto report = tim::eval_topk(150, 64, 16, 0.0, {1, 5}, 11);
    REQUIRE(report.tim.ks == std::vector<std::size_t>{1, 5});
    REQUIRE(report.oracle.ks == std::vector<std::size_t>{1, 5});
    CHECK(report.oracle.accuracy[0] == 1.0);
    CHECK(report.tim.accuracy[0] == 1.0);
}

TEST_CASE("eval_topk headline configuration tracks the oracle") {
    auto report = tim::eval_topk(200, 128, 16, 0.3, {1, 5, 10}, 42);
    for (std::size_t i = 0; i < report.tim.ks.size(); ++i) {
        CHECK(report.tim.accuracy[i] >= 0.0);
        CHECK(report.tim.accuracy[i] <= 1.0);
        CHECK(report.oracle.accuracy[i] >= report.tim.accuracy[i] - 1e-12);
        CHECK(report.oracle.accuracy[i] - report.tim.accuracy[i] <= 0.05);
    }
    // Larger k can only help either curve.
    for (std::size_t i = 1; i < report.tim.ks.size(); ++i) {
        CHECK(report.oracle.accuracy[i] >= report.oracle.accuracy[i - 1]);
        CHECK(report.tim.accuracy[i] >= report.tim.accuracy[i - 1]);
    }
}

TEST_CASE("eval_topk validates its arguments") {
    CHECK_THROWS_AS(tim::eval_topk(100, 64, 16, -0.1, {1}, 1), tim::Error);
    CHECK_THROWS_AS(tim::eval_topk(100, 64, 16, 1.0, {1}, 1), tim::Error);
    CHECK_THROWS_AS(tim::eval_topk(100, 64, 16, 0.3, {}, 1), tim::Error);
    CHECK_THROWS_AS(tim::eval_topk(100, 64, 16, 0.3, {5, 1}, 1), tim::Error);  // not ascending
    CHECK_THROWS_AS(tim::eval_topk(100, 64, 16, 0.3, {0, 1}, 1), tim::Error);
}

TEST_CASE("bench CSV carries the fixed schema") {
    auto report = tim::run_bench(100, 8, 32, 10, 3, 7);
    std::stringstream out;
    tim::write_bench_csv(out, report);
    std::string header;
    REQUIRE(std::getline(out, header));
    CHECK(header ==
          "n_thoughts,n_queries,buckets,dim,k,seed,mean_comparisons_tim,"
          "mean_comparisons_baseline,mean_latency_tim_us,mean_latency_baseline_us,"
          "speedup_ratio");
    std::string row;
    REQUIRE(std::getline(out, row));
    CHECK(row.find("100,10,8,32,3,7,") == 0);
    CHECK_FALSE(std::getline(out, row));  // exactly one data row
}

TEST_CASE("eval CSV has one row per k") {
    auto report = tim::eval_topk(100, 64, 8, 0.2, {1, 3, 5}, 13);
    std::stringstream out;
    tim::write_eval_csv(out, report);
    std::string header;
    REQUIRE(std::getline(out, header));
    CHECK(header == "n_thoughts,dim,buckets,noise,seed,k,accuracy_tim,accuracy_oracle");
    std::size_t rows = 0;
    std::string row;
    while (std::getline(out, row)) {
        CHECK(row.find("100,64,8,") == 0);
        ++rows;
    }
    CHECK(rows == 3);
}
