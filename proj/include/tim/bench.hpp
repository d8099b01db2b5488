#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include "tim/memory_store.hpp"

namespace tim {

struct BenchReport {
    std::size_t n_thoughts = 0;
    std::size_t n_queries = 0;
    std::size_t buckets = 0;
    std::size_t dim = 0;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    double mean_comparisons_tim = 0.0;
    double mean_comparisons_baseline = 0.0;
    double mean_latency_tim_us = 0.0;
    double mean_latency_baseline_us = 0.0;
    double speedup_ratio = 0.0;  // baseline latency / two-stage latency
};

struct TopKCurve {
    std::vector<std::size_t> ks;
    std::vector<double> accuracy;  // same length as ks, values in [0, 1]
};

struct EvalReport {
    std::size_t n_thoughts = 0;
    std::size_t dim = 0;
    std::size_t buckets = 0;
    double noise = 0.0;
    std::uint64_t seed = 0;
    TopKCurve tim;
    TopKCurve oracle;  // same queries ranked by exhaustive scan
};

// A unit vector with iid standard-normal coordinates before scaling.
EmbeddingVector random_unit_vector(std::mt19937_64& rng, std::size_t dim);

// Exhaustive retrieval: scores every stored pair and returns the top k
// under the same (score desc, ts asc) order as two-stage recall. The
// comparison count always equals the cache size.
RecallResult full_scan_recall(const MemoryCache& cache, const EmbeddingVector& query,
                              std::size_t k);

// Retrieval-cost comparison on a synthetic cache of seeded-random unit
// vectors: runs both two-stage recall and the full-scan baseline over
// fresh random queries, reporting comparison counts (hardware-neutral)
// and wall-clock microseconds (informative only).
BenchReport run_bench(std::size_t n_thoughts, std::size_t buckets, std::size_t dim,
                      std::size_t n_queries, std::size_t k, std::uint64_t seed,
                      std::size_t probe_depth = kDefaultProbeDepth);

// Top-k accuracy methodology on planted ground truth: each query is a
// stored embedding perturbed by `noise` times a random unit vector, then
// renormalized (noise 0 uses the stored embedding verbatim). accuracy@k
// is the fraction of queries whose source thought appears in the top k;
// the report carries both the two-stage curve and the full-scan oracle
// curve over the same queries.
EvalReport eval_topk(std::size_t n_thoughts, std::size_t dim, std::size_t buckets, double noise,
                     const std::vector<std::size_t>& ks, std::uint64_t seed,
                     std::size_t probe_depth = kDefaultProbeDepth);

// CSV emission, one header plus one row (run_bench) or one row per k
// (eval_topk). Column names are part of the interface.
void write_bench_csv(std::ostream& out, const BenchReport& report);
void write_eval_csv(std::ostream& out, const EvalReport& report);

}  // namespace tim
