#include "tim/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "tim/error.hpp"

namespace tim {

namespace {

using Clock = std::chrono::steady_clock;

double micros_since(Clock::time_point start) {
    return std::chrono::duration<double, std::micro>(Clock::now() - start).count();
}

void normalize(EmbeddingVector& v) {
    const double norm = l2_norm(v);
    for (double& x : v.values) x /= norm;
}

MemoryCache build_synthetic_cache(std::size_t n_thoughts, std::size_t buckets, std::size_t dim,
                                  std::uint64_t seed, std::mt19937_64& rng) {
    MemoryCache cache(ProjectionMatrix::generate(dim, buckets, seed));
    for (std::size_t i = 0; i < n_thoughts; ++i) {
        const std::string n = std::to_string(i);
        cache.insert("entity_" + n, "relates_to", "object_" + n, "synthetic fact " + n, i,
                     random_unit_vector(rng, dim));
    }
    return cache;
}

}  // namespace

EmbeddingVector random_unit_vector(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    EmbeddingVector v;
    v.values.resize(dim);
    while (true) {
        for (double& x : v.values) x = gauss(rng);
        const double norm = l2_norm(v);
        if (norm > 1e-12) {
            for (double& x : v.values) x /= norm;
            return v;
        }
    }
}

RecallResult full_scan_recall(const MemoryCache& cache, const EmbeddingVector& query,
                              std::size_t k) {
    if (k == 0) {
        raise(errc::invalid_k, "k must be >= 1");
    }
    RecallResult result;
    for (std::size_t b = 0; b < cache.bucket_count(); ++b) {
        result.probed_buckets.push_back(b);
        for (const StoredThought& stored : cache.group(b)) {
            result.hits.push_back({stored.thought, cosine_similarity(query, stored.embedding)});
            ++result.comparisons;
        }
    }
    std::sort(result.hits.begin(), result.hits.end(),
              [](const ScoredThought& a, const ScoredThought& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.thought.ts < b.thought.ts;
              });
    if (result.hits.size() > k) result.hits.resize(k);
    return result;
}

BenchReport run_bench(std::size_t n_thoughts, std::size_t buckets, std::size_t dim,
                      std::size_t n_queries, std::size_t k, std::uint64_t seed,
                      std::size_t probe_depth) {
    if (buckets < 1 || n_thoughts < buckets) {
        raise(errc::invalid_parameter, "need n_thoughts >= buckets >= 1");
    }
    if (dim < 1 || n_queries < 1 || k < 1) {
        raise(errc::invalid_parameter, "dim, n_queries and k must be >= 1");
    }

    std::mt19937_64 rng(seed);
    const MemoryCache cache = build_synthetic_cache(n_thoughts, buckets, dim, seed, rng);

    BenchReport report;
    report.n_thoughts = n_thoughts;
    report.n_queries = n_queries;
    report.buckets = buckets;
    report.dim = dim;
    report.k = k;
    report.seed = seed;

    double comparisons_tim = 0.0, comparisons_baseline = 0.0;
    double latency_tim = 0.0, latency_baseline = 0.0;
    for (std::size_t q = 0; q < n_queries; ++q) {
        const EmbeddingVector query = random_unit_vector(rng, dim);

        auto start = Clock::now();
        const RecallResult two_stage = cache.recall(query, k, probe_depth);
        latency_tim += micros_since(start);
        comparisons_tim += static_cast<double>(two_stage.comparisons);

        start = Clock::now();
        const RecallResult full = full_scan_recall(cache, query, k);
        latency_baseline += micros_since(start);
        comparisons_baseline += static_cast<double>(full.comparisons);
    }

    const double nq = static_cast<double>(n_queries);
    report.mean_comparisons_tim = comparisons_tim / nq;
    report.mean_comparisons_baseline = comparisons_baseline / nq;
    report.mean_latency_tim_us = latency_tim / nq;
    report.mean_latency_baseline_us = latency_baseline / nq;
    report.speedup_ratio = report.mean_latency_tim_us > 0.0
                               ? report.mean_latency_baseline_us / report.mean_latency_tim_us
                               : std::numeric_limits<double>::infinity();
    return report;
}

EvalReport eval_topk(std::size_t n_thoughts, std::size_t dim, std::size_t buckets, double noise,
                     const std::vector<std::size_t>& ks, std::uint64_t seed,
                     std::size_t probe_depth) {
    if (n_thoughts < 1 || dim < 1 || buckets < 1) {
        raise(errc::invalid_parameter, "n_thoughts, dim and buckets must be >= 1");
    }
    if (!(noise >= 0.0 && noise < 1.0)) {
        raise(errc::invalid_parameter, "noise must be in [0, 1)");
    }
    if (ks.empty()) {
        raise(errc::invalid_parameter, "ks must be nonempty");
    }
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (ks[i] < 1 || (i > 0 && ks[i] <= ks[i - 1])) {
            raise(errc::invalid_parameter, "ks must be ascending positive integers");
        }
    }

    std::mt19937_64 rng(seed);
    const MemoryCache cache = build_synthetic_cache(n_thoughts, buckets, dim, seed, rng);
    const std::vector<StoredThought> planted = cache.all();

    EvalReport report;
    report.n_thoughts = n_thoughts;
    report.dim = dim;
    report.buckets = buckets;
    report.noise = noise;
    report.seed = seed;
    report.tim.ks = ks;
    report.oracle.ks = ks;
    report.tim.accuracy.assign(ks.size(), 0.0);
    report.oracle.accuracy.assign(ks.size(), 0.0);

    const std::size_t max_k = ks.back();
    for (const StoredThought& source : planted) {
        EmbeddingVector query = source.embedding;
        if (noise > 0.0) {
            const EmbeddingVector direction = random_unit_vector(rng, dim);
            for (std::size_t i = 0; i < dim; ++i) {
                query.values[i] += noise * direction.values[i];
            }
            normalize(query);
        }

        // full-scan rank of the source thought under the recall order
        const RecallResult full = full_scan_recall(cache, query, std::max(max_k, n_thoughts));
        std::size_t rank = 0;
        for (std::size_t i = 0; i < full.hits.size(); ++i) {
            if (full.hits[i].thought.id == source.thought.id) {
                rank = i + 1;
                break;
            }
        }

        for (std::size_t i = 0; i < ks.size(); ++i) {
            if (rank >= 1 && rank <= ks[i]) report.oracle.accuracy[i] += 1.0;
            const RecallResult two_stage = cache.recall(query, ks[i], probe_depth);
            for (const ScoredThought& hit : two_stage.hits) {
                if (hit.thought.id == source.thought.id) {
                    report.tim.accuracy[i] += 1.0;
                    break;
                }
            }
        }
    }

    const double n = static_cast<double>(planted.size());
    for (std::size_t i = 0; i < ks.size(); ++i) {
        report.tim.accuracy[i] /= n;
        report.oracle.accuracy[i] /= n;
    }
    return report;
}

void write_bench_csv(std::ostream& out, const BenchReport& r) {
    out << "n_thoughts,n_queries,buckets,dim,k,seed,mean_comparisons_tim,"
           "mean_comparisons_baseline,mean_latency_tim_us,mean_latency_baseline_us,"
           "speedup_ratio\n";
    out << r.n_thoughts << ',' << r.n_queries << ',' << r.buckets << ',' << r.dim << ',' << r.k
        << ',' << r.seed << ',' << r.mean_comparisons_tim << ',' << r.mean_comparisons_baseline
        << ',' << r.mean_latency_tim_us << ',' << r.mean_latency_baseline_us << ','
        << r.speedup_ratio << '\n';
}

void write_eval_csv(std::ostream& out, const EvalReport& r) {
    out << "n_thoughts,dim,buckets,noise,seed,k,accuracy_tim,accuracy_oracle\n";
    for (std::size_t i = 0; i < r.tim.ks.size(); ++i) {
        out << r.n_thoughts << ',' << r.dim << ',' << r.buckets << ',' << r.noise << ','
            << r.seed << ',' << r.tim.ks[i] << ',' << r.tim.accuracy[i] << ','
            << r.oracle.accuracy[i] << '\n';
    }
}

}  // namespace tim
