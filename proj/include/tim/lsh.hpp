#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

#include "tim/embedding.hpp"

namespace tim {

// Random-projection LSH. A vector x is assigned to the bucket
// argmax([xR; -xR]) where R is a (dim x buckets/2) matrix of +-1 entries
// derived deterministically from a seed, so nearby vectors land in the
// same bucket with elevated probability.
//
// Immutable after construction; safe for unrestricted concurrent reads.
class ProjectionMatrix {
public:
    // Deterministic construction: a splitmix64 stream seeded with `seed`
    // supplies one 64-bit word per entry, filled row-major; an entry is +1
    // when the word's least-significant bit is set, else -1.
    //
    // `buckets` must be even and >= 2, or exactly 1: the single-bucket
    // configuration is the degenerate full-scan layout (empty matrix,
    // every vector hashes to bucket 0).
    static ProjectionMatrix generate(std::size_t dim, std::size_t buckets, std::uint64_t seed);

    // Injection of explicit entries, for tests and diagnostics. The result
    // is not reproducible from (dim, buckets, seed) and is rejected by
    // snapshot saving.
    static ProjectionMatrix with_entries(std::size_t dim, std::size_t buckets,
                                         std::vector<double> entries);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t buckets() const noexcept { return buckets_; }
    std::uint64_t seed() const noexcept { return seed_; }
    bool synthetic() const noexcept { return synthetic_; }

    double entry(std::size_t row, std::size_t col) const {
        return entries_[row * (buckets_ / 2) + col];
    }
    const std::vector<double>& entries() const noexcept { return entries_; }

    // The concatenated score vector [xR; -xR], length `buckets`.
    // Validates dimension, finiteness and rejects the zero vector.
    std::vector<double> scores(const EmbeddingVector& x) const;

    bool operator==(const ProjectionMatrix& other) const = default;

private:
    ProjectionMatrix() = default;

    std::size_t dim_ = 0;
    std::size_t buckets_ = 0;
    std::uint64_t seed_ = 0;
    bool synthetic_ = false;
    std::vector<double> entries_;  // row-major, dim x (buckets/2)
};

// Bucket index of x in [0, buckets). Ties resolve to the lowest index.
std::size_t lsh_bucket(const EmbeddingVector& x, const ProjectionMatrix& proj);

// All bucket indices ordered by descending score, ties by lower index.
// The first element equals lsh_bucket(x, proj).
std::vector<std::size_t> probe_order(const EmbeddingVector& x, const ProjectionMatrix& proj);

namespace detail {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace detail

}  // namespace tim
