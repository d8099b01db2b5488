#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "tim/error.hpp"

namespace tim {

// Fixed-dimension real vector representing a text. Providers produce
// L2-normalized vectors; callers may inject arbitrary finite vectors.
struct EmbeddingVector {
    std::vector<double> values;

    EmbeddingVector() = default;
    explicit EmbeddingVector(std::vector<double> v) : values(std::move(v)) {}

    std::size_t dim() const noexcept { return values.size(); }

    bool operator==(const EmbeddingVector& other) const = default;
};

inline double l2_norm(const EmbeddingVector& v) {
    double sum = 0.0;
    for (double x : v.values) sum += x * x;
    return std::sqrt(sum);
}

inline bool all_finite(const EmbeddingVector& v) {
    for (double x : v.values) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

inline bool is_zero(const EmbeddingVector& v) {
    for (double x : v.values) {
        if (x != 0.0) return false;
    }
    return true;
}

// Cosine similarity in [-1, 1]. Identical vectors score exactly 1.0.
// Throws on dimension mismatch and on zero inputs, for which the value
// is undefined.
inline double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        raise(errc::dimension_mismatch,
              "cosine of " + std::to_string(a.dim()) + "-dim and " + std::to_string(b.dim()) +
                  "-dim vectors");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) {
        raise(errc::zero_vector, "cosine of a zero vector");
    }
    if (a.values == b.values) return 1.0;
    double c = dot / (std::sqrt(na) * std::sqrt(nb));
    if (c > 1.0) return 1.0;
    if (c < -1.0) return -1.0;
    return c;
}

}  // namespace tim
