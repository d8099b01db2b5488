#include "tim/lsh.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace tim {

ProjectionMatrix ProjectionMatrix::generate(std::size_t dim, std::size_t buckets,
                                            std::uint64_t seed) {
    if (dim == 0) {
        raise(errc::invalid_dimension, "dim must be >= 1");
    }
    if (buckets == 0 || (buckets != 1 && buckets % 2 != 0)) {
        raise(errc::invalid_dimension,
              "buckets must be even and >= 2, or 1 for the degenerate single-group layout (got " +
                  std::to_string(buckets) + ")");
    }
    ProjectionMatrix p;
    p.dim_ = dim;
    p.buckets_ = buckets;
    p.seed_ = seed;
    p.entries_.resize(dim * (buckets / 2));
    std::uint64_t state = seed;
    for (double& e : p.entries_) {
        e = (detail::splitmix64_next(state) & 1ull) ? 1.0 : -1.0;
    }
    return p;
}

ProjectionMatrix ProjectionMatrix::with_entries(std::size_t dim, std::size_t buckets,
                                                std::vector<double> entries) {
    if (dim == 0) {
        raise(errc::invalid_dimension, "dim must be >= 1");
    }
    if (buckets == 0 || (buckets != 1 && buckets % 2 != 0)) {
        raise(errc::invalid_dimension, "buckets must be even and >= 2, or 1");
    }
    if (entries.size() != dim * (buckets / 2)) {
        raise(errc::invalid_dimension,
              "expected " + std::to_string(dim * (buckets / 2)) + " entries, got " +
                  std::to_string(entries.size()));
    }
    ProjectionMatrix p;
    p.dim_ = dim;
    p.buckets_ = buckets;
    p.seed_ = 0;
    p.synthetic_ = true;
    p.entries_ = std::move(entries);
    return p;
}

std::vector<double> ProjectionMatrix::scores(const EmbeddingVector& x) const {
    if (x.dim() != dim_) {
        raise(errc::dimension_mismatch, "vector has dim " + std::to_string(x.dim()) +
                                            ", projection expects " + std::to_string(dim_));
    }
    if (!all_finite(x)) {
        raise(errc::invalid_parameter, "vector contains non-finite values");
    }
    if (is_zero(x)) {
        raise(errc::zero_vector, "cannot hash the zero vector");
    }
    const std::size_t half = buckets_ / 2;
    std::vector<double> out(buckets_, 0.0);
    for (std::size_t j = 0; j < half; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            s += x.values[i] * entries_[i * half + j];
        }
        out[j] = s;
        out[half + j] = -s;
    }
    return out;
}

std::size_t lsh_bucket(const EmbeddingVector& x, const ProjectionMatrix& proj) {
    const std::vector<double> s = proj.scores(x);
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (s[i] > s[best]) best = i;
    }
    return best;
}

std::vector<std::size_t> probe_order(const EmbeddingVector& x, const ProjectionMatrix& proj) {
    const std::vector<double> s = proj.scores(x);
    std::vector<std::size_t> order(s.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&s](std::size_t a, std::size_t b) {
        if (s[a] != s[b]) return s[a] > s[b];
        return a < b;
    });
    return order;
}

}  // namespace tim
