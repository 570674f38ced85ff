#include "cgrq/medoid.hpp"

#include "cgrq/error.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace cgrq {

std::size_t euclidean_medoid_index(const Matrix& points, std::size_t cap, std::uint64_t seed) {
    if (points.empty()) throw std::invalid_argument("euclidean_medoid: empty point set");
    if (cap == 0) throw std::invalid_argument("euclidean_medoid: subsample cap must be >= 1");

    std::vector<std::size_t> candidates(points.rows());
    std::iota(candidates.begin(), candidates.end(), 0);
    if (candidates.size() > cap) {
        std::mt19937_64 rng(seed);
        std::shuffle(candidates.begin(), candidates.end(), rng);
        candidates.resize(cap);
        std::sort(candidates.begin(), candidates.end());
    }

    // Symmetric pairwise sums, each distance computed once.
    const std::size_t n = candidates.size();
    std::vector<double> sums(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto pi = points.row(candidates[i]);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = euclidean_distance(pi, points.row(candidates[j]));
            sums[i] += d;
            sums[j] += d;
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (sums[i] < sums[best]) best = i;
    }
    return candidates[best];
}

std::vector<double> euclidean_medoid(const Matrix& points, std::size_t cap, std::uint64_t seed) {
    const auto row = points.row(euclidean_medoid_index(points, cap, seed));
    return {row.begin(), row.end()};
}

MedoidSet fit_class_medoids(const Matrix& F, std::span<const int> y, std::size_t num_classes, std::size_t cap,
                            std::uint64_t seed) {
    if (F.rows() != y.size()) throw std::invalid_argument("fit_class_medoids: label count mismatch");
    std::vector<std::vector<std::size_t>> rows(num_classes);
    for (std::size_t i = 0; i < y.size(); ++i) rows.at(static_cast<std::size_t>(y[i])).push_back(i);

    MedoidSet set;
    set.subsample_cap = cap;
    set.seed = seed;
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (rows[c].empty()) throw DataError("class " + std::to_string(c) + " has no training rows");
        set.medoids.push_back(euclidean_medoid(F.select_rows(rows[c]), cap, seed));
    }
    return set;
}

}  // namespace cgrq
