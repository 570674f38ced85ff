#pragma once

#include "cgrq/matrix.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace cgrq {

inline constexpr std::size_t kDefaultSubsampleCap = 2000;

/// One prototype per class; medoids[c] is a copy of a training row of class c.
struct MedoidSet {
    std::vector<std::vector<double>> medoids;
    std::size_t subsample_cap = kDefaultSubsampleCap;
    std::uint64_t seed = 0;

    std::size_t num_classes() const { return medoids.size(); }
    std::size_t dimension() const { return medoids.empty() ? 0 : medoids.front().size(); }
};

/// Row index (into `points`) of the point minimising the summed Euclidean
/// distance to the others. Above `cap` points the search runs on a seeded
/// uniform subsample of size `cap`. Ties go to the lowest index.
std::size_t euclidean_medoid_index(const Matrix& points, std::size_t cap, std::uint64_t seed);

std::vector<double> euclidean_medoid(const Matrix& points, std::size_t cap, std::uint64_t seed);

MedoidSet fit_class_medoids(const Matrix& F, std::span<const int> y, std::size_t num_classes,
                            std::size_t cap = kDefaultSubsampleCap, std::uint64_t seed = 0);

}  // namespace cgrq
