#pragma once

#include "cgrq/cgr.hpp"
#include "cgrq/data.hpp"
#include "cgrq/fusion.hpp"
#include "cgrq/model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace cgrq {

/// Size-k subsets of `membership` (anchor first) that keep the anchor, listed
/// in membership order. k larger than the membership yields the full list.
/// With a budget smaller than the number of subsets, a seeded uniform sample of
/// `budget` subsets is kept (still in enumeration order).
std::vector<std::vector<std::size_t>> candidate_subsets(std::span<const std::size_t> membership, std::size_t k,
                                                        std::optional<std::size_t> budget = std::nullopt,
                                                        std::uint64_t seed = 0);

/// Anchor plus the first k-1 other members of each membership list.
CgrConfig default_config(const AnchorModel& model, std::size_t k);

/// Resize a previous configuration to k: truncate from the tail, or append the
/// highest-|rho| members not yet present.
CgrConfig normalize_config(const CgrConfig& previous, std::size_t k, const AnchorModel& model);

struct ConfigScore {
    double macro_f1 = 0.0;
    MetricsReport metrics;
};

/// Fit on train under `config`, predict the validation split, report macro-F1.
ConfigScore score_config(const CgrConfig& config, const Dataset& train, const Dataset& val, const AnchorModel& model,
                         const PipelineSettings& settings);

struct SearchOptions {
    std::size_t k_min = 2;
    std::size_t k_max = 5;
    std::size_t max_passes = 3;
    std::optional<std::size_t> budget = 200;
    std::uint64_t seed = 0;
};

struct KRecord {
    std::size_t k = 0;
    CgrConfig initial_config;
    CgrConfig best_config;
    double best_f1 = 0.0;
    MetricsReport metrics;
    std::size_t passes_used = 0;
    std::size_t evaluations = 0;
    /// Incumbent macro-F1 after the initial score and after each accepted move.
    std::vector<double> trace;
};

struct SearchRecord {
    std::vector<KRecord> per_k;

    /// Highest validation macro-F1, smaller k on ties.
    const KRecord& best() const;
    const KRecord& at_k(std::size_t k) const;
};

/// Objective used by the search; score_config in production, swappable in tests.
using ConfigObjective = std::function<ConfigScore(const CgrConfig&)>;

SearchRecord coordinate_descent(const AnchorModel& model, const ConfigObjective& objective, const SearchOptions& options);

SearchRecord coordinate_descent(const Dataset& train, const Dataset& val, const AnchorModel& model,
                                const SearchOptions& options, const PipelineSettings& settings);

}  // namespace cgrq
