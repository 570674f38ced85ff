#include "cgrq/optimizer.hpp"

#include "cgrq/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

namespace cgrq {

namespace {

bool same_subset(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    if (a.size() != b.size()) return false;
    std::vector<std::size_t> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    return sa == sb;
}

}  // namespace

std::vector<std::vector<std::size_t>> candidate_subsets(std::span<const std::size_t> membership, std::size_t k,
                                                        std::optional<std::size_t> budget, std::uint64_t seed) {
    if (k == 0) throw std::invalid_argument("candidate_subsets: k must be >= 1");
    if (membership.empty()) throw std::invalid_argument("candidate_subsets: empty membership");
    if (k >= membership.size()) return {std::vector<std::size_t>(membership.begin(), membership.end())};

    // Lexicographic combinations of k-1 positions among the non-anchor members.
    const std::size_t pool = membership.size() - 1;
    const std::size_t pick = k - 1;
    std::vector<std::vector<std::size_t>> out;
    std::set<std::vector<std::size_t>> seen;
    std::vector<std::size_t> pos(pick);
    std::iota(pos.begin(), pos.end(), 0);
    while (true) {
        std::vector<std::size_t> subset{membership[0]};
        for (auto p : pos) subset.push_back(membership[p + 1]);
        std::vector<std::size_t> key(subset.begin() + 1, subset.end());
        std::sort(key.begin(), key.end());
        if (seen.insert(key).second) out.push_back(std::move(subset));

        std::size_t i = pick;
        while (i > 0 && pos[i - 1] == pool - pick + (i - 1)) --i;
        if (i == 0) break;
        ++pos[i - 1];
        for (std::size_t j = i; j < pick; ++j) pos[j] = pos[j - 1] + 1;
    }

    if (budget && out.size() > *budget) {
        std::vector<std::size_t> idx(out.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::mt19937_64 rng(seed);
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(*budget);
        std::sort(idx.begin(), idx.end());
        std::vector<std::vector<std::size_t>> kept;
        for (auto i : idx) kept.push_back(std::move(out[i]));
        out = std::move(kept);
    }
    return out;
}

CgrConfig default_config(const AnchorModel& model, std::size_t k) {
    if (k == 0) throw std::invalid_argument("subset size k must be >= 1");
    CgrConfig config;
    config.k = k;
    for (const auto& anchor : model.anchors) {
        const std::size_t n = std::min(k, anchor.members.size());
        config.subsets.emplace_back(anchor.members.begin(), anchor.members.begin() + static_cast<std::ptrdiff_t>(n));
    }
    return config;
}

CgrConfig normalize_config(const CgrConfig& previous, std::size_t k, const AnchorModel& model) {
    if (previous.subsets.size() != model.size()) throw std::invalid_argument("normalize_config: anchor count mismatch");
    if (k == 0) throw std::invalid_argument("subset size k must be >= 1");
    CgrConfig config;
    config.k = k;
    for (std::size_t j = 0; j < model.size(); ++j) {
        const auto& anchor = model.anchors[j];
        std::vector<std::size_t> subset{anchor.feature};
        for (std::size_t f : previous.subsets[j]) {
            if (f != anchor.feature && anchor.contains(f)) subset.push_back(f);
        }
        const std::size_t target = std::min(k, anchor.members.size());
        if (subset.size() > target) subset.resize(target);
        if (subset.size() < target) {
            std::vector<std::size_t> extra;
            for (std::size_t f : anchor.members) {
                if (std::find(subset.begin(), subset.end(), f) == subset.end()) extra.push_back(f);
            }
            std::stable_sort(extra.begin(), extra.end(), [&](std::size_t a, std::size_t b) {
                return std::abs(anchor.weight_of(a)) > std::abs(anchor.weight_of(b));
            });
            for (std::size_t i = 0; subset.size() < target; ++i) subset.push_back(extra[i]);
        }
        config.subsets.push_back(std::move(subset));
    }
    return config;
}

ConfigScore score_config(const CgrConfig& config, const Dataset& train, const Dataset& val, const AnchorModel& model,
                         const PipelineSettings& settings) {
    const FusionModel fitted = fit_fusion_model(train, model, config, settings);
    const auto result = fitted.infer(val.X);
    ConfigScore score;
    score.metrics = evaluate(val.y, result.labels, train.num_classes());
    score.macro_f1 = score.metrics.macro_f1;
    return score;
}

const KRecord& SearchRecord::best() const {
    if (per_k.empty()) throw std::logic_error("empty search record");
    const KRecord* best = &per_k.front();
    for (const auto& r : per_k) {
        if (r.best_f1 > best->best_f1 || (r.best_f1 == best->best_f1 && r.k < best->k)) best = &r;
    }
    return *best;
}

const KRecord& SearchRecord::at_k(std::size_t k) const {
    for (const auto& r : per_k) {
        if (r.k == k) return r;
    }
    throw std::out_of_range("no search record for k=" + std::to_string(k));
}

SearchRecord coordinate_descent(const AnchorModel& model, const ConfigObjective& objective,
                                const SearchOptions& options) {
    if (model.anchors.empty()) throw std::invalid_argument("coordinate_descent: no anchors");
    if (options.k_min == 0 || options.k_min > options.k_max) throw std::invalid_argument("invalid k range");
    if (options.max_passes == 0) throw std::invalid_argument("max_passes must be >= 1");

    SearchRecord record;
    std::optional<CgrConfig> previous;
    for (std::size_t k = options.k_min; k <= options.k_max; ++k) {
        KRecord rec;
        rec.k = k;
        CgrConfig config = previous ? normalize_config(*previous, k, model) : default_config(model, k);
        rec.initial_config = config;

        ConfigScore incumbent = objective(config);
        ++rec.evaluations;
        rec.trace.push_back(incumbent.macro_f1);

        for (std::size_t pass = 0; pass < options.max_passes; ++pass) {
            ++rec.passes_used;
            bool improved = false;
            for (std::size_t j = 0; j < model.size(); ++j) {
                const auto& anchor = model.anchors[j];
                const auto candidates =
                    candidate_subsets(anchor.members, k, options.budget, derive_seed(options.seed, {anchor.feature, k}));
                std::optional<std::vector<std::size_t>> best_subset;
                ConfigScore best_score = incumbent;
                for (const auto& subset : candidates) {
                    if (same_subset(subset, config.subsets[j])) continue;
                    CgrConfig trial = config;
                    trial.subsets[j] = subset;
                    ConfigScore s = objective(trial);
                    ++rec.evaluations;
                    if (s.macro_f1 > best_score.macro_f1) {
                        best_score = std::move(s);
                        best_subset = subset;
                    }
                }
                if (best_subset) {
                    config.subsets[j] = *best_subset;
                    incumbent = std::move(best_score);
                    rec.trace.push_back(incumbent.macro_f1);
                    improved = true;
                }
            }
            if (!improved) break;
        }
        rec.best_config = config;
        rec.best_f1 = incumbent.macro_f1;
        rec.metrics = std::move(incumbent.metrics);
        previous = config;
        record.per_k.push_back(std::move(rec));
    }
    return record;
}

SearchRecord coordinate_descent(const Dataset& train, const Dataset& val, const AnchorModel& model,
                                const SearchOptions& options, const PipelineSettings& settings) {
    return coordinate_descent(
        model, [&](const CgrConfig& c) { return score_config(c, train, val, model, settings); }, options);
}

}  // namespace cgrq
