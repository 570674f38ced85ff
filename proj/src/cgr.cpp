#include "cgrq/cgr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

namespace cgrq {

double Anchor::weight_of(std::size_t f) const {
    auto it = std::find(members.begin(), members.end(), f);
    if (it == members.end()) {
        throw std::out_of_range("feature " + std::to_string(f) + " is not a member of anchor " +
                                std::to_string(feature));
    }
    return weights[static_cast<std::size_t>(it - members.begin())];
}

bool Anchor::contains(std::size_t f) const {
    return std::find(members.begin(), members.end(), f) != members.end();
}

std::optional<std::size_t> AnchorModel::position_of(std::size_t feature) const {
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        if (anchors[i].feature == feature) return i;
    }
    return std::nullopt;
}

AnchorModel build_anchor_model(const CorrelationModel& corr, std::size_t m, std::optional<std::size_t> max_anchors) {
    const std::size_t M = corr.R.rows();
    if (M == 0) throw std::invalid_argument("build_anchor_model: empty correlation matrix");
    if (m >= M) {
        throw std::invalid_argument("group size m=" + std::to_string(m) + " needs at least " + std::to_string(m + 1) +
                                    " features, have " + std::to_string(M));
    }
    const auto clean = [](double r) { return std::isfinite(r) ? r : 0.0; };

    std::vector<std::size_t> order(M);
    std::iota(order.begin(), order.end(), 0);
    if (corr.target_corr) {
        const auto& t = *corr.target_corr;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return std::abs(clean(t[a])) > std::abs(clean(t[b])); });
    }
    if (max_anchors && *max_anchors < order.size()) order.resize(*max_anchors);

    AnchorModel model;
    model.num_features = M;
    for (std::size_t a : order) {
        std::vector<std::size_t> others;
        for (std::size_t f = 0; f < M; ++f) {
            if (f != a) others.push_back(f);
        }
        std::stable_sort(others.begin(), others.end(), [&](std::size_t f, std::size_t g) {
            return std::abs(clean(corr.R(a, f))) > std::abs(clean(corr.R(a, g)));
        });
        Anchor anchor;
        anchor.feature = a;
        anchor.members.push_back(a);
        anchor.weights.push_back(1.0);
        for (std::size_t i = 0; i < m; ++i) {
            anchor.members.push_back(others[i]);
            anchor.weights.push_back(clean(corr.R(a, others[i])));
        }
        model.anchors.push_back(std::move(anchor));
    }
    return model;
}

void validate_config(const CgrConfig& config, const AnchorModel& model) {
    if (config.subsets.size() != model.size()) {
        throw std::invalid_argument("config has " + std::to_string(config.subsets.size()) + " subsets for " +
                                    std::to_string(model.size()) + " anchors");
    }
    for (std::size_t j = 0; j < model.size(); ++j) {
        const auto& anchor = model.anchors[j];
        const auto& subset = config.subsets[j];
        if (subset.empty() || subset.front() != anchor.feature) {
            throw std::invalid_argument("subset for anchor " + std::to_string(anchor.feature) +
                                        " must start with the anchor");
        }
        std::set<std::size_t> seen;
        for (std::size_t f : subset) {
            if (!anchor.contains(f)) {
                throw std::invalid_argument("feature " + std::to_string(f) + " is not a member of anchor " +
                                            std::to_string(anchor.feature));
            }
            if (!seen.insert(f).second) throw std::invalid_argument("repeated feature in subset");
        }
    }
}

double anchor_feature(std::span<const double> x, const Anchor& anchor, std::span<const std::size_t> subset) {
    double acc = 0.0;
    for (std::size_t f : subset) {
        if (f >= x.size()) throw std::out_of_range("feature index " + std::to_string(f) + " out of range");
        const double v = anchor.weight_of(f) * x[f];
        acc += v * v;
    }
    return std::sqrt(acc);
}

std::vector<double> anchor_feature_vector(const Matrix& X, const Anchor& anchor, std::span<const std::size_t> subset) {
    if (subset.empty()) throw std::invalid_argument("anchor_feature_vector: empty subset");
    std::vector<double> w;
    for (std::size_t f : subset) {
        if (f >= X.cols()) throw std::out_of_range("feature index " + std::to_string(f) + " out of range");
        w.push_back(anchor.weight_of(f));
    }
    std::vector<double> u(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t t = 0; t < subset.size(); ++t) {
            const double v = w[t] * X(i, subset[t]);
            acc += v * v;
        }
        u[i] = std::sqrt(acc);
    }
    return u;
}

double group_strength(const Anchor& anchor) {
    return group_strength(anchor, anchor.members);
}

double group_strength(const Anchor& anchor, std::span<const std::size_t> subset) {
    double acc = 0.0;
    for (std::size_t f : subset) {
        const double w = anchor.weight_of(f);
        acc += w * w;
    }
    return std::sqrt(acc);
}

namespace {

std::vector<double> activation(const Matrix& X, std::span<const std::size_t> subset) {
    std::vector<double> h(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t f : subset) acc += X(i, f) * X(i, f);
        h[i] = std::sqrt(acc);
    }
    return h;
}

}  // namespace

std::vector<double> multiplicative_feature(const Matrix& X, const Anchor& anchor) {
    for (std::size_t f : anchor.members) {
        if (f >= X.cols()) throw std::out_of_range("feature index " + std::to_string(f) + " out of range");
    }
    const double g = group_strength(anchor);
    auto h = activation(X, anchor.members);
    for (auto& v : h) v *= g;
    return h;
}

Matrix build_feature_matrix(const Matrix& X, const AnchorModel& model, const CgrConfig& config, Embedding embedding) {
    validate_config(config, model);
    if (X.cols() != model.num_features) {
        throw std::invalid_argument("data has " + std::to_string(X.cols()) + " features, anchor model expects " +
                                    std::to_string(model.num_features));
    }
    Matrix F(X.rows(), model.size());
    for (std::size_t j = 0; j < model.size(); ++j) {
        const auto& subset = config.subsets[j];
        std::vector<double> col;
        if (embedding == Embedding::phi) {
            col = anchor_feature_vector(X, model.anchors[j], subset);
        } else {
            const double g = group_strength(model.anchors[j], subset);
            col = activation(X, subset);
            for (auto& v : col) v *= g;
        }
        for (std::size_t i = 0; i < X.rows(); ++i) F(i, j) = col[i];
    }
    return F;
}

}  // namespace cgrq
