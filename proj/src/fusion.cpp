#include "cgrq/fusion.hpp"

#include "cgrq/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cgrq {

void FusionParams::validate(std::size_t num_classes) const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("fusion alpha must lie in [0, 1]");
    if (!(epsilon > 0.0)) throw std::invalid_argument("fusion epsilon must be positive");
    if (!class_weights.empty()) {
        if (class_weights.size() != num_classes) throw std::invalid_argument("class weight count mismatch");
        for (double w : class_weights) {
            if (!(w > 0.0)) throw std::invalid_argument("class weights must be positive");
        }
    }
}

std::vector<double> class_weights_from_counts(std::span<const std::size_t> counts, ClassWeightMode mode) {
    if (mode == ClassWeightMode::none) return {};
    const std::size_t max_count = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
    if (max_count == 0) throw std::invalid_argument("class weights need nonzero class counts");
    std::vector<double> w;
    for (auto n : counts) {
        if (n == 0) throw std::invalid_argument("class weights need every class present");
        w.push_back(std::sqrt(static_cast<double>(n) / static_cast<double>(max_count)));
    }
    return w;
}

GeometryTable compute_geometry(const Matrix& F, const MedoidSet& medoids, const QuantumOptions& quantum) {
    if (medoids.num_classes() == 0) throw std::invalid_argument("no medoids");
    for (std::size_t c = 0; c < medoids.num_classes(); ++c) {
        if (medoids.medoids[c].size() != F.cols()) {
            throw std::invalid_argument("medoid " + std::to_string(c) + " has dimension " +
                                        std::to_string(medoids.medoids[c].size()) + ", features have " +
                                        std::to_string(F.cols()));
        }
    }
    GeometryTable table(F.rows());
    for (std::size_t i = 0; i < F.rows(); ++i) {
        table[i].reserve(medoids.num_classes());
        for (std::size_t c = 0; c < medoids.num_classes(); ++c) {
            std::optional<ShotOptions> shots;
            if (quantum.shots) shots = ShotOptions{*quantum.shots, derive_seed(quantum.seed, {i, c})};
            table[i].push_back(compact_swap_test(F.row(i), medoids.medoids[c], shots));
        }
    }
    return table;
}

std::size_t argmin_index(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("argmin of empty range");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] < values[best]) best = i;
    }
    return best;
}

FusedSample fuse(std::span<const GeomPair> per_class, const FusionParams& params) {
    const std::size_t C = per_class.size();
    if (C < 2) throw std::invalid_argument("fusion needs at least two classes");
    double sum_d = 0.0, sum_t = 0.0;
    for (const auto& g : per_class) {
        sum_d += g.distance;
        sum_t += g.angle;
    }
    FusedSample out;
    out.distance_norm.resize(C);
    out.angle_norm.resize(C);
    out.score.resize(C);
    for (std::size_t c = 0; c < C; ++c) {
        out.distance_norm[c] = per_class[c].distance / (sum_d + params.epsilon);
        out.angle_norm[c] = per_class[c].angle / (sum_t + params.epsilon);
        out.score[c] = params.use_angular
                           ? params.alpha * out.distance_norm[c] + (1.0 - params.alpha) * out.angle_norm[c]
                           : out.distance_norm[c];
        if (!params.class_weights.empty()) out.score[c] *= params.class_weights[c];
    }
    out.label = static_cast<int>(argmin_index(out.score));
    return out;
}

FusionResult fuse_all(const GeometryTable& geometry, const FusionParams& params) {
    FusionResult r;
    r.labels.reserve(geometry.size());
    r.channels.reserve(geometry.size());
    if (!geometry.empty()) params.validate(geometry.front().size());
    for (const auto& row : geometry) {
        r.channels.push_back(fuse(row, params));
        r.labels.push_back(r.channels.back().label);
    }
    return r;
}

FusionResult fusion_infer(const Matrix& F, const MedoidSet& medoids, const FusionParams& params,
                          const QuantumOptions& quantum) {
    params.validate(medoids.num_classes());
    return fuse_all(compute_geometry(F, medoids, quantum), params);
}

double fbeta_score(double precision, double recall, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    const double b2 = beta * beta;
    const double denom = b2 * precision + recall;
    return denom > 0.0 ? (1.0 + b2) * precision * recall / denom : 0.0;
}

MetricsReport evaluate(std::span<const int> y_true, std::span<const int> y_pred, std::size_t num_classes,
                       Averaging averaging, std::optional<double> beta) {
    if (y_true.empty()) throw std::invalid_argument("evaluate: empty inputs");
    if (y_true.size() != y_pred.size()) throw std::invalid_argument("evaluate: length mismatch");
    if (beta && !(*beta > 0.0)) throw std::invalid_argument("beta must be positive");

    MetricsReport r;
    r.total = y_true.size();
    r.beta = beta;
    r.confusion.assign(num_classes, std::vector<std::size_t>(num_classes, 0));
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const auto t = y_true[i];
        const auto p = y_pred[i];
        if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= num_classes ||
            static_cast<std::size_t>(p) >= num_classes) {
            throw std::invalid_argument("evaluate: label out of range at position " + std::to_string(i));
        }
        ++r.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    }

    std::size_t correct = 0;
    for (std::size_t c = 0; c < num_classes; ++c) correct += r.confusion[c][c];
    const double n = static_cast<double>(r.total);
    r.accuracy = static_cast<double>(correct) / n;

    double fbeta_macro = 0.0, fbeta_weighted = 0.0;
    for (std::size_t c = 0; c < num_classes; ++c) {
        std::size_t tp = r.confusion[c][c], fp = 0, fn = 0;
        for (std::size_t o = 0; o < num_classes; ++o) {
            if (o == c) continue;
            fp += r.confusion[o][c];
            fn += r.confusion[c][o];
        }
        ClassMetrics m;
        m.support = tp + fn;
        m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
        if (beta) m.fbeta = fbeta_score(m.precision, m.recall, *beta);

        const double prior = static_cast<double>(m.support) / n;
        r.macro_precision += m.precision;
        r.macro_recall += m.recall;
        r.macro_f1 += m.f1;
        r.weighted_precision += prior * m.precision;
        r.weighted_recall += prior * m.recall;
        r.weighted_f1 += prior * m.f1;
        if (beta) {
            fbeta_macro += *m.fbeta;
            fbeta_weighted += prior * *m.fbeta;
        }
        r.per_class.push_back(m);
    }
    const double C = static_cast<double>(num_classes);
    r.macro_precision /= C;
    r.macro_recall /= C;
    r.macro_f1 /= C;
    if (beta) r.fbeta = averaging == Averaging::macro ? fbeta_macro / C : fbeta_weighted;
    return r;
}

std::vector<double> default_alpha_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
    return grid;
}

std::vector<double> default_beta_grid() { return {0.5, 1.0, 2.0}; }

AlphaCalibration calibrate_alpha(const GeometryTable& val_geometry, std::span<const int> y_val,
                                 std::size_t num_classes, std::span<const double> grid, const FusionParams& params) {
    AlphaCalibration cal;
    if (!params.use_angular) {
        cal.alpha_star = 1.0;
        return cal;
    }
    if (grid.empty()) throw std::invalid_argument("alpha grid is empty");
    double best = -1.0;
    for (double alpha : grid) {
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha grid values must lie in [0, 1]");
        FusionParams p = params;
        p.alpha = alpha;
        const auto result = fuse_all(val_geometry, p);
        const double f1 = evaluate(y_val, result.labels, num_classes).macro_f1;
        cal.records.push_back({alpha, f1});
        if (f1 > best) {
            best = f1;
            cal.alpha_star = alpha;
        }
    }
    return cal;
}

std::vector<FbetaRow> fbeta_sweep(std::span<const int> y_true, std::span<const int> y_pred, std::size_t num_classes,
                                  std::span<const double> grid) {
    std::vector<FbetaRow> rows;
    for (double b : grid) {
        if (!(b > 0.0)) throw std::invalid_argument("F-beta sweep values must be positive");
        rows.push_back({b, *evaluate(y_true, y_pred, num_classes, Averaging::macro, b).fbeta});
    }
    return rows;
}

}  // namespace cgrq
