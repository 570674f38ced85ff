#include "cgrq/vqc.hpp"

#include "cgrq/error.hpp"
#include "cgrq/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

namespace cgrq {

std::string to_string(Mapping m) { return m == Mapping::parity ? "parity" : "direct"; }

Mapping mapping_from_string(const std::string& s) {
    if (s == "parity") return Mapping::parity;
    if (s == "direct") return Mapping::direct;
    throw std::invalid_argument("unknown mapping '" + s + "'");
}

void VqcSpec::validate(std::size_t num_classes) const {
    if (n_qubits == 0) throw std::invalid_argument("VQC needs at least one qubit");
    if (n_qubits > 20) throw std::invalid_argument("VQC qubit count too large for the simulator");
    if (reps == 0) throw std::invalid_argument("VQC needs at least one repetition");
    if (m_inputs == 0) throw std::invalid_argument("VQC needs at least one input");
    if (!(z_max > 0.0)) throw std::invalid_argument("z_max must be positive");
    if (!feature_scales.empty()) {
        if (feature_scales.size() != m_inputs) throw std::invalid_argument("feature scale count mismatch");
        for (double l : feature_scales) {
            if (!(l > 0.0)) throw std::invalid_argument("feature scales must be positive");
        }
    }
    if (num_classes < 2) throw std::invalid_argument("VQC needs at least two classes");
    if (mapping == Mapping::parity && num_classes != 2) throw std::invalid_argument("parity mapping requires two classes");
    if (mapping == Mapping::direct && (std::size_t{1} << n_qubits) < num_classes) {
        throw std::invalid_argument("direct mapping needs 2^n >= number of classes");
    }
}

VqcSpec default_spec(std::size_t m_inputs, std::size_t num_classes, std::size_t reps, bool reupload) {
    VqcSpec spec;
    spec.m_inputs = m_inputs;
    spec.n_qubits = std::max<std::size_t>(2, m_inputs);
    spec.reps = reps;
    spec.reupload = reupload;
    spec.mapping = num_classes == 2 ? Mapping::parity : Mapping::direct;
    while (spec.mapping == Mapping::direct && (std::size_t{1} << spec.n_qubits) < num_classes) ++spec.n_qubits;
    return spec;
}

std::size_t Circuit::count(GateKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(gates.begin(), gates.end(), [kind](const Gate& g) { return g.kind == kind; }));
}

Circuit build_circuit(const VqcSpec& spec) {
    Circuit c;
    c.n_qubits = spec.n_qubits;
    c.num_params = spec.num_params();
    c.m_inputs = spec.m_inputs;
    const std::size_t n = spec.n_qubits;
    for (std::size_t r = 0; r < spec.reps; ++r) {
        if (r == 0 || spec.reupload) {
            for (std::size_t j = 0; j < spec.m_inputs; ++j) c.gates.push_back({GateKind::ry_input, j % n, 0, j});
        }
        if (n >= 2) {
            for (std::size_t q = 0; q + 1 < n; ++q) c.gates.push_back({GateKind::cx, q, q + 1, 0});
            for (std::size_t q = 0; q + 1 < n; ++q) c.gates.push_back({GateKind::cz, q, q + 1, 0});
        }
        for (std::size_t q = 0; q < n; ++q) {
            const std::size_t base = 2 * (r * n + q);
            c.gates.push_back({GateKind::ry_param, q, 0, base});
            c.gates.push_back({GateKind::rz_param, q, 0, base + 1});
        }
    }
    return c;
}

StateVector run_circuit(const Circuit& circuit, std::span<const double> theta, std::span<const double> angles) {
    if (theta.size() != circuit.num_params) throw std::invalid_argument("theta length does not match the circuit");
    if (angles.size() != circuit.m_inputs) throw std::invalid_argument("input length does not match the circuit");
    StateVector psi(circuit.n_qubits);
    for (const auto& g : circuit.gates) {
        switch (g.kind) {
            case GateKind::ry_input: psi.apply_ry(g.q0, angles[g.index]); break;
            case GateKind::ry_param: psi.apply_ry(g.q0, theta[g.index]); break;
            case GateKind::rz_param: psi.apply_rz(g.q0, theta[g.index]); break;
            case GateKind::cx: psi.apply_cx(g.q0, g.q1); break;
            case GateKind::cz: psi.apply_cz(g.q0, g.q1); break;
        }
    }
    return psi;
}

Matrix angle_map(const Matrix& Z, const Scaler& scaler, double z_max, std::span<const double> lambda) {
    if (!(z_max > 0.0)) throw std::invalid_argument("z_max must be positive");
    if (scaler.dimension() != Z.cols()) throw std::invalid_argument("angle map: scaler dimension mismatch");
    if (!lambda.empty() && lambda.size() != Z.cols()) throw std::invalid_argument("angle map: lambda length mismatch");
    Matrix A = scaler.transform(Z);
    const double unit = std::numbers::pi / z_max;
    for (std::size_t i = 0; i < A.rows(); ++i) {
        for (std::size_t j = 0; j < A.cols(); ++j) {
            const double l = lambda.empty() ? 1.0 : lambda[j];
            A(i, j) = std::clamp(A(i, j), -z_max, z_max) * unit * l;
        }
    }
    return A;
}

std::vector<double> decode_probabilities(std::span<const double> basis, std::size_t num_classes, Mapping mapping) {
    if (mapping == Mapping::parity) {
        if (num_classes != 2) throw std::invalid_argument("parity mapping requires two classes");
        double p0 = 0.0;
        for (std::size_t s = 0; s < basis.size(); ++s) {
            if (std::popcount(s) % 2 == 0) p0 += basis[s];
        }
        p0 = std::clamp(p0, 0.0, 1.0);
        return {p0, 1.0 - p0};
    }
    if (basis.size() < num_classes) throw std::invalid_argument("direct mapping needs 2^n >= number of classes");
    std::vector<double> p(basis.begin(), basis.begin() + static_cast<std::ptrdiff_t>(num_classes));
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    // No mass on any class state: fall back to uniform.
    if (!(total > 0.0)) return std::vector<double>(num_classes, 1.0 / static_cast<double>(num_classes));
    for (double& v : p) v /= total;
    return p;
}

Matrix forward_probs(const Circuit& circuit, std::span<const double> theta, const Matrix& angles,
                     std::size_t num_classes, Mapping mapping) {
    Matrix P(angles.rows(), num_classes);
    for (std::size_t i = 0; i < angles.rows(); ++i) {
        const auto basis = run_circuit(circuit, theta, angles.row(i)).probabilities();
        const auto p = decode_probabilities(basis, num_classes, mapping);
        std::copy(p.begin(), p.end(), P.row(i).begin());
    }
    return P;
}

double cross_entropy(const Matrix& probs, std::span<const int> y, std::span<const std::size_t> rows) {
    if (probs.rows() != y.size()) throw std::invalid_argument("cross_entropy: label count mismatch");
    double total = 0.0;
    auto term = [&](std::size_t i) {
        const auto c = static_cast<std::size_t>(y[i]);
        if (y[i] < 0 || c >= probs.cols()) throw std::invalid_argument("cross_entropy: label out of range");
        return -std::log(std::max(probs(i, c), kProbabilityFloor));
    };
    if (rows.empty()) {
        if (y.empty()) throw std::invalid_argument("cross_entropy: no rows");
        for (std::size_t i = 0; i < y.size(); ++i) total += term(i);
        return total / static_cast<double>(y.size());
    }
    for (auto i : rows) total += term(i);
    return total / static_cast<double>(rows.size());
}

void SpsaConfig::validate() const {
    if (!(a > 0.0) || !(c > 0.0)) throw std::invalid_argument("SPSA gains a and c must be positive");
    if (!(alpha > 0.0 && alpha <= 1.0) || !(gamma > 0.0 && gamma <= 1.0)) {
        throw std::invalid_argument("SPSA exponents must lie in (0, 1]");
    }
    if (steps == 0 || batch == 0 || patience == 0) throw std::invalid_argument("SPSA steps, batch and patience must be >= 1");
    if (!(clip_norm > 0.0)) throw std::invalid_argument("SPSA clip norm must be positive");
    if (!(tolerance >= 0.0)) throw std::invalid_argument("SPSA tolerance must be nonnegative");
    if (!(init_sigma >= 0.0)) throw std::invalid_argument("init_sigma must be nonnegative");
}

std::vector<double> spsa_gradient(double f_plus, double f_minus, double c_t, std::span<const double> delta,
                                  double g_max) {
    const double secant = (f_plus - f_minus) / (2.0 * c_t);
    std::vector<double> g(delta.size());
    for (std::size_t i = 0; i < delta.size(); ++i) g[i] = secant * delta[i];
    const double norm = l2_norm(g);
    if (norm > g_max) {
        const double s = g_max / norm;
        for (double& v : g) v *= s;
    }
    return g;
}

SpsaResult spsa_minimize(const BatchLoss& loss, std::size_t num_rows, std::vector<double> theta0,
                         const SpsaConfig& cfg) {
    cfg.validate();
    if (num_rows == 0) throw std::invalid_argument("SPSA needs training data");
    SpsaResult out;
    out.theta = std::move(theta0);
    std::size_t batch = cfg.batch;
    if (batch > num_rows) {
        out.record.warnings.push_back("batch size " + std::to_string(batch) + " exceeds " + std::to_string(num_rows) +
                                      " rows; clamped");
        batch = num_rows;
    }

    std::mt19937_64 rng(derive_seed(cfg.seed, {1}));
    std::vector<std::size_t> order(num_rows);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> delta(out.theta.size()), plus(out.theta.size()), minus(out.theta.size());
    double best = std::numeric_limits<double>::infinity();
    std::size_t no_improve = 0;

    for (std::size_t t = 1; t <= cfg.steps; ++t) {
        const double a_t = cfg.a / std::pow(static_cast<double>(t), cfg.alpha);
        const double c_t = cfg.c / std::pow(static_cast<double>(t), cfg.gamma);
        for (std::size_t i = 0; i < batch; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, num_rows - 1);
            std::swap(order[i], order[pick(rng)]);
        }
        const std::span<const std::size_t> rows(order.data(), batch);
        for (std::size_t i = 0; i < delta.size(); ++i) {
            delta[i] = (rng() & 1U) ? 1.0 : -1.0;
            plus[i] = out.theta[i] + c_t * delta[i];
            minus[i] = out.theta[i] - c_t * delta[i];
        }
        const double f_plus = loss(plus, rows);
        const double f_minus = loss(minus, rows);
        const auto g = spsa_gradient(f_plus, f_minus, c_t, delta, cfg.clip_norm);
        for (std::size_t i = 0; i < g.size(); ++i) out.theta[i] -= a_t * g[i];

        const double batch_loss = 0.5 * (f_plus + f_minus);
        out.record.batch_losses.push_back(batch_loss);
        out.record.steps_run = t;
        if (batch_loss < best - cfg.tolerance) {
            best = batch_loss;
            no_improve = 0;
        } else if (++no_improve >= cfg.patience) {
            out.record.early_stopped = true;
            break;
        }
    }
    out.record.best_batch_loss = best;
    return out;
}

SpsaResult spsa_train(const Matrix& angles, std::span<const int> y, std::size_t num_classes, const VqcSpec& spec,
                      const SpsaConfig& cfg) {
    spec.validate(num_classes);
    if (angles.rows() != y.size()) throw std::invalid_argument("spsa_train: label count mismatch");
    if (angles.cols() != spec.m_inputs) throw std::invalid_argument("spsa_train: input width does not match spec");
    const Circuit circuit = build_circuit(spec);

    std::mt19937_64 rng(derive_seed(cfg.seed, {0}));
    std::normal_distribution<double> init(0.0, cfg.init_sigma);
    std::vector<double> theta0(spec.num_params());
    for (double& v : theta0) v = cfg.init_sigma > 0.0 ? init(rng) : 0.0;

    auto loss = [&](std::span<const double> theta, std::span<const std::size_t> rows) {
        double total = 0.0;
        for (auto i : rows) {
            const auto p = decode_probabilities(run_circuit(circuit, theta, angles.row(i)).probabilities(),
                                                num_classes, spec.mapping);
            total -= std::log(std::max(p[static_cast<std::size_t>(y[i])], kProbabilityFloor));
        }
        return total / static_cast<double>(rows.size());
    };
    return spsa_minimize(loss, angles.rows(), std::move(theta0), cfg);
}

double alert_rate(std::span<const int> predictions) {
    if (predictions.empty()) return 0.0;
    const auto positives = std::count(predictions.begin(), predictions.end(), 1);
    return static_cast<double>(positives) / static_cast<double>(predictions.size());
}

std::vector<int> predict_labels(const Matrix& probs, std::optional<double> tau) {
    std::vector<int> out(probs.rows());
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        if (probs.cols() == 2 && tau) {
            out[i] = probs(i, 1) >= *tau ? 1 : 0;
        } else {
            const auto row = probs.row(i);
            out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
        }
    }
    return out;
}

std::string to_string(TargetMetric m) {
    switch (m) {
        case TargetMetric::macro_f1: return "macro_f1";
        case TargetMetric::accuracy: return "accuracy";
        case TargetMetric::positive_f1: return "positive_f1";
        case TargetMetric::recall_at_alert: return "recall_at_alert";
    }
    return "macro_f1";
}

TargetMetric target_metric_from_string(const std::string& s) {
    if (s == "macro_f1") return TargetMetric::macro_f1;
    if (s == "accuracy") return TargetMetric::accuracy;
    if (s == "positive_f1") return TargetMetric::positive_f1;
    if (s == "recall_at_alert") return TargetMetric::recall_at_alert;
    throw std::invalid_argument("unknown target metric '" + s + "'");
}

double target_score(std::span<const int> y_true, std::span<const int> y_pred, std::size_t num_classes,
                    TargetMetric metric, double alert_budget) {
    const auto report = evaluate(y_true, y_pred, num_classes);
    switch (metric) {
        case TargetMetric::macro_f1: return report.macro_f1;
        case TargetMetric::accuracy: return report.accuracy;
        case TargetMetric::positive_f1: return num_classes == 2 ? report.per_class[1].f1 : report.macro_f1;
        case TargetMetric::recall_at_alert: {
            const double rate = alert_rate(y_pred);
            return rate <= alert_budget ? report.per_class[1].recall : -rate;
        }
    }
    return report.macro_f1;
}

std::vector<double> default_threshold_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 19; ++i) grid.push_back(i * 0.05);
    return grid;
}

ThresholdChoice tune_threshold(const Matrix& probs, std::span<const int> y, std::span<const double> grid,
                               TargetMetric metric, double alert_budget) {
    if (probs.cols() != 2) throw std::invalid_argument("threshold tuning is binary only");
    if (grid.empty()) throw std::invalid_argument("empty threshold grid");
    ThresholdChoice best{grid.front(), -std::numeric_limits<double>::infinity()};
    for (double tau : grid) {
        const double s = target_score(y, predict_labels(probs, tau), 2, metric, alert_budget);
        if (s > best.score) best = {tau, s};
    }
    return best;
}

std::vector<Fold> stratified_kfold(std::span<const int> y, std::size_t num_classes, std::size_t K,
                                   std::uint64_t seed) {
    if (K < 2) throw std::invalid_argument("K-fold needs K >= 2");
    std::vector<std::vector<std::size_t>> by_class(num_classes);
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < 0 || static_cast<std::size_t>(y[i]) >= num_classes) throw DataError("label out of range");
        by_class[static_cast<std::size_t>(y[i])].push_back(i);
    }
    std::vector<std::size_t> fold_of(y.size());
    std::mt19937_64 rng(seed);
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (by_class[c].size() < K) {
            throw DataError("class " + std::to_string(c) + " has " + std::to_string(by_class[c].size()) +
                            " training rows, fewer than K=" + std::to_string(K));
        }
        std::shuffle(by_class[c].begin(), by_class[c].end(), rng);
        for (std::size_t p = 0; p < by_class[c].size(); ++p) fold_of[by_class[c][p]] = p % K;
    }
    std::vector<Fold> folds(K);
    for (std::size_t i = 0; i < y.size(); ++i) {
        for (std::size_t f = 0; f < K; ++f) (f == fold_of[i] ? folds[f].val : folds[f].train).push_back(i);
    }
    return folds;
}

std::vector<HyperParams> default_hp_space() {
    std::vector<HyperParams> space;
    for (std::size_t L = 1; L <= 3; ++L) {
        space.push_back({L, true});
        space.push_back({L, false});
    }
    return space;
}

Matrix VqcModel::probabilities(const Matrix& Z) const {
    const Matrix A = angle_map(Z, scaler, spec.z_max, spec.feature_scales);
    return forward_probs(build_circuit(spec), theta, A, num_classes, spec.mapping);
}

std::vector<int> VqcModel::predict(const Matrix& Z, std::optional<double> tau) const {
    return predict_labels(probabilities(Z), tau ? tau : threshold);
}

namespace {

VqcModel fit_model(const Matrix& Z, std::span<const int> y, std::size_t num_classes, const HyperParams& hp,
                   const VqcTrainOptions& options, std::uint64_t seed, SpsaRecord* record) {
    VqcModel model;
    model.num_classes = num_classes;
    model.spec = default_spec(Z.cols(), num_classes, hp.reps, hp.reupload);
    model.spec.z_max = options.z_max;
    model.spec.feature_scales = options.feature_scales;
    model.scaler = fit_scaler(Z);
    SpsaConfig cfg = options.spsa;
    cfg.seed = seed;
    auto result = spsa_train(angle_map(Z, model.scaler, model.spec.z_max, model.spec.feature_scales), y,
                             num_classes, model.spec, cfg);
    model.theta = std::move(result.theta);
    if (record) *record = std::move(result.record);
    return model;
}

}  // namespace

VqcTrainResult kfold_train(const Matrix& Z_train, std::span<const int> y_train, const Matrix& Z_val,
                           std::span<const int> y_val, const Matrix& Z_test, std::span<const int> y_test,
                           std::size_t num_classes, const VqcTrainOptions& options) {
    if (options.hp_space.empty()) throw std::invalid_argument("empty hyperparameter space");
    if (Z_train.rows() != y_train.size() || Z_val.rows() != y_val.size() || Z_test.rows() != y_test.size()) {
        throw std::invalid_argument("kfold_train: label count mismatch");
    }
    const bool binary = num_classes == 2;
    const auto folds = stratified_kfold(y_train, num_classes, options.folds, derive_seed(options.seed, {0}));

    VqcTrainResult result;
    std::size_t best_index = 0;
    for (std::size_t h = 0; h < options.hp_space.size(); ++h) {
        HpRecord rec;
        rec.hp = options.hp_space[h];
        double total = 0.0;
        for (std::size_t f = 0; f < folds.size(); ++f) {
            const Matrix Zf = Z_train.select_rows(folds[f].train);
            std::vector<int> yf;
            for (auto i : folds[f].train) yf.push_back(y_train[i]);
            const Matrix Zv = Z_train.select_rows(folds[f].val);
            std::vector<int> yv;
            for (auto i : folds[f].val) yv.push_back(y_train[i]);

            const VqcModel m = fit_model(Zf, yf, num_classes, rec.hp, options, derive_seed(options.seed, {1, h, f}),
                                         nullptr);
            const Matrix P = m.probabilities(Zv);
            FoldRecord fr;
            fr.fold = f;
            if (binary) {
                const auto choice =
                    tune_threshold(P, yv, options.threshold_grid, options.target_metric, options.alert_budget);
                fr.tau = choice.tau;
                fr.score = choice.score;
            } else {
                fr.score = target_score(yv, predict_labels(P, std::nullopt), num_classes, options.target_metric,
                                        options.alert_budget);
            }
            total += fr.score;
            rec.folds.push_back(fr);
        }
        rec.mean_score = total / static_cast<double>(folds.size());
        result.hp_records.push_back(std::move(rec));
        if (result.hp_records[h].mean_score > result.hp_records[best_index].mean_score) best_index = h;
    }

    result.best_hp = options.hp_space[best_index];
    result.model = fit_model(Z_train, y_train, num_classes, result.best_hp, options,
                             derive_seed(options.seed, {2, best_index}), &result.training);
    result.final_loss = cross_entropy(result.model.probabilities(Z_train), y_train);

    const Matrix P_val = result.model.probabilities(Z_val);
    if (binary) {
        result.model.threshold =
            tune_threshold(P_val, y_val, options.threshold_grid, options.target_metric, options.alert_budget).tau;
    }
    const auto pred_val = predict_labels(P_val, result.model.threshold);
    const auto pred_test = result.model.predict(Z_test);
    result.val_metrics = evaluate(y_val, pred_val, num_classes);
    result.test_metrics = evaluate(y_test, pred_test, num_classes);
    result.val_alert_rate = alert_rate(pred_val);
    result.test_alert_rate = alert_rate(pred_test);
    return result;
}

}  // namespace cgrq
