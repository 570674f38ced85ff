#include "cgrq/error.hpp"
#include "cgrq/vqc.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>

using namespace cgrq;

namespace {

constexpr double kPi = std::numbers::pi;

Scaler identity_scaler(std::size_t m) { return Scaler{std::vector<double>(m, 0.0), std::vector<double>(m, 1.0)}; }

VqcSpec spec_of(std::size_t n, std::size_t reps, bool reupload, std::size_t m, Mapping mapping) {
    VqcSpec s;
    s.n_qubits = n;
    s.reps = reps;
    s.reupload = reupload;
    s.m_inputs = m;
    s.mapping = mapping;
    return s;
}

}  // namespace

TEST(AngleMap, ClipAndScale) {
    const auto Z = Matrix::from_rows({{0.0}, {3.0}, {-6.0}});
    const auto A = angle_map(Z, identity_scaler(1), 3.0);
    EXPECT_DOUBLE_EQ(A(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(A(1, 0), kPi);
    EXPECT_DOUBLE_EQ(A(2, 0), -kPi);
    const std::vector<double> lambda{0.5};
    EXPECT_DOUBLE_EQ(angle_map(Z, identity_scaler(1), 3.0, lambda)(1, 0), kPi / 2);
}

TEST(AngleMap, StandardizesFirst) {
    const Scaler s{{1.0}, {2.0}};
    EXPECT_DOUBLE_EQ(angle_map(Matrix::from_rows({{7.0}}), s, 3.0)(0, 0), kPi);
}

TEST(Circuit, SingleQubitHasNoEntanglers) {
    const auto c = build_circuit(spec_of(1, 1, true, 1, Mapping::parity));
    EXPECT_EQ(c.num_params, 2u);
    EXPECT_EQ(c.count(GateKind::ry_input), 1u);
    EXPECT_EQ(c.count(GateKind::ry_param), 1u);
    EXPECT_EQ(c.count(GateKind::rz_param), 1u);
    EXPECT_EQ(c.count(GateKind::cx) + c.count(GateKind::cz), 0u);
    EXPECT_EQ(c.gates.size(), 3u);
}

TEST(Circuit, ReuploadRepeatsEncoding) {
    EXPECT_EQ(build_circuit(spec_of(2, 2, true, 2, Mapping::parity)).count(GateKind::ry_input), 4u);
    EXPECT_EQ(build_circuit(spec_of(2, 2, false, 2, Mapping::parity)).count(GateKind::ry_input), 2u);
}

TEST(Circuit, ThreeQubitChains) {
    const auto c = build_circuit(spec_of(3, 1, true, 2, Mapping::parity));
    EXPECT_EQ(c.count(GateKind::cx), 2u);
    EXPECT_EQ(c.count(GateKind::cz), 2u);
    EXPECT_EQ(c.num_params, 6u);
    std::set<std::size_t> used;
    for (const auto& g : c.gates) {
        if (g.kind == GateKind::ry_param || g.kind == GateKind::rz_param) used.insert(g.index);
    }
    EXPECT_EQ(used.size(), 6u);
}

TEST(VqcSpecDefaults, DefaultsAndValidation) {
    const auto bin = default_spec(2, 2);
    EXPECT_EQ(bin.n_qubits, 2u);
    EXPECT_EQ(bin.mapping, Mapping::parity);
    const auto multi = default_spec(3, 3);
    EXPECT_EQ(multi.n_qubits, 3u);
    EXPECT_EQ(multi.mapping, Mapping::direct);
    EXPECT_EQ(default_spec(1, 2).n_qubits, 2u);
    EXPECT_ANY_THROW(spec_of(2, 1, true, 2, Mapping::parity).validate(3));
    EXPECT_ANY_THROW(spec_of(1, 1, true, 1, Mapping::direct).validate(3));
    EXPECT_NO_THROW(spec_of(2, 1, true, 2, Mapping::direct).validate(3));
}

TEST(Forward, IdentityCircuitIsClassZero) {
    for (std::size_t n : {1u, 2u, 4u}) {
        const auto spec = spec_of(n, 2, true, n, Mapping::parity);
        const auto c = build_circuit(spec);
        const std::vector<double> theta(spec.num_params(), 0.0);
        const auto P = forward_probs(c, theta, Matrix(1, n, 0.0), 2, Mapping::parity);
        EXPECT_NEAR(P(0, 0), 1.0, 1e-12);
        EXPECT_NEAR(P(0, 1), 0.0, 1e-12);
    }
}

TEST(Forward, PiRotationFlipsParity) {
    const auto spec = spec_of(1, 1, true, 1, Mapping::parity);
    const std::vector<double> theta(2, 0.0);
    const auto P = forward_probs(build_circuit(spec), theta, Matrix::from_rows({{kPi}}), 2, Mapping::parity);
    EXPECT_NEAR(P(0, 0), 0.0, 1e-12);
    EXPECT_NEAR(P(0, 1), 1.0, 1e-12);
}

TEST(Forward, DirectRenormalizes) {
    const std::vector<double> uniform(4, 0.25);
    const auto p = decode_probabilities(uniform, 3, Mapping::direct);
    for (double v : p) EXPECT_NEAR(v, 1.0 / 3.0, 1e-12);
    const std::vector<double> only_last{0, 0, 0, 1};
    for (double v : decode_probabilities(only_last, 3, Mapping::direct)) EXPECT_NEAR(v, 1.0 / 3.0, 1e-12);
}

TEST(Forward, ParityMatchesPopcount) {
    const std::vector<double> basis{0.1, 0.2, 0.3, 0.4};  // indices 0..3, odd parity: 1, 2
    const auto p = decode_probabilities(basis, 2, Mapping::parity);
    EXPECT_NEAR(p[0], 0.5, 1e-12);
    EXPECT_NEAR(p[1], 0.5, 1e-12);
}

TEST(Forward, ConservationAndDeterminism) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 1 + t % 4, C = (t % 3 == 0 && n >= 2) ? 3 : 2;
        const Mapping map = C == 2 && t % 2 ? Mapping::parity : Mapping::direct;
        const auto spec = spec_of(n, 1 + t % 3, t % 2 == 0, 1 + t % 3, map);
        std::vector<double> theta(spec.num_params());
        for (auto& v : theta) v = ang(rng);
        Matrix A(3, spec.m_inputs);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < spec.m_inputs; ++j) A(i, j) = ang(rng);
        const auto c = build_circuit(spec);
        const auto P = forward_probs(c, theta, A, C, map);
        for (std::size_t i = 0; i < 3; ++i) {
            double sum = 0;
            for (std::size_t k = 0; k < C; ++k) {
                EXPECT_GE(P(i, k), 0.0);
                sum += P(i, k);
            }
            EXPECT_NEAR(sum, 1.0, 1e-9);
        }
        EXPECT_EQ(P, forward_probs(c, theta, A, C, map));
    }
}

TEST(CrossEntropy, FloorsZeroProbability) {
    const auto P = Matrix::from_rows({{1.0, 0.0}, {0.5, 0.5}});
    const std::vector<int> y{1, 0};
    EXPECT_NEAR(cross_entropy(P, y), (-std::log(kProbabilityFloor) + std::log(2.0)) / 2.0, 1e-9);
    const std::vector<std::size_t> rows{1};
    EXPECT_NEAR(cross_entropy(P, y, rows), std::log(2.0), 1e-12);
}

TEST(Spsa, ZeroSecant) {
    const std::vector<double> delta{1, -1, 1};
    for (double g : spsa_gradient(0.4, 0.4, 0.1, delta, 1.0)) EXPECT_EQ(g, 0.0);
}

TEST(Spsa, ClippedUpdate) {
    const std::vector<double> delta{1, -1};
    const auto g = spsa_gradient(1.0, 0.6, 0.1, delta, 1.0);
    EXPECT_NEAR(g[0], 0.7071, 1e-4);
    EXPECT_NEAR(g[1], -0.7071, 1e-4);
    const auto raw = spsa_gradient(1.0, 0.6, 0.1, delta, std::numeric_limits<double>::infinity());
    EXPECT_NEAR(raw[0], 2.0, 1e-12);
    EXPECT_NEAR(raw[1], -2.0, 1e-12);
}

TEST(Spsa, ClipBoundHolds) {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int t = 0; t < 500; ++t) {
        std::vector<double> delta(1 + t % 6);
        for (auto& d : delta) d = (rng() & 1) ? 1.0 : -1.0;
        const double gmax = 0.1 + std::abs(u(rng));
        const auto g = spsa_gradient(u(rng), u(rng), 0.05 + std::abs(u(rng)) / 10, delta, gmax);
        EXPECT_LE(l2_norm(g), gmax + 1e-12);
    }
}

TEST(Spsa, SecantAlignsWithGradientOnQuadratic) {
    const std::vector<double> theta{0.7, -1.2, 0.4, 2.0};
    const double c = 0.05;
    const auto f = [](std::span<const double> v) {
        double s = 0;
        for (double x : v) s += x * x;
        return s;
    };
    std::mt19937_64 rng(77);
    std::vector<double> mean(theta.size(), 0.0);
    for (int draw = 0; draw < 1000; ++draw) {
        std::vector<double> delta(theta.size()), plus = theta, minus = theta;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            delta[i] = (rng() & 1) ? 1.0 : -1.0;
            plus[i] += c * delta[i];
            minus[i] -= c * delta[i];
        }
        const auto g = spsa_gradient(f(plus), f(minus), c, delta, std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < g.size(); ++i) mean[i] += g[i] / 1000.0;
    }
    double dot = 0, ng = 0, nt = 0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        dot += mean[i] * 2 * theta[i];
        ng += mean[i] * mean[i];
        nt += 4 * theta[i] * theta[i];
    }
    EXPECT_GE(dot / std::sqrt(ng * nt), 0.95);
}

TEST(Spsa, OneParameterDescent) {
    const double target = 1.3;
    const BatchLoss loss = [&](std::span<const double> th, std::span<const std::size_t>) {
        return 1.0 - std::cos(th[0] - target);
    };
    SpsaConfig cfg;
    cfg.steps = 200;
    cfg.batch = 1;
    cfg.patience = 1000;
    cfg.seed = 4;
    const std::vector<double> theta0{-1.0};
    const auto r = spsa_minimize(loss, 1, theta0, cfg);
    const std::vector<std::size_t> none;
    EXPECT_LT(loss(r.theta, none), loss(theta0, none));
    EXPECT_EQ(r.record.steps_run, 200u);
    EXPECT_TRUE(r.record.warnings.empty());
}

TEST(Spsa, EarlyStopAndBatchClamp) {
    const BatchLoss flat = [](std::span<const double>, std::span<const std::size_t>) { return 0.5; };
    SpsaConfig cfg;
    cfg.steps = 300;
    cfg.patience = 5;
    cfg.batch = 64;
    const auto r = spsa_minimize(flat, 10, {0.0, 0.0}, cfg);
    EXPECT_TRUE(r.record.early_stopped);
    EXPECT_EQ(r.record.steps_run, 6u);
    EXPECT_FALSE(r.record.warnings.empty());
}

TEST(Spsa, ConfigValidated) {
    SpsaConfig cfg;
    cfg.steps = 0;
    EXPECT_ANY_THROW(cfg.validate());
    cfg = SpsaConfig{};
    cfg.c = 0.0;
    EXPECT_ANY_THROW(cfg.validate());
}

TEST(Threshold, BinarySemantics) {
    const auto P = Matrix::from_rows({{0.7, 0.3}, {0.5, 0.5}, {0.2, 0.8}});
    EXPECT_EQ(predict_labels(P, 0.3), (std::vector<int>{1, 1, 1}));
    EXPECT_EQ(predict_labels(P, 0.5), (std::vector<int>{0, 1, 1}));
    EXPECT_EQ(predict_labels(P, std::nullopt), (std::vector<int>{0, 0, 1}));
    EXPECT_NEAR(alert_rate(predict_labels(P, 0.5)), 2.0 / 3.0, 1e-12);
}

TEST(Threshold, ArgmaxAgreesAwayFromBoundary) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    Matrix P(200, 2);
    for (std::size_t i = 0; i < 200; ++i) {
        P(i, 1) = u(rng);
        P(i, 0) = 1.0 - P(i, 1);
    }
    const auto a = predict_labels(P, 0.5), b = predict_labels(P, std::nullopt);
    for (std::size_t i = 0; i < 200; ++i) {
        if (std::abs(P(i, 1) - 0.5) > 1e-12) {
            EXPECT_EQ(a[i], b[i]);
        }
    }
}

TEST(Threshold, TuneFirstMaximizer) {
    const auto P = Matrix::from_rows({{0.9, 0.1}, {0.8, 0.2}, {0.3, 0.7}, {0.2, 0.8}});
    const std::vector<int> y{0, 0, 1, 1};
    const std::vector<double> grid{0.1, 0.3, 0.5, 0.7};
    const auto t = tune_threshold(P, y, grid, TargetMetric::macro_f1, 0.05);
    EXPECT_DOUBLE_EQ(t.tau, 0.3);
    EXPECT_DOUBLE_EQ(t.score, 1.0);
    EXPECT_EQ(default_threshold_grid().size(), 19u);
}

TEST(Threshold, RecallAtAlertRespectsBudget) {
    const std::vector<int> y{0, 0, 0, 1}, all{1, 1, 1, 1}, one{0, 0, 0, 1};
    EXPECT_DOUBLE_EQ(target_score(y, one, 2, TargetMetric::recall_at_alert, 0.3), 1.0);
    EXPECT_LT(target_score(y, all, 2, TargetMetric::recall_at_alert, 0.3), 0.0);
    EXPECT_EQ(target_metric_from_string(to_string(TargetMetric::positive_f1)), TargetMetric::positive_f1);
}

TEST(KFold, StratifiedPartition) {
    std::vector<int> y;
    for (int i = 0; i < 53; ++i) y.push_back(i % 3 == 0 ? 1 : 0);
    const auto folds = stratified_kfold(y, 2, 5, 3);
    ASSERT_EQ(folds.size(), 5u);
    std::multiset<std::size_t> seen;
    for (const auto& f : folds) {
        EXPECT_EQ(f.train.size() + f.val.size(), y.size());
        std::size_t pos = 0;
        for (auto i : f.val) {
            seen.insert(i);
            pos += static_cast<std::size_t>(y[i]);
        }
        EXPECT_GE(pos, 3u);
        EXPECT_LE(pos, 4u);
    }
    EXPECT_EQ(seen.size(), y.size());
    EXPECT_EQ(std::set<std::size_t>(seen.begin(), seen.end()).size(), y.size());
}

TEST(KFold, TooFewMembers) {
    const std::vector<int> y{0, 0, 0, 0, 0, 1, 1};
    EXPECT_THROW(stratified_kfold(y, 2, 5, 0), DataError);
}

TEST(KFoldTrain, SingleHpAndSeparableBlobs) {
    Matrix Ztr, Zva, Zte;
    std::vector<int> ytr, yva, yte;
    oracle::two_blobs(160, 2.0, 1, Ztr, ytr);
    oracle::two_blobs(60, 2.0, 2, Zva, yva);
    oracle::two_blobs(60, 2.0, 3, Zte, yte);
    VqcTrainOptions opt;
    opt.hp_space = {HyperParams{1, true}};
    opt.folds = 3;
    opt.spsa.steps = 120;
    const auto r = kfold_train(Ztr, ytr, Zva, yva, Zte, yte, 2, opt);
    EXPECT_EQ(r.best_hp, (HyperParams{1, true}));
    ASSERT_EQ(r.hp_records.size(), 1u);
    EXPECT_EQ(r.hp_records[0].folds.size(), 3u);
    EXPECT_GE(r.val_metrics.macro_f1, 0.9);
    ASSERT_TRUE(r.model.threshold.has_value());
    const auto full = fit_scaler(Ztr);
    EXPECT_EQ(r.model.scaler.means, full.means);
    EXPECT_EQ(r.model.predict(Zte), r.model.predict(Zte, r.model.threshold));
}
