#include "cgrq/quantum.hpp"

#include "cgrq/matrix.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace cgrq {

StateVector::StateVector(std::size_t num_qubits) : num_qubits_(num_qubits), amps_(std::size_t{1} << num_qubits) {
    amps_[0] = 1.0;
}

StateVector StateVector::from_amplitudes(std::vector<Complex> amplitudes) {
    if (amplitudes.empty() || !std::has_single_bit(amplitudes.size())) {
        throw std::invalid_argument("state length " + std::to_string(amplitudes.size()) + " is not a power of two");
    }
    StateVector s;
    s.num_qubits_ = static_cast<std::size_t>(std::countr_zero(amplitudes.size()));
    s.amps_ = std::move(amplitudes);
    if (std::abs(s.norm_squared() - 1.0) > 1e-9) throw std::invalid_argument("state is not normalized");
    return s;
}

StateVector StateVector::from_real(std::span<const double> amplitudes) {
    return from_amplitudes(std::vector<Complex>(amplitudes.begin(), amplitudes.end()));
}

double StateVector::norm_squared() const {
    double acc = 0.0;
    for (const auto& a : amps_) acc += std::norm(a);
    return acc;
}

void StateVector::check_qubit(std::size_t q) const {
    if (q >= num_qubits_) {
        throw std::out_of_range("qubit " + std::to_string(q) + " out of range for " + std::to_string(num_qubits_) +
                                "-qubit state");
    }
}

void StateVector::apply_h(std::size_t q) {
    check_qubit(q);
    const std::size_t bit = std::size_t{1} << q;
    const double r = std::numbers::sqrt2 / 2.0;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if (i & bit) continue;
        const Complex a0 = amps_[i];
        const Complex a1 = amps_[i | bit];
        amps_[i] = r * (a0 + a1);
        amps_[i | bit] = r * (a0 - a1);
    }
}

void StateVector::apply_x(std::size_t q) {
    check_qubit(q);
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if (!(i & bit)) std::swap(amps_[i], amps_[i | bit]);
    }
}

void StateVector::apply_ry(std::size_t q, double angle) {
    check_qubit(q);
    const std::size_t bit = std::size_t{1} << q;
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if (i & bit) continue;
        const Complex a0 = amps_[i];
        const Complex a1 = amps_[i | bit];
        amps_[i] = c * a0 - s * a1;
        amps_[i | bit] = s * a0 + c * a1;
    }
}

void StateVector::apply_rz(std::size_t q, double angle) {
    check_qubit(q);
    const std::size_t bit = std::size_t{1} << q;
    const Complex p0 = std::polar(1.0, -angle / 2.0);
    const Complex p1 = std::polar(1.0, angle / 2.0);
    for (std::size_t i = 0; i < amps_.size(); ++i) amps_[i] *= (i & bit) ? p1 : p0;
}

void StateVector::apply_cx(std::size_t control, std::size_t target) {
    check_qubit(control);
    check_qubit(target);
    if (control == target) throw std::invalid_argument("CX control and target must differ");
    const std::size_t cbit = std::size_t{1} << control;
    const std::size_t tbit = std::size_t{1} << target;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if ((i & cbit) && !(i & tbit)) std::swap(amps_[i], amps_[i | tbit]);
    }
}

void StateVector::apply_cz(std::size_t a, std::size_t b) {
    check_qubit(a);
    check_qubit(b);
    if (a == b) throw std::invalid_argument("CZ qubits must differ");
    const std::size_t mask = (std::size_t{1} << a) | (std::size_t{1} << b);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if ((i & mask) == mask) amps_[i] = -amps_[i];
    }
}

void StateVector::apply_cswap(std::size_t control, std::size_t a, std::size_t b) {
    check_qubit(control);
    check_qubit(a);
    check_qubit(b);
    if (control == a || control == b || a == b) throw std::invalid_argument("CSWAP qubits must be distinct");
    const std::size_t cbit = std::size_t{1} << control;
    const std::size_t abit = std::size_t{1} << a;
    const std::size_t bbit = std::size_t{1} << b;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        // visit each |..a=1,b=0..> / |..a=0,b=1..> pair once
        if ((i & cbit) && (i & abit) && !(i & bbit)) std::swap(amps_[i], amps_[(i & ~abit) | bbit]);
    }
}

double StateVector::probability_zero(std::size_t q) const {
    check_qubit(q);
    const std::size_t bit = std::size_t{1} << q;
    double p = 0.0;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if (!(i & bit)) p += std::norm(amps_[i]);
    }
    return p;
}

std::vector<double> StateVector::probabilities() const {
    std::vector<double> p(amps_.size());
    for (std::size_t i = 0; i < amps_.size(); ++i) p[i] = std::norm(amps_[i]);
    return p;
}

StateVector StateVector::tensor(const StateVector& high) const {
    StateVector out;
    out.num_qubits_ = num_qubits_ + high.num_qubits_;
    out.amps_.assign(std::size_t{1} << out.num_qubits_, Complex{});
    for (std::size_t h = 0; h < high.amps_.size(); ++h) {
        for (std::size_t l = 0; l < amps_.size(); ++l) out.amps_[(h << num_qubits_) | l] = high.amps_[h] * amps_[l];
    }
    return out;
}

std::size_t compact_register_qubits(std::size_t dimension) {
    if (dimension == 0) throw std::invalid_argument("compact register needs a nonempty vector");
    return static_cast<std::size_t>(std::countr_zero(std::bit_ceil(2 * dimension)));
}

CompactStates prepare_compact_states(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("compact states: dimension mismatch");
    const double nx = l2_norm(x);
    const double ny = l2_norm(y);
    if (nx == 0.0 || ny == 0.0) throw std::invalid_argument("compact states: zero-norm input");

    const double z = nx * nx + ny * ny;
    const double sz = std::sqrt(z);
    const double phi_amps[2] = {nx / sz, -ny / sz};

    const std::size_t qubits = compact_register_qubits(x.size());
    std::vector<Complex> psi(std::size_t{1} << qubits);
    for (std::size_t k = 0; k < x.size(); ++k) {
        psi[2 * k] = x[k] / (nx * std::numbers::sqrt2);
        psi[2 * k + 1] = y[k] / (ny * std::numbers::sqrt2);
    }
    return {StateVector::from_real(phi_amps), StateVector::from_amplitudes(std::move(psi)), z};
}

double compact_swap_p0(const CompactStates& states, std::optional<ShotOptions> shots) {
    // register layout: qubit 0 ancilla, qubit 1 phi, qubits 2.. psi (psi qubit 0 = qubit 2)
    const StateVector ancilla(1);
    StateVector full = ancilla.tensor(states.phi).tensor(states.psi);
    full.apply_h(0);
    full.apply_cswap(0, 1, 2);
    full.apply_h(0);
    const double p0 = std::clamp(full.probability_zero(0), 0.0, 1.0);
    if (!shots) return p0;
    if (shots->shots == 0) throw std::invalid_argument("shot count must be positive");
    std::mt19937_64 rng(shots->seed);
    std::binomial_distribution<std::uint64_t> zeros(shots->shots, p0);
    return static_cast<double>(zeros(rng)) / static_cast<double>(shots->shots);
}

GeomPair compact_swap_test(std::span<const double> x, std::span<const double> y, std::optional<ShotOptions> shots) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("compact_swap_test: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                                    std::to_string(y.size()) + ")");
    }
    const double nx = l2_norm(x);
    const double ny = l2_norm(y);
    if (nx == 0.0 || ny == 0.0) {
        GeomPair g;
        g.source = GeomSource::classical_fallback;
        g.distance = euclidean_distance(x, y);
        g.angle = 0.0;  // cosine undefined with a zero vector
        return g;
    }

    const auto states = prepare_compact_states(x, y);
    const double p0 = compact_swap_p0(states, shots);
    GeomPair g;
    g.source = shots ? GeomSource::quantum_shots : GeomSource::quantum_exact;
    g.overlap = std::clamp(2.0 * p0 - 1.0, 0.0, 1.0);
    g.angle = std::acos(std::clamp(std::sqrt(g.overlap), -1.0, 1.0));
    g.distance = std::sqrt(std::max(2.0 * states.z * g.overlap, 0.0));
    return g;
}

}  // namespace cgrq
