#pragma once

// Small statevector simulator and the single-ancilla compact SWAP test used to
// turn a pair of real vectors into a distance / angle pair.

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace cgrq {

using Complex = std::complex<double>;

/// n-qubit pure state. Qubit q is bit q of the amplitude index (qubit 0 is the
/// least-significant bit).
class StateVector {
public:
    /// |0...0> on n qubits.
    explicit StateVector(std::size_t num_qubits);

    /// Length must be a power of two and the norm 1 within 1e-9.
    static StateVector from_amplitudes(std::vector<Complex> amplitudes);
    static StateVector from_real(std::span<const double> amplitudes);

    std::size_t num_qubits() const { return num_qubits_; }
    std::size_t dimension() const { return amps_.size(); }
    std::span<const Complex> amplitudes() const { return amps_; }
    double norm_squared() const;

    void apply_h(std::size_t q);
    void apply_x(std::size_t q);
    void apply_ry(std::size_t q, double angle);
    void apply_rz(std::size_t q, double angle);
    void apply_cx(std::size_t control, std::size_t target);
    void apply_cz(std::size_t a, std::size_t b);
    void apply_cswap(std::size_t control, std::size_t a, std::size_t b);

    /// Probability that measuring qubit q yields 0.
    double probability_zero(std::size_t q) const;
    std::vector<double> probabilities() const;

    /// State of the joint register: `*this` on the low qubits, `high` above it.
    StateVector tensor(const StateVector& high) const;

private:
    StateVector() = default;
    void check_qubit(std::size_t q) const;

    std::size_t num_qubits_ = 0;
    std::vector<Complex> amps_;
};

enum class GeomSource { quantum_exact, quantum_shots, classical_fallback };

/// Distance / angle channels for one (x, y) pair. `overlap` is the clipped
/// ancilla statistic s = 2 p0 - 1 (0 for the classical fallback).
struct GeomPair {
    double distance = 0.0;
    double angle = 0.0;
    double overlap = 0.0;
    GeomSource source = GeomSource::quantum_exact;
};

struct CompactStates {
    StateVector phi;  // 1 qubit: (|x|, -|y|) / sqrt(Z)
    StateVector psi;  // interleaved x_k/|x|, y_k/|y| scaled by 1/sqrt(2), zero padded
    double z = 0.0;   // |x|^2 + |y|^2
};

/// Number of qubits in the psi register for M-dimensional inputs: ceil(log2(2M)).
std::size_t compact_register_qubits(std::size_t dimension);

/// Throws std::invalid_argument for zero-norm inputs or mismatched dimensions.
CompactStates prepare_compact_states(std::span<const double> x, std::span<const double> y);

struct ShotOptions {
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
};

/// Ancilla p0 of H -> CSWAP(ancilla; phi, psi_0) -> H. Without shot options the
/// exact statevector probability is returned; otherwise the fraction of zeros
/// over `shots` seeded samples.
double compact_swap_p0(const CompactStates& states, std::optional<ShotOptions> shots = std::nullopt);

/// D = sqrt(2 Z s), Theta = arccos(sqrt(s)) from the compact SWAP test; classical
/// fallback (D = |x - y|, Theta from the cosine or 0) when either norm is zero.
GeomPair compact_swap_test(std::span<const double> x, std::span<const double> y,
                           std::optional<ShotOptions> shots = std::nullopt);

}  // namespace cgrq
