#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "capbm/angle.hpp"
#include "capbm/rng.hpp"

namespace capbm {

using cplx = std::complex<double>;

/// Network state: per-unit amplitude in {0, 1} and phase in [0, 2π).
/// An inactive unit keeps its last phase; it has no effect on anything.
struct PhasorState {
    std::vector<std::uint8_t> amps;
    std::vector<double> phases;

    PhasorState() = default;
    explicit PhasorState(std::size_t n) : amps(n, 0), phases(n, 0.0) {}

    /// Moduli are rounded to {0, 1}; phases are taken from arg(z).
    static PhasorState from_complex(std::span<const cplx> z);

    std::size_t size() const noexcept { return amps.size(); }
    bool on(std::size_t j) const noexcept { return amps[j] != 0; }
    cplx value(std::size_t j) const noexcept {
        return amps[j] ? std::polar(1.0, phases[j]) : cplx{};
    }
    void set(std::size_t j, bool active, double phase) noexcept {
        amps[j] = active ? 1 : 0;
        phases[j] = wrap_angle(phase);
    }
    std::vector<cplx> to_complex() const;

    friend bool operator==(const PhasorState&, const PhasorState&) = default;
};

/**
 * Parameters of a fully connected amplitude-phase Boltzmann machine.
 *
 * The complex coupling W_jk = modulus_jk · e^{i phase_jk} is Hermitian:
 * `modulus` and `amp_coupling` are symmetric, `phase` is antisymmetric
 * (mod 2π), and all diagonals are zero.
 */
struct CapBmParams {
    Eigen::MatrixXd modulus;
    Eigen::MatrixXd phase;
    Eigen::MatrixXd amp_coupling;
    Eigen::VectorXd bias;

    CapBmParams() = default;
    explicit CapBmParams(std::size_t n);

    /// Build polar parameters from a Hermitian complex coupling matrix
    /// (DomainError otherwise). Diagonals are dropped.
    static CapBmParams from_complex(const Eigen::MatrixXcd& coupling,
                                    const Eigen::MatrixXd& amp_coupling,
                                    const Eigen::VectorXd& bias);

    std::size_t size() const noexcept { return static_cast<std::size_t>(bias.size()); }
    Eigen::MatrixXcd complex_coupling() const;

    /// Throws ShapeError / DomainError when an invariant is violated.
    void validate(double tol = 1e-12) const;
};

/// Bipartite model: visible × hidden complex and amplitude couplings.
struct CapRbmParams {
    Eigen::MatrixXcd weights;       // V × H
    Eigen::MatrixXd amp_coupling;   // V × H
    Eigen::VectorXd visible_bias;   // V
    Eigen::VectorXd hidden_bias;    // H

    CapRbmParams() = default;
    CapRbmParams(std::size_t n_visible, std::size_t n_hidden);

    std::size_t n_visible() const noexcept { return static_cast<std::size_t>(visible_bias.size()); }
    std::size_t n_hidden() const noexcept { return static_cast<std::size_t>(hidden_bias.size()); }
    void validate() const;
};

/// Input to one unit from the rest of the network: u = a e^{iα} and μ.
struct InputSums {
    double modulus = 0.0;  // a_j ≥ 0
    Angle argument;        // α_j (0 when a_j = 0)
    double amp_input = 0.0;  // μ_j
};

struct PhaseConditional {
    Angle mean;
    double concentration = 0.0;
};

/// E(z) = −½ z†Wz − ½|z|ᵀJ|z| + εᵀ|z|.
double energy_capbm(const CapBmParams& params, const PhasorState& state);

/// E(v, h) = −Re(v†Wh) − |v|ᵀJ|h| + aᵀ|v| + bᵀ|h|.
double energy_caprbm(const CapRbmParams& params, const PhasorState& v, const PhasorState& h);

/// Complex and amplitude input sums to unit j; inactive units contribute nothing.
InputSums input_sums(const CapBmParams& params, const PhasorState& state, std::size_t j);

/// Build InputSums from a complex field value and an amplitude input.
InputSums make_input_sums(cplx u, double amp_input) noexcept;

/// P(|z_j| = 1 | rest) = σ(μ_j − ε_j + ln I₀(a_j)).
double amp_prob(const InputSums& s, double bias);

/// Parameters (α_j, a_j) of the von Mises phase conditional of an active unit.
PhaseConditional phase_conditional(const InputSums& s) noexcept;

/// Numerically stable logistic function.
double logistic(double x) noexcept;

/// (V+H)-unit full model with the RBM couplings in the off-diagonal blocks.
CapBmParams embed_rbm(const CapRbmParams& rbm);

/**
 * Free energy of a visible configuration with the hidden layer summed out,
 * up to a parameter-independent constant:
 * F(v) = aᵀ|v| − Σ_k ln(1 + e^{μ_k − b_k} I₀(a_k)).
 * `v` may hold arbitrary complex values; |v| is used for the amplitude terms.
 */
double free_energy(const CapRbmParams& params, std::span<const cplx> v);

/// Random Hermitian parameters for fixtures and checks. Couplings have
/// modulus up to `scale`, biases and amplitude couplings in ±scale.
CapBmParams random_capbm(std::size_t n, Rng& rng, double scale = 1.0);
CapRbmParams random_caprbm(std::size_t n_visible, std::size_t n_hidden, Rng& rng, double scale = 1.0);
PhasorState random_state(std::size_t n, Rng& rng, double p_on = 0.5);

}  // namespace capbm
