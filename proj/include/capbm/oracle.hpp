#pragma once

// Brute-force reference computations on phase-discretized models.
//
// Every unit has K + 1 states: "off" with measure 2π, and "on" at the K
// phases 2πd/K, each with measure 2π/K. This mirrors the continuous model,
// where both amplitude values carry a full phase integral, so discretized
// conditionals converge to the continuous ones as K grows.
//
// Energies are evaluated here from the complex matrix form and the state
// sums are done explicitly; nothing in this file calls into the model,
// sampler or learning code.

#include <cstdint>
#include <vector>

#include "capbm/learning.hpp"
#include "capbm/model.hpp"
#include "capbm/stats.hpp"

namespace capbm::oracle {

inline constexpr std::uint64_t max_states = 10'000'000;

struct DiscretizedModel {
    CapBmParams params;
    int bins = 64;
    /// Directional-unit mode: only the K "on" states exist.
    bool clamp_amplitudes = false;

    void validate() const;
};

/// Exact distribution over all discretized states of a full model.
/// State digits per unit (unit 0 least significant): 0 = off,
/// d ∈ [1, K] = on at phase 2π(d − 1)/K. Clamped mode has no off digit:
/// d ∈ [0, K) = on at phase 2πd/K.
struct ProbabilityTable {
    std::size_t n_units = 0;
    int bins = 0;
    bool clamp_amplitudes = false;
    std::vector<double> prob;

    int radix() const noexcept { return clamp_amplitudes ? bins : bins + 1; }
    PhasorState decode(std::size_t index) const;
    std::size_t encode(const PhasorState& grid_state) const;
};

ProbabilityTable enumerate_boltzmann(const DiscretizedModel& dm);

/// Energy from the complex quadratic form, for cross-checking the model code.
double reference_energy(const CapBmParams& params, const PhasorState& state);
double reference_energy_rbm(const CapRbmParams& params, const PhasorState& v, const PhasorState& h);

/// Discretized conditional P(|z_j| = 1 | rest) by summing over unit j's states.
double exact_marginal_amp(const DiscretizedModel& dm, const PhasorState& rest, std::size_t j);

/// Discretized conditional phase distribution of an active unit j (K masses).
std::vector<double> exact_phase_histogram(const DiscretizedModel& dm, const PhasorState& rest, std::size_t j);

/// Total variation between a K-point phase histogram and the von Mises
/// density e^{κcos(θ−μ)}/(2π I₀(κ)) integrated by bin-centre masses.
double phase_histogram_tv(const std::vector<double>& hist, double mean, double concentration);

/// Convenience: TV of the exact histogram against the given von Mises parameters.
double exact_phase_check(const DiscretizedModel& dm, const PhasorState& rest, std::size_t j, double mean,
                         double concentration);

// ---------------------------------------------------------------------------
// restricted models

struct DiscretizedRbm {
    CapRbmParams params;
    int bins = 32;

    void validate() const;
    /// Work estimate: visible configurations × hidden states visited per configuration.
    std::uint64_t cost() const;
};

/// Exact marginal over visible configurations (hidden layer summed out).
ProbabilityTable visible_distribution(const DiscretizedRbm& dm);

/// Σ over data of ln P(v); data phases must lie on the 2π/K grid.
double exact_loglik(const DiscretizedRbm& dm, const std::vector<PhasorState>& data);

struct ExactStats {
    GradientStats positive;  // data average of E[· | v]
    GradientStats negative;  // model expectation
};

ExactStats exact_stats(const DiscretizedRbm& dm, const std::vector<PhasorState>& data);

/// Centered finite differences of the mean data log-likelihood in the polar
/// parametrization (modulus, phase of W; J; biases).
PolarGradients fd_gradient(const DiscretizedRbm& dm, const std::vector<PhasorState>& data, double step = 1e-5);

// ---------------------------------------------------------------------------
// distribution comparison

/**
 * Coarse cell of a state for comparing continuous chains with discretized
 * tables. The cell is the amplitude pattern plus the phases of active units
 * relative to the lowest-index active unit, each binned into `coarse_bins`
 * bins. Bins are unions of fine cells of width 2π/fine_bins centred on the
 * fine grid points, so a grid state lands in the bin holding its grid point.
 * Using relative phases exploits the global phase symmetry of the energy.
 */
std::size_t coarse_cell(const PhasorState& state, int fine_bins, int coarse_bins);
std::size_t coarse_cell_count(std::size_t n_units, int coarse_bins);

std::vector<double> coarse_distribution(const ProbabilityTable& table, int coarse_bins);

double total_variation(const std::vector<double>& p, const std::vector<double>& q);

}  // namespace capbm::oracle
