#pragma once

// Executable verification suite shared by `capbm check` and the acceptance
// binary. Each check reports what it measured next to the bound it must meet.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "capbm/learning.hpp"

namespace capbm::checks {

struct CheckResult {
    std::string name;
    /// Human-readable bound, e.g. "< 1e-3".
    std::string tolerance;
    double measured = 0.0;
    bool pass = false;
    std::string detail;
};

enum class Level { quick, full };

/// "PASS name  measured=... tolerance=... detail".
void print(std::ostream& out, const CheckResult& r);

// ---------------------------------------------------------------------------
// individual checks

/// Special functions against std::cyl_bessel_i and a long-double series.
CheckResult bessel_accuracy();
/// Circular mean and resultant length of von Mises draws.
CheckResult von_mises_moments(std::uint64_t seed);
CheckResult global_phase_invariance(std::uint64_t seed);
/// The complex quadratic form of a Hermitian coupling has no imaginary part.
CheckResult hermitian_realness(std::uint64_t seed);
CheckResult rate_bound(std::uint64_t seed);
/// amp_prob increases with the coupling modulus and has zero slope at a = 0.
CheckResult amp_prob_monotone(std::uint64_t seed);
CheckResult energy_cross_check(std::uint64_t seed);
CheckResult capm_round_trip(std::uint64_t seed);
CheckResult cpxd_round_trip(std::uint64_t seed);
CheckResult kernel_agreement(std::uint64_t seed);

/// Discretized conditionals of random 3-unit models against amp_prob and the
/// von Mises density: max relative amplitude error and max phase TV.
std::vector<CheckResult> conditional_exactness(int n_models, int bins, std::uint64_t seed);

/// Analytic gradients from exact expectations against centered finite
/// differences of the exact log-likelihood on random 3 × 2 restricted models.
CheckResult gradient_exactness(int n_models, int bins, std::uint64_t seed);

/// Gibbs chain on a random 3-unit model against the exact distribution,
/// compared on coarse cells.
CheckResult sampler_stationarity(std::uint64_t sweeps, int fine_bins, int coarse_bins, std::uint64_t seed);

// ---------------------------------------------------------------------------
// bars experiment

struct BarsExperiment {
    std::size_t n_train = 40'000;
    std::size_t n_held_out = 100;
    std::size_t n_hidden = 200;
    int epochs = 10;
    int alternations = 20;
    std::uint64_t data_seed = 1;
    std::uint64_t held_out_seed = 1'000'001;
};

/// Trains one model on fresh bars data and returns the mean amplitude cosine
/// of `alternations`-step reconstructions of held-out samples.
double bars_reconstruction_cosine(const BarsExperiment& exp, const TrainConfig& cfg);

// ---------------------------------------------------------------------------

/// Core math and model invariants (quick), plus the oracle suite (full).
std::vector<CheckResult> run_suite(Level level, std::uint64_t seed = 20240601);

}  // namespace capbm::checks
