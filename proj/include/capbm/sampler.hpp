#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "capbm/kernels.hpp"
#include "capbm/model.hpp"
#include "capbm/rng.hpp"

namespace capbm {

struct ChainState {
    PhasorState state;
    Rng rng;
    std::uint64_t sweep_count = 0;
};

enum class SweepOrder { fixed, random_permutation };

struct GibbsOptions {
    SweepOrder order = SweepOrder::fixed;
    /// Directional-unit mode: every amplitude is held at 1 and only phases
    /// are resampled.
    bool clamp_amplitudes = false;
};

/// Expected activity of a set of units: E[z_j] and E[|z_j|].
struct Rate {
    std::vector<cplx> complex_mean;
    std::vector<double> amp_mean;
};

struct UnitRate {
    cplx complex_mean;
    double amp_mean = 0.0;
};

/// Resample unit j of a full model: amplitude from its Bernoulli conditional,
/// then (if active) phase from the von Mises conditional. An inactive unit
/// keeps its previous phase.
void gibbs_update_unit(const CapBmParams& params, ChainState& chain, std::size_t j,
                       const GibbsOptions& opts = {});

/// One pass over all units; increments sweep_count by one.
void gibbs_sweep(const CapBmParams& params, ChainState& chain, const GibbsOptions& opts = {});

void run_chain(const CapBmParams& params, ChainState& chain, std::uint64_t n_sweeps,
               const GibbsOptions& opts = {});

/// E[|z|] = amp_prob; E[z] = amp_prob · I₁(a)/I₀(a) · e^{iα}.
UnitRate unit_rate(const InputSums& s, double bias);

enum class Direction { visible_to_hidden, hidden_to_visible };

/// Sample the target layer given the source layer. Target units are
/// conditionally independent; inactive units are reported with phase 0.
PhasorState rbm_sample_layer(const CapRbmParams& params, const PhasorState& given,
                             Direction direction, Rng& rng);

/**
 * Reconstruction from data. One alternation = hidden update followed by a
 * visible update; the last visible update reports rates instead of a sample.
 * With zero alternations the input is returned (z as given, amp = |z|).
 */
kernels::Activity rbm_reconstruct_batch(const CapRbmParams& params, const Eigen::MatrixXcd& v0,
                                        int n_alternations, Rng& rng);

Rate rbm_reconstruct(const CapRbmParams& params, std::span<const cplx> v0, int n_alternations,
                     Rng& rng);

/**
 * Free-running chains: `start` visible states are advanced by `n_alternations`
 * full alternations, recording the visible rates after each step listed in
 * `checkpoints` (ascending). Used for reconstruction and for sampling from
 * random initial states.
 */
std::vector<kernels::Activity> rbm_visible_trajectory(const CapRbmParams& params,
                                                      const kernels::Activity& start,
                                                      const std::vector<int>& checkpoints,
                                                      Rng& rng);

}  // namespace capbm
