#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "capbm/data.hpp"
#include "capbm/kernels.hpp"
#include "capbm/model.hpp"
#include "capbm/rng.hpp"
#include "capbm/stats.hpp"

namespace capbm {

enum class Algorithm { cd1, pcd };

struct TrainConfig {
    double learning_rate = 0.01;
    int epochs = 10;
    int batch_size = 50;
    /// Multiplicative shrink of coupling magnitudes (W and J) per update:
    /// x ← (1 − learning_rate · weight_decay) x. Biases are not decayed.
    double weight_decay = 0.0;
    Algorithm algorithm = Algorithm::cd1;
    int n_persistent_chains = 50;
    std::uint64_t seed = 1;
    /// Ablation: hold the amplitude coupling at zero for the whole run.
    bool clamp_amp_coupling = false;
    /// Also log metrics every this many batches (0: end of epoch only).
    int log_every = 0;

    void validate() const;
};

/// Defaults per algorithm: PCD adds 1e-4 weight decay.
TrainConfig default_train_config(Algorithm algorithm);

/// Log-likelihood gradient in the polar parametrization W = b e^{iθ}.
struct PolarGradients {
    Eigen::MatrixXd modulus;
    Eigen::MatrixXd phase;
    Eigen::MatrixXd amp_coupling;
    Eigen::VectorXd visible_bias;
    Eigen::VectorXd hidden_bias;
};

/// Gradient with respect to the rectangular parameters: d/dRe W + i d/dIm W.
struct RectGradients {
    Eigen::MatrixXcd weights;
    Eigen::MatrixXd amp_coupling;
    Eigen::VectorXd visible_bias;
    Eigen::VectorXd hidden_bias;
};

/// Batch-averaged statistics of (visible, hidden) activities.
GradientStats collect_stats(const kernels::Activity& visible, const kernels::Activity& hidden);

/**
 * Learning rules for the restricted model, data-minus-model form:
 *
 *   ∂/∂b_jk = ⟨|v_j||h_k| cos(θ_jk + φ_k − φ_j)⟩₊ − ⟨·⟩₋
 *   ∂/∂θ_jk = −⟨|v_j||h_k| b_jk sin(θ_jk + φ_k − φ_j)⟩₊ + ⟨·⟩₋
 *   ∂/∂J_jk = ⟨|v_j||h_k|⟩₊ − ⟨·⟩₋
 *   ∂/∂ε_j  = −⟨|z_j|⟩₊ + ⟨|z_j|⟩₋
 *
 * using |v_j||h_k| cos(θ_jk + φ_k − φ_j) = Re(e^{iθ_jk} conj(pair_complex_jk)).
 * Following these directions increases the mean data log-likelihood.
 */
PolarGradients polar_gradients(const CapRbmParams& params, const GradientStats& positive,
                               const GradientStats& negative);

RectGradients rect_gradients(const GradientStats& positive, const GradientStats& negative);

/// Persistent negative-phase chains (visible layer, one column per chain).
struct PersistentChains {
    kernels::Activity visible;
};

PersistentChains init_persistent_chains(const CapRbmParams& params, int n_chains, Rng& rng);

/// Diagnostics of one contrastive step.
struct StepReport {
    GradientStats positive;
    GradientStats negative;
    /// Mean cosine similarity between data amplitudes and one-step
    /// reconstructed visible amplitude rates.
    double recon_amp_cos = 0.0;
};

/**
 * CD-1: positive phase pairs the data with hidden rates; the negative phase
 * samples h from the data, samples v', and pairs v' with hidden rates given v'.
 * Parameters are then moved along the rectangular gradient.
 */
StepReport cd1_update(CapRbmParams& params, const Eigen::MatrixXcd& batch, const TrainConfig& cfg,
                      Rng& rng);

/// PCD: same update, but the negative phase starts from (and advances) the
/// persistent chains by one alternation.
StepReport pcd_update(CapRbmParams& params, const Eigen::MatrixXcd& batch, const TrainConfig& cfg,
                      PersistentChains& chains, Rng& rng);

/// Apply an ascent step with weight decay on W and J magnitudes.
void apply_update(CapRbmParams& params, const RectGradients& grad, const TrainConfig& cfg);

struct LogRecord {
    int epoch = 0;
    int batch = 0;
    std::string metric;
    double value = 0.0;
};

/// Tab-separated: epoch, batch, metric, value.
void write_log_record(std::ostream& out, const LogRecord& rec);

struct TrainCallbacks {
    std::function<void(const LogRecord&)> on_record;
    std::function<void(int epoch, const CapRbmParams&)> on_epoch_end;
};

struct TrainResult {
    CapRbmParams params;
    std::vector<LogRecord> log;
};

/// Small random complex couplings (std `init_scale` per component), zero J
/// and hidden biases, visible biases matched to the data's on-fraction.
CapRbmParams init_rbm(const ComplexDataset& data, std::size_t n_hidden, std::uint64_t seed,
                      double init_scale = 0.01);

/// Epoch/batch loop with per-epoch shuffling from cfg.seed.
TrainResult train(CapRbmParams params, const ComplexDataset& data, const TrainConfig& cfg,
                  const TrainCallbacks& callbacks = {});

/// Mean over columns of cos(|data|, amp) (0 for an all-zero column).
double mean_amp_cosine(const Eigen::MatrixXcd& data, const Eigen::MatrixXd& amp);

}  // namespace capbm
