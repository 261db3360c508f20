#pragma once

// Batched layer kernels for the restricted model. Matrices are stored
// units × batch (one sample per column).
//
// Two implementations with identical contracts:
//   kernels::serial  plain loops, the reference used by tests;
//   kernels::omp     Eigen GEMM for the field products and OpenMP-parallel
//                    elementwise sampling/rate loops.
// Random draws use one generator per (column, unit) lane, keyed from a single
// 64-bit value, so both versions produce bit-identical samples from the same
// field regardless of thread count.

#include <cstdint>

#include <Eigen/Dense>

#include "capbm/model.hpp"
#include "capbm/stats.hpp"

namespace capbm::kernels {

/// Layer activity: complex values z and amplitudes. For samples amp = |z|
/// ∈ {0, 1}; for rates z = E[z] and amp = E[|z|], so amp ≥ |z|.
struct Activity {
    Eigen::MatrixXcd z;
    Eigen::MatrixXd amp;

    Eigen::Index units() const noexcept { return z.rows(); }
    Eigen::Index batch() const noexcept { return z.cols(); }
};

/// Complex (u) and amplitude (μ) input sums for a target layer.
struct Field {
    Eigen::MatrixXcd u;
    Eigen::MatrixXd mu;
};

/// Activity of observed data: amplitudes are the moduli of z.
Activity observe(const Eigen::MatrixXcd& z);

/// Random starting states: each unit on with probability `p_on`, uniform phase.
Activity random_activity(Eigen::Index units, Eigen::Index batch, std::uint64_t key, double p_on = 0.5);

namespace serial {
/// u = Wᴴ v, μ = Jᵀ |v|.
Field hidden_field(const CapRbmParams& params, const Activity& visible);
/// u = W h, μ = J |h|.
Field visible_field(const CapRbmParams& params, const Activity& hidden);
Activity sample(const Field& field, const Eigen::VectorXd& bias, std::uint64_t key);
Activity rate(const Field& field, const Eigen::VectorXd& bias);
GradientStats collect_stats(const Activity& visible, const Activity& hidden);
}  // namespace serial

namespace omp {
Field hidden_field(const CapRbmParams& params, const Activity& visible);
Field visible_field(const CapRbmParams& params, const Activity& hidden);
Activity sample(const Field& field, const Eigen::VectorXd& bias, std::uint64_t key);
Activity rate(const Field& field, const Eigen::VectorXd& bias);
GradientStats collect_stats(const Activity& visible, const Activity& hidden);
}  // namespace omp

/// Worker cap for the OpenMP kernels; 0 leaves the runtime default.
void set_max_threads(int n);

}  // namespace capbm::kernels
