#pragma once

#include <Eigen/Dense>

namespace capbm {

/**
 * Batch-averaged sufficient statistics of a restricted model.
 *
 *   pair_complex(j, k) = ⟨v_j h_k*⟩      pair_amp(j, k) = ⟨|v_j| |h_k|⟩
 *   visible_amp(j)     = ⟨|v_j|⟩          hidden_amp(k)  = ⟨|h_k|⟩
 *
 * With the hidden side given as rates the amplitude channel carries E[|h|],
 * not |E[h]|, so |pair_complex| ≤ pair_amp ≤ 1 holds entrywise.
 */
struct GradientStats {
    Eigen::MatrixXcd pair_complex;
    Eigen::MatrixXd pair_amp;
    Eigen::VectorXd visible_amp;
    Eigen::VectorXd hidden_amp;
};

}  // namespace capbm
