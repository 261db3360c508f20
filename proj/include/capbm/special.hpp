#pragma once

#include "capbm/angle.hpp"
#include "capbm/rng.hpp"

namespace capbm {

/// Argument at which the Bessel routines switch from the power series to the
/// large-argument asymptotic expansion.
inline constexpr double bessel_series_limit = 15.0;

/**
 * ln I₀(a) for a ≥ 0, evaluated entirely in the log domain so it stays finite
 * far beyond the point (a ≈ 709) where I₀ itself overflows.
 *
 * Throws DomainError for negative or non-finite input.
 */
double log_bessel_i0(double a);

/// ln I₁(a) for a ≥ 0; −∞ at a = 0.
double log_bessel_i1(double a);

/// I₁(a)/I₀(a): mean resultant length of a von Mises density with
/// concentration a. Lies in [0, 1), increasing, → 1 as a → ∞.
double bessel_ratio(double a);

/**
 * Exact draw from the von Mises density e^{κ cos(θ−μ)} / (2π I₀(κ)) using
 * the Best–Fisher wrapped-Cauchy rejection scheme. κ = 0 gives a uniform
 * angle. Only `rng` is mutated.
 */
Angle sample_von_mises(Angle mean, double concentration, Rng& rng);

}  // namespace capbm
