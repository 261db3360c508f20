#include "capbm/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "capbm/error.hpp"

namespace capbm {

namespace {

void require_nonnegative(double a, const char* what) {
    if (!std::isfinite(a) || a < 0.0)
        throw DomainError(std::string(what) + ": argument must be finite and >= 0, got " +
                          std::to_string(a));
}

// Sum of the tail Σ_{m≥1} t_m of a positive series whose first term is 1.
// t_m = t_{m-1} * x / (m (m + order)), x = a²/4.
double series_tail(double x, int order) {
    double term = 1.0;
    double tail = 0.0;
    for (int m = 1; m < 500; ++m) {
        term *= x / (static_cast<double>(m) * (m + order));
        tail += term;
        if (term < tail * 1e-17) break;
    }
    return tail;
}

// ln of the asymptotic factor Σ_k c_k with c_0 = 1 for I_ν(a) e^{-a} √(2πa).
// The series is divergent; it is truncated at its smallest term.
double log_asymptotic_factor(double a, int order) {
    const double mu = 4.0 * order * order;
    double term = 1.0;
    double sum = 0.0;
    double prev_mag = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = term * (odd * odd - mu) / (8.0 * a * k);
        const double mag = std::abs(next);
        if (mag >= prev_mag) break;
        term = next;
        sum += term;
        prev_mag = mag;
        if (mag < 1e-17) break;
    }
    return std::log1p(sum);
}

}  // namespace

double log_bessel_i0(double a) {
    require_nonnegative(a, "log_bessel_i0");
    if (a < bessel_series_limit) return std::log1p(series_tail(0.25 * a * a, 0));
    return a - 0.5 * std::log(two_pi * a) + log_asymptotic_factor(a, 0);
}

double log_bessel_i1(double a) {
    require_nonnegative(a, "log_bessel_i1");
    if (a == 0.0) return -std::numeric_limits<double>::infinity();
    if (a < bessel_series_limit)
        return std::log(0.5 * a) + std::log1p(series_tail(0.25 * a * a, 1));
    return a - 0.5 * std::log(two_pi * a) + log_asymptotic_factor(a, 1);
}

double bessel_ratio(double a) {
    require_nonnegative(a, "bessel_ratio");
    if (a == 0.0) return 0.0;
    return std::exp(log_bessel_i1(a) - log_bessel_i0(a));
}

Angle sample_von_mises(Angle mean, double concentration, Rng& rng) {
    if (!(concentration >= 0.0) || std::isinf(concentration))
        throw DomainError("sample_von_mises: concentration must be finite and >= 0");
    const double kappa = concentration;
    if (kappa < 1e-8) return Angle(two_pi * rng.uniform());

    // Envelope parameter of the wrapped Cauchy proposal.
    double s;
    if (kappa < 1e-5) {
        s = 1.0 / kappa + kappa;
    } else {
        const double r = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
        const double rho = (r - std::sqrt(2.0 * r)) / (2.0 * kappa);
        s = (1.0 + rho * rho) / (2.0 * rho);
    }

    double w;
    for (;;) {
        const double z = std::cos(std::numbers::pi * rng.uniform());
        w = (1.0 + s * z) / (s + z);
        const double y = kappa * (s - w);
        const double v = rng.uniform_open();
        if (y * (2.0 - y) - v >= 0.0) break;
        if (std::log(y / v) + 1.0 - y >= 0.0) break;
    }
    double theta = std::acos(std::clamp(w, -1.0, 1.0));
    if (rng.uniform() < 0.5) theta = -theta;
    return Angle(mean.rad() + theta);
}

}  // namespace capbm
