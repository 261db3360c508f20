#include "capbm/model.hpp"

#include <cmath>
#include <string>

#include "capbm/error.hpp"
#include "capbm/special.hpp"

namespace capbm {

PhasorState PhasorState::from_complex(std::span<const cplx> z) {
    PhasorState s(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
        const bool active = std::abs(z[j]) >= 0.5;
        s.set(j, active, active ? std::arg(z[j]) : 0.0);
    }
    return s;
}

std::vector<cplx> PhasorState::to_complex() const {
    std::vector<cplx> out(size());
    for (std::size_t j = 0; j < size(); ++j) out[j] = value(j);
    return out;
}

CapBmParams::CapBmParams(std::size_t n)
    : modulus(Eigen::MatrixXd::Zero(n, n)),
      phase(Eigen::MatrixXd::Zero(n, n)),
      amp_coupling(Eigen::MatrixXd::Zero(n, n)),
      bias(Eigen::VectorXd::Zero(n)) {}

CapBmParams CapBmParams::from_complex(const Eigen::MatrixXcd& coupling,
                                      const Eigen::MatrixXd& amp_coupling,
                                      const Eigen::VectorXd& bias) {
    const auto n = bias.size();
    if (coupling.rows() != n || coupling.cols() != n || amp_coupling.rows() != n ||
        amp_coupling.cols() != n)
        throw ShapeError("CapBmParams::from_complex: dimension mismatch");
    CapBmParams p(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = 0; k < n; ++k) {
            if (j == k) continue;
            if (std::abs(coupling(j, k) - std::conj(coupling(k, j))) > 1e-12 * (1.0 + std::abs(coupling(j, k))))
                throw DomainError("CapBmParams::from_complex: coupling matrix is not Hermitian");
            p.modulus(j, k) = std::abs(coupling(j, k));
            p.phase(j, k) = p.modulus(j, k) > 0.0 ? wrap_angle(std::arg(coupling(j, k))) : 0.0;
        }
    }
    // Keep the antisymmetry exact where atan2 rounding would otherwise differ.
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = j + 1; k < n; ++k) {
            p.modulus(k, j) = p.modulus(j, k);
            p.phase(k, j) = wrap_angle(-p.phase(j, k));
        }
    p.amp_coupling = amp_coupling;
    p.amp_coupling.diagonal().setZero();
    p.bias = bias;
    return p;
}

Eigen::MatrixXcd CapBmParams::complex_coupling() const {
    const auto n = bias.size();
    Eigen::MatrixXcd w(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k) w(j, k) = std::polar(modulus(j, k), phase(j, k));
    return w;
}

void CapBmParams::validate(double tol) const {
    const auto n = bias.size();
    if (modulus.rows() != n || modulus.cols() != n || phase.rows() != n || phase.cols() != n ||
        amp_coupling.rows() != n || amp_coupling.cols() != n)
        throw ShapeError("CapBmParams: all matrices must be " + std::to_string(n) + "x" +
                         std::to_string(n));
    if (!modulus.allFinite() || !phase.allFinite() || !amp_coupling.allFinite() || !bias.allFinite())
        throw DomainError("CapBmParams: non-finite parameters");
    for (Eigen::Index j = 0; j < n; ++j) {
        if (modulus(j, j) != 0.0 || phase(j, j) != 0.0 || amp_coupling(j, j) != 0.0)
            throw DomainError("CapBmParams: diagonal entries must be zero");
        for (Eigen::Index k = 0; k < n; ++k) {
            if (modulus(j, k) < 0.0) throw DomainError("CapBmParams: negative coupling modulus");
            if (std::abs(modulus(j, k) - modulus(k, j)) > tol ||
                std::abs(amp_coupling(j, k) - amp_coupling(k, j)) > tol)
                throw DomainError("CapBmParams: coupling matrices must be symmetric");
            if (std::abs(angle_diff(phase(j, k), -phase(k, j))) > tol)
                throw DomainError("CapBmParams: coupling phases must be antisymmetric");
        }
    }
}

CapRbmParams::CapRbmParams(std::size_t n_visible, std::size_t n_hidden)
    : weights(Eigen::MatrixXcd::Zero(n_visible, n_hidden)),
      amp_coupling(Eigen::MatrixXd::Zero(n_visible, n_hidden)),
      visible_bias(Eigen::VectorXd::Zero(n_visible)),
      hidden_bias(Eigen::VectorXd::Zero(n_hidden)) {}

void CapRbmParams::validate() const {
    const auto v = visible_bias.size();
    const auto h = hidden_bias.size();
    if (weights.rows() != v || weights.cols() != h || amp_coupling.rows() != v ||
        amp_coupling.cols() != h)
        throw ShapeError("CapRbmParams: coupling matrices must be " + std::to_string(v) + "x" +
                         std::to_string(h));
    if (!weights.allFinite() || !amp_coupling.allFinite() || !visible_bias.allFinite() ||
        !hidden_bias.allFinite())
        throw DomainError("CapRbmParams: non-finite parameters");
}

namespace {

void require_size(std::size_t expected, std::size_t got, const char* what) {
    if (expected != got)
        throw ShapeError(std::string(what) + ": expected " + std::to_string(expected) +
                         " units, got " + std::to_string(got));
}

}  // namespace

double energy_capbm(const CapBmParams& params, const PhasorState& state) {
    const std::size_t n = params.size();
    require_size(n, state.size(), "energy_capbm");
    // Each unordered pair appears twice in z†Wz; the ½ cancels, leaving
    // Σ_{j<k} |z_j||z_k| (b_jk cos(θ_jk + θ_k − θ_j) + J_jk).
    double e = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (!state.on(j)) continue;
        e += params.bias(j);
        for (std::size_t k = j + 1; k < n; ++k) {
            if (!state.on(k)) continue;
            e -= params.modulus(j, k) *
                 std::cos(params.phase(j, k) + state.phases[k] - state.phases[j]);
            e -= params.amp_coupling(j, k);
        }
    }
    return e;
}

double energy_caprbm(const CapRbmParams& params, const PhasorState& v, const PhasorState& h) {
    require_size(params.n_visible(), v.size(), "energy_caprbm (visible)");
    require_size(params.n_hidden(), h.size(), "energy_caprbm (hidden)");
    double e = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
        if (!v.on(j)) continue;
        e += params.visible_bias(j);
        const cplx vj_conj = std::conj(v.value(j));
        for (std::size_t k = 0; k < h.size(); ++k) {
            if (!h.on(k)) continue;
            e -= std::real(vj_conj * params.weights(j, k) * h.value(k));
            e -= params.amp_coupling(j, k);
        }
    }
    for (std::size_t k = 0; k < h.size(); ++k)
        if (h.on(k)) e += params.hidden_bias(k);
    return e;
}

InputSums make_input_sums(cplx u, double amp_input) noexcept {
    InputSums s;
    s.modulus = std::abs(u);
    s.argument = s.modulus > 0.0 ? Angle(std::arg(u)) : Angle();
    s.amp_input = amp_input;
    return s;
}

InputSums input_sums(const CapBmParams& params, const PhasorState& state, std::size_t j) {
    const std::size_t n = params.size();
    require_size(n, state.size(), "input_sums");
    if (j >= n) throw IndexError("input_sums: unit index " + std::to_string(j) + " out of range");
    cplx u{};
    double mu = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (k == j || !state.on(k)) continue;
        u += std::polar(params.modulus(j, k), params.phase(j, k) + state.phases[k]);
        mu += params.amp_coupling(j, k);
    }
    return make_input_sums(u, mu);
}

double logistic(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double amp_prob(const InputSums& s, double bias) {
    if (!std::isfinite(s.amp_input) || !std::isfinite(bias) || !std::isfinite(s.modulus))
        throw DomainError("amp_prob: non-finite input");
    return logistic(s.amp_input - bias + log_bessel_i0(s.modulus));
}

PhaseConditional phase_conditional(const InputSums& s) noexcept {
    return {s.argument, s.modulus};
}

CapBmParams embed_rbm(const CapRbmParams& rbm) {
    rbm.validate();
    const auto nv = static_cast<Eigen::Index>(rbm.n_visible());
    const auto nh = static_cast<Eigen::Index>(rbm.n_hidden());
    Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(nv + nh, nv + nh);
    Eigen::MatrixXd jm = Eigen::MatrixXd::Zero(nv + nh, nv + nh);
    w.topRightCorner(nv, nh) = rbm.weights;
    w.bottomLeftCorner(nh, nv) = rbm.weights.adjoint();
    jm.topRightCorner(nv, nh) = rbm.amp_coupling;
    jm.bottomLeftCorner(nh, nv) = rbm.amp_coupling.transpose();
    Eigen::VectorXd bias(nv + nh);
    bias << rbm.visible_bias, rbm.hidden_bias;
    return CapBmParams::from_complex(w, jm, bias);
}

double free_energy(const CapRbmParams& params, std::span<const cplx> v) {
    require_size(params.n_visible(), v.size(), "free_energy");
    const auto nv = static_cast<Eigen::Index>(v.size());
    Eigen::VectorXcd vz(nv);
    Eigen::VectorXd va(nv);
    for (Eigen::Index j = 0; j < nv; ++j) {
        vz(j) = v[static_cast<std::size_t>(j)];
        va(j) = std::abs(vz(j));
    }
    const Eigen::VectorXcd u = params.weights.adjoint() * vz;
    const Eigen::VectorXd mu = params.amp_coupling.transpose() * va;
    double f = params.visible_bias.dot(va);
    for (Eigen::Index k = 0; k < u.size(); ++k) {
        const double x = mu(k) - params.hidden_bias(k) + log_bessel_i0(std::abs(u(k)));
        // ln(1 + e^x) without overflow.
        f -= x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    }
    return f;
}

CapBmParams random_capbm(std::size_t n, Rng& rng, double scale) {
    CapBmParams p(n);
    for (std::size_t j = 0; j < n; ++j) {
        p.bias(j) = scale * (2.0 * rng.uniform() - 1.0);
        for (std::size_t k = j + 1; k < n; ++k) {
            p.modulus(j, k) = p.modulus(k, j) = scale * rng.uniform();
            p.phase(j, k) = two_pi * rng.uniform();
            p.phase(k, j) = wrap_angle(-p.phase(j, k));
            p.amp_coupling(j, k) = p.amp_coupling(k, j) = scale * (2.0 * rng.uniform() - 1.0);
        }
    }
    return p;
}

CapRbmParams random_caprbm(std::size_t n_visible, std::size_t n_hidden, Rng& rng, double scale) {
    CapRbmParams p(n_visible, n_hidden);
    for (std::size_t j = 0; j < n_visible; ++j)
        for (std::size_t k = 0; k < n_hidden; ++k) {
            p.weights(j, k) = std::polar(scale * rng.uniform(), two_pi * rng.uniform());
            p.amp_coupling(j, k) = scale * (2.0 * rng.uniform() - 1.0);
        }
    for (std::size_t j = 0; j < n_visible; ++j) p.visible_bias(j) = scale * (2.0 * rng.uniform() - 1.0);
    for (std::size_t k = 0; k < n_hidden; ++k) p.hidden_bias(k) = scale * (2.0 * rng.uniform() - 1.0);
    return p;
}

PhasorState random_state(std::size_t n, Rng& rng, double p_on) {
    PhasorState s(n);
    for (std::size_t j = 0; j < n; ++j) {
        const bool active = rng.bernoulli(p_on);
        s.set(j, active, two_pi * rng.uniform());
    }
    return s;
}

}  // namespace capbm
