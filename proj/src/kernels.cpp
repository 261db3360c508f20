#include "capbm/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include "capbm/error.hpp"
#include "capbm/special.hpp"

namespace capbm::kernels {

namespace {

void check_field_shapes(const Field& f, const Eigen::VectorXd& bias) {
    if (f.u.rows() != bias.size() || f.mu.rows() != bias.size() || f.u.cols() != f.mu.cols())
        throw ShapeError("layer kernel: field/bias dimension mismatch");
}

void check_visible(const CapRbmParams& p, const Activity& v) {
    if (v.units() != p.weights.rows() || v.amp.rows() != v.z.rows() || v.amp.cols() != v.z.cols())
        throw ShapeError("layer kernel: visible activity has wrong shape");
}

void check_hidden(const CapRbmParams& p, const Activity& h) {
    if (h.units() != p.weights.cols() || h.amp.rows() != h.z.rows() || h.amp.cols() != h.z.cols())
        throw ShapeError("layer kernel: hidden activity has wrong shape");
}

void check_pair(const Activity& v, const Activity& h) {
    if (v.batch() != h.batch() || v.batch() == 0)
        throw ShapeError("collect_stats: visible and hidden batches must be equal and non-empty");
}

// One (column, unit) lane of the sampling kernel.
inline void sample_entry(const Field& f, const Eigen::VectorXd& bias, std::uint64_t key,
                         Eigen::Index j, Eigen::Index c, Activity& out) {
    Rng rng = Rng::stream(key, static_cast<std::uint64_t>(c * f.u.rows() + j));
    const InputSums s = make_input_sums(f.u(j, c), f.mu(j, c));
    if (rng.uniform() < amp_prob(s, bias(j))) {
        const PhaseConditional pc = phase_conditional(s);
        out.z(j, c) = std::polar(1.0, sample_von_mises(pc.mean, pc.concentration, rng).rad());
        out.amp(j, c) = 1.0;
    } else {
        out.z(j, c) = 0.0;
        out.amp(j, c) = 0.0;
    }
}

inline void rate_entry(const Field& f, const Eigen::VectorXd& bias, Eigen::Index j,
                       Eigen::Index c, Activity& out) {
    const InputSums s = make_input_sums(f.u(j, c), f.mu(j, c));
    const double p = amp_prob(s, bias(j));
    out.amp(j, c) = p;
    out.z(j, c) = std::polar(p * bessel_ratio(s.modulus), s.argument.rad());
}

Activity empty_like(const Field& f) {
    return {Eigen::MatrixXcd(f.u.rows(), f.u.cols()), Eigen::MatrixXd(f.u.rows(), f.u.cols())};
}

}  // namespace

Activity observe(const Eigen::MatrixXcd& z) { return {z, z.cwiseAbs()}; }

Activity random_activity(Eigen::Index units, Eigen::Index batch, std::uint64_t key, double p_on) {
    Activity a{Eigen::MatrixXcd::Zero(units, batch), Eigen::MatrixXd::Zero(units, batch)};
    for (Eigen::Index c = 0; c < batch; ++c) {
        Rng rng = Rng::stream(key, static_cast<std::uint64_t>(c));
        for (Eigen::Index j = 0; j < units; ++j) {
            const bool on = rng.uniform() < p_on;
            const double phase = two_pi * rng.uniform();
            if (on) {
                a.z(j, c) = std::polar(1.0, phase);
                a.amp(j, c) = 1.0;
            }
        }
    }
    return a;
}

namespace serial {

Field hidden_field(const CapRbmParams& p, const Activity& v) {
    check_visible(p, v);
    const Eigen::Index nv = p.weights.rows(), nh = p.weights.cols(), nb = v.batch();
    Field f{Eigen::MatrixXcd::Zero(nh, nb), Eigen::MatrixXd::Zero(nh, nb)};
    for (Eigen::Index c = 0; c < nb; ++c)
        for (Eigen::Index k = 0; k < nh; ++k) {
            cplx u{};
            double mu = 0.0;
            for (Eigen::Index j = 0; j < nv; ++j) {
                u += std::conj(p.weights(j, k)) * v.z(j, c);
                mu += p.amp_coupling(j, k) * v.amp(j, c);
            }
            f.u(k, c) = u;
            f.mu(k, c) = mu;
        }
    return f;
}

Field visible_field(const CapRbmParams& p, const Activity& h) {
    check_hidden(p, h);
    const Eigen::Index nv = p.weights.rows(), nh = p.weights.cols(), nb = h.batch();
    Field f{Eigen::MatrixXcd::Zero(nv, nb), Eigen::MatrixXd::Zero(nv, nb)};
    for (Eigen::Index c = 0; c < nb; ++c)
        for (Eigen::Index j = 0; j < nv; ++j) {
            cplx u{};
            double mu = 0.0;
            for (Eigen::Index k = 0; k < nh; ++k) {
                u += p.weights(j, k) * h.z(k, c);
                mu += p.amp_coupling(j, k) * h.amp(k, c);
            }
            f.u(j, c) = u;
            f.mu(j, c) = mu;
        }
    return f;
}

Activity sample(const Field& f, const Eigen::VectorXd& bias, std::uint64_t key) {
    check_field_shapes(f, bias);
    Activity out = empty_like(f);
    for (Eigen::Index c = 0; c < f.u.cols(); ++c)
        for (Eigen::Index j = 0; j < f.u.rows(); ++j) sample_entry(f, bias, key, j, c, out);
    return out;
}

Activity rate(const Field& f, const Eigen::VectorXd& bias) {
    check_field_shapes(f, bias);
    Activity out = empty_like(f);
    for (Eigen::Index c = 0; c < f.u.cols(); ++c)
        for (Eigen::Index j = 0; j < f.u.rows(); ++j) rate_entry(f, bias, j, c, out);
    return out;
}

GradientStats collect_stats(const Activity& v, const Activity& h) {
    check_pair(v, h);
    const Eigen::Index nv = v.units(), nh = h.units(), nb = v.batch();
    GradientStats s{Eigen::MatrixXcd::Zero(nv, nh), Eigen::MatrixXd::Zero(nv, nh),
                    Eigen::VectorXd::Zero(nv), Eigen::VectorXd::Zero(nh)};
    for (Eigen::Index c = 0; c < nb; ++c) {
        for (Eigen::Index j = 0; j < nv; ++j) {
            s.visible_amp(j) += v.amp(j, c);
            for (Eigen::Index k = 0; k < nh; ++k) {
                s.pair_complex(j, k) += v.z(j, c) * std::conj(h.z(k, c));
                s.pair_amp(j, k) += v.amp(j, c) * h.amp(k, c);
            }
        }
        for (Eigen::Index k = 0; k < nh; ++k) s.hidden_amp(k) += h.amp(k, c);
    }
    const double inv = 1.0 / static_cast<double>(nb);
    s.pair_complex *= inv;
    s.pair_amp *= inv;
    s.visible_amp *= inv;
    s.hidden_amp *= inv;
    return s;
}

}  // namespace serial

namespace omp {

Field hidden_field(const CapRbmParams& p, const Activity& v) {
    check_visible(p, v);
    return {p.weights.adjoint() * v.z, p.amp_coupling.transpose() * v.amp};
}

Field visible_field(const CapRbmParams& p, const Activity& h) {
    check_hidden(p, h);
    return {p.weights * h.z, p.amp_coupling * h.amp};
}

Activity sample(const Field& f, const Eigen::VectorXd& bias, std::uint64_t key) {
    check_field_shapes(f, bias);
    Activity out = empty_like(f);
    const Eigen::Index nb = f.u.cols(), nu = f.u.rows();
#pragma omp parallel for collapse(2) schedule(static)
    for (Eigen::Index c = 0; c < nb; ++c)
        for (Eigen::Index j = 0; j < nu; ++j) sample_entry(f, bias, key, j, c, out);
    return out;
}

Activity rate(const Field& f, const Eigen::VectorXd& bias) {
    check_field_shapes(f, bias);
    Activity out = empty_like(f);
    const Eigen::Index nb = f.u.cols(), nu = f.u.rows();
#pragma omp parallel for collapse(2) schedule(static)
    for (Eigen::Index c = 0; c < nb; ++c)
        for (Eigen::Index j = 0; j < nu; ++j) rate_entry(f, bias, j, c, out);
    return out;
}

GradientStats collect_stats(const Activity& v, const Activity& h) {
    check_pair(v, h);
    const double inv = 1.0 / static_cast<double>(v.batch());
    return {(v.z * h.z.adjoint()) * inv, (v.amp * h.amp.transpose()) * inv,
            v.amp.rowwise().mean(), h.amp.rowwise().mean()};
}

}  // namespace omp

void set_max_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

}  // namespace capbm::kernels
