#include "capbm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "capbm/error.hpp"

namespace capbm::oracle {

namespace {

constexpr std::size_t chunk_size = 1 << 14;

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

bool is_power_of_two(int k) { return k > 0 && (k & (k - 1)) == 0; }

void check_bins(int bins) {
    if (bins < 16 || !is_power_of_two(bins))
        throw DomainError("oracle: bin count must be a power of two >= 16, got " + std::to_string(bins));
}

std::uint64_t checked_pow(std::uint64_t base, std::size_t exp) {
    std::uint64_t r = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        if (r > max_states / base + 1) return std::numeric_limits<std::uint64_t>::max();
        r *= base;
    }
    return r;
}

double grid_phase(int d, int bins) { return two_pi * d / bins; }

int phase_to_digit(double phase, int bins) {
    const double x = wrap_angle(phase) * bins / two_pi;
    return static_cast<int>(std::floor(x + 0.5)) % bins;
}

// ln of the per-unit measure: off carries 2π, each on state 2π/K.
double log_off_measure() { return std::log(two_pi); }
double log_on_measure(int bins) { return std::log(two_pi / bins); }

Eigen::MatrixXcd hermitian_coupling(const CapBmParams& p) {
    const auto n = p.bias.size();
    Eigen::MatrixXcd w(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k) w(j, k) = std::polar(p.modulus(j, k), p.phase(j, k));
    return w;
}

double quadratic_energy(const Eigen::MatrixXcd& w, const Eigen::MatrixXd& jm, const Eigen::VectorXd& eps,
                        const std::vector<cplx>& z) {
    const std::size_t n = z.size();
    cplx quad{};
    double amp_quad = 0.0, lin = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        lin += eps(jj) * std::abs(z[j]);
        for (std::size_t k = 0; k < n; ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            quad += std::conj(z[j]) * w(jj, kk) * z[k];
            amp_quad += std::abs(z[j]) * jm(jj, kk) * std::abs(z[k]);
        }
    }
    return -0.5 * quad.real() - 0.5 * amp_quad + lin;
}

double log_sum_exp(const std::vector<double>& x) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : x) m = std::max(m, v);
    if (!std::isfinite(m)) return m;
    CompensatedSum s;
    for (double v : x) s.add(std::exp(v - m));
    return m + std::log(s.value());
}

PhasorState decode_digits(std::size_t index, std::size_t n, int bins, bool clamped) {
    const int radix = clamped ? bins : bins + 1;
    PhasorState s(n);
    for (std::size_t j = 0; j < n; ++j) {
        const int d = static_cast<int>(index % static_cast<std::size_t>(radix));
        index /= static_cast<std::size_t>(radix);
        if (clamped)
            s.set(j, true, grid_phase(d, bins));
        else if (d > 0)
            s.set(j, true, grid_phase(d - 1, bins));
    }
    return s;
}

}  // namespace

void DiscretizedModel::validate() const {
    params.validate();
    check_bins(bins);
}

PhasorState ProbabilityTable::decode(std::size_t index) const {
    return decode_digits(index, n_units, bins, clamp_amplitudes);
}

std::size_t ProbabilityTable::encode(const PhasorState& s) const {
    if (s.size() != n_units) throw ShapeError("ProbabilityTable::encode: wrong state length");
    std::size_t index = 0;
    for (std::size_t j = n_units; j-- > 0;) {
        int d;
        if (clamp_amplitudes)
            d = phase_to_digit(s.phases[j], bins);
        else
            d = s.on(j) ? phase_to_digit(s.phases[j], bins) + 1 : 0;
        index = index * static_cast<std::size_t>(radix()) + static_cast<std::size_t>(d);
    }
    return index;
}

double reference_energy(const CapBmParams& params, const PhasorState& state) {
    if (state.size() != params.size()) throw ShapeError("reference_energy: size mismatch");
    return quadratic_energy(hermitian_coupling(params), params.amp_coupling, params.bias, state.to_complex());
}

double reference_energy_rbm(const CapRbmParams& p, const PhasorState& v, const PhasorState& h) {
    if (v.size() != p.n_visible() || h.size() != p.n_hidden()) throw ShapeError("reference_energy_rbm: size mismatch");
    // v†Wh as a double sum; the real part is the physical energy.
    cplx vwh{};
    double vjh = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j)
        for (std::size_t k = 0; k < h.size(); ++k) {
            const auto jj = static_cast<Eigen::Index>(j), kk = static_cast<Eigen::Index>(k);
            vwh += std::conj(v.value(j)) * p.weights(jj, kk) * h.value(k);
            vjh += std::abs(v.value(j)) * p.amp_coupling(jj, kk) * std::abs(h.value(k));
        }
    double e = -vwh.real() - vjh;
    for (std::size_t j = 0; j < v.size(); ++j) e += p.visible_bias(static_cast<Eigen::Index>(j)) * v.amps[j];
    for (std::size_t k = 0; k < h.size(); ++k) e += p.hidden_bias(static_cast<Eigen::Index>(k)) * h.amps[k];
    return e;
}

ProbabilityTable enumerate_boltzmann(const DiscretizedModel& dm) {
    dm.validate();
    const std::size_t n = dm.params.size();
    ProbabilityTable t{n, dm.bins, dm.clamp_amplitudes, {}};
    const std::uint64_t total = checked_pow(static_cast<std::uint64_t>(t.radix()), n);
    if (total > max_states)
        throw StateSpaceError("enumerate_boltzmann: state space exceeds " + std::to_string(max_states));

    const Eigen::MatrixXcd w = hermitian_coupling(dm.params);
    const double lon = log_on_measure(dm.bins), loff = log_off_measure();
    t.prob.resize(static_cast<std::size_t>(total));
    const std::size_t n_chunks = (t.prob.size() + chunk_size - 1) / chunk_size;
    std::vector<double> chunk_max(n_chunks, -std::numeric_limits<double>::infinity());

#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < n_chunks; ++c) {
        const std::size_t end = std::min(t.prob.size(), (c + 1) * chunk_size);
        for (std::size_t i = c * chunk_size; i < end; ++i) {
            const PhasorState s = t.decode(i);
            double lw = 0.0;
            for (std::size_t j = 0; j < n; ++j) lw += s.on(j) ? lon : loff;
            t.prob[i] = lw - quadratic_energy(w, dm.params.amp_coupling, dm.params.bias, s.to_complex());
            chunk_max[c] = std::max(chunk_max[c], t.prob[i]);
        }
    }
    const double m = *std::max_element(chunk_max.begin(), chunk_max.end());
    std::vector<CompensatedSum> partial(n_chunks);
#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < n_chunks; ++c) {
        const std::size_t end = std::min(t.prob.size(), (c + 1) * chunk_size);
        for (std::size_t i = c * chunk_size; i < end; ++i) {
            t.prob[i] = std::exp(t.prob[i] - m);
            partial[c].add(t.prob[i]);
        }
    }
    CompensatedSum z;
    for (const auto& p : partial) z.add(p.value());
    const double inv = 1.0 / z.value();
    for (double& p : t.prob) p *= inv;
    return t;
}

namespace {

// Log-weights of unit j's states with the others held at `rest`:
// index 0 = off (absent in clamped mode), then the K on states.
std::vector<double> unit_log_weights(const DiscretizedModel& dm, const PhasorState& rest, std::size_t j) {
    dm.validate();
    if (rest.size() != dm.params.size()) throw ShapeError("oracle: rest state has wrong length");
    if (j >= rest.size()) throw IndexError("oracle: unit index out of range");
    const Eigen::MatrixXcd w = hermitian_coupling(dm.params);
    std::vector<double> lw;
    PhasorState s = rest;
    if (!dm.clamp_amplitudes) {
        s.set(j, false, 0.0);
        lw.push_back(log_off_measure() - quadratic_energy(w, dm.params.amp_coupling, dm.params.bias, s.to_complex()));
    }
    for (int d = 0; d < dm.bins; ++d) {
        s.set(j, true, grid_phase(d, dm.bins));
        lw.push_back(log_on_measure(dm.bins) -
                     quadratic_energy(w, dm.params.amp_coupling, dm.params.bias, s.to_complex()));
    }
    return lw;
}

}  // namespace

double exact_marginal_amp(const DiscretizedModel& dm, const PhasorState& rest, std::size_t j) {
    const std::vector<double> lw = unit_log_weights(dm, rest, j);
    if (dm.clamp_amplitudes) return 1.0;
    const std::vector<double> on(lw.begin() + 1, lw.end());
    return std::exp(log_sum_exp(on) - log_sum_exp(lw));
}

std::vector<double> exact_phase_histogram(const DiscretizedModel& dm, const PhasorState& rest, std::size_t j) {
    std::vector<double> lw = unit_log_weights(dm, rest, j);
    if (!dm.clamp_amplitudes) lw.erase(lw.begin());
    const double lz = log_sum_exp(lw);
    for (double& v : lw) v = std::exp(v - lz);
    return lw;
}

double phase_histogram_tv(const std::vector<double>& hist, double mean, double concentration) {
    if (concentration < 0.0 || concentration > 700.0)
        throw DomainError("phase_histogram_tv: concentration outside [0, 700]");
    const int k = static_cast<int>(hist.size());
    const double norm = two_pi * std::cyl_bessel_i(0.0, concentration);
    double tv = 0.0;
    for (int d = 0; d < k; ++d) {
        const double mass = std::exp(concentration * std::cos(grid_phase(d, k) - mean)) / norm * (two_pi / k);
        tv += std::abs(hist[static_cast<std::size_t>(d)] - mass);
    }
    return 0.5 * tv;
}

double exact_phase_check(const DiscretizedModel& dm, const PhasorState& rest, std::size_t j, double mean,
                         double concentration) {
    return phase_histogram_tv(exact_phase_histogram(dm, rest, j), mean, concentration);
}

// ---------------------------------------------------------------------------
// restricted models: the hidden layer is summed unit by unit for each visible
// configuration, which is exact because hidden units are conditionally
// independent given the visibles.

void DiscretizedRbm::validate() const {
    params.validate();
    check_bins(bins);
}

std::uint64_t DiscretizedRbm::cost() const {
    const std::uint64_t configs = checked_pow(static_cast<std::uint64_t>(bins + 1), params.n_visible());
    if (configs > max_states) return std::numeric_limits<std::uint64_t>::max();
    return configs * params.n_hidden() * static_cast<std::uint64_t>(bins + 1);
}

namespace {

struct RbmEnumerator {
    const DiscretizedRbm& dm;
    std::size_t nv, nh;
    int k;
    std::vector<cplx> phasors;

    explicit RbmEnumerator(const DiscretizedRbm& d)
        : dm(d), nv(d.params.n_visible()), nh(d.params.n_hidden()), k(d.bins) {
        dm.validate();
        if (dm.cost() > max_states)
            throw StateSpaceError("oracle: restricted model enumeration exceeds " + std::to_string(max_states));
        for (int s = 0; s < k; ++s) phasors.push_back(std::polar(1.0, grid_phase(s, k)));
    }

    std::size_t n_configs() const {
        return static_cast<std::size_t>(checked_pow(static_cast<std::uint64_t>(k + 1), nv));
    }

    // Unnormalized ln P(v) with hidden units summed out; fills E[h_k | v] and E[|h_k| | v].
    double evaluate(const PhasorState& v, cplx* h_mean, double* h_amp) const {
        const auto& p = dm.params;
        double lw = 0.0;
        for (std::size_t j = 0; j < nv; ++j) {
            lw += v.on(j) ? log_on_measure(k) : log_off_measure();
            if (v.on(j)) lw -= p.visible_bias(static_cast<Eigen::Index>(j));
        }
        std::vector<double> hl(static_cast<std::size_t>(k) + 1);
        for (std::size_t h = 0; h < nh; ++h) {
            const auto hh = static_cast<Eigen::Index>(h);
            cplx c{};
            double m = 0.0;
            for (std::size_t j = 0; j < nv; ++j) {
                if (!v.on(j)) continue;
                const auto jj = static_cast<Eigen::Index>(j);
                c += std::conj(v.value(j)) * p.weights(jj, hh);
                m += p.amp_coupling(jj, hh);
            }
            // −E contribution of hidden unit h in each of its states.
            hl[0] = log_off_measure();
            for (int s = 0; s < k; ++s)
                hl[static_cast<std::size_t>(s) + 1] =
                    log_on_measure(k) + (c * phasors[static_cast<std::size_t>(s)]).real() + m - p.hidden_bias(hh);
            const double lz = log_sum_exp(hl);
            lw += lz;
            if (h_mean) {
                cplx mean{};
                double amp = 0.0;
                for (int s = 0; s < k; ++s) {
                    const double q = std::exp(hl[static_cast<std::size_t>(s) + 1] - lz);
                    mean += q * phasors[static_cast<std::size_t>(s)];
                    amp += q;
                }
                h_mean[h] = mean;
                h_amp[h] = amp;
            }
        }
        return lw;
    }

    PhasorState config(std::size_t index) const { return decode_digits(index, nv, k, false); }

    std::vector<double> all_log_weights() const {
        std::vector<double> lw(n_configs());
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < lw.size(); ++i) lw[i] = evaluate(config(i), nullptr, nullptr);
        return lw;
    }
};

PhasorState snap_to_grid(const PhasorState& s, int bins) {
    PhasorState g(s.size());
    for (std::size_t j = 0; j < s.size(); ++j)
        if (s.on(j)) g.set(j, true, grid_phase(phase_to_digit(s.phases[j], bins), bins));
    return g;
}

GradientStats zero_stats(std::size_t nv, std::size_t nh) {
    const auto v = static_cast<Eigen::Index>(nv), h = static_cast<Eigen::Index>(nh);
    return {Eigen::MatrixXcd::Zero(v, h), Eigen::MatrixXd::Zero(v, h), Eigen::VectorXd::Zero(v),
            Eigen::VectorXd::Zero(h)};
}

void accumulate(GradientStats& s, double weight, const PhasorState& v, const std::vector<cplx>& h_mean,
                const std::vector<double>& h_amp) {
    for (std::size_t j = 0; j < v.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const cplx vj = v.value(j);
        const double aj = v.amps[j];
        s.visible_amp(jj) += weight * aj;
        for (std::size_t h = 0; h < h_mean.size(); ++h) {
            const auto hh = static_cast<Eigen::Index>(h);
            s.pair_complex(jj, hh) += weight * vj * std::conj(h_mean[h]);
            s.pair_amp(jj, hh) += weight * aj * h_amp[h];
        }
    }
    for (std::size_t h = 0; h < h_amp.size(); ++h) s.hidden_amp(static_cast<Eigen::Index>(h)) += weight * h_amp[h];
}

}  // namespace

ProbabilityTable visible_distribution(const DiscretizedRbm& dm) {
    const RbmEnumerator e(dm);
    ProbabilityTable t{e.nv, dm.bins, false, e.all_log_weights()};
    const double lz = log_sum_exp(t.prob);
    for (double& p : t.prob) p = std::exp(p - lz);
    return t;
}

double exact_loglik(const DiscretizedRbm& dm, const std::vector<PhasorState>& data) {
    const RbmEnumerator e(dm);
    const double lz = log_sum_exp(e.all_log_weights());
    CompensatedSum ll;
    for (const auto& v : data) {
        if (v.size() != e.nv) throw ShapeError("exact_loglik: data vector has wrong length");
        ll.add(e.evaluate(snap_to_grid(v, dm.bins), nullptr, nullptr) - lz);
    }
    return ll.value();
}

ExactStats exact_stats(const DiscretizedRbm& dm, const std::vector<PhasorState>& data) {
    const RbmEnumerator e(dm);
    if (data.empty()) throw DomainError("exact_stats: empty dataset");
    ExactStats out{zero_stats(e.nv, e.nh), zero_stats(e.nv, e.nh)};
    std::vector<cplx> hm(e.nh);
    std::vector<double> ha(e.nh);

    const double inv = 1.0 / static_cast<double>(data.size());
    for (const auto& raw : data) {
        if (raw.size() != e.nv) throw ShapeError("exact_stats: data vector has wrong length");
        const PhasorState v = snap_to_grid(raw, dm.bins);
        e.evaluate(v, hm.data(), ha.data());
        accumulate(out.positive, inv, v, hm, ha);
    }

    const std::vector<double> lw = e.all_log_weights();
    const double lz = log_sum_exp(lw);
    const std::size_t n_chunks = (lw.size() + chunk_size - 1) / chunk_size;
    std::vector<GradientStats> partial(n_chunks, zero_stats(e.nv, e.nh));
#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < n_chunks; ++c) {
        std::vector<cplx> m(e.nh);
        std::vector<double> a(e.nh);
        const std::size_t end = std::min(lw.size(), (c + 1) * chunk_size);
        for (std::size_t i = c * chunk_size; i < end; ++i) {
            const PhasorState v = e.config(i);
            e.evaluate(v, m.data(), a.data());
            accumulate(partial[c], std::exp(lw[i] - lz), v, m, a);
        }
    }
    for (const auto& p : partial) {
        out.negative.pair_complex += p.pair_complex;
        out.negative.pair_amp += p.pair_amp;
        out.negative.visible_amp += p.visible_amp;
        out.negative.hidden_amp += p.hidden_amp;
    }
    return out;
}

PolarGradients fd_gradient(const DiscretizedRbm& dm, const std::vector<PhasorState>& data, double step) {
    if (data.empty()) throw DomainError("fd_gradient: empty dataset");
    const auto nv = static_cast<Eigen::Index>(dm.params.n_visible());
    const auto nh = static_cast<Eigen::Index>(dm.params.n_hidden());
    const double n = static_cast<double>(data.size());
    auto mean_ll = [&](const CapRbmParams& p) { return exact_loglik(DiscretizedRbm{p, dm.bins}, data) / n; };
    auto central = [&](auto&& perturb) {
        CapRbmParams plus = dm.params, minus = dm.params;
        perturb(plus, step);
        perturb(minus, -step);
        return (mean_ll(plus) - mean_ll(minus)) / (2.0 * step);
    };

    PolarGradients g{Eigen::MatrixXd(nv, nh), Eigen::MatrixXd(nv, nh), Eigen::MatrixXd(nv, nh),
                     Eigen::VectorXd(nv), Eigen::VectorXd(nh)};
    for (Eigen::Index j = 0; j < nv; ++j)
        for (Eigen::Index k = 0; k < nh; ++k) {
            const double b = std::abs(dm.params.weights(j, k));
            const double th = std::arg(dm.params.weights(j, k));
            g.modulus(j, k) = central([&](CapRbmParams& p, double d) { p.weights(j, k) = std::polar(b + d, th); });
            g.phase(j, k) = central([&](CapRbmParams& p, double d) { p.weights(j, k) = std::polar(b, th + d); });
            g.amp_coupling(j, k) = central([&](CapRbmParams& p, double d) { p.amp_coupling(j, k) += d; });
        }
    for (Eigen::Index j = 0; j < nv; ++j)
        g.visible_bias(j) = central([&](CapRbmParams& p, double d) { p.visible_bias(j) += d; });
    for (Eigen::Index k = 0; k < nh; ++k)
        g.hidden_bias(k) = central([&](CapRbmParams& p, double d) { p.hidden_bias(k) += d; });
    return g;
}

// ---------------------------------------------------------------------------

std::size_t coarse_cell_count(std::size_t n_units, int coarse_bins) {
    std::size_t c = std::size_t{1} << n_units;
    for (std::size_t i = 1; i < n_units; ++i) c *= static_cast<std::size_t>(coarse_bins);
    return c;
}

std::size_t coarse_cell(const PhasorState& s, int fine_bins, int coarse_bins) {
    if (coarse_bins <= 0 || fine_bins % coarse_bins != 0)
        throw DomainError("coarse_cell: coarse bins must divide fine bins");
    const int per = fine_bins / coarse_bins;
    const std::size_t n = s.size();
    std::size_t pattern = 0;
    std::size_t ref = n;
    for (std::size_t j = 0; j < n; ++j)
        if (s.on(j)) {
            pattern |= std::size_t{1} << j;
            if (ref == n) ref = j;
        }
    std::size_t index = 0, slot_weight = 1;
    for (std::size_t j = 0, slot = 0; j < n; ++j) {
        if (j == ref) continue;
        if (ref < n && s.on(j)) {
            const int fine = phase_to_digit(s.phases[j] - s.phases[ref], fine_bins);
            index += static_cast<std::size_t>(fine / per) * slot_weight;
        }
        slot_weight *= static_cast<std::size_t>(coarse_bins);
        ++slot;
    }
    // Fully inactive state: all n slots are "skipped" only n−1 times above.
    if (ref == n) index = 0;
    return pattern * coarse_cell_count(n, coarse_bins) / (std::size_t{1} << n) + index;
}

std::vector<double> coarse_distribution(const ProbabilityTable& t, int coarse_bins) {
    std::vector<double> out(coarse_cell_count(t.n_units, coarse_bins), 0.0);
    for (std::size_t i = 0; i < t.prob.size(); ++i) out[coarse_cell(t.decode(i), t.bins, coarse_bins)] += t.prob[i];
    return out;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw ShapeError("total_variation: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

}  // namespace capbm::oracle
