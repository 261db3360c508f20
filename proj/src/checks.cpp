#include "capbm/checks.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "capbm/capm_io.hpp"
#include "capbm/data.hpp"
#include "capbm/kernels.hpp"
#include "capbm/oracle.hpp"
#include "capbm/sampler.hpp"
#include "capbm/special.hpp"

namespace capbm::checks {

namespace {

CheckResult result(std::string name, std::string tolerance, double measured, bool pass, std::string detail = {}) {
    return {std::move(name), std::move(tolerance), measured, pass, std::move(detail)};
}

CheckResult below(std::string name, double measured, double bound, std::string detail = {}) {
    std::ostringstream tol;
    tol << "< " << bound;
    return result(std::move(name), tol.str(), measured, measured < bound, std::move(detail));
}

double rel_err(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

// ln I_ν(a) from the power series in long double, independent of special.cpp.
double series_log_bessel(int nu, double a) {
    const long double x = 0.25L * a * a;
    long double term = 1.0L, sum = 1.0L;
    for (int k = 1; k < 2000; ++k) {
        term *= x / (static_cast<long double>(k) * (k + nu));
        sum += term;
        if (term < sum * 1e-21L) break;
    }
    return static_cast<double>(std::log(sum) + nu * std::log(0.5L * a) - std::lgamma(static_cast<long double>(nu + 1)));
}

PhasorState grid_state(std::size_t n, int bins, Rng& rng) {
    PhasorState s(n);
    for (std::size_t j = 0; j < n; ++j)
        s.set(j, rng.bernoulli(0.5), two_pi * static_cast<double>(rng.below(static_cast<std::uint64_t>(bins))) / bins);
    return s;
}

}  // namespace

void print(std::ostream& out, const CheckResult& r) {
    std::ostringstream m;
    m << std::setprecision(4) << r.measured;
    out << (r.pass ? "PASS " : "FAIL ") << std::left << std::setw(34) << r.name << " measured=" << std::setw(11)
        << m.str() << " tolerance " << r.tolerance;
    if (!r.detail.empty()) out << "  (" << r.detail << ")";
    out << '\n';
}

CheckResult bessel_accuracy() {
    double worst = 0.0;
    for (double a : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 14.9, 15.0, 15.1, 20.0, 50.0, 100.0, 300.0, 600.0}) {
        const double i0 = std::log(std::cyl_bessel_i(0.0, a));
        const double i1 = std::log(std::cyl_bessel_i(1.0, a));
        worst = std::max(worst, std::abs(log_bessel_i0(a) - i0) / std::max(1.0, std::abs(i0)));
        worst = std::max(worst, std::abs(log_bessel_i1(a) - i1) / std::max(1.0, std::abs(i1)));
        worst = std::max(worst, rel_err(bessel_ratio(a), std::exp(i1 - i0)));
        if (a < 50.0) {
            worst = std::max(worst, std::abs(log_bessel_i0(a) - series_log_bessel(0, a)) / std::max(1.0, i0));
            worst = std::max(worst, rel_err(bessel_ratio(a), std::exp(series_log_bessel(1, a) - series_log_bessel(0, a))));
        }
    }
    return below("bessel_accuracy", worst, 1e-11, "ln I0, ln I1, I1/I0 vs library and series");
}

CheckResult von_mises_moments(std::uint64_t seed) {
    const double mu = std::numbers::pi / 3.0, kappa = 4.0;
    const int n = 100'000;
    Rng rng(seed);
    double c = 0.0, s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = sample_von_mises(Angle(mu), kappa, rng).rad() - mu;
        c += std::cos(t);
        s += std::sin(t);
    }
    c /= n;
    s /= n;
    const double a1 = bessel_ratio(kappa);
    const double a2 = 1.0 - 2.0 * a1 / kappa;
    const double z_mean = std::abs(std::atan2(s, c)) / (std::sqrt(a1 / kappa / n) / a1);
    const double z_len = std::abs(c - a1) / std::sqrt(((1.0 + a2) / 2.0 - a1 * a1) / n);
    std::ostringstream d;
    d << "resultant length z=" << std::setprecision(3) << z_len << " (< 4)";
    return result("von_mises_moments", "< 3 sigma", z_mean, z_mean < 3.0 && z_len < 4.0, d.str());
}

CheckResult global_phase_invariance(std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const CapBmParams p = random_capbm(6, rng);
        PhasorState s = random_state(6, rng);
        const double e0 = energy_capbm(p, s);
        const double psi = two_pi * rng.uniform();
        for (std::size_t j = 0; j < s.size(); ++j) s.phases[j] = wrap_angle(s.phases[j] + psi);
        worst = std::max(worst, std::abs(energy_capbm(p, s) - e0) / (1.0 + std::abs(e0)));

        const CapRbmParams r = random_caprbm(4, 3, rng);
        PhasorState v = random_state(4, rng), h = random_state(3, rng);
        const double f0 = energy_caprbm(r, v, h);
        for (auto* layer : {&v, &h})
            for (auto& ph : layer->phases) ph = wrap_angle(ph + psi);
        worst = std::max(worst, std::abs(energy_caprbm(r, v, h) - f0) / (1.0 + std::abs(f0)));
    }
    return below("global_phase_invariance", worst, 1e-12);
}

CheckResult hermitian_realness(std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const CapBmParams p = random_capbm(8, rng);
        const Eigen::MatrixXcd w = p.complex_coupling();
        worst = std::max(worst, (w - w.adjoint()).cwiseAbs().maxCoeff());
        const auto z = random_state(8, rng).to_complex();
        const Eigen::VectorXcd zv = Eigen::Map<const Eigen::VectorXcd>(z.data(), 8);
        const cplx q = zv.dot(w * zv);
        worst = std::max(worst, std::abs(q.imag()) / (1.0 + w.cwiseAbs().sum()));
    }
    return below("hermitian_realness", worst, 1e-12, "|W - W^H| and Im(z^H W z)");
}

CheckResult rate_bound(std::uint64_t seed) {
    Rng rng(seed);
    double worst = -1.0;
    for (int t = 0; t < 20'000; ++t) {
        const double a = 50.0 * rng.uniform() * rng.uniform();
        const InputSums s = make_input_sums(std::polar(a, two_pi * rng.uniform()), 6.0 * rng.uniform() - 3.0);
        const UnitRate r = unit_rate(s, 6.0 * rng.uniform() - 3.0);
        worst = std::max(worst, std::abs(r.complex_mean) - r.amp_mean);
    }
    const CapRbmParams p = random_caprbm(20, 10, rng);
    const auto v = kernels::random_activity(20, 64, rng.next_u64());
    const auto rate = kernels::omp::rate(kernels::omp::hidden_field(p, v), p.hidden_bias);
    worst = std::max(worst, (rate.z.cwiseAbs() - rate.amp).maxCoeff());
    return result("rate_bound", "|E[z]| - E[|z|] <= 0", worst, worst <= 0.0);
}

CheckResult amp_prob_monotone(std::uint64_t seed) {
    Rng rng(seed);
    double slope = 0.0;
    int violations = 0;
    for (int t = 0; t < 200; ++t) {
        const double mu = 4.0 * rng.uniform() - 2.0, eps = 4.0 * rng.uniform() - 2.0;
        double prev = -1.0;
        for (int i = 0; i <= 400; ++i) {
            const double p = amp_prob(make_input_sums(cplx(0.05 * i, 0.0), mu), eps);
            if (p < prev) ++violations;
            prev = p;
        }
        const double h = 1e-6;
        slope = std::max(slope, std::abs(amp_prob(make_input_sums(cplx(h, 0.0), mu), eps) -
                                         amp_prob(make_input_sums(cplx(0.0, 0.0), mu), eps)) / h);
    }
    std::ostringstream d;
    d << violations << " monotonicity violations; value is the slope at a=0";
    return result("amp_prob_monotone", "slope < 1e-5, no violations", slope, slope < 1e-5 && violations == 0, d.str());
}

CheckResult energy_cross_check(std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const CapBmParams p = random_capbm(5, rng);
        const PhasorState s = random_state(5, rng);
        const double e = oracle::reference_energy(p, s);
        worst = std::max(worst, std::abs(energy_capbm(p, s) - e) / (1.0 + std::abs(e)));

        const CapRbmParams r = random_caprbm(3, 4, rng);
        const PhasorState v = random_state(3, rng), h = random_state(4, rng);
        const double f = oracle::reference_energy_rbm(r, v, h);
        worst = std::max(worst, std::abs(energy_caprbm(r, v, h) - f) / (1.0 + std::abs(f)));
        PhasorState joint(7);
        for (std::size_t j = 0; j < 3; ++j) joint.set(j, v.on(j), v.phases[j]);
        for (std::size_t k = 0; k < 4; ++k) joint.set(3 + k, h.on(k), h.phases[k]);
        const CapBmParams embedded = embed_rbm(r);
        worst = std::max(worst, std::abs(oracle::reference_energy(embedded, joint) - f) / (1.0 + std::abs(f)));
    }
    return below("energy_cross_check", worst, 1e-12, "model vs reference energies, embedding");
}

CheckResult capm_round_trip(std::uint64_t seed) {
    Rng rng(seed);
    int mismatches = 0;
    for (int t = 0; t < 10; ++t) {
        const CapBmParams p = random_capbm(1 + rng.below(8), rng);
        const auto back = std::get<CapBmParams>(decode_params(encode_params(p)));
        if (back.modulus != p.modulus || back.phase != p.phase || back.amp_coupling != p.amp_coupling ||
            back.bias != p.bias)
            ++mismatches;
        const CapRbmParams r = random_caprbm(1 + rng.below(8), 1 + rng.below(8), rng);
        const auto rb = std::get<CapRbmParams>(decode_params(encode_params(r)));
        if (rb.weights != r.weights || rb.amp_coupling != r.amp_coupling || rb.visible_bias != r.visible_bias ||
            rb.hidden_bias != r.hidden_bias)
            ++mismatches;
    }
    return result("capm_round_trip", "== 0 mismatches", mismatches, mismatches == 0);
}

CheckResult cpxd_round_trip(std::uint64_t seed) {
    BarsConfig cfg;
    cfg.seed = seed;
    int mismatches = 0;
    ComplexDataset ds = gen_bars(cfg, 25);
    ComplexDataset back = decode_dataset(encode_dataset(ds));
    if (back.samples != ds.samples || back.width != ds.width || back.height != ds.height) ++mismatches;
    ComplexDataset flat;
    flat.samples = Eigen::MatrixXcd::Random(7, 3);
    back = decode_dataset(encode_dataset(flat));
    if (back.samples != flat.samples || back.shaped()) ++mismatches;
    return result("cpxd_round_trip", "== 0 mismatches", mismatches, mismatches == 0);
}

CheckResult kernel_agreement(std::uint64_t seed) {
    Rng rng(seed);
    const CapRbmParams p = random_caprbm(37, 23, rng, 0.5);
    const auto v = kernels::random_activity(37, 41, rng.next_u64());
    const auto fs = kernels::serial::hidden_field(p, v), fo = kernels::omp::hidden_field(p, v);
    double worst = (fs.u - fo.u).cwiseAbs().maxCoeff() + (fs.mu - fo.mu).cwiseAbs().maxCoeff();
    const std::uint64_t key = rng.next_u64();
    const auto ss = kernels::serial::sample(fs, p.hidden_bias, key);
    const auto so = kernels::omp::sample(fs, p.hidden_bias, key);
    const bool same = ss.z == so.z && ss.amp == so.amp;
    const auto gv = kernels::serial::visible_field(p, ss), go = kernels::omp::visible_field(p, ss);
    worst = std::max(worst, (gv.u - go.u).cwiseAbs().maxCoeff());
    const auto rs = kernels::serial::rate(gv, p.visible_bias), ro = kernels::omp::rate(gv, p.visible_bias);
    worst = std::max(worst, (rs.z - ro.z).cwiseAbs().maxCoeff());
    const auto st = kernels::serial::collect_stats(v, ss), ot = kernels::omp::collect_stats(v, ss);
    worst = std::max(worst, (st.pair_complex - ot.pair_complex).cwiseAbs().maxCoeff());
    return result("kernel_agreement", "< 1e-12, identical samples", worst, worst < 1e-12 && same,
                  same ? "samples identical" : "samples differ");
}

std::vector<CheckResult> conditional_exactness(int n_models, int bins, std::uint64_t seed) {
    Rng rng(seed);
    double amp_worst = 0.0, tv_worst = 0.0;
    for (int m = 0; m < n_models; ++m) {
        const oracle::DiscretizedModel dm{random_capbm(3, rng), bins, false};
        const PhasorState rest = random_state(3, rng);
        const std::size_t j = static_cast<std::size_t>(m % 3);
        const InputSums s = input_sums(dm.params, rest, j);
        amp_worst = std::max(amp_worst, rel_err(oracle::exact_marginal_amp(dm, rest, j), amp_prob(s, dm.params.bias(j))));
        const PhaseConditional pc = phase_conditional(s);
        tv_worst = std::max(tv_worst, oracle::exact_phase_check(dm, rest, j, pc.mean.rad(), pc.concentration));
    }
    std::ostringstream d;
    d << n_models << " random 3-unit models, K=" << bins;
    return {below("conditional_amp_exactness", amp_worst, 1e-3, d.str()),
            below("conditional_phase_tv", tv_worst, 1e-3, d.str())};
}

CheckResult gradient_exactness(int n_models, int bins, std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    int compared = 0;
    for (int m = 0; m < n_models; ++m) {
        const oracle::DiscretizedRbm dm{random_caprbm(3, 2, rng), bins};
        std::vector<PhasorState> data;
        for (int i = 0; i < 20; ++i) data.push_back(grid_state(3, bins, rng));
        const auto ex = oracle::exact_stats(dm, data);
        const PolarGradients g = polar_gradients(dm.params, ex.positive, ex.negative);
        const PolarGradients f = oracle::fd_gradient(dm, data, 1e-5);
        auto cmp = [&](const auto& a, const auto& b) {
            for (Eigen::Index i = 0; i < a.size(); ++i) {
                const double want = b.data()[i];
                if (std::abs(want) <= 1e-8) continue;
                worst = std::max(worst, rel_err(a.data()[i], want));
                ++compared;
            }
        };
        cmp(g.modulus, f.modulus);
        cmp(g.phase, f.phase);
        cmp(g.amp_coupling, f.amp_coupling);
        cmp(g.visible_bias, f.visible_bias);
        cmp(g.hidden_bias, f.hidden_bias);
    }
    std::ostringstream d;
    d << compared << " coordinates, " << n_models << " random 3x2 models, K=" << bins;
    return below("gradient_exactness", worst, 1e-4, d.str());
}

CheckResult sampler_stationarity(std::uint64_t sweeps, int fine_bins, int coarse_bins, std::uint64_t seed) {
    Rng rng(seed);
    const oracle::DiscretizedModel dm{random_capbm(3, rng), fine_bins, false};
    const auto exact = oracle::coarse_distribution(oracle::enumerate_boltzmann(dm), coarse_bins);

    ChainState chain{random_state(3, rng), Rng(rng.next_u64()), 0};
    run_chain(dm.params, chain, 1000);
    std::vector<double> hist(exact.size(), 0.0);
    for (std::uint64_t t = 0; t < sweeps; ++t) {
        gibbs_sweep(dm.params, chain);
        hist[oracle::coarse_cell(chain.state, fine_bins, coarse_bins)] += 1.0;
    }
    for (double& h : hist) h /= static_cast<double>(sweeps);
    std::ostringstream d;
    d << sweeps << " sweeps, K=" << fine_bins << ", " << coarse_bins << " relative-phase bins";
    return below("sampler_stationarity_tv", oracle::total_variation(hist, exact), 0.02, d.str());
}

double bars_reconstruction_cosine(const BarsExperiment& exp, const TrainConfig& cfg) {
    BarsConfig bars;
    bars.seed = exp.data_seed;
    const ComplexDataset train_set = gen_bars(bars, exp.n_train);
    bars.seed = exp.held_out_seed;
    const ComplexDataset held_out = gen_bars(bars, exp.n_held_out);

    TrainConfig c = cfg;
    c.epochs = exp.epochs;
    const TrainResult trained = train(init_rbm(train_set, exp.n_hidden, c.seed), train_set, c);
    Rng rng(c.seed ^ 0x5eedULL);
    const auto rec = rbm_reconstruct_batch(trained.params, held_out.samples, exp.alternations, rng);
    return mean_amp_cosine(held_out.samples, rec.amp);
}

std::vector<CheckResult> run_suite(Level level, std::uint64_t seed) {
    std::vector<CheckResult> out{bessel_accuracy(),
                                 von_mises_moments(seed + 1),
                                 global_phase_invariance(seed + 2),
                                 hermitian_realness(seed + 3),
                                 rate_bound(seed + 4),
                                 amp_prob_monotone(seed + 5),
                                 energy_cross_check(seed + 6),
                                 capm_round_trip(seed + 7),
                                 cpxd_round_trip(seed + 8),
                                 kernel_agreement(seed + 9)};
    if (level == Level::quick) {
        for (auto& r : conditional_exactness(5, 64, seed + 10)) out.push_back(std::move(r));
        return out;
    }
    for (auto& r : conditional_exactness(20, 256, seed + 10)) out.push_back(std::move(r));
    out.push_back(gradient_exactness(10, 32, seed + 11));
    out.push_back(sampler_stationarity(1'000'000, 64, 16, seed + 12));
    return out;
}

}  // namespace capbm::checks
