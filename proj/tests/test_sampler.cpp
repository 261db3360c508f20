#include <doctest.h>

#include <cmath>
#include <numbers>

#include "capbm/error.hpp"
#include "capbm/kernels.hpp"
#include "capbm/oracle.hpp"
#include "capbm/sampler.hpp"
#include "capbm/special.hpp"

using namespace capbm;

namespace {

// Empirical coarse-cell distribution of a full-model chain.
std::vector<double> chain_histogram(const CapBmParams& p, std::uint64_t sweeps, int fine, int coarse,
                                    const GibbsOptions& opts, std::uint64_t seed) {
    Rng rng(seed);
    ChainState chain{random_state(p.size(), rng), Rng(rng.next_u64()), 0};
    if (opts.clamp_amplitudes) std::fill(chain.state.amps.begin(), chain.state.amps.end(), 1);
    run_chain(p, chain, 500, opts);
    std::vector<double> h(oracle::coarse_cell_count(p.size(), coarse), 0.0);
    for (std::uint64_t t = 0; t < sweeps; ++t) {
        gibbs_sweep(p, chain, opts);
        h[oracle::coarse_cell(chain.state, fine, coarse)] += 1.0;
    }
    for (double& x : h) x /= static_cast<double>(sweeps);
    return h;
}

double von_mises_chi2(const std::vector<double>& samples, double mu, double kappa, int bins) {
    std::vector<double> h(bins, 0.0);
    for (double t : samples) h[static_cast<std::size_t>(wrap_angle(t) / two_pi * bins) % bins] += 1.0;
    const double n = static_cast<double>(samples.size());
    double chi2 = 0.0;
    for (int b = 0; b < bins; ++b) {
        const int m = 64;
        double p = 0.0;
        for (int i = 0; i <= m; ++i) {
            const double t = two_pi * (b + static_cast<double>(i) / m) / bins;
            p += ((i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0)) * std::exp(kappa * std::cos(t - mu));
        }
        p *= two_pi / bins / m / 3.0 / (two_pi * std::cyl_bessel_i(0.0, kappa));
        chi2 += (h[b] - n * p) * (h[b] - n * p) / (n * p);
    }
    return chi2;
}

}  // namespace

TEST_CASE("gibbs_update_unit saturation") {
    CapBmParams p(2);
    p.amp_coupling(0, 1) = p.amp_coupling(1, 0) = 30.0;
    ChainState chain{PhasorState(2), Rng(1), 0};
    chain.state.set(1, true, 0.3);
    int on = 0;
    for (int i = 0; i < 10000; ++i) {
        gibbs_update_unit(p, chain, 0);
        on += chain.state.amps[0];
        CHECK(chain.state.amps[1] == 1);
        CHECK(chain.state.phases[1] == 0.3);
    }
    CHECK(on > 9990);
    p.amp_coupling(0, 1) = p.amp_coupling(1, 0) = -30.0;
    on = 0;
    for (int i = 0; i < 10000; ++i) {
        gibbs_update_unit(p, chain, 0);
        on += chain.state.amps[0];
    }
    CHECK(on < 10);
}

TEST_CASE("inactive units keep their phase") {
    CapBmParams p(1);
    p.bias(0) = 40.0;
    ChainState chain{PhasorState(1), Rng(2), 0};
    chain.state.set(0, false, 1.234);
    gibbs_update_unit(p, chain, 0);
    CHECK(chain.state.amps[0] == 0);
    CHECK(chain.state.phases[0] == 1.234);
}

TEST_CASE("single free unit after one sweep") {
    CapBmParams p(1);
    p.bias(0) = 0.7;
    Rng rng(3);
    const int n = 200000;
    int on = 0;
    for (int i = 0; i < n; ++i) {
        ChainState c{PhasorState(1), rng.split(static_cast<std::uint64_t>(i)), 0};
        gibbs_sweep(p, c);
        CHECK(c.sweep_count == 1);
        on += c.state.amps[0];
    }
    const double q = logistic(-0.7);
    CHECK(std::abs(on / static_cast<double>(n) - q) < 4.0 * std::sqrt(q * (1 - q) / n));
}

TEST_CASE("sweep determinism and counting") {
    Rng rng(4);
    const CapBmParams p = random_capbm(5, rng);
    for (SweepOrder order : {SweepOrder::fixed, SweepOrder::random_permutation}) {
        ChainState a{random_state(5, rng), Rng(9), 0};
        ChainState b = a;
        run_chain(p, a, 37, {order});
        run_chain(p, b, 37, {order});
        CHECK(a.state == b.state);
        CHECK(a.sweep_count == 37);
    }
    ChainState bad{PhasorState(4), Rng(1), 0};
    CHECK_THROWS_AS(gibbs_sweep(p, bad), ShapeError);
}

TEST_CASE("complex mean identity with frozen neighbours") {
    Rng rng(5);
    const CapBmParams p = random_capbm(4, rng, 1.5);
    const PhasorState rest = random_state(4, rng, 0.9);
    const std::size_t j = 1;
    const UnitRate expected = unit_rate(input_sums(p, rest, j), p.bias(j));
    ChainState chain{rest, Rng(6), 0};
    const int n = 200000;
    cplx mean{};
    double amp = 0.0;
    for (int i = 0; i < n; ++i) {
        gibbs_update_unit(p, chain, j);
        mean += chain.state.value(j);
        amp += chain.state.amps[j];
    }
    mean /= static_cast<double>(n);
    CHECK(std::abs(mean - expected.complex_mean) < 4.0 / std::sqrt(n));
    CHECK(std::abs(amp / n - expected.amp_mean) < 4.0 / std::sqrt(n));
}

TEST_CASE("unit_rate examples") {
    const UnitRate zero = unit_rate(make_input_sums(0.0, 0.0), 0.0);
    CHECK(std::abs(zero.complex_mean) == 0.0);
    CHECK(zero.amp_mean == doctest::Approx(0.5));
    const UnitRate big = unit_rate(make_input_sums(std::polar(1e6, 0.8), 50.0), 0.0);
    CHECK(std::abs(big.complex_mean - std::polar(1.0, 0.8)) < 1e-6);
    const UnitRate two = unit_rate(make_input_sums(2.0, 0.0), 0.0);
    CHECK(std::abs(std::abs(two.complex_mean) - 0.48506) < 1e-4);
    CHECK(std::abs(std::abs(two.complex_mean) - 0.485011581648542) < 1e-12);

    // 10⁶-draw Monte Carlo of the same unit.
    Rng rng(7);
    cplx mc{};
    const int n = 1000000;
    for (int i = 0; i < n; ++i)
        if (rng.uniform() < two.amp_mean) mc += std::polar(1.0, sample_von_mises(Angle(0.0), 2.0, rng).rad());
    CHECK(std::abs(mc / static_cast<double>(n) - two.complex_mean) < 4.0 / std::sqrt(n));
}

TEST_CASE("rate bound") {
    Rng rng(8);
    for (int i = 0; i < 10000; ++i) {
        const UnitRate r = unit_rate(make_input_sums(std::polar(30.0 * rng.uniform(), 6.0 * rng.uniform()),
                                                     10.0 * rng.uniform() - 5.0),
                                     10.0 * rng.uniform() - 5.0);
        CHECK(std::abs(r.complex_mean) <= r.amp_mean);
        CHECK(r.amp_mean <= 1.0);
    }
}

TEST_CASE("full-model chain is stationary for the exact distribution") {
    Rng rng(9);
    SUBCASE("two units, fixed order") {
        const CapBmParams p = random_capbm(2, rng, 1.5);
        const auto exact = oracle::coarse_distribution(oracle::enumerate_boltzmann({p, 64, false}), 16);
        CHECK(oracle::total_variation(chain_histogram(p, 300000, 64, 16, {}, 10), exact) < 0.02);
    }
    SUBCASE("three units, both orders") {
        const CapBmParams p = random_capbm(3, rng);
        const auto exact = oracle::coarse_distribution(oracle::enumerate_boltzmann({p, 64, false}), 8);
        CHECK(oracle::total_variation(chain_histogram(p, 300000, 64, 8, {SweepOrder::fixed}, 11), exact) < 0.02);
        CHECK(oracle::total_variation(chain_histogram(p, 300000, 64, 8, {SweepOrder::random_permutation}, 12), exact) <
              0.02);
    }
    SUBCASE("directional units") {
        const CapBmParams p = random_capbm(3, rng, 1.5);
        const GibbsOptions opts{SweepOrder::fixed, true};
        const auto exact = oracle::coarse_distribution(oracle::enumerate_boltzmann({p, 64, true}), 16);
        const auto h = chain_histogram(p, 300000, 64, 16, opts, 13);
        CHECK(oracle::total_variation(h, exact) < 0.02);
        // Only the all-on pattern is ever visited.
        double all_on = 0.0;
        const std::size_t per_pattern = h.size() / 8;
        for (std::size_t i = 7 * per_pattern; i < h.size(); ++i) all_on += h[i];
        CHECK(all_on == doctest::Approx(1.0));
    }
}

TEST_CASE("rbm_sample_layer examples") {
    const CapRbmParams zero(4, 3);
    Rng rng(10);
    int on = 0;
    std::vector<double> phases;
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
        const PhasorState h = rbm_sample_layer(zero, random_state(4, rng), Direction::visible_to_hidden, rng);
        for (std::size_t k = 0; k < 3; ++k)
            if (h.on(k)) {
                ++on;
                phases.push_back(h.phases[k]);
            } else {
                CHECK(h.phases[k] == 0.0);
            }
    }
    CHECK(std::abs(on / (3.0 * n) - 0.5) < 4.0 * std::sqrt(0.25 / (3.0 * n)));
    CHECK(von_mises_chi2(phases, 0.0, 0.0, 16) < 30.58);  // χ²(15) at α = 0.01

    CapRbmParams one(1, 1);
    const double kappa = 2.5;
    one.weights(0, 0) = kappa;
    one.hidden_bias(0) = -5.0;
    PhasorState v(1);
    v.set(0, true, 0.0);
    phases.clear();
    while (phases.size() < 100000) {
        const PhasorState h = rbm_sample_layer(one, v, Direction::visible_to_hidden, rng);
        if (h.on(0)) phases.push_back(h.phases[0]);
    }
    CHECK(von_mises_chi2(phases, 0.0, kappa, 32) < 52.19);  // χ²(31) at α = 0.01

    // Visible phases given a hidden unit follow the conjugate direction.
    one.weights(0, 0) = std::polar(kappa, 1.0);
    PhasorState h(1);
    h.set(0, true, 0.5);
    phases.clear();
    while (phases.size() < 100000) {
        const PhasorState vs = rbm_sample_layer(one, h, Direction::hidden_to_visible, rng);
        if (vs.on(0)) phases.push_back(vs.phases[0]);
    }
    CHECK(von_mises_chi2(phases, 1.5, kappa, 32) < 52.19);

    CHECK_THROWS_AS(rbm_sample_layer(zero, PhasorState(3), Direction::visible_to_hidden, rng), ShapeError);
    CHECK_THROWS_AS(rbm_sample_layer(zero, PhasorState(4), Direction::hidden_to_visible, rng), ShapeError);
}

TEST_CASE("block Gibbs on a 3x2 restricted model matches the exact visible marginal") {
    Rng rng(11);
    const CapRbmParams p = random_caprbm(3, 2, rng);
    const auto exact = oracle::coarse_distribution(oracle::visible_distribution({p, 32}), 8);

    const Eigen::Index chains = 1000;
    auto v = kernels::random_activity(3, chains, rng.next_u64());
    std::vector<double> hist(exact.size(), 0.0);
    double count = 0.0;
    for (int step = 0; step < 1100; ++step) {
        const auto h = kernels::omp::sample(kernels::omp::hidden_field(p, v), p.hidden_bias, rng.next_u64());
        v = kernels::omp::sample(kernels::omp::visible_field(p, h), p.visible_bias, rng.next_u64());
        if (step < 100) continue;
        for (Eigen::Index c = 0; c < chains; ++c) {
            std::vector<cplx> col(3);
            for (Eigen::Index j = 0; j < 3; ++j) col[static_cast<std::size_t>(j)] = v.z(j, c);
            hist[oracle::coarse_cell(PhasorState::from_complex(col), 32, 8)] += 1.0;
            count += 1.0;
        }
    }
    for (double& x : hist) x /= count;
    CHECK(oracle::total_variation(hist, exact) < 0.03);
}

TEST_CASE("reconstruction") {
    Rng rng(12);
    const CapRbmParams p = random_caprbm(6, 4, rng);
    std::vector<cplx> v0(6);
    for (std::size_t j = 0; j < 6; ++j) v0[j] = j % 2 ? std::polar(1.0, 0.3 * j) : cplx{};
    const Rate r0 = rbm_reconstruct(p, v0, 0, rng);
    for (std::size_t j = 0; j < 6; ++j) {
        CHECK(r0.complex_mean[j] == v0[j]);
        CHECK(r0.amp_mean[j] == std::abs(v0[j]));
    }
    Rng a(5), b(5);
    const Rate ra = rbm_reconstruct(p, v0, 7, a), rb = rbm_reconstruct(p, v0, 7, b);
    CHECK(ra.complex_mean == rb.complex_mean);
    for (std::size_t j = 0; j < 6; ++j) {
        CHECK(std::abs(ra.complex_mean[j]) <= ra.amp_mean[j]);
        CHECK(ra.amp_mean[j] <= 1.0);
    }
    CHECK_THROWS_AS(rbm_reconstruct(p, v0, -1, a), DomainError);

    // Trajectory checkpoints agree with separate runs from the same generator state.
    Eigen::MatrixXcd batch(6, 3);
    for (Eigen::Index c = 0; c < 3; ++c)
        for (Eigen::Index j = 0; j < 6; ++j) batch(j, c) = v0[static_cast<std::size_t>(j)];
    Rng t1(21), t2(21);
    const auto traj = rbm_visible_trajectory(p, kernels::observe(batch), {0, 2, 2, 5}, t1);
    REQUIRE(traj.size() == 4);
    CHECK(traj[0].z == batch);
    CHECK(traj[1].z == traj[2].z);
    const auto direct = rbm_reconstruct_batch(p, batch, 5, t2);
    CHECK(direct.z == traj[3].z);
    CHECK_THROWS_AS(rbm_visible_trajectory(p, kernels::observe(batch), {3, 1}, t1), DomainError);
}
