#include <doctest.h>

#include <cmath>
#include <numbers>

#include "capbm/error.hpp"
#include "capbm/model.hpp"
#include "capbm/oracle.hpp"
#include "capbm/special.hpp"

using namespace capbm;
using std::numbers::pi;

namespace {

PhasorState on_state(std::initializer_list<double> phases) {
    PhasorState s(phases.size());
    std::size_t j = 0;
    for (double p : phases) s.set(j++, true, p);
    return s;
}

// u_j from the dense complex product W z with z_j removed.
cplx dense_input(const CapBmParams& p, const PhasorState& s, std::size_t j) {
    const auto z = s.to_complex();
    Eigen::VectorXcd zv = Eigen::Map<const Eigen::VectorXcd>(z.data(), static_cast<Eigen::Index>(z.size()));
    zv(static_cast<Eigen::Index>(j)) = 0.0;
    return (p.complex_coupling() * zv)(static_cast<Eigen::Index>(j));
}

}  // namespace

TEST_CASE("PhasorState conversions") {
    const std::vector<cplx> z{{0.0, 0.0}, std::polar(1.0, 2.0), std::polar(0.9, -1.0)};
    const PhasorState s = PhasorState::from_complex(z);
    CHECK(s.amps == std::vector<std::uint8_t>{0, 1, 1});
    CHECK(s.phases[1] == doctest::Approx(2.0));
    CHECK(s.phases[2] == doctest::Approx(two_pi - 1.0));
    CHECK(s.value(0) == cplx{});
    CHECK(std::abs(s.to_complex()[1] - std::polar(1.0, 2.0)) < 1e-15);
}

TEST_CASE("energy_capbm examples") {
    Rng rng(1);
    const CapBmParams p = random_capbm(4, rng);
    CHECK(energy_capbm(p, PhasorState(4)) == 0.0);

    CapBmParams two(2);
    two.modulus(0, 1) = two.modulus(1, 0) = 1.0;
    CHECK(energy_capbm(two, on_state({0.7, 0.7})) == doctest::Approx(-1.0));

    for (int t = 0; t < 100; ++t) {
        const CapBmParams q = random_capbm(4, rng, 2.0);
        const PhasorState s = random_state(4, rng);
        CHECK(std::abs(energy_capbm(q, s) - oracle::reference_energy(q, s)) < 1e-12);
    }
    CHECK_THROWS_AS(energy_capbm(p, PhasorState(3)), ShapeError);
}

TEST_CASE("energy_caprbm examples") {
    Rng rng(2);
    const CapRbmParams p = random_caprbm(3, 2, rng);
    CHECK(energy_caprbm(p, PhasorState(3), PhasorState(2)) == 0.0);

    CapRbmParams one(1, 1);
    const double phi = 0.4, tv = 1.1, th = 2.9;
    one.weights(0, 0) = std::polar(1.0, phi);
    CHECK(energy_caprbm(one, on_state({tv}), on_state({th})) == doctest::Approx(-std::cos(th - tv + phi)));

    for (int t = 0; t < 100; ++t) {
        const CapRbmParams q = random_caprbm(3, 2, rng, 2.0);
        const PhasorState v = random_state(3, rng), h = random_state(2, rng);
        CHECK(std::abs(energy_caprbm(q, v, h) - oracle::reference_energy_rbm(q, v, h)) < 1e-12);
    }
    CHECK_THROWS_AS(energy_caprbm(p, PhasorState(2), PhasorState(2)), ShapeError);
    CHECK_THROWS_AS(energy_caprbm(p, PhasorState(3), PhasorState(5)), ShapeError);
}

TEST_CASE("input_sums examples") {
    Rng rng(3);
    const CapBmParams p = random_capbm(5, rng);
    PhasorState lone(5);
    lone.set(2, true, 1.0);
    const InputSums s0 = input_sums(p, lone, 2);
    CHECK(s0.modulus == 0.0);
    CHECK(s0.argument.rad() == 0.0);
    CHECK(s0.amp_input == 0.0);

    CapBmParams two(2);
    two.modulus(0, 1) = two.modulus(1, 0) = 2.0;
    two.phase(0, 1) = pi / 4;
    two.phase(1, 0) = wrap_angle(-pi / 4);
    PhasorState s(2);
    s.set(1, true, pi / 4);
    const InputSums u = input_sums(two, s, 0);
    CHECK(u.modulus == doctest::Approx(2.0));
    CHECK(u.argument.rad() == doctest::Approx(pi / 2));

    for (int t = 0; t < 100; ++t) {
        const CapBmParams q = random_capbm(5, rng);
        const PhasorState st = random_state(5, rng);
        for (std::size_t j = 0; j < 5; ++j) {
            const InputSums in = input_sums(q, st, j);
            const cplx ref = dense_input(q, st, j);
            CHECK(std::abs(std::polar(in.modulus, in.argument.rad()) - ref) < 1e-12);
            double mu = 0.0;
            for (std::size_t k = 0; k < 5; ++k)
                if (k != j) mu += q.amp_coupling(j, k) * st.amps[k];
            CHECK(std::abs(in.amp_input - mu) < 1e-12);
        }
    }
    CHECK_THROWS_AS(input_sums(p, lone, 5), IndexError);
}

TEST_CASE("amp_prob examples") {
    CHECK(amp_prob(make_input_sums(0.0, 0.3), 0.3) == doctest::Approx(0.5));
    CHECK(amp_prob(make_input_sums(0.0, std::log(3.0)), 0.0) == doctest::Approx(0.75));
    CHECK(std::abs(amp_prob(make_input_sums(2.0, 0.0), 0.0) - 0.69508) < 1e-5);
    // Frozen from a 30-digit evaluation of I₀(2)/(1 + I₀(2)).
    CHECK(std::abs(amp_prob(make_input_sums(2.0, 0.0), 0.0) - 0.695083399938494) < 1e-12);
    // Large couplings stay finite and saturate.
    CHECK(amp_prob(make_input_sums(1e5, 0.0), 10.0) == 1.0);
    CHECK(amp_prob(make_input_sums(0.0, -800.0), 0.0) >= 0.0);
    CHECK_THROWS_AS(amp_prob(make_input_sums(1.0, NAN), 0.0), DomainError);
    CHECK_THROWS_AS(amp_prob(make_input_sums(1.0, 0.0), INFINITY), DomainError);
}

TEST_CASE("phase_conditional examples") {
    const PhaseConditional a = phase_conditional(make_input_sums(0.0, 1.0));
    CHECK(a.concentration == 0.0);
    CHECK(a.mean.rad() == 0.0);
    const PhaseConditional b = phase_conditional(make_input_sums(std::polar(3.0, 1.2), 0.0));
    CHECK(b.mean.rad() == doctest::Approx(1.2));
    CHECK(b.concentration == doctest::Approx(3.0));
}

TEST_CASE("amp_prob monotonicity and slope at zero") {
    Rng rng(4);
    for (int t = 0; t < 100; ++t) {
        const double eps = 4.0 * rng.uniform() - 2.0;
        double prev = 0.0;
        for (double mu = -5.0; mu <= 5.0; mu += 0.1) {
            const double p = amp_prob(make_input_sums(0.5, mu), eps);
            CHECK(p >= prev);
            prev = p;
        }
        prev = 0.0;
        for (double a = 0.0; a <= 30.0; a += 0.1) {
            const double p = amp_prob(make_input_sums(a, 0.0), eps);
            CHECK(p >= prev);
            prev = p;
        }
        const double h = 1e-7;
        const double slope = (amp_prob(make_input_sums(h, 0.0), eps) - amp_prob(make_input_sums(0.0, 0.0), eps)) / h;
        CHECK(std::abs(slope) < 1e-6);
    }
}

TEST_CASE("global phase symmetry and Hermitian realness") {
    Rng rng(5);
    for (int t = 0; t < 200; ++t) {
        const CapBmParams p = random_capbm(6, rng, 1.5);
        PhasorState s = random_state(6, rng);
        const double e = energy_capbm(p, s);
        const double psi = two_pi * rng.uniform();
        for (auto& ph : s.phases) ph = wrap_angle(ph + psi);
        CHECK(std::abs(energy_capbm(p, s) - e) < 1e-12);

        const Eigen::MatrixXcd w = p.complex_coupling();
        const auto z = s.to_complex();
        const Eigen::VectorXcd zv = Eigen::Map<const Eigen::VectorXcd>(z.data(), 6);
        CHECK(std::abs(zv.dot(w * zv).imag()) < 1e-12);
    }
}

TEST_CASE("restricted model embeds into the full model") {
    Rng rng(6);
    for (int t = 0; t < 100; ++t) {
        const CapRbmParams r = random_caprbm(4, 3, rng, 1.5);
        const CapBmParams full = embed_rbm(r);
        full.validate();
        const PhasorState v = random_state(4, rng), h = random_state(3, rng);
        PhasorState joint(7);
        for (std::size_t j = 0; j < 4; ++j) joint.set(j, v.on(j), v.phases[j]);
        for (std::size_t k = 0; k < 3; ++k) joint.set(4 + k, h.on(k), h.phases[k]);
        CHECK(std::abs(energy_capbm(full, joint) - energy_caprbm(r, v, h)) < 1e-12);
    }
}

TEST_CASE("parameter validation") {
    CapBmParams p(3);
    p.validate();
    p.modulus(0, 1) = 1.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p.modulus(1, 0) = 1.0;
    p.validate();
    p.phase(0, 1) = 0.5;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p.phase(1, 0) = two_pi - 0.5;
    p.validate();
    p.amp_coupling(2, 2) = 1.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p.amp_coupling(2, 2) = 0.0;
    p.modulus(0, 2) = p.modulus(2, 0) = -1.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    CapBmParams bad(3);
    bad.bias.resize(4);
    CHECK_THROWS_AS(bad.validate(), ShapeError);

    CapRbmParams r(3, 2);
    r.validate();
    r.hidden_bias.resize(3);
    CHECK_THROWS_AS(r.validate(), ShapeError);
}

TEST_CASE("from_complex round trip") {
    Rng rng(7);
    const CapBmParams p = random_capbm(5, rng);
    const CapBmParams q = CapBmParams::from_complex(p.complex_coupling(), p.amp_coupling, p.bias);
    q.validate(0.0);
    CHECK((q.complex_coupling() - p.complex_coupling()).cwiseAbs().maxCoeff() < 1e-14);
    Eigen::MatrixXcd notherm = p.complex_coupling();
    notherm(0, 1) += 0.5;
    CHECK_THROWS_AS(CapBmParams::from_complex(notherm, p.amp_coupling, p.bias), DomainError);
}

TEST_CASE("free energy differences match the exact visible marginal") {
    Rng rng(8);
    const CapRbmParams r = random_caprbm(3, 2, rng);
    const oracle::DiscretizedRbm dm{r, 32};
    const oracle::ProbabilityTable t = oracle::visible_distribution(dm);
    // Pairs of configurations with the same amplitude pattern share the visible measure.
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t i = rng.below(t.prob.size());
        const PhasorState a = t.decode(i);
        PhasorState b = a;
        for (std::size_t j = 0; j < 3; ++j)
            if (b.on(j)) b.set(j, true, two_pi * static_cast<double>(rng.below(32)) / 32.0);
        const auto za = a.to_complex(), zb = b.to_complex();
        const double df = free_energy(r, za) - free_energy(r, zb);
        const double dl = std::log(t.prob[t.encode(a)]) - std::log(t.prob[t.encode(b)]);
        CHECK(std::abs(df + dl) < 1e-10);
    }
}
