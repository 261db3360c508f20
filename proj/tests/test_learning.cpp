#include <doctest.h>

#include <cmath>
#include <sstream>

#include "capbm/error.hpp"
#include "capbm/learning.hpp"
#include "capbm/oracle.hpp"

using namespace capbm;

namespace {

GradientStats zero_stats(Eigen::Index v, Eigen::Index h) {
    return {Eigen::MatrixXcd::Zero(v, h), Eigen::MatrixXd::Zero(v, h), Eigen::VectorXd::Zero(v),
            Eigen::VectorXd::Zero(h)};
}

PhasorState grid_state(std::size_t n, int bins, Rng& rng) {
    PhasorState s(n);
    for (std::size_t j = 0; j < n; ++j)
        s.set(j, rng.bernoulli(0.6), two_pi * static_cast<double>(rng.below(static_cast<std::uint64_t>(bins))) / bins);
    return s;
}

Eigen::MatrixXcd to_matrix(const std::vector<PhasorState>& states) {
    Eigen::MatrixXcd m(static_cast<Eigen::Index>(states[0].size()), static_cast<Eigen::Index>(states.size()));
    for (std::size_t c = 0; c < states.size(); ++c)
        for (std::size_t j = 0; j < states[c].size(); ++j)
            m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) = states[c].value(j);
    return m;
}

Eigen::VectorXd flatten(const PolarGradients& g) {
    Eigen::VectorXd out(g.modulus.size() * 3 + g.visible_bias.size() + g.hidden_bias.size());
    out << g.modulus.reshaped(), g.phase.reshaped(), g.amp_coupling.reshaped(), g.visible_bias, g.hidden_bias;
    return out;
}

ComplexDataset small_dataset(std::size_t n, std::uint64_t seed) {
    BarsConfig cfg;
    cfg.side = 8;
    cfg.bar_width = 2;
    cfg.min_bars = 1;
    cfg.max_bars = 2;
    cfg.seed = seed;
    return gen_bars(cfg, n);
}

}  // namespace

TEST_CASE("polar_gradients examples") {
    Rng rng(1);
    const CapRbmParams p = random_caprbm(3, 2, rng);
    GradientStats s = zero_stats(3, 2);
    s.pair_complex = Eigen::MatrixXcd::Random(3, 2);
    s.pair_amp = Eigen::MatrixXd::Random(3, 2);
    s.visible_amp = Eigen::VectorXd::Random(3);
    s.hidden_amp = Eigen::VectorXd::Random(2);
    const PolarGradients g = polar_gradients(p, s, s);
    CHECK(flatten(g).cwiseAbs().maxCoeff() == 0.0);

    CapRbmParams one(1, 1);
    one.weights(0, 0) = 0.5;
    GradientStats pos = zero_stats(1, 1), neg = zero_stats(1, 1);
    pos.pair_complex(0, 0) = 1.0;
    const PolarGradients e = polar_gradients(one, pos, neg);
    CHECK(e.modulus(0, 0) == doctest::Approx(1.0));
    CHECK(e.phase(0, 0) == doctest::Approx(0.0));

    CHECK_THROWS_AS(polar_gradients(p, zero_stats(2, 2), zero_stats(3, 2)), ShapeError);
}

TEST_CASE("polar and rectangular gradients agree by the chain rule") {
    Rng rng(2);
    for (int t = 0; t < 50; ++t) {
        const CapRbmParams p = random_caprbm(4, 3, rng);
        GradientStats pos = zero_stats(4, 3), neg = zero_stats(4, 3);
        pos.pair_complex = Eigen::MatrixXcd::Random(4, 3);
        neg.pair_complex = Eigen::MatrixXcd::Random(4, 3);
        const PolarGradients g = polar_gradients(p, pos, neg);
        const RectGradients r = rect_gradients(pos, neg);
        for (Eigen::Index j = 0; j < 4; ++j)
            for (Eigen::Index k = 0; k < 3; ++k) {
                const cplx w = p.weights(j, k);
                const double b = std::abs(w);
                if (b <= 1e-6) continue;
                const cplx dir = w / b;
                // dL/db = ⟨G, ∂W/∂b⟩ and dL/dθ = ⟨G, ∂W/∂θ⟩ with ⟨x, y⟩ = Re(conj(x) y).
                CHECK(std::abs(g.modulus(j, k) - (std::conj(r.weights(j, k)) * dir).real()) < 1e-10);
                CHECK(std::abs(g.phase(j, k) - (std::conj(r.weights(j, k)) * cplx(0.0, b) * dir).real()) < 1e-10);
            }
    }
}

TEST_CASE("gradients from exact expectations match finite differences") {
    Rng rng(3);
    for (int m = 0; m < 2; ++m) {
        const oracle::DiscretizedRbm dm{random_caprbm(3, 2, rng), 32};
        std::vector<PhasorState> data;
        for (int i = 0; i < 15; ++i) data.push_back(grid_state(3, 32, rng));
        const auto ex = oracle::exact_stats(dm, data);
        const Eigen::VectorXd g = flatten(polar_gradients(dm.params, ex.positive, ex.negative));
        const Eigen::VectorXd f = flatten(oracle::fd_gradient(dm, data));
        for (Eigen::Index i = 0; i < g.size(); ++i) {
            if (std::abs(f(i)) <= 1e-8) continue;
            CAPTURE(i);
            CHECK(std::abs(g(i) - f(i)) / std::abs(f(i)) < 1e-4);
        }
    }
}

TEST_CASE("cd1_update basics") {
    Rng rng(4);
    const CapRbmParams p0 = random_caprbm(5, 3, rng, 0.5);
    const Eigen::MatrixXcd batch = to_matrix({grid_state(5, 16, rng), grid_state(5, 16, rng), grid_state(5, 16, rng)});
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    CapRbmParams p = p0;
    Rng r1(5);
    cd1_update(p, batch, cfg, r1);
    CHECK(p.weights == p0.weights);
    CHECK(p.amp_coupling == p0.amp_coupling);
    CHECK(p.visible_bias == p0.visible_bias);

    cfg.learning_rate = 0.05;
    CapRbmParams a = p0, b = p0;
    Rng ra(6), rb(6);
    const StepReport rep = cd1_update(a, batch, cfg, ra);
    cd1_update(b, batch, cfg, rb);
    CHECK(a.weights == b.weights);
    a.validate();
    CHECK(rep.recon_amp_cos >= 0.0);
    CHECK(rep.recon_amp_cos <= 1.0 + 1e-12);

    CHECK_THROWS_AS(cd1_update(a, Eigen::MatrixXcd(4, 2), cfg, ra), ShapeError);
    CHECK_THROWS_AS(cd1_update(a, Eigen::MatrixXcd(5, 0), cfg, ra), DomainError);
}

TEST_CASE("cd1 moves the model amplitude statistic toward the data") {
    // One visible, one hidden unit, data always on.
    Eigen::MatrixXcd batch(1, 10);
    batch.setConstant(std::polar(1.0, 0.4));
    TrainConfig cfg;
    cfg.learning_rate = 0.05;
    double first = 0.0, last = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        CapRbmParams p(1, 1);
        p.visible_bias(0) = 2.0;
        Rng rng(seed);
        std::vector<double> neg;
        for (int step = 0; step < 100; ++step) neg.push_back(cd1_update(p, batch, cfg, rng).negative.visible_amp(0));
        first += (neg[0] + neg[1] + neg[2] + neg[3] + neg[4]) / 5.0;
        last += (neg[95] + neg[96] + neg[97] + neg[98] + neg[99]) / 5.0;
    }
    CHECK(last > first + 0.2);
}

TEST_CASE("pcd gradient direction agrees with the exact gradient") {
    Rng rng(7);
    const oracle::DiscretizedRbm dm{random_caprbm(3, 2, rng), 32};
    std::vector<PhasorState> data;
    for (int i = 0; i < 20; ++i) data.push_back(grid_state(3, 32, rng));
    const Eigen::MatrixXcd batch = to_matrix(data);

    TrainConfig cfg = default_train_config(Algorithm::pcd);
    cfg.learning_rate = 0.002;
    cfg.weight_decay = 0.0;
    CapRbmParams p = dm.params;
    Rng train_rng(8);
    PersistentChains chains = init_persistent_chains(p, 500, train_rng);
    int agree = 0, total = 0;
    for (int step = 0; step < 120; ++step) {
        const CapRbmParams before = p;
        const StepReport rep = pcd_update(p, batch, cfg, chains, train_rng);
        CHECK(chains.visible.batch() == 500);
        if (step < 20) continue;
        const auto ex = oracle::exact_stats({before, 32}, data);
        const Eigen::VectorXd exact = flatten(polar_gradients(before, ex.positive, ex.negative));
        const Eigen::VectorXd est = flatten(polar_gradients(before, rep.positive, rep.negative));
        agree += exact.dot(est) > 0.0;
        ++total;
    }
    CHECK(agree > 0.9 * total);
}

TEST_CASE("pcd determinism and chain checks") {
    Rng rng(9);
    const CapRbmParams p0 = random_caprbm(4, 3, rng);
    const Eigen::MatrixXcd batch = to_matrix({grid_state(4, 16, rng), grid_state(4, 16, rng)});
    TrainConfig cfg = default_train_config(Algorithm::pcd);
    CapRbmParams a = p0, b = p0;
    Rng ra(3), rb(3);
    PersistentChains ca = init_persistent_chains(a, 7, ra), cb = init_persistent_chains(b, 7, rb);
    for (int i = 0; i < 5; ++i) {
        pcd_update(a, batch, cfg, ca, ra);
        pcd_update(b, batch, cfg, cb, rb);
    }
    CHECK(a.weights == b.weights);
    CHECK(ca.visible.z == cb.visible.z);
    PersistentChains wrong{kernels::random_activity(3, 7, 1)};
    CHECK_THROWS_AS(pcd_update(a, batch, cfg, wrong, ra), ShapeError);
    CHECK_THROWS_AS(init_persistent_chains(a, 0, ra), DomainError);
}

TEST_CASE("weight decay shrinks magnitudes without turning phases") {
    Rng rng(10);
    CapRbmParams p = random_caprbm(4, 3, rng);
    const CapRbmParams p0 = p;
    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.weight_decay = 0.5;
    apply_update(p, rect_gradients(zero_stats(4, 3), zero_stats(4, 3)), cfg);
    for (Eigen::Index j = 0; j < 4; ++j)
        for (Eigen::Index k = 0; k < 3; ++k) {
            CHECK(std::abs(p.weights(j, k)) == doctest::Approx(0.95 * std::abs(p0.weights(j, k))));
            CHECK(std::abs(angle_diff(std::arg(p.weights(j, k)), std::arg(p0.weights(j, k)))) < 1e-12);
            CHECK(p.amp_coupling(j, k) == doctest::Approx(0.95 * p0.amp_coupling(j, k)));
        }
    CHECK(p.visible_bias == p0.visible_bias);
    cfg.clamp_amp_coupling = true;
    apply_update(p, rect_gradients(zero_stats(4, 3), zero_stats(4, 3)), cfg);
    CHECK(p.amp_coupling.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("train config validation and defaults") {
    CHECK(default_train_config(Algorithm::cd1).weight_decay == 0.0);
    CHECK(default_train_config(Algorithm::pcd).weight_decay == 1e-4);
    CHECK(default_train_config(Algorithm::cd1).learning_rate == 0.01);
    CHECK(default_train_config(Algorithm::cd1).batch_size == 50);
    TrainConfig c;
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = {};
    c.learning_rate = -1.0;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = {};
    c.weight_decay = -0.1;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = {};
    c.epochs = -1;
    CHECK_THROWS_AS(c.validate(), DomainError);

    const ComplexDataset ds = small_dataset(20, 1);
    c = {};
    c.batch_size = 21;
    CHECK_THROWS_AS(train(init_rbm(ds, 4, 1), ds, c), DomainError);
    CHECK_THROWS_AS(train(CapRbmParams(10, 4), ds, TrainConfig{}), ShapeError);
}

TEST_CASE("train with zero epochs is the identity") {
    const ComplexDataset ds = small_dataset(30, 2);
    const CapRbmParams p0 = init_rbm(ds, 6, 3);
    TrainConfig cfg;
    cfg.epochs = 0;
    const TrainResult r = train(p0, ds, cfg);
    CHECK(r.params.weights == p0.weights);
    CHECK(r.params.visible_bias == p0.visible_bias);
    CHECK(r.log.empty());
}

TEST_CASE("train is replayable and logs in epoch order") {
    const ComplexDataset ds = small_dataset(200, 4);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 20;
    cfg.learning_rate = 0.05;
    cfg.log_every = 4;
    for (Algorithm algo : {Algorithm::cd1, Algorithm::pcd}) {
        cfg.algorithm = algo;
        cfg.n_persistent_chains = 20;
        const TrainResult a = train(init_rbm(ds, 8, 5), ds, cfg);
        const TrainResult b = train(init_rbm(ds, 8, 5), ds, cfg);
        CHECK(a.params.weights == b.params.weights);
        REQUIRE(a.log.size() == b.log.size());
        int prev_epoch = 0;
        for (std::size_t i = 0; i < a.log.size(); ++i) {
            CHECK(a.log[i].epoch >= prev_epoch);
            prev_epoch = a.log[i].epoch;
            CHECK(a.log[i].value == b.log[i].value);
            CHECK(std::isfinite(a.log[i].value));
        }
        CHECK(prev_epoch == 3);
    }
    std::ostringstream os;
    write_log_record(os, {2, 17, "recon_amp_cos", 0.5});
    CHECK(os.str() == "2\t17\trecon_amp_cos\t0.5\n");
}

TEST_CASE("ablation keeps the amplitude coupling at zero") {
    const ComplexDataset ds = small_dataset(100, 6);
    CapRbmParams p = init_rbm(ds, 5, 7);
    p.amp_coupling.setConstant(0.3);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 10;
    cfg.clamp_amp_coupling = true;
    CHECK(train(p, ds, cfg).params.amp_coupling.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("training improves one-step reconstruction on small bars") {
    const ComplexDataset ds = small_dataset(1000, 8);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.batch_size = 20;
    cfg.learning_rate = 0.05;
    const TrainResult r = train(init_rbm(ds, 16, 9), ds, cfg);
    double first = 0.0, last = 0.0;
    for (const auto& rec : r.log)
        if (rec.metric == "recon_amp_cos") (rec.epoch == 1 ? first : last) = rec.value;
    CHECK(last >= first);
    CHECK(last > 0.8);
}

TEST_CASE("init_rbm") {
    const ComplexDataset ds = small_dataset(500, 10);
    const CapRbmParams p = init_rbm(ds, 12, 11);
    CHECK(p.n_visible() == 64);
    CHECK(p.n_hidden() == 12);
    CHECK(p.amp_coupling.cwiseAbs().maxCoeff() == 0.0);
    CHECK(p.hidden_bias.cwiseAbs().maxCoeff() == 0.0);
    const double sd = std::sqrt(p.weights.real().array().square().mean());
    CHECK(sd == doctest::Approx(0.01).epsilon(0.15));
    const Eigen::VectorXd on = ds.samples.cwiseAbs().rowwise().mean();
    for (Eigen::Index j = 0; j < 64; ++j) {
        const double q = std::clamp(on(j), 0.01, 0.99);
        CHECK(logistic(-p.visible_bias(j)) == doctest::Approx(q));
    }
}

TEST_CASE("mean_amp_cosine") {
    Eigen::MatrixXcd d(2, 3);
    d << 1.0, 0.0, 1.0, 0.0, 0.0, 1.0;
    Eigen::MatrixXd a(2, 3);
    a << 2.0, 0.0, 0.0, 0.0, 0.0, 1.0;
    // Columns: parallel (1), both zero (1), orthogonal-ish (cos 45°).
    CHECK(mean_amp_cosine(d, a) == doctest::Approx((1.0 + 1.0 + std::sqrt(0.5)) / 3.0));
    a(0, 1) = 1.0;
    CHECK(mean_amp_cosine(d, a) == doctest::Approx((1.0 + 0.0 + std::sqrt(0.5)) / 3.0));
    CHECK_THROWS_AS(mean_amp_cosine(d, Eigen::MatrixXd(2, 2)), ShapeError);
}
