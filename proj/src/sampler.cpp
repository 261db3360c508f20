#include "capbm/sampler.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "capbm/error.hpp"
#include "capbm/special.hpp"

namespace capbm {

void gibbs_update_unit(const CapBmParams& params, ChainState& chain, std::size_t j,
                       const GibbsOptions& opts) {
    const InputSums s = input_sums(params, chain.state, j);
    const bool active = opts.clamp_amplitudes || chain.rng.uniform() < amp_prob(s, params.bias(j));
    if (!active) {
        chain.state.amps[j] = 0;
        return;
    }
    const PhaseConditional pc = phase_conditional(s);
    chain.state.set(j, true, sample_von_mises(pc.mean, pc.concentration, chain.rng).rad());
}

void gibbs_sweep(const CapBmParams& params, ChainState& chain, const GibbsOptions& opts) {
    const std::size_t n = params.size();
    if (chain.state.size() != n) throw ShapeError("gibbs_sweep: chain/model size mismatch");
    if (opts.order == SweepOrder::fixed) {
        for (std::size_t j = 0; j < n; ++j) gibbs_update_unit(params, chain, j, opts);
    } else {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[chain.rng.below(i)]);
        for (std::size_t j : order) gibbs_update_unit(params, chain, j, opts);
    }
    ++chain.sweep_count;
}

void run_chain(const CapBmParams& params, ChainState& chain, std::uint64_t n_sweeps,
               const GibbsOptions& opts) {
    for (std::uint64_t i = 0; i < n_sweeps; ++i) gibbs_sweep(params, chain, opts);
}

UnitRate unit_rate(const InputSums& s, double bias) {
    const double p = amp_prob(s, bias);
    return {std::polar(p * bessel_ratio(s.modulus), s.argument.rad()), p};
}

namespace {

kernels::Activity to_column(const PhasorState& s) {
    const auto n = static_cast<Eigen::Index>(s.size());
    kernels::Activity a{Eigen::MatrixXcd(n, 1), Eigen::MatrixXd(n, 1)};
    for (Eigen::Index j = 0; j < n; ++j) {
        a.z(j, 0) = s.value(static_cast<std::size_t>(j));
        a.amp(j, 0) = s.amps[static_cast<std::size_t>(j)];
    }
    return a;
}

PhasorState from_column(const kernels::Activity& a) {
    PhasorState s(static_cast<std::size_t>(a.units()));
    for (Eigen::Index j = 0; j < a.units(); ++j) {
        const bool on = a.amp(j, 0) > 0.5;
        s.set(static_cast<std::size_t>(j), on, on ? std::arg(a.z(j, 0)) : 0.0);
    }
    return s;
}

}  // namespace

PhasorState rbm_sample_layer(const CapRbmParams& params, const PhasorState& given,
                             Direction direction, Rng& rng) {
    params.validate();
    const kernels::Activity src = to_column(given);
    if (direction == Direction::visible_to_hidden) {
        if (given.size() != params.n_visible())
            throw ShapeError("rbm_sample_layer: visible state has wrong length");
        return from_column(kernels::omp::sample(kernels::omp::hidden_field(params, src),
                                                params.hidden_bias, rng.next_u64()));
    }
    if (given.size() != params.n_hidden())
        throw ShapeError("rbm_sample_layer: hidden state has wrong length");
    return from_column(kernels::omp::sample(kernels::omp::visible_field(params, src),
                                            params.visible_bias, rng.next_u64()));
}

std::vector<kernels::Activity> rbm_visible_trajectory(const CapRbmParams& params,
                                                      const kernels::Activity& start,
                                                      const std::vector<int>& checkpoints,
                                                      Rng& rng) {
    params.validate();
    if (start.units() != static_cast<Eigen::Index>(params.n_visible()))
        throw ShapeError("rbm_visible_trajectory: start state has wrong number of visible units");
    if (!std::is_sorted(checkpoints.begin(), checkpoints.end()) ||
        (!checkpoints.empty() && checkpoints.front() < 0))
        throw DomainError("rbm_visible_trajectory: checkpoints must be ascending and >= 0");

    std::vector<kernels::Activity> out;
    out.reserve(checkpoints.size());
    auto next = checkpoints.begin();
    while (next != checkpoints.end() && *next == 0) {
        out.push_back(start);
        ++next;
    }
    kernels::Activity v = start;
    for (int step = 1; next != checkpoints.end(); ++step) {
        const kernels::Activity h = kernels::omp::sample(kernels::omp::hidden_field(params, v),
                                                         params.hidden_bias, rng.next_u64());
        const kernels::Field vf = kernels::omp::visible_field(params, h);
        bool recorded = false;
        while (next != checkpoints.end() && *next == step) {
            if (!recorded) out.push_back(kernels::omp::rate(vf, params.visible_bias));
            else out.push_back(out.back());
            recorded = true;
            ++next;
        }
        if (next == checkpoints.end()) break;
        v = kernels::omp::sample(vf, params.visible_bias, rng.next_u64());
    }
    return out;
}

kernels::Activity rbm_reconstruct_batch(const CapRbmParams& params, const Eigen::MatrixXcd& v0,
                                        int n_alternations, Rng& rng) {
    if (n_alternations < 0) throw DomainError("rbm_reconstruct: negative step count");
    return rbm_visible_trajectory(params, kernels::observe(v0), {n_alternations}, rng).front();
}

Rate rbm_reconstruct(const CapRbmParams& params, std::span<const cplx> v0, int n_alternations,
                     Rng& rng) {
    Eigen::MatrixXcd col(static_cast<Eigen::Index>(v0.size()), 1);
    for (std::size_t j = 0; j < v0.size(); ++j) col(static_cast<Eigen::Index>(j), 0) = v0[j];
    const kernels::Activity a = rbm_reconstruct_batch(params, col, n_alternations, rng);
    Rate r;
    r.complex_mean.resize(v0.size());
    r.amp_mean.resize(v0.size());
    for (std::size_t j = 0; j < v0.size(); ++j) {
        r.complex_mean[j] = a.z(static_cast<Eigen::Index>(j), 0);
        r.amp_mean[j] = a.amp(static_cast<Eigen::Index>(j), 0);
    }
    return r;
}

}  // namespace capbm
