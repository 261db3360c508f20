#include "capbm/learning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "capbm/error.hpp"
#include "capbm/sampler.hpp"

namespace capbm {

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw DomainError("TrainConfig: learning_rate must be finite and >= 0");
    if (epochs < 0) throw DomainError("TrainConfig: epochs must be >= 0");
    if (batch_size <= 0) throw DomainError("TrainConfig: batch_size must be positive");
    if (!(weight_decay >= 0.0)) throw DomainError("TrainConfig: weight_decay must be >= 0");
    if (n_persistent_chains <= 0) throw DomainError("TrainConfig: n_persistent_chains must be positive");
    if (learning_rate * weight_decay >= 1.0)
        throw DomainError("TrainConfig: learning_rate * weight_decay must be < 1");
}

TrainConfig default_train_config(Algorithm algorithm) {
    TrainConfig cfg;
    cfg.algorithm = algorithm;
    if (algorithm == Algorithm::pcd) cfg.weight_decay = 1e-4;
    return cfg;
}

GradientStats collect_stats(const kernels::Activity& visible, const kernels::Activity& hidden) {
    return kernels::omp::collect_stats(visible, hidden);
}

PolarGradients polar_gradients(const CapRbmParams& params, const GradientStats& positive,
                               const GradientStats& negative) {
    params.validate();
    const auto nv = params.weights.rows(), nh = params.weights.cols();
    for (const GradientStats* s : {&positive, &negative})
        if (s->pair_complex.rows() != nv || s->pair_complex.cols() != nh || s->pair_amp.rows() != nv ||
            s->pair_amp.cols() != nh || s->visible_amp.size() != nv || s->hidden_amp.size() != nh)
            throw ShapeError("polar_gradients: statistics do not match the model");

    PolarGradients g{Eigen::MatrixXd(nv, nh), Eigen::MatrixXd(nv, nh),
                     positive.pair_amp - negative.pair_amp,
                     negative.visible_amp - positive.visible_amp,
                     negative.hidden_amp - positive.hidden_amp};
    for (Eigen::Index j = 0; j < nv; ++j)
        for (Eigen::Index k = 0; k < nh; ++k) {
            const cplx w = params.weights(j, k);
            const double b = std::abs(w);
            const cplx rot = b > 0.0 ? w / b : cplx{1.0, 0.0};
            // ⟨|v||h| e^{i(θ + φ_h − φ_v)}⟩ = e^{iθ} ⟨conj(v) h⟩ = e^{iθ} conj(pair_complex)
            const cplx pos = rot * std::conj(positive.pair_complex(j, k));
            const cplx neg = rot * std::conj(negative.pair_complex(j, k));
            g.modulus(j, k) = pos.real() - neg.real();
            g.phase(j, k) = b * (neg.imag() - pos.imag());
        }
    return g;
}

RectGradients rect_gradients(const GradientStats& positive, const GradientStats& negative) {
    return {positive.pair_complex - negative.pair_complex, positive.pair_amp - negative.pair_amp,
            negative.visible_amp - positive.visible_amp, negative.hidden_amp - positive.hidden_amp};
}

void apply_update(CapRbmParams& params, const RectGradients& grad, const TrainConfig& cfg) {
    const double lr = cfg.learning_rate;
    const double shrink = 1.0 - lr * cfg.weight_decay;
    params.weights = shrink * params.weights + lr * grad.weights;
    if (cfg.clamp_amp_coupling)
        params.amp_coupling.setZero();
    else
        params.amp_coupling = shrink * params.amp_coupling + lr * grad.amp_coupling;
    params.visible_bias += lr * grad.visible_bias;
    params.hidden_bias += lr * grad.hidden_bias;
}

double mean_amp_cosine(const Eigen::MatrixXcd& data, const Eigen::MatrixXd& amp) {
    if (data.rows() != amp.rows() || data.cols() != amp.cols() || data.cols() == 0)
        throw ShapeError("mean_amp_cosine: shape mismatch");
    double total = 0.0;
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
        const Eigen::VectorXd d = data.col(c).cwiseAbs();
        const double nd = d.norm(), nr = amp.col(c).norm();
        if (nd == 0.0 && nr == 0.0)
            total += 1.0;
        else if (nd > 0.0 && nr > 0.0)
            total += d.dot(amp.col(c)) / (nd * nr);
    }
    return total / static_cast<double>(data.cols());
}

namespace {

struct Phase {
    StepReport report;
    kernels::Activity negative_visible;
};

// Shared by CD-1 and PCD; only the negative-phase starting field differs.
Phase contrastive_step(CapRbmParams& params, const kernels::Activity& data,
                       const kernels::Field& data_hidden_field,
                       const kernels::Field& negative_start_field, bool negative_from_data,
                       const TrainConfig& cfg, Rng& rng) {
    using namespace kernels;
    Phase out;
    const Activity h_data = omp::rate(data_hidden_field, params.hidden_bias);
    out.report.positive = omp::collect_stats(data, h_data);

    const Activity h0 = omp::sample(negative_start_field, params.hidden_bias, rng.next_u64());
    const Field vf = omp::visible_field(params, h0);
    out.negative_visible = omp::sample(vf, params.visible_bias, rng.next_u64());
    const Activity h1 = omp::rate(omp::hidden_field(params, out.negative_visible), params.hidden_bias);
    out.report.negative = omp::collect_stats(out.negative_visible, h1);

    if (negative_from_data)
        out.report.recon_amp_cos = mean_amp_cosine(data.z, omp::rate(vf, params.visible_bias).amp);
    else
        out.report.recon_amp_cos = std::nan("");

    apply_update(params, rect_gradients(out.report.positive, out.report.negative), cfg);
    return out;
}

void check_batch(const CapRbmParams& params, const Eigen::MatrixXcd& batch) {
    params.validate();
    if (batch.cols() == 0) throw DomainError("contrastive update: empty batch");
    if (batch.rows() != static_cast<Eigen::Index>(params.n_visible()))
        throw ShapeError("contrastive update: batch has " + std::to_string(batch.rows()) +
                         " units, model has " + std::to_string(params.n_visible()) + " visible units");
}

}  // namespace

StepReport cd1_update(CapRbmParams& params, const Eigen::MatrixXcd& batch, const TrainConfig& cfg, Rng& rng) {
    check_batch(params, batch);
    const kernels::Activity data = kernels::observe(batch);
    const kernels::Field hf = kernels::omp::hidden_field(params, data);
    return contrastive_step(params, data, hf, hf, true, cfg, rng).report;
}

StepReport pcd_update(CapRbmParams& params, const Eigen::MatrixXcd& batch, const TrainConfig& cfg,
                      PersistentChains& chains, Rng& rng) {
    check_batch(params, batch);
    if (chains.visible.units() != static_cast<Eigen::Index>(params.n_visible()) || chains.visible.batch() == 0)
        throw ShapeError("pcd_update: persistent chains do not match the model");
    const kernels::Activity data = kernels::observe(batch);
    const kernels::Field hf = kernels::omp::hidden_field(params, data);
    const kernels::Field chain_field = kernels::omp::hidden_field(params, chains.visible);
    Phase p = contrastive_step(params, data, hf, chain_field, false, cfg, rng);
    chains.visible = std::move(p.negative_visible);
    return p.report;
}

PersistentChains init_persistent_chains(const CapRbmParams& params, int n_chains, Rng& rng) {
    if (n_chains <= 0) throw DomainError("init_persistent_chains: need at least one chain");
    return {kernels::random_activity(static_cast<Eigen::Index>(params.n_visible()), n_chains, rng.next_u64())};
}

void write_log_record(std::ostream& out, const LogRecord& rec) {
    out << rec.epoch << '\t' << rec.batch << '\t' << rec.metric << '\t';
    const auto old = out.precision(10);
    out << rec.value << '\n';
    out.precision(old);
}

CapRbmParams init_rbm(const ComplexDataset& data, std::size_t n_hidden, std::uint64_t seed, double init_scale) {
    data.validate();
    const std::size_t nv = data.n_units();
    CapRbmParams p(nv, n_hidden);
    Rng rng(seed);
    // Gaussian components via Box–Muller on the project generator.
    for (Eigen::Index k = 0; k < p.weights.cols(); ++k)
        for (Eigen::Index j = 0; j < p.weights.rows(); ++j) {
            const double r = std::sqrt(-2.0 * std::log(rng.uniform_open()));
            const double t = two_pi * rng.uniform();
            p.weights(j, k) = init_scale * cplx{r * std::cos(t), r * std::sin(t)};
        }
    if (data.n_samples() > 0) {
        const Eigen::VectorXd on = data.samples.cwiseAbs().rowwise().mean();
        for (std::size_t j = 0; j < nv; ++j) {
            const double q = std::clamp(on(static_cast<Eigen::Index>(j)), 0.01, 0.99);
            p.visible_bias(static_cast<Eigen::Index>(j)) = -std::log(q / (1.0 - q));
        }
    }
    return p;
}

TrainResult train(CapRbmParams params, const ComplexDataset& data, const TrainConfig& cfg,
                  const TrainCallbacks& callbacks) {
    cfg.validate();
    params.validate();
    data.validate();
    if (data.n_units() != params.n_visible())
        throw ShapeError("train: dataset has " + std::to_string(data.n_units()) + " units, model has " +
                         std::to_string(params.n_visible()) + " visible units");
    if (cfg.epochs > 0 && static_cast<std::size_t>(cfg.batch_size) > data.n_samples())
        throw DomainError("train: batch_size exceeds dataset size");
    if (cfg.clamp_amp_coupling) params.amp_coupling.setZero();

    TrainResult result;
    auto emit = [&](LogRecord rec) {
        if (callbacks.on_record) callbacks.on_record(rec);
        result.log.push_back(std::move(rec));
    };

    Rng rng(cfg.seed);
    Rng shuffle_rng = rng.split(0);
    Rng monitor_rng = rng.split(1);
    PersistentChains chains;
    if (cfg.algorithm == Algorithm::pcd) chains = init_persistent_chains(params, cfg.n_persistent_chains, rng);

    const std::size_t n = data.n_samples();
    const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);
    const std::size_t n_batches = (n + bs - 1) / bs;
    std::vector<std::size_t> monitor_idx(std::min<std::size_t>(n, 200));
    std::iota(monitor_idx.begin(), monitor_idx.end(), std::size_t{0});
    const Eigen::MatrixXcd monitor = data.gather(monitor_idx);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);
        double cos_sum = 0.0;
        std::size_t cos_count = 0;
        for (std::size_t b = 0; b < n_batches; ++b) {
            const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(b * bs),
                                               order.begin() + static_cast<std::ptrdiff_t>(std::min(n, (b + 1) * bs)));
            const Eigen::MatrixXcd batch = data.gather(idx);
            const StepReport rep = cfg.algorithm == Algorithm::cd1 ? cd1_update(params, batch, cfg, rng)
                                                                   : pcd_update(params, batch, cfg, chains, rng);
            if (!std::isnan(rep.recon_amp_cos)) {
                cos_sum += rep.recon_amp_cos;
                ++cos_count;
            }
            if (cfg.log_every > 0 && (b + 1) % static_cast<std::size_t>(cfg.log_every) == 0 && cos_count > 0)
                emit({epoch, static_cast<int>(b + 1), "train_recon_amp_cos", cos_sum / static_cast<double>(cos_count)});
        }
        const int last = static_cast<int>(n_batches);
        if (cos_count > 0) emit({epoch, last, "train_recon_amp_cos", cos_sum / static_cast<double>(cos_count)});
        const kernels::Activity rec = rbm_reconstruct_batch(params, monitor, 1, monitor_rng);
        emit({epoch, last, "recon_amp_cos", mean_amp_cosine(monitor, rec.amp)});
        double fe = 0.0;
        for (Eigen::Index c = 0; c < monitor.cols(); ++c) {
            const Eigen::VectorXcd col = monitor.col(c);
            fe += free_energy(params, {col.data(), static_cast<std::size_t>(col.size())});
        }
        emit({epoch, last, "free_energy", fe / static_cast<double>(monitor.cols())});
        if (callbacks.on_epoch_end) callbacks.on_epoch_end(epoch, params);
    }
    result.params = std::move(params);
    return result;
}

}  // namespace capbm
