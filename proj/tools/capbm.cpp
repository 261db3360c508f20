// capbm: command-line front end for data generation, training, reconstruction,
// sampling and the verification suite.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "capbm/capm_io.hpp"
#include "capbm/checks.hpp"
#include "capbm/data.hpp"
#include "capbm/error.hpp"
#include "capbm/kernels.hpp"
#include "capbm/learning.hpp"
#include "capbm/sampler.hpp"

namespace fs = std::filesystem;
using namespace capbm;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// String <-> value conversions shared by config files and sidecars.
template <class T>
T parse_value(const std::string& key, const std::string& text);

template <>
std::string parse_value(const std::string&, const std::string& text) { return text; }

template <>
double parse_value(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || text.empty()) throw ConfigError(key + ": not a number: '" + text + "'");
    return v;
}

template <>
std::int64_t parse_value(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    std::int64_t v = 0;
    try {
        v = std::stoll(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || text.empty()) throw ConfigError(key + ": not an integer: '" + text + "'");
    return v;
}

template <>
int parse_value(const std::string& key, const std::string& text) {
    const std::int64_t v = parse_value<std::int64_t>(key, text);
    if (v < INT32_MIN || v > INT32_MAX) throw ConfigError(key + ": out of range");
    return static_cast<int>(v);
}

template <>
std::uint64_t parse_value(const std::string& key, const std::string& text) {
    if (text.empty() || text[0] == '-') throw ConfigError(key + ": not a non-negative integer: '" + text + "'");
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
        v = std::stoull(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size()) throw ConfigError(key + ": not a non-negative integer: '" + text + "'");
    return v;
}

template <>
bool parse_value(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

template <>
std::vector<int> parse_value(const std::string& key, const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_value<int>(key, trim(item)));
    return out;
}

std::string format_value(const std::string& v) { return v; }
std::string format_value(bool v) { return v ? "true" : "false"; }
std::string format_value(int v) { return std::to_string(v); }
std::string format_value(std::uint64_t v) { return std::to_string(v); }
std::string format_value(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}
std::string format_value(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

/// Resolves settings with precedence flag > config file > default and keeps
/// the resolved values for the sidecar.
class Settings {
public:
    explicit Settings(const std::string& config_path) {
        if (config_path.empty()) return;
        std::ifstream in(config_path);
        if (!in) throw IoError("cannot read config file " + config_path);
        std::string line;
        for (int lineno = 1; std::getline(in, line); ++lineno) {
            if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(config_path + ":" + std::to_string(lineno) + ": expected key=value");
            const std::string key = trim(line.substr(0, eq));
            if (file_.count(key)) throw ConfigError(config_path + ": duplicate key '" + key + "'");
            file_[key] = trim(line.substr(eq + 1));
        }
    }

    template <class T>
    T get(const std::string& key, const std::optional<T>& flag, const T& fallback) {
        T v = fallback;
        if (flag)
            v = *flag;
        else if (auto it = file_.find(key); it != file_.end())
            v = parse_value<T>(key, it->second);
        used_.insert(key);
        resolved_.emplace_back(key, format_value(v));
        return v;
    }

    /// True when the key was given on the command line or in the file.
    template <class T>
    bool given(const std::string& key, const std::optional<T>& flag) const {
        return flag.has_value() || file_.count(key) != 0;
    }

    void reject_unknown() const {
        for (const auto& [key, value] : file_)
            if (!used_.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }

    void write_sidecar(const fs::path& path) const {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write " + path.string());
        for (const auto& [key, value] : resolved_) out << key << '=' << value << '\n';
    }

private:
    std::map<std::string, std::string> file_;
    std::set<std::string> used_;
    std::vector<std::pair<std::string, std::string>> resolved_;
};

fs::path sidecar_for(const std::string& out) { return fs::path(out + ".config"); }

Algorithm parse_algorithm(const std::string& s) {
    if (s == "cd1") return Algorithm::cd1;
    if (s == "pcd") return Algorithm::pcd;
    throw ConfigError("algo must be cd1 or pcd, got '" + s + "'");
}

void ensure_dir(const std::string& dir) {
    if (dir.empty()) return;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

std::string step_file(const std::string& dir, int step) {
    std::ostringstream name;
    name << "step_" << std::setw(4) << std::setfill('0') << step << ".ppm";
    return (fs::path(dir) / name.str()).string();
}

void render_steps(const std::vector<kernels::Activity>& frames, const std::vector<int>& steps,
                  const std::string& dir, std::uint32_t width, std::uint32_t height, double global_phase) {
    ensure_dir(dir);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        std::vector<Eigen::VectorXcd> tiles;
        for (Eigen::Index c = 0; c < frames[i].batch(); ++c) tiles.emplace_back(frames[i].z.col(c));
        const int per_row = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(tiles.size()))));
        render_complex_grid(tiles, per_row, width, height, step_file(dir, steps[i]), global_phase);
    }
}

std::vector<int> sorted_steps(std::vector<int> steps) {
    if (steps.empty()) throw ConfigError("steps: need at least one step count");
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
    if (steps.front() < 0) throw ConfigError("steps: step counts must be >= 0");
    return steps;
}

// ---------------------------------------------------------------------------

struct GenBarsArgs {
    std::string config;
    std::optional<std::uint64_t> n, seed;
    std::optional<std::string> out;
};

int run_gen_bars(const GenBarsArgs& a) {
    Settings s(a.config);
    const auto n = s.get<std::uint64_t>("n", a.n, 0);
    BarsConfig cfg;
    cfg.seed = s.get<std::uint64_t>("seed", a.seed, 1);
    const auto out = s.get<std::string>("out", a.out, "");
    s.reject_unknown();
    if (n == 0) throw ConfigError("gen-bars: --n must be positive");
    if (out.empty()) throw ConfigError("gen-bars: --out is required");

    const ComplexDataset ds = gen_bars(cfg, n);
    save_dataset(out, ds);
    s.write_sidecar(sidecar_for(out));
    std::cout << "samples=" << ds.n_samples() << " units=" << ds.n_units() << " width=" << ds.width
              << " height=" << ds.height << " mean_on_fraction=" << ds.samples.cwiseAbs().mean() << '\n';
    return 0;
}

struct TrainArgs {
    std::string config;
    std::optional<std::string> data, out, algo, init, log;
    std::optional<std::uint64_t> hidden, seed;
    std::optional<int> epochs, batch_size, chains, log_every;
    std::optional<double> lr, weight_decay, init_scale;
    bool no_amp_coupling_flag = false;
};

int run_train(const TrainArgs& a) {
    Settings s(a.config);
    const auto data_path = s.get<std::string>("data", a.data, "");
    const auto out = s.get<std::string>("out", a.out, "");
    const auto init_path = s.get<std::string>("init", a.init, "");
    const auto hidden = s.get<std::uint64_t>("hidden", a.hidden, 200);
    const Algorithm algo = parse_algorithm(s.get<std::string>("algo", a.algo, "cd1"));
    TrainConfig cfg = default_train_config(algo);
    cfg.epochs = s.get<int>("epochs", a.epochs, cfg.epochs);
    cfg.learning_rate = s.get<double>("learning_rate", a.lr, cfg.learning_rate);
    cfg.batch_size = s.get<int>("batch_size", a.batch_size, cfg.batch_size);
    cfg.weight_decay = s.get<double>("weight_decay", a.weight_decay, cfg.weight_decay);
    if (algo == Algorithm::cd1 && s.given("n_persistent_chains", a.chains))
        throw ConfigError("n_persistent_chains only applies to algo=pcd");
    if (algo == Algorithm::pcd) cfg.n_persistent_chains = s.get<int>("n_persistent_chains", a.chains, cfg.batch_size);
    cfg.seed = s.get<std::uint64_t>("seed", a.seed, cfg.seed);
    const std::optional<bool> no_j = a.no_amp_coupling_flag ? std::optional<bool>(true) : std::nullopt;
    cfg.clamp_amp_coupling = s.get<bool>("no_amp_coupling", no_j, false);
    cfg.log_every = s.get<int>("log_every", a.log_every, 0);
    const double init_scale = s.get<double>("init_scale", a.init_scale, 0.01);
    const auto log_path = s.get<std::string>("log", a.log, out.empty() ? "" : out + ".log");
    s.reject_unknown();
    if (data_path.empty()) throw ConfigError("train: --data is required");
    if (out.empty()) throw ConfigError("train: --out is required");
    if (!init_path.empty() && (a.hidden || s.given("hidden", a.hidden)))
        throw ConfigError("train: hidden size comes from --init; do not also set it");
    cfg.validate();

    const ComplexDataset data = load_dataset(data_path);
    CapRbmParams params = init_path.empty() ? init_rbm(data, hidden, cfg.seed, init_scale) : load_rbm(init_path);
    if (params.n_visible() != data.n_units())
        throw ShapeError("train: dataset has " + std::to_string(data.n_units()) + " units, model has " +
                         std::to_string(params.n_visible()) + " visible units");

    std::ofstream log(log_path);
    if (!log) throw IoError("cannot write " + log_path);
    TrainCallbacks cb;
    cb.on_record = [&](const LogRecord& r) {
        write_log_record(log, r);
        log.flush();
        if (r.metric == "recon_amp_cos") std::cout << "epoch " << r.epoch << " recon_amp_cos " << r.value << '\n';
    };
    const TrainResult result = train(std::move(params), data, cfg, cb);
    save_params(out, result.params);
    s.write_sidecar(sidecar_for(out));
    return 0;
}

struct ReconstructArgs {
    std::string config;
    std::optional<std::string> model, data, render_dir, steps;
    std::optional<std::uint64_t> n, first, seed;
    std::optional<double> global_phase;
};

int run_reconstruct(const ReconstructArgs& a) {
    Settings s(a.config);
    const auto model_path = s.get<std::string>("model", a.model, "");
    const auto data_path = s.get<std::string>("data", a.data, "");
    const auto steps_text = a.steps ? std::optional<std::vector<int>>(parse_value<std::vector<int>>("steps", *a.steps))
                                    : std::nullopt;
    const auto steps = sorted_steps(s.get<std::vector<int>>("steps", steps_text, {1, 5, 20, 100}));
    const auto n = s.get<std::uint64_t>("n", a.n, 16);
    const auto first = s.get<std::uint64_t>("first", a.first, 0);
    const auto seed = s.get<std::uint64_t>("seed", a.seed, 1);
    const auto global_phase = s.get<double>("global_phase", a.global_phase, 0.0);
    const auto dir = s.get<std::string>("render_dir", a.render_dir, "");
    s.reject_unknown();
    if (model_path.empty() || data_path.empty()) throw ConfigError("reconstruct: --model and --data are required");

    const CapRbmParams params = load_rbm(model_path);
    const ComplexDataset data = load_dataset(data_path);
    if (data.n_units() != params.n_visible())
        throw ShapeError("reconstruct: dataset has " + std::to_string(data.n_units()) + " units, model has " +
                         std::to_string(params.n_visible()) + " visible units");
    if (n == 0 || first + n > data.n_samples()) throw DomainError("reconstruct: sample range outside dataset");
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = first + i;
    const Eigen::MatrixXcd v0 = data.gather(idx);

    Rng rng(seed);
    const auto frames = rbm_visible_trajectory(params, kernels::observe(v0), steps, rng);
    for (std::size_t i = 0; i < steps.size(); ++i)
        std::cout << "step " << steps[i] << " mean_amp_cos " << mean_amp_cosine(v0, frames[i].amp) << '\n';
    if (!dir.empty()) {
        if (!data.shaped()) throw ShapeError("reconstruct: rendering needs a dataset with an image shape");
        render_steps(frames, steps, dir, data.width, data.height, global_phase);
        s.write_sidecar(fs::path(dir) / "reconstruct.config");
    }
    return 0;
}

struct SampleArgs {
    std::string config;
    std::optional<std::string> model, render_dir, steps;
    std::optional<std::uint64_t> n, seed, width, height;
    std::optional<double> global_phase;
};

int run_sample(const SampleArgs& a) {
    Settings s(a.config);
    const auto model_path = s.get<std::string>("model", a.model, "");
    const auto steps_text = a.steps ? std::optional<std::vector<int>>(parse_value<std::vector<int>>("steps", *a.steps))
                                    : std::nullopt;
    const auto steps = sorted_steps(s.get<std::vector<int>>("steps", steps_text, {1, 5, 20, 100}));
    const auto n = s.get<std::uint64_t>("n", a.n, 16);
    const auto seed = s.get<std::uint64_t>("seed", a.seed, 1);
    const auto global_phase = s.get<double>("global_phase", a.global_phase, 0.0);
    const auto dir = s.get<std::string>("render_dir", a.render_dir, "");
    if (model_path.empty()) throw ConfigError("sample: --model is required");
    const CapRbmParams params = load_rbm(model_path);
    const auto side = static_cast<std::uint64_t>(std::llround(std::sqrt(static_cast<double>(params.n_visible()))));
    const std::uint64_t default_w = side * side == params.n_visible() ? side : 0;
    const auto width = s.get<std::uint64_t>("width", a.width, default_w);
    const auto height = s.get<std::uint64_t>("height", a.height, default_w);
    s.reject_unknown();
    if (n == 0) throw DomainError("sample: --n must be positive");

    Rng rng(seed);
    const auto start = kernels::random_activity(static_cast<Eigen::Index>(params.n_visible()),
                                                static_cast<Eigen::Index>(n), rng.next_u64());
    const auto frames = rbm_visible_trajectory(params, start, steps, rng);
    for (std::size_t i = 0; i < steps.size(); ++i)
        std::cout << "step " << steps[i] << " mean_amp_rate " << frames[i].amp.mean() << '\n';
    if (!dir.empty()) {
        if (width * height != params.n_visible())
            throw ShapeError("sample: --width x --height must equal the visible layer size");
        render_steps(frames, steps, dir, static_cast<std::uint32_t>(width), static_cast<std::uint32_t>(height),
                     global_phase);
        s.write_sidecar(fs::path(dir) / "sample.config");
    }
    return 0;
}

struct PrepArgs {
    std::string config;
    std::optional<std::string> data, out, bands;
    std::optional<double> cutoff;
};

int run_prep(const PrepArgs& a) {
    Settings s(a.config);
    const auto data_path = s.get<std::string>("data", a.data, "");
    const auto out = s.get<std::string>("out", a.out, "");
    const auto bands_arg = s.get<std::string>("bands", a.bands, "");
    const auto cutoff = s.get<double>("cutoff", a.cutoff, 0.15);
    s.reject_unknown();
    if (data_path.empty() || out.empty()) throw ConfigError("prep-cwt: --data and --out are required");

    std::vector<BandRange> bands;
    if (bands_arg == "two-band")
        bands = two_band_layout();
    else if (!bands_arg.empty())
        bands = load_band_partition(bands_arg);
    const ComplexDataset ds = threshold_normalize(load_dataset(data_path), cutoff, bands);
    save_dataset(out, ds);
    s.write_sidecar(sidecar_for(out));
    std::cout << "samples=" << ds.n_samples() << " units=" << ds.n_units()
              << " mean_on_fraction=" << ds.samples.cwiseAbs().mean() << '\n';
    return 0;
}

int run_check(const std::string& level, std::uint64_t seed) {
    if (level != "quick" && level != "full") throw ConfigError("check: --level must be quick or full");
    const auto results = checks::run_suite(level == "full" ? checks::Level::full : checks::Level::quick, seed);
    int failed = 0;
    for (const auto& r : results) {
        checks::print(std::cout, r);
        if (!r.pass) ++failed;
    }
    std::cout << (failed ? "FAILED " : "OK ") << results.size() - static_cast<std::size_t>(failed) << "/"
              << results.size() << " checks passed\n";
    return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Complex amplitude-phase Boltzmann machines"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Cap on worker threads (0: runtime default)")->check(CLI::NonNegativeNumber);

    GenBarsArgs gb;
    auto* gen = app.add_subcommand("gen-bars", "Generate the bars dataset");
    gen->add_option("--config", gb.config, "key=value config file");
    gen->add_option("--n", gb.n, "Number of samples");
    gen->add_option("--seed", gb.seed, "Generator seed");
    gen->add_option("--out", gb.out, "Output CPXD file");

    TrainArgs ta;
    auto* tr = app.add_subcommand("train", "Train a restricted model");
    tr->add_option("--config", ta.config, "key=value config file");
    tr->add_option("--data", ta.data, "Training CPXD file");
    tr->add_option("--hidden", ta.hidden, "Number of hidden units");
    tr->add_option("--algo", ta.algo, "cd1 or pcd");
    tr->add_option("--epochs", ta.epochs, "Training epochs");
    tr->add_flag("--no-amp-coupling", ta.no_amp_coupling_flag, "Hold the amplitude coupling J at zero");
    tr->add_option("--lr", ta.lr, "Learning rate");
    tr->add_option("--batch-size", ta.batch_size, "Minibatch size");
    tr->add_option("--weight-decay", ta.weight_decay, "Weight decay on W and J");
    tr->add_option("--chains", ta.chains, "Persistent chains (pcd)");
    tr->add_option("--seed", ta.seed, "Seed for initialization and training");
    tr->add_option("--init", ta.init, "Start from this checkpoint instead of a fresh model");
    tr->add_option("--init-scale", ta.init_scale, "Std of initial coupling components");
    tr->add_option("--log-every", ta.log_every, "Also log every this many batches");
    tr->add_option("--log", ta.log, "Training log path (default: <out>.log)");
    tr->add_option("--out", ta.out, "Output CAPM checkpoint");

    ReconstructArgs ra;
    auto* rc = app.add_subcommand("reconstruct", "Reconstruct data samples with alternating Gibbs steps");
    rc->add_option("--config", ra.config, "key=value config file");
    rc->add_option("--model", ra.model, "CAPM checkpoint");
    rc->add_option("--data", ra.data, "CPXD dataset");
    rc->add_option("--steps", ra.steps, "Comma-separated step checkpoints, e.g. 1,5,20,100");
    rc->add_option("--n", ra.n, "Number of samples");
    rc->add_option("--first", ra.first, "Index of the first sample");
    rc->add_option("--seed", ra.seed, "Sampling seed");
    rc->add_option("--global-phase", ra.global_phase, "Phase added when rendering");
    rc->add_option("--render-dir", ra.render_dir, "Directory for PPM images");

    SampleArgs sa;
    auto* sm = app.add_subcommand("sample", "Run free chains from random initial states");
    sm->add_option("--config", sa.config, "key=value config file");
    sm->add_option("--model", sa.model, "CAPM checkpoint");
    sm->add_option("--steps", sa.steps, "Comma-separated step checkpoints");
    sm->add_option("--n", sa.n, "Number of chains");
    sm->add_option("--seed", sa.seed, "Sampling seed");
    sm->add_option("--width", sa.width, "Image width");
    sm->add_option("--height", sa.height, "Image height");
    sm->add_option("--global-phase", sa.global_phase, "Phase added when rendering");
    sm->add_option("--render-dir", sa.render_dir, "Directory for PPM images");

    PrepArgs pa;
    auto* pr = app.add_subcommand("prep-cwt", "Threshold-normalize wavelet coefficients per band");
    pr->add_option("--config", pa.config, "key=value config file");
    pr->add_option("--data", pa.data, "Input CPXD file");
    pr->add_option("--out", pa.out, "Output CPXD file");
    pr->add_option("--bands", pa.bands, "Band partition file, or 'two-band'");
    pr->add_option("--cutoff", pa.cutoff, "Relative modulus cutoff");

    std::string level = "quick";
    std::uint64_t check_seed = 20240601;
    auto* ck = app.add_subcommand("check", "Run the verification suite");
    bool full_flag = false;
    auto* level_opt = ck->add_option("--level", level, "quick or full");
    ck->add_flag("--full", full_flag, "Same as --level full")->excludes(level_opt);
    ck->add_option("--seed", check_seed, "Seed for randomized checks");

    CLI11_PARSE(app, argc, argv);
    kernels::set_max_threads(threads);

    try {
        if (*gen) return run_gen_bars(gb);
        if (*tr) return run_train(ta);
        if (*rc) return run_reconstruct(ra);
        if (*sm) return run_sample(sa);
        if (*pr) return run_prep(pa);
        if (*ck) return run_check(full_flag ? "full" : level, check_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
