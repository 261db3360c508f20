#include "capbm/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "binary_io.hpp"
#include "capbm/error.hpp"
#include "capbm/model.hpp"
#include "capbm/rng.hpp"

namespace capbm {

void ComplexDataset::validate() const {
    if (shaped() && static_cast<std::size_t>(width) * height != n_units())
        throw ShapeError("ComplexDataset: width*height (" + std::to_string(width) + "*" +
                         std::to_string(height) + ") != n_units (" + std::to_string(n_units()) + ")");
    if (!samples.allFinite()) throw DomainError("ComplexDataset: non-finite entries");
}

Eigen::MatrixXcd ComplexDataset::gather(const std::vector<std::size_t>& indices) const {
    Eigen::MatrixXcd out(samples.rows(), static_cast<Eigen::Index>(indices.size()));
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= n_samples()) throw IndexError("ComplexDataset::gather: index out of range");
        out.col(static_cast<Eigen::Index>(i)) = samples.col(static_cast<Eigen::Index>(indices[i]));
    }
    return out;
}

// ---------------------------------------------------------------------------
// bars

void BarsConfig::validate() const {
    if (side <= 0 || bar_width <= 0 || min_bars <= 0 || max_bars < min_bars || phase_noise_max <= 0.0)
        throw DomainError("BarsConfig: all fields must be positive and min_bars <= max_bars");
    if (side % bar_width != 0) throw DomainError("BarsConfig: side must be a multiple of bar_width");
    if (max_bars > side / bar_width) throw DomainError("BarsConfig: more bars than slots");
}

ComplexDataset gen_bars(const BarsConfig& cfg, std::size_t n, std::vector<std::vector<Bar>>* layouts) {
    cfg.validate();
    if (n == 0) throw DomainError("gen_bars: need at least one sample");
    const int side = cfg.side;
    const int slots = side / cfg.bar_width;
    ComplexDataset ds;
    ds.width = ds.height = static_cast<std::uint32_t>(side);
    ds.samples = Eigen::MatrixXcd::Zero(side * side, static_cast<Eigen::Index>(n));
    if (layouts) layouts->assign(n, {});

    Rng rng(cfg.seed);
    std::vector<int> slot_ids(static_cast<std::size_t>(slots));
    for (std::size_t s = 0; s < n; ++s) {
        auto col = ds.samples.col(static_cast<Eigen::Index>(s));
        for (auto orient : {BarOrientation::horizontal, BarOrientation::vertical}) {
            const int count =
                cfg.min_bars + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.max_bars - cfg.min_bars + 1)));
            // Partial Fisher–Yates: the first `count` entries are a uniform draw without repetition.
            for (int i = 0; i < slots; ++i) slot_ids[static_cast<std::size_t>(i)] = i;
            for (int i = 0; i < count; ++i) {
                const int pick = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(slots - i)));
                std::swap(slot_ids[static_cast<std::size_t>(i)], slot_ids[static_cast<std::size_t>(pick)]);
            }
            for (int i = 0; i < count; ++i) {
                const int start = slot_ids[static_cast<std::size_t>(i)] * cfg.bar_width;
                const double offset = two_pi * rng.uniform();
                if (layouts) (*layouts)[s].push_back({orient, start, offset});
                for (int w = 0; w < cfg.bar_width; ++w) {
                    for (int x = 0; x < side; ++x) {
                        const double noise = cfg.phase_noise_max * rng.uniform_open();
                        const double phase = offset + two_pi * x / side + noise;
                        const int row = orient == BarOrientation::horizontal ? start + w : x;
                        const int column = orient == BarOrientation::horizontal ? x : start + w;
                        col(row * side + column) = std::polar(1.0, wrap_angle(phase));
                    }
                }
            }
        }
    }
    return ds;
}

// ---------------------------------------------------------------------------
// CPXD container

namespace {
constexpr char cpxd_magic[4] = {'C', 'P', 'X', 'D'};
}

std::vector<unsigned char> encode_dataset(const ComplexDataset& ds) {
    ds.validate();
    detail::ByteWriter w;
    w.bytes(cpxd_magic, 4);
    w.u32(cpxd_version);
    w.u32(static_cast<std::uint32_t>(ds.n_samples()));
    w.u32(static_cast<std::uint32_t>(ds.n_units()));
    w.u32(ds.width);
    w.u32(ds.height);
    for (Eigen::Index s = 0; s < ds.samples.cols(); ++s)
        for (Eigen::Index j = 0; j < ds.samples.rows(); ++j) {
            w.f64(ds.samples(j, s).real());
            w.f64(ds.samples(j, s).imag());
        }
    return w.buffer();
}

ComplexDataset decode_dataset(const std::vector<unsigned char>& bytes) {
    detail::ByteReader r(bytes, "CPXD");
    char m[4];
    r.bytes(m, 4);
    if (std::memcmp(m, cpxd_magic, 4) != 0) throw BadMagicError("CPXD: bad magic");
    const std::uint32_t version = r.u32();
    if (version != cpxd_version) throw VersionError("CPXD: unsupported version " + std::to_string(version));
    const std::uint32_t n_samples = r.u32();
    const std::uint32_t n_units = r.u32();
    ComplexDataset ds;
    ds.width = r.u32();
    ds.height = r.u32();
    if (ds.shaped() && static_cast<std::uint64_t>(ds.width) * ds.height != n_units)
        throw FormatError("CPXD: shape " + std::to_string(ds.width) + "x" + std::to_string(ds.height) +
                          " does not match " + std::to_string(n_units) + " units");
    r.need_elements(n_samples, n_units, 16);
    ds.samples.resize(n_units, n_samples);
    for (std::uint32_t s = 0; s < n_samples; ++s)
        for (std::uint32_t j = 0; j < n_units; ++j) {
            const double re = r.f64();
            const double im = r.f64();
            ds.samples(j, s) = {re, im};
        }
    r.expect_end();
    if (!ds.samples.allFinite()) throw CorruptPayloadError("CPXD: non-finite sample values");
    return ds;
}

void save_dataset(const std::string& path, const ComplexDataset& ds) {
    detail::write_file(path, encode_dataset(ds));
}

ComplexDataset load_dataset(const std::string& path) { return decode_dataset(detail::read_file(path)); }

// ---------------------------------------------------------------------------
// band partition and thresholding

std::vector<BandRange> parse_band_partition(const std::string& text) {
    std::vector<BandRange> bands;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream tokens(line);
        std::string tok;
        while (tokens >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos) throw FormatError("band partition: expected start:end, got '" + tok + "'");
            try {
                std::size_t used_a = 0, used_b = 0;
                const std::string a = tok.substr(0, colon), b = tok.substr(colon + 1);
                BandRange r{std::stoul(a, &used_a), std::stoul(b, &used_b)};
                if (used_a != a.size() || used_b != b.size() || a.empty() || b.empty() || a[0] == '-' || b[0] == '-')
                    throw std::invalid_argument(tok);
                bands.push_back(r);
            } catch (const std::logic_error&) {
                throw FormatError("band partition: malformed range '" + tok + "'");
            }
        }
    }
    return bands;
}

std::vector<BandRange> load_band_partition(const std::string& path) {
    const auto bytes = detail::read_file(path);
    return parse_band_partition(std::string(bytes.begin(), bytes.end()));
}

std::vector<BandRange> two_band_layout() { return {{0, 7 * 7 * 6}, {7 * 7 * 6, 7 * 7 * 6 + 4 * 4 * 6}}; }

ComplexDataset threshold_normalize(const ComplexDataset& ds, double cutoff, std::vector<BandRange> bands) {
    ds.validate();
    if (!(cutoff >= 0.0) || !std::isfinite(cutoff)) throw DomainError("threshold_normalize: cutoff must be >= 0");
    const std::size_t n = ds.n_units();
    if (bands.empty()) bands.push_back({0, n});

    std::vector<BandRange> sorted = bands;
    std::sort(sorted.begin(), sorted.end(), [](const BandRange& a, const BandRange& b) { return a.start < b.start; });
    std::size_t expect = 0;
    for (const auto& b : sorted) {
        if (b.end <= b.start) throw DomainError("threshold_normalize: empty band");
        if (b.start != expect) throw DomainError("threshold_normalize: bands must cover all units disjointly");
        expect = b.end;
    }
    if (expect != n) throw DomainError("threshold_normalize: bands must cover all units disjointly");

    ComplexDataset out = ds;
    for (const auto& b : bands) {
        const auto rows = static_cast<Eigen::Index>(b.end - b.start);
        auto block = out.samples.middleRows(static_cast<Eigen::Index>(b.start), rows);
        const double band_max = ds.samples.middleRows(static_cast<Eigen::Index>(b.start), rows).cwiseAbs().maxCoeff();
        if (!(band_max > 0.0))
            throw DomainError("threshold_normalize: band " + std::to_string(b.start) + ":" + std::to_string(b.end) +
                              " is all zero");
        for (Eigen::Index s = 0; s < block.cols(); ++s)
            for (Eigen::Index j = 0; j < block.rows(); ++j) {
                const cplx z = block(j, s);
                const double m = std::abs(z) / band_max;
                block(j, s) = m < cutoff ? cplx{} : std::polar(1.0, std::arg(z));
            }
    }
    return out;
}

// ---------------------------------------------------------------------------
// rendering

namespace {

void hsv_pixel(cplx z, double global_phase, unsigned char* rgb) {
    const double value = std::min(std::abs(z), 1.0);
    const double hue = wrap_angle(std::arg(z) + global_phase) / two_pi * 6.0;
    const int sector = std::min(static_cast<int>(hue), 5);
    const double f = hue - sector;
    const double p = 0.0, q = value * (1.0 - f), t = value * f;
    double r, g, b;
    switch (sector) {
        case 0: r = value; g = t; b = p; break;
        case 1: r = q; g = value; b = p; break;
        case 2: r = p; g = value; b = t; break;
        case 3: r = p; g = q; b = value; break;
        case 4: r = t; g = p; b = value; break;
        default: r = value; g = p; b = q; break;
    }
    rgb[0] = static_cast<unsigned char>(std::lround(255.0 * r));
    rgb[1] = static_cast<unsigned char>(std::lround(255.0 * g));
    rgb[2] = static_cast<unsigned char>(std::lround(255.0 * b));
}

std::vector<unsigned char> ppm_header(std::uint32_t w, std::uint32_t h) {
    const std::string header = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    return {header.begin(), header.end()};
}

}  // namespace

std::vector<unsigned char> encode_complex_image(const Eigen::VectorXcd& sample, std::uint32_t width,
                                                std::uint32_t height, double global_phase) {
    if (width == 0 || height == 0) throw ShapeError("render_complex_image: sample has no 2-D shape");
    if (static_cast<std::size_t>(width) * height != static_cast<std::size_t>(sample.size()))
        throw ShapeError("render_complex_image: width*height does not match sample length");
    auto bytes = ppm_header(width, height);
    const std::size_t offset = bytes.size();
    bytes.resize(offset + 3 * static_cast<std::size_t>(sample.size()));
    for (Eigen::Index i = 0; i < sample.size(); ++i)
        hsv_pixel(sample(i), global_phase, bytes.data() + offset + 3 * static_cast<std::size_t>(i));
    return bytes;
}

void render_complex_image(const Eigen::VectorXcd& sample, std::uint32_t width, std::uint32_t height,
                          const std::string& path, double global_phase) {
    detail::write_file(path, encode_complex_image(sample, width, height, global_phase));
}

void render_complex_grid(const std::vector<Eigen::VectorXcd>& tiles, int per_row, std::uint32_t width,
                         std::uint32_t height, const std::string& path, double global_phase) {
    if (tiles.empty() || per_row <= 0) throw ShapeError("render_complex_grid: nothing to render");
    const auto cols = static_cast<std::uint32_t>(std::min<std::size_t>(tiles.size(), static_cast<std::size_t>(per_row)));
    const auto rows = static_cast<std::uint32_t>((tiles.size() + per_row - 1) / per_row);
    const std::uint32_t gw = cols * (width + 1) - 1, gh = rows * (height + 1) - 1;
    auto bytes = ppm_header(gw, gh);
    const std::size_t offset = bytes.size();
    bytes.resize(offset + 3 * static_cast<std::size_t>(gw) * gh, 0);
    for (std::size_t t = 0; t < tiles.size(); ++t) {
        const auto& tile = tiles[t];
        if (static_cast<std::size_t>(width) * height != static_cast<std::size_t>(tile.size()))
            throw ShapeError("render_complex_grid: tile size does not match shape");
        const std::uint32_t ox = static_cast<std::uint32_t>(t % per_row) * (width + 1);
        const std::uint32_t oy = static_cast<std::uint32_t>(t / per_row) * (height + 1);
        for (std::uint32_t y = 0; y < height; ++y)
            for (std::uint32_t x = 0; x < width; ++x)
                hsv_pixel(tile(y * width + x), global_phase,
                          bytes.data() + offset + 3 * (static_cast<std::size_t>(oy + y) * gw + ox + x));
    }
    detail::write_file(path, bytes);
}

}  // namespace capbm
