#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "capbm/angle.hpp"

namespace capbm {

/// Fixed-length complex samples, one per column. Optional 2-D shape with
/// width · height = n_units (row-major pixel order); 0 × 0 means unshaped.
struct ComplexDataset {
    Eigen::MatrixXcd samples;
    std::uint32_t width = 0;
    std::uint32_t height = 0;

    std::size_t n_samples() const noexcept { return static_cast<std::size_t>(samples.cols()); }
    std::size_t n_units() const noexcept { return static_cast<std::size_t>(samples.rows()); }
    bool shaped() const noexcept { return width != 0 || height != 0; }

    /// Throws ShapeError / DomainError on a bad shape or non-finite entries.
    void validate() const;

    /// Columns `indices` gathered into a new matrix.
    Eigen::MatrixXcd gather(const std::vector<std::size_t>& indices) const;
};

struct BarsConfig {
    int side = 24;
    int bar_width = 2;
    int min_bars = 2;
    int max_bars = 4;
    double phase_noise_max = 0.6;
    std::uint64_t seed = 1;

    void validate() const;
};

enum class BarOrientation : std::uint8_t { horizontal, vertical };

/// One drawn bar, kept for generator self-tests.
struct Bar {
    BarOrientation orientation;
    int start;          // first row (horizontal) or column (vertical)
    double offset;      // phase offset of the sinusoid
};

/**
 * Random bars with a noisy sinusoidal phase pattern.
 *
 * Each direction gets a uniform count in [min_bars, max_bars] of bars placed
 * without repetition on the side/bar_width aligned slots. Along a bar the
 * phase runs through one full period, offset + 2π·x/side, plus per-pixel
 * noise drawn uniformly from (0, phase_noise_max). Horizontal bars are drawn
 * first; at crossings the later (vertical) bar wins.
 */
ComplexDataset gen_bars(const BarsConfig& cfg, std::size_t n,
                        std::vector<std::vector<Bar>>* layouts = nullptr);

/// CPXD container: "CPXD" | u32 version=1 | u32 n_samples | u32 n_units |
/// u32 width | u32 height | n_samples × n_units (re, im) f64, little-endian.
inline constexpr std::uint32_t cpxd_version = 1;

void save_dataset(const std::string& path, const ComplexDataset& ds);
ComplexDataset load_dataset(const std::string& path);
std::vector<unsigned char> encode_dataset(const ComplexDataset& ds);
ComplexDataset decode_dataset(const std::vector<unsigned char>& bytes);

/// Half-open unit index range [start, end).
struct BandRange {
    std::size_t start = 0;
    std::size_t end = 0;
};

/// Parse "start:end" ranges separated by whitespace or newlines; '#' starts a comment.
std::vector<BandRange> parse_band_partition(const std::string& text);
std::vector<BandRange> load_band_partition(const std::string& path);

/// The two-band layout of 7×7·6 and 4×4·6 wavelet coefficients (390 units).
std::vector<BandRange> two_band_layout();

/**
 * Per band: divide by the band's largest modulus over the whole dataset,
 * zero entries whose scaled modulus is below `cutoff`, and set the rest to
 * modulus 1 keeping their phase. An empty `bands` means one whole-vector band.
 */
ComplexDataset threshold_normalize(const ComplexDataset& ds, double cutoff = 0.15,
                                   std::vector<BandRange> bands = {});

/// Binary PPM (P6) bytes: hue = phase + global_phase, saturation 1,
/// value = min(|z|, 1).
std::vector<unsigned char> encode_complex_image(const Eigen::VectorXcd& sample, std::uint32_t width,
                                                std::uint32_t height, double global_phase = 0.0);

void render_complex_image(const Eigen::VectorXcd& sample, std::uint32_t width,
                          std::uint32_t height, const std::string& path, double global_phase = 0.0);

/// Tiles laid out row by row, `per_row` tiles per row, one pixel of black gutter.
void render_complex_grid(const std::vector<Eigen::VectorXcd>& tiles, int per_row,
                         std::uint32_t width, std::uint32_t height, const std::string& path,
                         double global_phase = 0.0);

}  // namespace capbm
