#include "capbm/capm_io.hpp"

#include <fstream>
#include <iterator>

#include "binary_io.hpp"

namespace capbm {

namespace detail {

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace detail

namespace {

constexpr char magic[4] = {'C', 'A', 'P', 'M'};

void write_real(detail::ByteWriter& w, const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) w.f64(m(r, c));
}

void write_complex(detail::ByteWriter& w, const Eigen::MatrixXcd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            w.f64(m(r, c).real());
            w.f64(m(r, c).imag());
        }
}

Eigen::MatrixXd read_real(detail::ByteReader& r, Eigen::Index rows, Eigen::Index cols) {
    r.need_elements(rows, cols, 8);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = r.f64();
    return m;
}

Eigen::MatrixXcd read_complex(detail::ByteReader& r, Eigen::Index rows, Eigen::Index cols) {
    r.need_elements(rows, cols, 16);
    Eigen::MatrixXcd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index c = 0; c < cols; ++c) {
            const double re = r.f64();
            const double im = r.f64();
            m(i, c) = {re, im};
        }
    return m;
}

struct Encoder {
    detail::ByteWriter& w;

    void operator()(const CapBmParams& p) const {
        p.validate();
        w.u8(static_cast<std::uint8_t>(ModelKind::full));
        w.u32(static_cast<std::uint32_t>(p.size()));
        write_real(w, p.modulus);
        write_real(w, p.phase);
        write_real(w, p.amp_coupling);
        write_real(w, p.bias);
    }
    void operator()(const CapRbmParams& p) const {
        p.validate();
        w.u8(static_cast<std::uint8_t>(ModelKind::restricted));
        w.u32(static_cast<std::uint32_t>(p.n_visible()));
        w.u32(static_cast<std::uint32_t>(p.n_hidden()));
        write_complex(w, p.weights);
        write_real(w, p.amp_coupling);
        write_real(w, p.visible_bias);
        write_real(w, p.hidden_bias);
    }
};

}  // namespace

std::vector<unsigned char> encode_params(const AnyParams& params) {
    detail::ByteWriter w;
    w.bytes(magic, 4);
    w.u32(capm_version);
    std::visit(Encoder{w}, params);
    return w.buffer();
}

AnyParams decode_params(const std::vector<unsigned char>& bytes) {
    detail::ByteReader r(bytes, "CAPM");
    char m[4];
    r.bytes(m, 4);
    if (std::memcmp(m, magic, 4) != 0) throw BadMagicError("CAPM: bad magic");
    const std::uint32_t version = r.u32();
    if (version != capm_version)
        throw VersionError("CAPM: unsupported version " + std::to_string(version));
    const std::uint8_t kind = r.u8();
    if (kind == static_cast<std::uint8_t>(ModelKind::full)) {
        const auto n = static_cast<Eigen::Index>(r.u32());
        CapBmParams p;
        p.modulus = read_real(r, n, n);
        p.phase = read_real(r, n, n);
        p.amp_coupling = read_real(r, n, n);
        p.bias = read_real(r, n, 1);
        r.expect_end();
        try {
            p.validate();
        } catch (const std::exception& e) {
            throw CorruptPayloadError(std::string("CAPM: ") + e.what());
        }
        return p;
    }
    if (kind == static_cast<std::uint8_t>(ModelKind::restricted)) {
        const auto nv = static_cast<Eigen::Index>(r.u32());
        const auto nh = static_cast<Eigen::Index>(r.u32());
        CapRbmParams p;
        p.weights = read_complex(r, nv, nh);
        p.amp_coupling = read_real(r, nv, nh);
        p.visible_bias = read_real(r, nv, 1);
        p.hidden_bias = read_real(r, nh, 1);
        r.expect_end();
        try {
            p.validate();
        } catch (const std::exception& e) {
            throw CorruptPayloadError(std::string("CAPM: ") + e.what());
        }
        return p;
    }
    throw FormatError("CAPM: unknown model kind " + std::to_string(kind));
}

void save_params(const std::string& path, const CapBmParams& params) {
    detail::write_file(path, encode_params(params));
}

void save_params(const std::string& path, const CapRbmParams& params) {
    detail::write_file(path, encode_params(params));
}

AnyParams load_params(const std::string& path) { return decode_params(detail::read_file(path)); }

CapRbmParams load_rbm(const std::string& path) {
    auto any = load_params(path);
    if (auto* rbm = std::get_if<CapRbmParams>(&any)) return std::move(*rbm);
    throw FormatError("'" + path + "' holds a full model, expected a restricted one");
}

}  // namespace capbm
