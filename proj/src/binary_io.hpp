#pragma once

// Little-endian primitive readers/writers shared by the CAPM and CPXD
// containers. Not part of the public include tree.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "capbm/error.hpp"

namespace capbm::detail {

class ByteWriter {
public:
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        buf_.insert(buf_.end(), p, p + n);
    }
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    const std::vector<unsigned char>& buffer() const noexcept { return buf_; }

private:
    std::vector<unsigned char> buf_;
};

class ByteReader {
public:
    ByteReader(const std::vector<unsigned char>& buf, std::string what)
        : buf_(buf), what_(std::move(what)) {}

    void need(std::size_t n) const {
        if (buf_.size() - pos_ < n)
            throw TruncatedError(what_ + ": file truncated at byte " + std::to_string(pos_));
    }
    /// Guard for rows × cols elements of `width` bytes without overflowing.
    void need_elements(std::uint64_t rows, std::uint64_t cols, std::uint64_t width) const {
        const std::uint64_t avail = remaining() / width;
        if (rows != 0 && cols > avail / rows)
            throw TruncatedError(what_ + ": payload shorter than declared dimensions");
    }
    void bytes(void* out, std::size_t n) {
        need(n);
        std::memcpy(out, buf_.data() + pos_, n);
        pos_ += n;
    }
    std::uint8_t u8() {
        need(1);
        return buf_[pos_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    /// Reads a finite double; NaN/inf in a payload means corruption.
    double f64() {
        const double v = std::bit_cast<double>(u64());
        if (!std::isfinite(v))
            throw CorruptPayloadError(what_ + ": non-finite value at byte " + std::to_string(pos_ - 8));
        return v;
    }

    std::size_t remaining() const noexcept { return buf_.size() - pos_; }
    void expect_end() const {
        if (remaining() != 0)
            throw FormatError(what_ + ": " + std::to_string(remaining()) +
                              " trailing bytes after payload");
    }

private:
    const std::vector<unsigned char>& buf_;
    std::size_t pos_ = 0;
    std::string what_;
};

std::vector<unsigned char> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<unsigned char>& bytes);

}  // namespace capbm::detail
