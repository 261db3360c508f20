#pragma once

#include <cmath>
#include <numbers>

namespace capbm {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Reduce any finite angle to [0, 2π).
inline double wrap_angle(double x) noexcept {
    double r = std::fmod(x, two_pi);
    if (r < 0.0) r += two_pi;
    // fmod of a tiny negative number can round back up to exactly 2π.
    if (r >= two_pi) r = 0.0;
    return r;
}

/// Phase angle in radians, always held in [0, 2π).
class Angle {
public:
    constexpr Angle() = default;
    explicit Angle(double radians) noexcept : value_(wrap_angle(radians)) {}

    double rad() const noexcept { return value_; }

    Angle operator+(Angle o) const noexcept { return Angle(value_ + o.value_); }
    Angle operator-(Angle o) const noexcept { return Angle(value_ - o.value_); }

    friend bool operator==(Angle, Angle) = default;

private:
    double value_ = 0.0;
};

/// Signed shortest difference a − b in (−π, π].
inline double angle_diff(double a, double b) noexcept {
    double d = wrap_angle(a - b);
    return d > std::numbers::pi ? d - two_pi : d;
}

}  // namespace capbm
