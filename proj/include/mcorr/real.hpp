#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace mcorr {

using u128 = unsigned __int128;
using Rational = boost::multiprecision::cpp_rational;

/// Real constant held as floor(x) plus a 128-bit binary fraction, truncated
/// toward minus infinity. Rational inputs also keep their exact value, and
/// every floor taken from them is exact.
///
/// Grammar: [-]term[(+|-)integer], term one of sqrtK, pi, e, phi, a decimal
/// (1.5, 2e-3) or a quotient p/q. Examples: "sqrt2", "sqrt2-1", "3/7".
class FixedReal {
public:
    FixedReal() = default;

    static FixedReal parse(std::string_view text);
    static FixedReal from_rational(const Rational& value);
    static FixedReal from_int(std::int64_t value) { return from_rational(Rational(value)); }

    std::int64_t floor_part() const { return int_; }
    /// fractional part scaled by 2^128
    u128 frac_bits() const { return frac_; }
    const std::optional<Rational>& rational() const { return rational_; }
    bool is_rational() const { return rational_.has_value(); }
    double to_double() const;
    long double to_long_double() const;
    const std::string& text() const { return text_; }

    /// {k x} scaled by 2^128; exact modulo the truncation of x.
    u128 frac_times(std::int64_t k) const;
    /// {k x} scaled by 2^128 for k given modulo 2^128.
    u128 frac_times_wrapped(u128 k) const;
    /// floor(n x + shift); OverflowError outside the int64 range.
    std::int64_t floor_times(std::int64_t n, const FixedReal& shift) const;
    std::int64_t floor_times(std::int64_t n) const;

    bool operator<(const FixedReal& o) const { return int_ != o.int_ ? int_ < o.int_ : frac_ < o.frac_; }
    bool operator==(const FixedReal& o) const { return int_ == o.int_ && frac_ == o.frac_; }

private:
    std::int64_t int_ = 0;
    u128 frac_ = 0;
    std::optional<Rational> rational_ = Rational(0);
    std::string text_ = "0";
};

/// Scaled fraction as a number in [0, 1).
long double frac_to_unit(u128 frac);

} // namespace mcorr
