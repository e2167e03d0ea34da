#include "mcorr/real.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cctype>
#include <cmath>

#include "mcorr/errors.hpp"
#include "mcorr/text.hpp"

namespace mcorr {

namespace {

namespace mp = boost::multiprecision;
using Big = mp::number<mp::cpp_bin_float<320, mp::digit_base_2>>;
using mp::cpp_int;

const cpp_int kTwo128 = cpp_int(1) << 128;

u128 to_u128(const cpp_int& v) {
    auto lo = static_cast<std::uint64_t>(v & cpp_int(UINT64_MAX));
    auto hi = static_cast<std::uint64_t>(v >> 64);
    return (static_cast<u128>(hi) << 64) | lo;
}

std::int64_t to_int64(const cpp_int& v, std::string_view text) {
    if (v > INT64_MAX || v < INT64_MIN) throw ParseError("real", "value out of range: '" + std::string(text) + "'");
    return static_cast<std::int64_t>(v);
}

// floor division for cpp_int (truncation otherwise)
cpp_int floor_div(const cpp_int& a, const cpp_int& b) {
    cpp_int q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::optional<Rational> parse_decimal(std::string_view s) {
    std::size_t i = 0;
    cpp_int digits = 0;
    int scale = 0;
    bool any = false, dot = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits = digits * 10 + (c - '0');
            any = true;
            if (dot) ++scale;
        } else if (c == '.' && !dot) {
            dot = true;
        } else {
            break;
        }
    }
    if (!any) return std::nullopt;
    long exp = 0;
    if (i < s.size()) {
        if (s[i] != 'e' && s[i] != 'E') return std::nullopt;
        try {
            exp = parse_int(s.substr(i + 1), "exponent");
        } catch (const ParseError&) {
            return std::nullopt;
        }
        if (exp > 300 || exp < -300) return std::nullopt;
    }
    exp -= scale;
    Rational r(digits);
    cpp_int p = mp::pow(cpp_int(10), static_cast<unsigned>(exp < 0 ? -exp : exp));
    return exp < 0 ? r / Rational(p) : r * Rational(p);
}

struct Term {
    std::optional<Rational> exact;
    Big value;
};

Term parse_term(std::string_view s, std::string_view whole) {
    auto fail = [&] { return ParseError("real", "cannot parse '" + std::string(whole) + "'"); };
    if (s == "pi") return {std::nullopt, boost::math::constants::pi<Big>()};
    if (s == "e") return {std::nullopt, boost::math::constants::e<Big>()};
    if (s == "phi") return {std::nullopt, (1 + mp::sqrt(Big(5))) / 2};
    if (s.rfind("sqrt", 0) == 0) {
        std::uint64_t k = 0;
        try {
            k = parse_uint(s.substr(4), "sqrt");
        } catch (const ParseError&) {
            throw fail();
        }
        std::uint64_t r = static_cast<std::uint64_t>(std::llround(std::sqrt(static_cast<long double>(k))));
        while (r * r > k) --r;
        while ((r + 1) * (r + 1) <= k) ++r;
        if (r * r == k) return {Rational(r), Big(r)};
        return {std::nullopt, mp::sqrt(Big(k))};
    }
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        auto p = parse_decimal(s.substr(0, slash));
        auto q = parse_decimal(s.substr(slash + 1));
        if (!p || !q) throw fail();
        if (*q == 0) throw ParseError("real", "zero denominator in '" + std::string(whole) + "'");
        Rational v = *p / *q;
        return {v, Big(v)};
    }
    if (auto d = parse_decimal(s)) return {*d, Big(*d)};
    throw fail();
}

} // namespace

FixedReal FixedReal::from_rational(const Rational& value) {
    FixedReal x;
    cpp_int num = mp::numerator(value), den = mp::denominator(value);
    cpp_int fl = floor_div(num, den);
    x.int_ = to_int64(fl, "rational");
    cpp_int rem = num - fl * den;  // in [0, den)
    x.frac_ = to_u128((rem << 128) / den);
    x.rational_ = value;
    x.text_ = value.str();
    return x;
}

FixedReal FixedReal::parse(std::string_view text) {
    std::string_view s = trim(text);
    if (s.empty()) throw ParseError("real", "empty constant");
    bool neg = false;
    if (s.front() == '-' || s.front() == '+') {
        neg = s.front() == '-';
        s.remove_prefix(1);
    }
    // trailing integer offset: the last '+' or '-' not part of an exponent
    std::int64_t offset = 0;
    for (std::size_t i = s.size(); i-- > 1;) {
        if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
            offset = parse_int(s.substr(i + 1), "real offset");
            if (s[i] == '-') offset = -offset;
            s = s.substr(0, i);
            break;
        }
    }
    Term t = parse_term(s, text);
    FixedReal x;
    if (t.exact) {
        Rational v = (neg ? -*t.exact : *t.exact) + offset;
        x = from_rational(v);
    } else {
        Big v = (neg ? -t.value : t.value) + offset;
        Big fl = mp::floor(v);
        x.rational_.reset();
        x.int_ = to_int64(cpp_int(fl), text);
        x.frac_ = to_u128(cpp_int(mp::floor(mp::ldexp(v - fl, 128))));
    }
    x.text_ = std::string(trim(text));
    return x;
}

long double frac_to_unit(u128 frac) {
    return std::ldexp(static_cast<long double>(static_cast<std::uint64_t>(frac >> 64)), -64) +
           std::ldexp(static_cast<long double>(static_cast<std::uint64_t>(frac)), -128);
}

long double FixedReal::to_long_double() const { return static_cast<long double>(int_) + frac_to_unit(frac_); }

double FixedReal::to_double() const {
    if (rational_) return static_cast<double>(*rational_);
    return static_cast<double>(to_long_double());
}

u128 FixedReal::frac_times(std::int64_t k) const {
    u128 m = k < 0 ? static_cast<u128>(-static_cast<__int128>(k)) : static_cast<u128>(k);
    u128 v = frac_ * m;
    return k < 0 ? -v : v;
}

u128 FixedReal::frac_times_wrapped(u128 k) const { return frac_ * k; }

std::int64_t FixedReal::floor_times(std::int64_t n) const { return floor_times(n, FixedReal{}); }

std::int64_t FixedReal::floor_times(std::int64_t n, const FixedReal& shift) const {
    auto overflow = [&] {
        return OverflowError("floor(" + std::to_string(n) + " * " + text_ + " + " + shift.text_ +
                             ") exceeds the 64-bit range");
    };
    if (rational_ && shift.rational_) {
        Rational v = *rational_ * n + *shift.rational_;
        cpp_int fl = floor_div(mp::numerator(v), mp::denominator(v));
        if (fl > INT64_MAX || fl < INT64_MIN) throw overflow();
        return static_cast<std::int64_t>(fl);
    }
    if (n < 0) {
        // n x = -(|n| x); reuse the nonnegative path on -x would lose the
        // truncation direction, so go through exact big arithmetic
        cpp_int whole = (cpp_int(int_) << 128) + cpp_int(frac_);
        cpp_int sw = (cpp_int(shift.int_) << 128) + cpp_int(shift.frac_);
        cpp_int fl = floor_div(whole * n + sw, kTwo128);
        if (fl > INT64_MAX || fl < INT64_MIN) throw overflow();
        return static_cast<std::int64_t>(fl);
    }
    auto un = static_cast<std::uint64_t>(n);
    auto lo = static_cast<std::uint64_t>(frac_);
    auto hi = static_cast<std::uint64_t>(frac_ >> 64);
    u128 p_lo = static_cast<u128>(un) * lo;
    u128 p_hi = static_cast<u128>(un) * hi + (p_lo >> 64);
    auto carry_int = static_cast<std::int64_t>(p_hi >> 64);  // < 2^64 / 2 since n < 2^63
    u128 frac = (p_hi << 64) | static_cast<std::uint64_t>(p_lo);
    u128 sum = frac + shift.frac_;
    std::int64_t carry = sum < frac ? 1 : 0;
    std::int64_t r = 0;
    if (__builtin_mul_overflow(n, int_, &r) || __builtin_add_overflow(r, carry_int, &r) ||
        __builtin_add_overflow(r, carry, &r) || __builtin_add_overflow(r, shift.int_, &r))
        throw overflow();
    return r;
}

} // namespace mcorr
