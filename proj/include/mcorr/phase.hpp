#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace mcorr {

using cplx = std::complex<double>;

/// e(x) = exp(2 pi i x).
inline cplx e_phase(long double x) {
    x -= std::floor(x);
    long double angle = 2.0L * std::numbers::pi_v<long double> * x;
    return {static_cast<double>(std::cos(angle)), static_cast<double>(std::sin(angle))};
}

/// e(num / den), exact on the real and imaginary axes (den dividing 4 after
/// reduction), so real characters take exactly the values 0 and +-1.
inline cplx unit_root(std::int64_t num, std::int64_t den) {
    std::int64_t r = num % den;
    if (r < 0) r += den;
    if (r == 0) return {1.0, 0.0};
    if (2 * r == den) return {-1.0, 0.0};
    if (4 * r == den) return {0.0, 1.0};
    if (4 * r == 3 * den) return {0.0, -1.0};
    return e_phase(static_cast<long double>(r) / static_cast<long double>(den));
}

} // namespace mcorr
