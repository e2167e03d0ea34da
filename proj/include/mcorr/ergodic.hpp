#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcorr/phase.hpp"
#include "mcorr/real.hpp"
#include "mcorr/sieve.hpp"

namespace mcorr {

/// e(frac / 2^128); quarter turns are exact.
cplx unit_phase(u128 frac);

/// E_{n<=N} e(n theta).
cplx weyl_sum(const FixedReal& theta, std::uint64_t n);

/// min(1, 1 / (2 N dist(theta, Z))).
double weyl_bound(const FixedReal& theta, std::uint64_t n);

/// Uniform average of e(p beta) over primes p = 1 mod d, p <= P.
cplx prime_phase_average(const FixedReal& beta, std::uint64_t d, std::uint64_t prime_bound, const FactorSieve& sieve);

/// T(x, y) = (x + 1, y + alpha) on Z_u x T^v.
///
/// Descriptor: "rot:U:A1,A2,..." (no alphas for v = 0), e.g. "rot:1:sqrt2".
struct TorusRotation {
    std::uint64_t u = 1;
    std::vector<FixedReal> alpha;

    std::size_t dim() const { return alpha.size(); }
    std::string descriptor() const;
    static TorusRotation parse(std::string_view text);

    /// A nonzero c with |c_i| <= bound and c . alpha within 1e-12 of an
    /// integer, if one exists; a heuristic for the ergodicity hypothesis.
    std::optional<std::vector<std::int64_t>> rational_relation(std::int64_t bound = 8) const;
};

/// e(k x / u) e(l . y). Descriptor "K:L1,L2,...", e.g. "0:1" or "1:".
struct TrigMonomial {
    std::int64_t k = 0;
    std::vector<std::int64_t> l;

    bool trivial(std::uint64_t u) const;
    std::string descriptor() const;
    static TrigMonomial parse(std::string_view text);
};

/// Start point of an orbit: x in Z_u, y in T^v.
struct OrbitStart {
    std::int64_t x = 0;
    std::vector<FixedReal> y;
};

/// Integral of prod_j F_j(T^{n_j} .) against Haar measure.
cplx rotation_correlation(const TorusRotation& rot, const std::vector<TrigMonomial>& f,
                          const std::vector<std::int64_t>& shifts);

/// E_{m<=N} prod_j F_j(T^{m + n_j} start).
cplx rotation_correlation_orbit(const TorusRotation& rot, const std::vector<TrigMonomial>& f,
                                const std::vector<std::int64_t>& shifts, std::uint64_t n, const OrbitStart& start);

struct Ergid2Result {
    cplx lhs;           ///< E over primes p = 1 mod d, p <= P, shifts p n_j
    cplx rhs;           ///< E over m <= M with m = 1 mod d, gcd(m, r0) = 1, shifts m n_j
    cplx analytic;      ///< limit of the rhs average
    cplx analytic_primes;  ///< limit of the lhs average
    double gap = 0.0;      ///< |lhs - rhs|
    double gap_lhs = 0.0;  ///< |lhs - analytic_primes|
    double gap_rhs = 0.0;  ///< |rhs - analytic|
    std::uint64_t prime_count = 0;
    std::uint64_t class_count = 0;
    std::optional<std::vector<std::int64_t>> relation;  ///< rational dependence found, if any
};

Ergid2Result ergid2_check(const TorusRotation& rot, const std::vector<TrigMonomial>& f,
                          const std::vector<std::int64_t>& shifts, std::uint64_t d, std::uint64_t r0,
                          std::uint64_t prime_bound, std::uint64_t m_bound, const FactorSieve& sieve);

/// E_{n<=N} e(a x_n + b y_n) along (x_n, y_n) = (x0, y0 + n x0).
cplx skew_orbit_average(const FixedReal& x0, const FixedReal& y0, std::int64_t a, std::int64_t b, std::uint64_t n);

} // namespace mcorr
