#include "mcorr/ergodic.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "mcorr/errors.hpp"
#include "mcorr/summation.hpp"
#include "mcorr/text.hpp"

namespace mcorr {

namespace {

constexpr u128 kHalf = u128(1) << 127;
constexpr u128 kQuarter = u128(1) << 126;

std::int64_t mul_checked(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("frequency product exceeds the 64-bit range");
    return r;
}

std::int64_t add_checked(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw OverflowError("frequency sum exceeds the 64-bit range");
    return r;
}

std::uint64_t mod_u(std::int64_t x, std::uint64_t u) {
    auto r = static_cast<std::int64_t>(x % static_cast<std::int64_t>(u));
    return static_cast<std::uint64_t>(r < 0 ? r + static_cast<std::int64_t>(u) : r);
}

// r/u scaled by 2^128, r < u; exact when u is a power of two
u128 ratio_bits(std::uint64_t r, std::uint64_t u) {
    if (r == 0) return 0;
    // floor(r 2^128 / u) by long division in two 64-bit halves
    u128 hi = (u128(r) << 64) / u;
    u128 rem = (u128(r) << 64) % u;
    u128 lo = (rem << 64) / u;
    return (hi << 64) | lo;
}

void check_shape(const TorusRotation& rot, const std::vector<TrigMonomial>& f,
                 const std::vector<std::int64_t>& shifts) {
    if (f.size() != shifts.size()) throw DomainError("rotation correlation: one shift per monomial");
    for (const auto& m : f)
        if (m.l.size() != rot.dim())
            throw DomainError("monomial " + m.descriptor() + " does not match torus dimension " +
                              std::to_string(rot.dim()));
}

// frequency vector c_i = sum_j n_j l_{j,i}, cyclic frequency K = sum_j k_j n_j
struct Frequencies {
    std::vector<std::int64_t> c;
    std::int64_t k = 0;
};

Frequencies frequencies(const std::vector<TrigMonomial>& f, const std::vector<std::int64_t>& shifts, std::size_t v) {
    Frequencies out;
    out.c.assign(v, 0);
    for (std::size_t j = 0; j < f.size(); ++j) {
        for (std::size_t i = 0; i < v; ++i) out.c[i] = add_checked(out.c[i], mul_checked(shifts[j], f[j].l[i]));
        out.k = add_checked(out.k, mul_checked(shifts[j], f[j].k));
    }
    return out;
}

// average of e(m r / u) over one period of m in the residue set keep(m)
template <class Keep>
cplx class_average(std::uint64_t r, std::uint64_t u, std::uint64_t period, Keep keep) {
    ComplexSum s;
    std::uint64_t count = 0;
    for (std::uint64_t m = 0; m < period; ++m)
        if (keep(m)) {
            s.add(unit_phase(ratio_bits((m % u) * r % u, u)));
            ++count;
        }
    return count ? s.value() / static_cast<double>(count) : cplx{};
}

} // namespace

cplx unit_phase(u128 frac) {
    if (frac == 0) return {1.0, 0.0};
    if (frac == kHalf) return {-1.0, 0.0};
    if (frac == kQuarter) return {0.0, 1.0};
    if (frac == kHalf + kQuarter) return {0.0, -1.0};
    // signed turn in [-1/2, 1/2) keeps the double angle small
    const auto turn = static_cast<double>(static_cast<std::int64_t>(static_cast<std::uint64_t>(frac >> 64))) * 0x1p-64;
    const double angle = 2.0 * std::numbers::pi * turn;
    return {std::cos(angle), std::sin(angle)};
}

cplx weyl_sum(const FixedReal& theta, std::uint64_t n) {
    if (n < 1) throw DomainError("weyl_sum: N must be positive");
    auto s = blocked_sum<ComplexSum>(1, static_cast<std::int64_t>(n),
                                     [&](std::int64_t k) { return unit_phase(theta.frac_times(k)); });
    return s.value() / static_cast<double>(n);
}

double weyl_bound(const FixedReal& theta, std::uint64_t n) {
    long double f = frac_to_unit(theta.frac_bits());
    long double dist = std::min(f, 1.0L - f);
    if (dist == 0) return 1.0;
    return static_cast<double>(std::min(1.0L, 1.0L / (2.0L * n * dist)));
}

cplx prime_phase_average(const FixedReal& beta, std::uint64_t d, std::uint64_t prime_bound, const FactorSieve& sieve) {
    if (d < 1) throw DomainError("prime_phase_average: d must be positive");
    if (prime_bound > sieve.limit())
        throw DomainError("prime_phase_average: P = " + std::to_string(prime_bound) + " exceeds the sieve limit " +
                          std::to_string(sieve.limit()));
    auto primes = sieve.primes_up_to(prime_bound, d);
    if (primes.empty()) throw DomainError("prime_phase_average: no primes = 1 mod " + std::to_string(d) + " up to P");
    auto s = blocked_sum<ComplexSum>(0, static_cast<std::int64_t>(primes.size()) - 1, [&](std::int64_t i) {
        return unit_phase(beta.frac_times(static_cast<std::int64_t>(primes[static_cast<std::size_t>(i)])));
    });
    return s.value() / static_cast<double>(primes.size());
}

std::string TorusRotation::descriptor() const {
    std::string s = "rot:" + std::to_string(u) + ":";
    for (std::size_t i = 0; i < alpha.size(); ++i) s += (i ? "," : "") + alpha[i].text();
    return s;
}

TorusRotation TorusRotation::parse(std::string_view text) {
    auto t = trim(text);
    if (t.substr(0, 4) != "rot:") throw ParseError(std::string(t), "rotation must read rot:U:ALPHAS");
    t.remove_prefix(4);
    auto colon = t.find(':');
    TorusRotation r;
    r.u = parse_uint(t.substr(0, colon), "cyclic order u");
    if (r.u < 1) throw ParseError(std::string(text), "cyclic order u must be at least 1");
    if (colon != std::string_view::npos)
        for (const auto& a : split_list(t.substr(colon + 1))) r.alpha.push_back(FixedReal::parse(a));
    return r;
}

std::optional<std::vector<std::int64_t>> TorusRotation::rational_relation(std::int64_t bound) const {
    const std::size_t v = alpha.size();
    if (v == 0) return std::nullopt;
    std::vector<std::int64_t> c(v, -bound);
    for (;;) {
        bool nonzero = false;
        for (auto x : c) nonzero = nonzero || x != 0;
        if (nonzero) {
            u128 f = 0;
            for (std::size_t i = 0; i < v; ++i) f += alpha[i].frac_times(c[i]);
            long double x = frac_to_unit(f);
            if (std::min(x, 1.0L - x) < 1e-12L) return c;
        }
        std::size_t i = 0;
        while (i < v && ++c[i] > bound) c[i++] = -bound;
        if (i == v) return std::nullopt;
    }
}

bool TrigMonomial::trivial(std::uint64_t u) const {
    for (auto x : l)
        if (x != 0) return false;
    return mod_u(k, u) == 0;
}

std::string TrigMonomial::descriptor() const {
    std::string s = std::to_string(k) + ":";
    for (std::size_t i = 0; i < l.size(); ++i) s += (i ? "," : "") + std::to_string(l[i]);
    return s;
}

TrigMonomial TrigMonomial::parse(std::string_view text) {
    auto t = trim(text);
    auto colon = t.find(':');
    if (colon == std::string_view::npos) throw ParseError(std::string(t), "monomial must read K:L1,L2,...");
    TrigMonomial m;
    m.k = parse_int(t.substr(0, colon), "cyclic frequency");
    m.l = parse_int_list(t.substr(colon + 1), "torus frequencies");
    return m;
}

cplx rotation_correlation(const TorusRotation& rot, const std::vector<TrigMonomial>& f,
                          const std::vector<std::int64_t>& shifts) {
    check_shape(rot, f, shifts);
    TrigMonomial total{0, std::vector<std::int64_t>(rot.dim(), 0)};
    for (const auto& m : f) {
        total.k = add_checked(total.k, m.k);
        for (std::size_t i = 0; i < rot.dim(); ++i) total.l[i] = add_checked(total.l[i], m.l[i]);
    }
    if (!total.trivial(rot.u)) return {0.0, 0.0};
    auto fr = frequencies(f, shifts, rot.dim());
    u128 phase = ratio_bits(mod_u(fr.k, rot.u), rot.u);
    for (std::size_t i = 0; i < rot.dim(); ++i) phase += rot.alpha[i].frac_times(fr.c[i]);
    return unit_phase(phase);
}

cplx rotation_correlation_orbit(const TorusRotation& rot, const std::vector<TrigMonomial>& f,
                                const std::vector<std::int64_t>& shifts, std::uint64_t n, const OrbitStart& start) {
    check_shape(rot, f, shifts);
    if (n < 1) throw DomainError("orbit average: N must be positive");
    if (start.y.size() != rot.dim()) throw DomainError("orbit start must have one torus coordinate per alpha");
    // prod_j F_j(T^{m+n_j} s) = e(phase0 + m theta), theta from the summed frequencies
    TrigMonomial total{0, std::vector<std::int64_t>(rot.dim(), 0)};
    for (const auto& m : f) {
        total.k = add_checked(total.k, m.k);
        for (std::size_t i = 0; i < rot.dim(); ++i) total.l[i] = add_checked(total.l[i], m.l[i]);
    }
    auto fr = frequencies(f, shifts, rot.dim());
    u128 phase0 = ratio_bits(mod_u(add_checked(fr.k, mul_checked(total.k, start.x)), rot.u), rot.u);
    for (std::size_t i = 0; i < rot.dim(); ++i)
        phase0 += rot.alpha[i].frac_times(fr.c[i]) + start.y[i].frac_times(total.l[i]);
    const auto k_mod = mod_u(total.k, rot.u);
    auto s = blocked_sum<ComplexSum>(1, static_cast<std::int64_t>(n), [&](std::int64_t m) {
        u128 p = phase0 + ratio_bits(static_cast<std::uint64_t>((u128(m) % rot.u) * k_mod % rot.u), rot.u);
        for (std::size_t i = 0; i < rot.dim(); ++i)
            p += rot.alpha[i].frac_times_wrapped(u128(static_cast<__int128>(m) * total.l[i]));
        return unit_phase(p);
    });
    return s.value() / static_cast<double>(n);
}

Ergid2Result ergid2_check(const TorusRotation& rot, const std::vector<TrigMonomial>& f,
                          const std::vector<std::int64_t>& shifts, std::uint64_t d, std::uint64_t r0,
                          std::uint64_t prime_bound, std::uint64_t m_bound, const FactorSieve& sieve) {
    check_shape(rot, f, shifts);
    if (d < 1 || r0 < 1) throw DomainError("ergid2: d and r0 must be positive");
    if (prime_bound > sieve.limit()) throw DomainError("ergid2: P exceeds the sieve limit");
    auto scaled = [&](std::int64_t m) {
        std::vector<std::int64_t> s(shifts.size());
        for (std::size_t j = 0; j < shifts.size(); ++j) s[j] = mul_checked(m, shifts[j]);
        return rotation_correlation(rot, f, s);
    };
    Ergid2Result out;
    auto primes = sieve.primes_up_to(prime_bound, d);
    if (primes.empty()) throw DomainError("ergid2: no primes = 1 mod " + std::to_string(d) + " up to P");
    ComplexSum lhs;
    for (auto p : primes) lhs.add(scaled(static_cast<std::int64_t>(p)));
    out.prime_count = primes.size();
    out.lhs = lhs.value() / static_cast<double>(primes.size());

    ComplexSum rhs;
    for (std::uint64_t m = 1; m <= m_bound; m += d)
        if (std::gcd(m, r0) == 1) {
            rhs.add(scaled(static_cast<std::int64_t>(m)));
            ++out.class_count;
        }
    if (out.class_count == 0) throw DomainError("ergid2: A_{d,r0} has no elements up to M");
    out.rhs = rhs.value() / static_cast<double>(out.class_count);
    out.relation = rot.rational_relation();

    // the correlation at shifts m n_j is e(m theta) on the support; theta is
    // irrational once any torus frequency survives, giving limit 0
    TrigMonomial total{0, std::vector<std::int64_t>(rot.dim(), 0)};
    for (const auto& m : f) {
        total.k += m.k;
        for (std::size_t i = 0; i < rot.dim(); ++i) total.l[i] += m.l[i];
    }
    auto fr = frequencies(f, shifts, rot.dim());
    bool torus_free = true;
    for (auto c : fr.c) torus_free = torus_free && c == 0;
    if (total.trivial(rot.u) && torus_free) {
        const auto r = mod_u(fr.k, rot.u);
        const std::uint64_t period = std::lcm(std::lcm(d, r0), rot.u);
        out.analytic = class_average(r, rot.u, period, [&](std::uint64_t m) {
            return m % d == 1 % d && std::gcd(m, r0) == 1;
        });
        const std::uint64_t prime_period = std::lcm(d, rot.u);
        out.analytic_primes = class_average(r, rot.u, prime_period, [&](std::uint64_t m) {
            return m % d == 1 % d && std::gcd(m, prime_period) == 1;
        });
    }
    out.gap = std::abs(out.lhs - out.rhs);
    out.gap_lhs = std::abs(out.lhs - out.analytic_primes);
    out.gap_rhs = std::abs(out.rhs - out.analytic);
    return out;
}

cplx skew_orbit_average(const FixedReal& x0, const FixedReal& y0, std::int64_t a, std::int64_t b, std::uint64_t n) {
    if (n < 1) throw DomainError("skew orbit: N must be positive");
    // T^k(x, y) = (x, y + k x), so F(T^k p) = e(a x0 + b y0 + k b x0)
    const u128 base = x0.frac_times(a) + y0.frac_times(b);
    auto s = blocked_sum<ComplexSum>(1, static_cast<std::int64_t>(n), [&](std::int64_t k) {
        return unit_phase(base + x0.frac_times_wrapped(u128(static_cast<__int128>(k) * b)));
    });
    return s.value() / static_cast<double>(n);
}

} // namespace mcorr
