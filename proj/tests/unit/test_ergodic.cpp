#include <random>

#include "doctest.h"
#include "mcorr/ergodic.hpp"
#include "mcorr/errors.hpp"
#include "oracles.hpp"

using namespace mcorr;

namespace {

using cld = std::complex<long double>;

const FactorSieve& sieve() {
    static auto s = FactorSieve::build(1'000'000);
    return s;
}

cld e_ld(long double x) { return std::polar(1.0L, 2 * std::acos(-1.0L) * (x - std::floor(x))); }

std::vector<TrigMonomial> monos(std::initializer_list<const char*> d) {
    std::vector<TrigMonomial> out;
    for (auto s : d) out.push_back(TrigMonomial::parse(s));
    return out;
}

bool close(cplx a, cld b, double tol) { return std::abs(cld(a.real(), a.imag()) - b) <= tol; }

} // namespace

TEST_CASE("weyl sums") {
    CHECK(weyl_sum(FixedReal::parse("0"), 1000) == cplx(1.0, 0.0));
    CHECK(weyl_sum(FixedReal::parse("1/2"), 1000) == cplx(0.0, 0.0));
    CHECK(weyl_sum(FixedReal::parse("1/4"), 8) == cplx(0.0, 0.0));
    auto r2 = FixedReal::parse("sqrt2");
    cplx w = weyl_sum(r2, 10000);
    CHECK(std::abs(w) <= weyl_bound(r2, 10000));
    // closed geometric form e(t) (1 - e(N t)) / (N (1 - e(t)))
    long double t = std::sqrt(2.0L);
    cld want = e_ld(t) * (1.0L - e_ld(10000 * t)) / (10000.0L * (1.0L - e_ld(t)));
    CHECK(close(w, want, 1e-12));

    std::mt19937_64 rng(7);
    int violations = 0;
    for (int i = 0; i < 100; ++i) {
        auto theta = FixedReal::parse(std::to_string(rng() % 1000000007) + "/1000000007");
        if (std::abs(weyl_sum(theta, 10000)) > weyl_bound(theta, 10000) * (1 + 1e-12)) ++violations;
    }
    CHECK(violations == 0);
    CHECK_THROWS_AS(weyl_sum(r2, 0), DomainError);
}

TEST_CASE("prime phase averages") {
    CHECK(prime_phase_average(FixedReal::parse("0"), 1, 1000, sieve()) == cplx(1.0, 0.0));
    auto third = prime_phase_average(FixedReal::parse("1/3"), 1, 1'000'000, sieve());
    CHECK(std::abs(third - cplx(-0.5, 0.0)) <= 0.01);
    CHECK(std::abs(prime_phase_average(FixedReal::parse("sqrt2"), 4, 1'000'000, sieve())) <= 0.02);

    cld s = 0;
    auto primes = oracle::primes_odd_sieve(5000);
    int count = 0;
    for (auto p : primes)
        if (p % 4 == 1) {
            s += e_ld(p * std::sqrt(3.0L));
            ++count;
        }
    CHECK(close(prime_phase_average(FixedReal::parse("sqrt3"), 4, 5000, sieve()), s / (long double)count, 1e-13));
    CHECK_THROWS_AS(prime_phase_average(FixedReal::parse("sqrt2"), 1, 2'000'000, sieve()), DomainError);
    CHECK_THROWS_AS(prime_phase_average(FixedReal::parse("sqrt2"), 1000, 100, sieve()), DomainError);
}

TEST_CASE("descriptors") {
    auto r = TorusRotation::parse("rot:3:sqrt2,sqrt3");
    CHECK(r.u == 3);
    CHECK(r.dim() == 2);
    CHECK(TorusRotation::parse(r.descriptor()).descriptor() == r.descriptor());
    CHECK(TorusRotation::parse("rot:5").dim() == 0);
    CHECK(TrigMonomial::parse("2:1,-1").descriptor() == "2:1,-1");
    CHECK(TrigMonomial::parse("3:").trivial(3));
    CHECK_THROWS_AS(TorusRotation::parse("rotation:1"), ParseError);
    CHECK_THROWS_AS(TrigMonomial::parse("1"), ParseError);

    CHECK_FALSE(TorusRotation::parse("rot:1:sqrt2,sqrt3").rational_relation().has_value());
    auto rel = TorusRotation::parse("rot:1:sqrt2,sqrt8").rational_relation();
    REQUIRE(rel.has_value());
    CHECK((*rel)[0] == -2 * (*rel)[1]);
    CHECK(TorusRotation::parse("rot:1:1/3").rational_relation().has_value());
}

TEST_CASE("analytic rotation correlations") {
    auto rot = TorusRotation::parse("rot:1:sqrt2");
    CHECK(rotation_correlation(rot, monos({"0:0", "0:0"}), {0, 5}) == cplx(1.0, 0.0));
    for (std::int64_t n : {1, 7, 1000}) {
        cld want = e_ld(-n * std::sqrt(2.0L));
        CHECK(close(rotation_correlation(rot, monos({"0:1", "0:-1"}), {0, n}), want, 1e-15));
    }
    CHECK(rotation_correlation(rot, monos({"0:1", "0:1"}), {0, 3}) == cplx(0.0, 0.0));

    auto cyc = TorusRotation::parse("rot:4:sqrt2,sqrt3");
    CHECK(rotation_correlation(cyc, monos({"1:1,0", "1:0,0"}), {0, 2}) == cplx(0.0, 0.0));
    auto v = rotation_correlation(cyc, monos({"1:1,2", "3:-1,-2"}), {2, 5});
    cld want = e_ld((-3) * std::sqrt(2.0L) + (-6) * std::sqrt(3.0L) + (2.0L + 15) / 4);
    CHECK(close(v, want, 1e-14));

    // common translation leaves the value bit-identical
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        std::int64_t a = rng() % 50, b = rng() % 50, c = rng() % 1000;
        auto f = monos({"1:2,-1", "2:-3,4", "1:1,-3"});
        CHECK(rotation_correlation(cyc, f, {a, b, 0}) == rotation_correlation(cyc, f, {a + c, b + c, c}));
    }
    CHECK_THROWS_AS(rotation_correlation(rot, monos({"0:1,1"}), {0}), DomainError);
}

TEST_CASE("orbit averages converge to the analytic values") {
    std::mt19937_64 rng(11);
    for (const char* d : {"rot:1:sqrt2", "rot:3:sqrt2,sqrt3"}) {
        auto rot = TorusRotation::parse(d);
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<TrigMonomial> f;
            std::vector<std::int64_t> shifts;
            for (int j = 0; j < 3; ++j) {
                TrigMonomial m{static_cast<std::int64_t>(rng() % 5) - 2, {}};
                for (std::size_t i = 0; i < rot.dim(); ++i) m.l.push_back(static_cast<std::int64_t>(rng() % 5) - 2);
                f.push_back(m);
                shifts.push_back(static_cast<std::int64_t>(rng() % 20));
            }
            if (trial % 2 == 0) {  // force a nonzero integral
                f[2].k = -(f[0].k + f[1].k);
                for (std::size_t i = 0; i < rot.dim(); ++i) f[2].l[i] = -(f[0].l[i] + f[1].l[i]);
            }
            auto analytic = rotation_correlation(rot, f, shifts);
            auto orbit = rotation_correlation_orbit(rot, f, shifts, 1'000'000, {0, std::vector<FixedReal>(rot.dim())});
            CHECK(std::abs(orbit - analytic) <= 1e-3);
        }
    }

    // brute orbit from a nonzero start point
    auto rot = TorusRotation::parse("rot:2:sqrt2");
    auto f = monos({"1:1", "0:2"});
    OrbitStart s{1, {FixedReal::parse("1/3")}};
    cld acc = 0;
    const long double a = std::sqrt(2.0L);
    for (int m = 1; m <= 2000; ++m) {
        auto at = [&](int k) { return std::pair<long double, long double>((1 + k) % 2, 1.0L / 3 + k * a); };
        auto [x0, y0] = at(m);
        auto [x1, y1] = at(m + 3);
        acc += e_ld(x0 / 2 + y0) * e_ld(2 * y1);
    }
    CHECK(close(rotation_correlation_orbit(rot, f, {0, 3}, 2000, s), acc / 2000.0L, 1e-12));
}

TEST_CASE("dilated averages") {
    auto rot = TorusRotation::parse("rot:1:sqrt2");
    auto r = ergid2_check(rot, monos({"0:0", "0:0"}), {0, 1}, 3, 1, 1000, 1000, sieve());
    CHECK(r.lhs == cplx(1.0, 0.0));
    CHECK(r.rhs == cplx(1.0, 0.0));
    CHECK(r.analytic == cplx(1.0, 0.0));

    auto z = ergid2_check(rot, monos({"0:1", "0:1"}), {0, 1}, 3, 1, 1000, 1000, sieve());
    CHECK(z.lhs == cplx(0.0, 0.0));
    CHECK(z.rhs == cplx(0.0, 0.0));

    auto w = ergid2_check(rot, monos({"0:1", "0:-1"}), {0, 1}, 3, 1, 20000, 20000, sieve());
    cld lhs = 0, rhs = 0;
    int pc = 0, mc = 0;
    for (auto p : oracle::primes_odd_sieve(20000))
        if (p % 3 == 1) {
            lhs += e_ld(-(long double)p * std::sqrt(2.0L));
            ++pc;
        }
    for (int m = 1; m <= 20000; m += 3) {
        rhs += e_ld(-(long double)m * std::sqrt(2.0L));
        ++mc;
    }
    CHECK(w.prime_count == static_cast<std::uint64_t>(pc));
    CHECK(w.class_count == static_cast<std::uint64_t>(mc));
    CHECK(close(w.lhs, lhs / (long double)pc, 1e-13));
    CHECK(close(w.rhs, rhs / (long double)mc, 1e-13));
    CHECK(w.analytic == cplx(0.0, 0.0));
    CHECK_FALSE(w.relation.has_value());

    // cyclic part only: e(m/2) on odd m is -1
    auto cyc = TorusRotation::parse("rot:2");
    auto c = ergid2_check(cyc, monos({"1:", "1:"}), {0, 1}, 1, 2, 10000, 10000, sieve());
    CHECK(c.rhs == cplx(-1.0, 0.0));
    CHECK(c.analytic == cplx(-1.0, 0.0));
    CHECK(c.analytic_primes == cplx(-1.0, 0.0));
    CHECK(std::abs(c.lhs - cplx(-1.0 + 2.0 / c.prime_count, 0.0)) < 1e-12);

    CHECK_THROWS_AS(ergid2_check(rot, monos({"0:1", "0:-1"}), {0, 1}, 4, 2, 1000, 0, sieve()), DomainError);
}

TEST_CASE("skew product orbits") {
    auto r2 = FixedReal::parse("sqrt2");
    CHECK(skew_orbit_average(r2, FixedReal::parse("1/5"), 0, 0, 1000) == cplx(1.0, 0.0));
    CHECK(std::abs(skew_orbit_average(r2, FixedReal::parse("0"), 0, 1, 10000) - weyl_sum(r2, 10000)) < 1e-15);
    CHECK(std::abs(skew_orbit_average(r2, FixedReal::parse("0"), 0, 1, 10000)) <= weyl_bound(r2, 10000));

    // rational x0 = 2/7: the orbit cycles with period 7
    auto q = FixedReal::parse("2/7");
    auto y0 = FixedReal::parse("1/3");
    cld acc = 0;
    for (int n = 1; n <= 1000; ++n) acc += e_ld(3 * 2.0L / 7 + 1.0L / 3 + n * 2.0L / 7);
    CHECK(close(skew_orbit_average(q, y0, 3, 1, 1000), acc / 1000.0L, 1e-14));
    CHECK(close(skew_orbit_average(q, y0, 0, 7, 700), e_ld(7.0L / 3), 1e-15));
}
