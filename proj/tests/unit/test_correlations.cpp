#include <random>

#include "doctest.h"
#include "mcorr/correlations.hpp"
#include "mcorr/errors.hpp"
#include "mcorr/parallel.hpp"
#include "oracles.hpp"

using namespace mcorr;
using oracle::Rational;

namespace {

const FactorSieve& sieve() {
    static auto s = FactorSieve::build(2'000'000);
    return s;
}

// lE_{m<=N} prod_j lambda(m + s_j), exact
Rational liouville_corr(const std::vector<std::int64_t>& s, std::int64_t n) {
    Rational num = 0;
    for (std::int64_t m = 1; m <= n; ++m) {
        int p = 1;
        for (auto x : s) p *= oracle::liouville(m + x);
        num += Rational(p, m);
    }
    return num / oracle::harmonic(static_cast<std::uint64_t>(n));
}

long double brute_log(const std::function<long double(std::int64_t)>& term, std::int64_t n) {
    long double num = 0, den = 0;
    for (std::int64_t m = 1; m <= n; ++m) {
        num += term(m) / m;
        den += 1.0L / m;
    }
    return num / den;
}

const std::vector<MultFn> two_lambda{MultFn::liouville(), MultFn::liouville()};

} // namespace

TEST_CASE("fixed shift examples") {
    auto r = corr_fixed_shifts(two_lambda, {0, 1}, CheckpointSchedule::single(10), AverageKind::logarithmic, sieve());
    CHECK(std::abs(r.report.final_value().real() - (-0.485165)) < 5e-7);
    CHECK(std::abs(r.report.final_value().real() - oracle::to_double(liouville_corr({0, 1}, 10))) < 1e-15);

    auto sched = CheckpointSchedule::make(10, 10, 100000);
    std::vector<MultFn> ones(3, MultFn::one());
    for (auto kind : {AverageKind::cesaro, AverageKind::logarithmic}) {
        auto all = corr_fixed_shifts(ones, {0, 4, 9}, sched, kind, sieve());
        for (const auto& c : all.report.points) CHECK(c.value == cplx(1.0, 0.0));
    }

    auto three = corr_fixed_shifts({MultFn::liouville(), MultFn::moebius(), MultFn::liouville()}, {0, 1, 3},
                                   CheckpointSchedule::single(5000), AverageKind::logarithmic, sieve());
    long double want = brute_log(
        [](std::int64_t m) { return oracle::liouville(m) * oracle::moebius(m + 1) * oracle::liouville(m + 3); }, 5000);
    CHECK(std::abs(three.report.final_value().real() - static_cast<double>(want)) < 1e-13);

    CHECK_THROWS_AS(corr_fixed_shifts(two_lambda, {0, 1}, CheckpointSchedule::single(2'000'000),
                                      AverageKind::logarithmic, sieve()),
                    DomainError);
    CHECK_THROWS_AS(corr_fixed_shifts(two_lambda, {0, -1}, CheckpointSchedule::single(10), AverageKind::logarithmic,
                                      sieve()),
                    DomainError);
}

TEST_CASE("values bounded and real for real functions") {
    auto sched = CheckpointSchedule::make(10, 4, 200000);
    std::vector<MultFn> fs{MultFn::archimedean(1.0), MultFn::root_twist(5, 2), MultFn::dirichlet(7, 2)};
    auto r = corr_fixed_shifts(fs, {0, 2, 5}, sched, AverageKind::logarithmic, sieve());
    for (const auto& c : r.report.points) CHECK(std::abs(c.value) <= 1 + 1e-12);
    auto re = corr_fixed_shifts({MultFn::liouville(), MultFn::mu_squared()}, {0, 7}, sched, AverageKind::cesaro, sieve());
    for (const auto& c : re.report.points) {
        CHECK(std::abs(c.value) <= 1 + 1e-12);
        CHECK(std::abs(c.value.imag()) <= 1e-12);
    }
}

TEST_CASE("identity composition matches fixed shifts bit for bit") {
    auto sched = CheckpointSchedule::make(100, 10, 1'000'000);
    auto a = corr_along_deterministic(two_lambda, Sequence::identity(), {1, 2}, sched, sieve());
    auto b = corr_fixed_shifts(two_lambda, {1, 2}, sched, AverageKind::logarithmic, sieve());
    REQUIRE(a.report.points.size() == b.report.points.size());
    for (std::size_t i = 0; i < a.report.points.size(); ++i) CHECK(a.report.points[i].value == b.report.points[i].value);
    CHECK(a.mode == CorrelationMode::composition);
}

TEST_CASE("composition with a Beatty sequence") {
    auto beatty = Sequence::parse("beatty:sqrt2");
    auto r = corr_along_deterministic(two_lambda, beatty, {1, 2}, CheckpointSchedule::single(3000), sieve());
    long double want = brute_log(
        [&](std::int64_t m) { return oracle::liouville(beatty(m + 1)) * oracle::liouville(beatty(m + 2)); }, 3000);
    CHECK(std::abs(r.report.final_value().real() - static_cast<double>(want)) < 1e-13);
    CHECK_THROWS_AS(corr_along_deterministic(two_lambda, beatty, {1, 2}, CheckpointSchedule::single(1'500'000), sieve()),
                    DomainError);
}

TEST_CASE("family shifts") {
    auto family = SequenceFamily::parse("beatty:sqrt2;beatty:sqrt3");
    std::vector<MultFn> three(3, MultFn::liouville());
    auto r = corr_shifted_by_family(three, family, {100}, CheckpointSchedule::single(4000), sieve());
    CHECK(r.mode == CorrelationMode::family);
    CHECK(r.shifts == std::vector<std::int64_t>{0, 141, 173});
    CHECK(r.outer_norm == 100);
    long double want = brute_log(
        [](std::int64_t m) { return oracle::liouville(m) * oracle::liouville(m + 141) * oracle::liouville(m + 173); },
        4000);
    CHECK(std::abs(r.report.final_value().real() - static_cast<double>(want)) < 1e-13);

    std::vector<MultFn> ones(3, MultFn::one());
    CHECK(corr_shifted_by_family(ones, family, {100}, CheckpointSchedule::single(4000), sieve()).report.final_value() ==
          cplx(1.0, 0.0));
    CHECK_THROWS_AS(corr_shifted_by_family(two_lambda, family, {100}, CheckpointSchedule::single(10), sieve()),
                    DomainError);
}

TEST_CASE("identity check") {
    std::vector<MultFn> ones(2, MultFn::one());
    auto beatty = Sequence::parse("beatty:sqrt2");
    auto t = identity_check_deterministic(ones, beatty, {1, 2}, 50, 5000, sieve());
    CHECK(t.lhs == cplx(1.0, 0.0));
    CHECK(t.rhs == cplx(1.0, 0.0));
    CHECK(t.gap == 0.0);

    // small instance against a direct double sum
    auto s = identity_check_deterministic(two_lambda, beatty, {1, 2}, 30, 2000, sieve());
    long double num = 0, den = 0;
    for (std::int64_t n = 1; n <= 30; ++n) {
        std::int64_t u = beatty(n + 1), v = beatty(n + 2);
        num += brute_log([&](std::int64_t m) { return oracle::liouville(m + u) * oracle::liouville(m + v); }, 2000) / n;
        den += 1.0L / n;
    }
    CHECK(std::abs(s.rhs.real() - static_cast<double>(num / den)) < 1e-12);
    long double lhs = brute_log(
        [&](std::int64_t m) { return oracle::liouville(beatty(m + 1)) * oracle::liouville(beatty(m + 2)); }, 2000);
    CHECK(std::abs(s.lhs.real() - static_cast<double>(lhs)) < 1e-13);
    CHECK(s.gap == doctest::Approx(std::abs(s.lhs - s.rhs)));
}

TEST_CASE("product identity") {
    auto family = SequenceFamily::parse("beatty:sqrt2;beatty:sqrt3");
    std::vector<MultFn> ones(3, MultFn::one());
    auto t = product_identity_check(ones, family, 20, 3000, sieve());
    CHECK(t.lhs == 1.0);
    CHECK(t.rhs_a == 1.0);
    CHECK(t.rhs_b == 1.0);

    std::vector<MultFn> sq(3, MultFn::mu_squared());
    auto p = product_identity_check(sq, family, 10, 1000, sieve());
    long double lhs = 0;
    for (std::int64_t n = 1; n <= 10; ++n) {
        std::int64_t u = family[0]({n}), v = family[1]({n});
        lhs += brute_log(
            [&](std::int64_t m) {
                return std::abs(oracle::moebius(m) * oracle::moebius(m + u) * oracle::moebius(m + v));
            },
            1000);
    }
    CHECK(std::abs(p.lhs - static_cast<double>(lhs / 10)) < 1e-12);
    long double mean = brute_log([](std::int64_t m) { return std::abs(oracle::moebius(m)); }, 1000);
    REQUIRE(p.means.size() == 3);
    CHECK(std::abs(p.means[0] - static_cast<double>(mean)) < 1e-13);
    CHECK(std::abs(p.rhs_b - p.means[0] * p.means[1] * p.means[2]) < 1e-15);
    CHECK(std::abs(p.rhs_a - p.means[1] * p.means[2]) < 1e-15);

    std::vector<MultFn> bad{MultFn::archimedean(1.0), MultFn::one(), MultFn::one()};
    CHECK_THROWS_AS(product_identity_check(bad, family, 10, 100, sieve()), DomainError);
}

TEST_CASE("pattern densities") {
    auto sched = CheckpointSchedule::make(10, 10, 100000);
    std::vector<MultFn> three(3, MultFn::liouville());
    std::vector<ConvergenceReport> all;
    for (int mask = 0; mask < 8; ++mask) {
        std::vector<int> eps{mask & 1 ? -1 : 1, mask & 2 ? -1 : 1, mask & 4 ? -1 : 1};
        all.push_back(pattern_density(three, FixedShifts{{0, 1, 2}}, eps, sched, sieve()).report);
    }
    for (std::size_t k = 0; k < sched.points().size(); ++k) {
        double total = 0;
        for (const auto& r : all) {
            double v = r.points[k].value.real();
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            total += v;
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);
    }

    std::vector<MultFn> ones(2, MultFn::one());
    CHECK(pattern_density(ones, FixedShifts{{0, 3}}, {1, 1}, sched, sieve()).report.final_value() == cplx(1.0, 0.0));
    CHECK(pattern_density(ones, FixedShifts{{0, 3}}, {1, -1}, sched, sieve()).report.final_value() == cplx(0.0, 0.0));
    CHECK_THROWS_AS(pattern_density({MultFn::moebius()}, FixedShifts{{0}}, {1}, sched, sieve()), DomainError);
    CHECK_THROWS_AS(pattern_density({MultFn::liouville()}, FixedShifts{{0}}, {0}, sched, sieve()), DomainError);
}

TEST_CASE("discrepancy growth") {
    auto r = discrepancy_growth(MultFn::liouville(), Sequence::identity(), CheckpointSchedule::single(10), sieve());
    CHECK(r.final_value().real() == 2.0);
    auto lin = discrepancy_growth(MultFn::one(), Sequence::parse("beatty:sqrt2"), CheckpointSchedule::make(10, 10, 100000),
                                  sieve());
    for (const auto& c : lin.points) CHECK(c.value.real() == static_cast<double>(c.n));

    auto beatty = Sequence::parse("beatty:sqrt2");
    auto b = discrepancy_growth(MultFn::liouville(), beatty, CheckpointSchedule::single(5000), sieve());
    long double s = 0, best = 0;
    for (std::int64_t k = 1; k <= 5000; ++k) {
        s += oracle::liouville(beatty(k));
        best = std::max(best, std::abs(s));
    }
    CHECK(b.final_value().real() == static_cast<double>(best));
}

TEST_CASE("prime dilation") {
    std::vector<MultFn> ones(2, MultFn::one());
    auto t = prime_dilation_identity_check(ones, {0, 2}, 1, 100, 10000, sieve());
    CHECK(t.lhs == cplx(1.0, 0.0));
    CHECK(t.rhs == cplx(1.0, 0.0));

    auto lone = prime_dilation_identity_check({MultFn::liouville()}, {0}, 1, 100, 10000, sieve());
    CHECK(lone.lhs == lone.rhs);

    auto s = prime_dilation_identity_check(two_lambda, {0, 2}, 4, 60, 2000, sieve());
    long double rhs = 0;
    int count = 0;
    for (std::int64_t p : {5, 13, 17, 29, 37, 41, 53}) {
        rhs += brute_log([&](std::int64_t m) { return oracle::liouville(m) * oracle::liouville(m + 2 * p); }, 2000);
        ++count;
    }
    CHECK(std::abs(s.rhs.real() - static_cast<double>(rhs / count)) < 1e-12);
    CHECK_THROWS_AS(prime_dilation_identity_check(two_lambda, {0, 2}, 1, 1'000'000, 10, sieve()), DomainError);
    CHECK_THROWS_AS(prime_dilation_identity_check(two_lambda, {0, 2}, 1000, 10, 10, sieve()), DomainError);
}

TEST_CASE("thread count does not change results") {
    auto sched = CheckpointSchedule::make(100, 10, 1'000'000);
    auto family = SequenceFamily::parse("beatty:sqrt2;beatty:sqrt3");
    std::vector<MultFn> sq(3, MultFn::mu_squared());
    auto run = [&] {
        std::vector<double> out;
        for (const auto& c : corr_fixed_shifts(two_lambda, {0, 1}, sched, AverageKind::logarithmic, sieve()).report.points)
            out.push_back(c.value.real());
        auto p = product_identity_check(sq, family, 30, 100000, sieve());
        out.push_back(p.lhs);
        auto d = prime_dilation_identity_check(two_lambda, {0, 2}, 1, 200, 100000, sieve());
        out.push_back(d.rhs.real());
        return out;
    };
    std::vector<double> one, four;
    {
        ScopedThreadCount guard(1);
        one = run();
    }
    {
        ScopedThreadCount guard(4);
        four = run();
    }
    CHECK(one == four);
}
