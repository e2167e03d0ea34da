#include "doctest.h"
#include "mcorr/errors.hpp"
#include "mcorr/furstenberg.hpp"
#include "oracles.hpp"

using namespace mcorr;
using oracle::Rational;

namespace {

const FactorSieve& sieve() {
    static auto s = FactorSieve::build(3'000'000);
    return s;
}

MomentSpec spec(std::string_view key) { return MomentSpec::parse(key); }

long double harmonic(std::uint64_t n) {
    long double h = 0;
    for (std::uint64_t m = n; m >= 1; --m) h += 1.0L / m;
    return h;
}

} // namespace

TEST_CASE("bounded sequence descriptors") {
    for (const char* d : {"const:1", "fn:liouville", "fn:liouville@beatty:sqrt2", "phase:1/2", "logphase:1"}) {
        auto s = BoundedSequence::parse(d);
        CHECK(BoundedSequence::parse(s.descriptor()).descriptor() == s.descriptor());
    }
    CHECK_THROWS_AS(BoundedSequence::parse("wave:1"), ParseError);
    CHECK_THROWS_AS(BoundedSequence::parse("const:2"), DomainError);
    CHECK(BoundedSequence::parse("phase:1/2").real_valued());
    CHECK_FALSE(BoundedSequence::parse("phase:1/3").real_valued());

    auto alt = BoundedSequence::parse("phase:1/2").sample(6, sieve());
    for (int n = 1; n <= 6; ++n) CHECK(alt[n] == cplx(n % 2 ? -1.0 : 1.0, 0.0));
    auto beatty = Sequence::parse("beatty:sqrt2");
    auto comp = BoundedSequence::parse("fn:liouville@beatty:sqrt2").sample(1000, sieve());
    for (int n = 1; n <= 1000; ++n) CHECK(comp[n].real() == oracle::liouville(beatty(n)));
    auto w = BoundedSequence::parse("phase:sqrt2").sample(1000, sieve());
    for (int n = 1; n <= 1000; n += 97)
        CHECK(std::abs(w[n] - std::polar(1.0, static_cast<double>(2 * M_PI * std::fmod(n * std::sqrt(2.0L), 1.0L)))) < 1e-12);
}

TEST_CASE("moment spec keys") {
    auto s = spec("c1*@5,c0@3");
    CHECK(s.order() == 2);
    CHECK(s.canonical().key() == "c0@0,c1*@2");
    CHECK(MomentSpec::parse(s.key()).key() == s.key());
    CHECK(s.translated(2).key() == "c1*@7,c0@5");
    CHECK_THROWS_AS(MomentSpec::parse("x0@1"), ParseError);
    CHECK_THROWS_AS(MomentSpec::parse("c0"), ParseError);
}

TEST_CASE("moments") {
    auto sched = CheckpointSchedule::make(10, 10, 100000);
    EmpiricalSystem ones({BoundedSequence::constant(1.0)}, sched, 8, sieve());
    for (const auto& c : ones.moment(spec("c0@0,c0*@3,c0@8")).points) CHECK(c.value == cplx(1.0, 0.0));

    EmpiricalSystem lam({BoundedSequence::parse("fn:liouville")}, CheckpointSchedule::single(10), 4, sieve());
    Rational num = 0;
    for (int m = 1; m <= 10; ++m) num += Rational(oracle::liouville(m), m);
    double want = oracle::to_double(num / oracle::harmonic(10));
    CHECK(std::abs(lam.moment(spec("c0@0")).final_value().real() - want) < 1e-15);
    // real sequences ignore conjugation
    CHECK(lam.moment(spec("c0@0,c0@1")).final_value() == lam.moment(spec("c0*@0,c0*@1")).final_value());
    CHECK_THROWS_AS(lam.moment(spec("c1@0")), DomainError);
    CHECK_THROWS_AS(lam.moment(spec("c0@0,c0@9")), DomainError);

    // canonicalization shares a table entry
    lam.moment(spec("c0@2,c0@3"));
    CHECK(lam.table().count("c0@0,c0@1") == 1);
    CHECK(lam.table().size() == 3);
}

TEST_CASE("canonicalization stays within the shift gap") {
    const std::uint64_t n = 1'000'000;
    auto sched = CheckpointSchedule::make(1000, 10, n);
    EmpiricalSystem emp({BoundedSequence::parse("fn:liouville")}, sched, 4, sieve());
    auto raw = spec("c0@1,c0@2");
    // |lE g(m) - lE g(m+h)| <= (2 H_h + h / (N - h + 1)) / H_N for |g| <= 1
    for (std::int64_t h : {1, 2}) {
        auto gap = shift_invariance_check(emp, {spec("c0@0,c0@1"), spec("c0@0,c0@2")}, h);
        double bound = static_cast<double>((2 * harmonic(h) + h / (n - h + 1.0L)) / harmonic(n));
        CHECK(gap.max_gap <= bound);
        CHECK(gap.max_gap > 0.0);
    }
    auto gap = shift_invariance_check(emp, {spec("c0@0,c0@1")}, 1);
    CHECK(std::abs(emp.moment(raw).final_value() - emp.raw_moment(raw).final_value()) <= gap.max_gap + 1e-15);

    // sum_{m<=N} (-1)^m / m tends to -log 2
    EmpiricalSystem alt({BoundedSequence::parse("phase:1/2")}, sched, 2, sieve());
    auto a = shift_invariance_check(alt, {spec("c0@0")}, 1);
    CHECK(std::abs(a.max_gap - 2 * std::abs(alt.raw_moment(spec("c0@0")).final_value())) < 1e-15);
    CHECK(std::abs(a.max_gap - static_cast<double>(2 * std::log(2.0L) / harmonic(n))) < 1e-6);

    EmpiricalSystem ones({BoundedSequence::constant(1.0)}, sched, 5, sieve());
    CHECK(shift_invariance_check(ones, {spec("c0@0,c0@2")}, 3).max_gap == 0.0);
}

TEST_CASE("admission") {
    auto sched = CheckpointSchedule::make(10000, 2, 1'000'000);
    EmpiricalSystem ones({BoundedSequence::constant(1.0)}, sched, 2, sieve());
    CHECK(admission_test(ones, {spec("c0@0,c0@1")}, 0.0).front().stabilizing);

    // sum e(m theta) / m converges to -log(1 - e(theta)), so the log mean decays like 1/H_N
    EmpiricalSystem weyl({BoundedSequence::parse("phase:sqrt2")}, sched, 1, sieve());
    auto v = admission_test(weyl, {spec("c0@0")}, 1e-2).front();
    CHECK(v.stabilizing);
    std::complex<long double> z = std::polar(1.0L, 2 * std::acos(-1.0L) * (std::sqrt(2.0L) - 1));
    auto limit = -std::log(1.0L - z) / harmonic(1'000'000);
    auto got = weyl.moment(spec("c0@0")).final_value();
    CHECK(std::abs(got.real() - static_cast<double>(limit.real())) < 1e-5);
    CHECK(std::abs(got.imag() - static_cast<double>(limit.imag())) < 1e-5);

    EmpiricalSystem drift({BoundedSequence::parse("logphase:1")}, sched, 1, sieve());
    CHECK_FALSE(admission_test(drift, {spec("c0@0")}, 1e-2).front().stabilizing);

    EmpiricalSystem short_run({BoundedSequence::constant(1.0)}, CheckpointSchedule::make(10, 10, 100), 1, sieve());
    CHECK_THROWS_AS(admission_test(short_run, {spec("c0@0")}, 1.0), DomainError);
}

TEST_CASE("tau and running count") {
    IndicatorCorrespondence all(std::vector<std::uint8_t>(50, 1));
    for (std::uint64_t n = 0; n < 50; ++n) {
        CHECK(all.tau(n) == n);
        CHECK(all.running_count(n) == n);
    }
    std::vector<std::uint8_t> odd(20);
    for (std::size_t i = 0; i < odd.size(); ++i) odd[i] = i % 2;
    IndicatorCorrespondence ic(odd);
    CHECK(ic.tau(0) == 1);
    CHECK(ic.tau(1) == 3);
    CHECK(ic.tau(2) == 5);
    CHECK(ic.running_count(0) == 0);
    CHECK(ic.running_count(4) == 2);
    CHECK_THROWS_AS(ic.tau(10), RangeError);
    CHECK_THROWS_AS(ic.running_count(21), RangeError);
    CHECK(IndicatorCorrespondence({0, 1, 0}, true).tau(5) == 0);

    // inversion on every one of y
    for (std::uint64_t m = 0; m < odd.size(); ++m)
        if (odd[m]) CHECK(ic.tau(ic.running_count(m)) == m);
    for (std::uint64_t n = 0; n < 9; ++n) CHECK(ic.running_count(ic.tau(n) + 1) == n + 1);

    auto beatty = Sequence::parse("beatty:sqrt2");
    auto range = IndicatorCorrespondence::of_range(beatty, static_cast<std::uint64_t>(beatty(10001)) + 1);
    for (std::int64_t j = 0; j <= 10000; ++j) CHECK(range.tau(static_cast<std::uint64_t>(j)) == static_cast<std::uint64_t>(beatty(j + 1)));
}

TEST_CASE("correspondence identity") {
    auto one = BoundedSequence::constant(1.0);
    auto id = correspondence_identity_check({BoundedSequence::parse("fn:liouville")}, Sequence::identity(), {0}, 5000, sieve());
    CHECK(id.density == 1.0);
    CHECK(std::abs(id.lhs - id.rhs) < 1e-15);

    const std::uint64_t n = 1'000'000;
    auto even = correspondence_identity_check({one}, Sequence::parse("poly:0,2"), {0}, n, sieve());
    CHECK(even.density == 0.5);
    CHECK(even.rhs == cplx(0.5, 0.0));
    CHECK(even.gap <= 2 / std::log(double(n)));
    // LHS is the log density of the even numbers: H_{N/2} / (2 H_N)
    CHECK(std::abs(even.lhs.real() - static_cast<double>(harmonic(n / 2) / (2 * harmonic(n)))) < 1e-12);

    auto lam = correspondence_identity_check({BoundedSequence::parse("fn:liouville")}, Sequence::parse("beatty:sqrt2"),
                                             {0}, 10000, sieve());
    // direct: sum over a(k) <= N of lambda(a(k)) / a(k)
    auto beatty = Sequence::parse("beatty:sqrt2");
    long double num = 0;
    for (std::int64_t k = 1; beatty(k) <= 10000; ++k) num += oracle::liouville(beatty(k)) / static_cast<long double>(beatty(k));
    CHECK(std::abs(lam.lhs.real() - static_cast<double>(num / harmonic(10000))) < 1e-13);

    CHECK_THROWS_AS(correspondence_identity_check({one}, Sequence::parse("poly:0,2"), {0}, 1, sieve()), DomainError);
}
