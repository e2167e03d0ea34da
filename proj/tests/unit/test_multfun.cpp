#include <numeric>
#include <random>

#include "doctest.h"
#include "mcorr/errors.hpp"
#include "mcorr/multfun.hpp"
#include "oracles.hpp"

using namespace mcorr;

namespace {

double dist(cplx a, cplx b) { return std::abs(a - b); }

std::vector<MultFn> builtins() {
    return {MultFn::liouville(),       MultFn::moebius(),         MultFn::one(),
            MultFn::mu_squared(),      MultFn::archimedean(0.5),  MultFn::archimedean(-2.25),
            MultFn::root_twist(3),     MultFn::root_twist(5, 2),  MultFn::root_twist(2),
            MultFn::dirichlet(4, 1),   MultFn::dirichlet(7, 2),   MultFn::dirichlet(15, 5),
            MultFn::dirichlet(1, 0)};
}

} // namespace

TEST_CASE("builtin examples") {
    auto chi = MultFn::dirichlet(4, 1);
    CHECK(chi(3) == cplx(-1, 0));
    CHECK(chi(2) == cplx(0, 0));
    CHECK(chi(5) == cplx(1, 0));
    for (std::int64_t n = 1; n < 200; ++n) {
        // the unique non-principal character mod 4
        double expect = n % 2 == 0 ? 0.0 : ((n - 1) / 2 % 2 == 0 ? 1.0 : -1.0);
        REQUIRE(chi(n) == cplx(expect, 0));
    }
    CHECK(MultFn::one()(123456) == cplx(1, 0));

    auto rt = MultFn::root_twist(3);
    cplx w{std::cos(2 * M_PI / 3), std::sin(2 * M_PI / 3)};
    for (std::int64_t p : {2, 3, 5, 7, 101}) CHECK(dist(rt(p), w) < 1e-15);
    CHECK(dist(rt(4), w * w) < 1e-15);
    CHECK(dist(rt(8), cplx(1, 0)) < 1e-15);
    CHECK(dist(rt(30), w * w * w) < 1e-15);
}

TEST_CASE("eval") {
    CHECK(eval(MultFn::liouville(), 12) == cplx(-1, 0));
    for (const auto& f : builtins()) {
        CHECK(eval(f, -5) == cplx(0, 0));
        CHECK(eval(f, 0) == cplx(0, 0));
        CHECK(eval(f, 1) == cplx(1, 0));
    }
    CHECK(dist(eval(MultFn::archimedean(1.0), 2), std::polar(1.0, std::log(2.0))) < 1e-15);
    auto custom = MultFn::custom("twos", [](std::uint64_t p, unsigned e) {
        return p == 2 ? cplx(0.5 * e, 0) : cplx(1, 0);
    }, false, true);
    CHECK(eval(custom, 8) == cplx(1.5, 0));
    CHECK(eval(custom, 24) == cplx(1.5, 0));
}

TEST_CASE("eval_range examples") {
    auto s = FactorSieve::build(1000);
    auto mu = eval_range(MultFn::moebius(), {1, 6}, s);
    CHECK(mu == std::vector<cplx>{1, -1, -1, 0, -1, 1});
    for (auto z : eval_range(MultFn::one(), {500, 600}, s)) CHECK(z == cplx(1, 0));
    auto chi = eval_range(MultFn::dirichlet(4, 1), {1, 8}, s);
    CHECK(chi == std::vector<cplx>{1, 0, -1, 0, 1, 0, -1, 0});
    CHECK_THROWS_AS(eval_range(MultFn::one(), {1, 1001}, s), DomainError);
}

TEST_CASE("eval_range agrees with pointwise eval and stays in the disc") {
    auto s = FactorSieve::build(100000, {.segment_size = 8192});
    auto fs = builtins();
    fs.push_back(MultFn::custom("phase", [](std::uint64_t p, unsigned e) {
        return std::polar(1.0 / e, 0.37 * static_cast<double>(p % 11));
    }, false));
    for (const auto& f : fs) {
        auto range = eval_range(f, {1, 100000}, s);
        auto table = value_table(f, 100000, s);
        double worst = 0, norm = 0;
        for (std::int64_t n = 1; n <= 100000; ++n) {
            worst = std::max(worst, dist(range[n - 1], f(n)));
            worst = std::max(worst, dist(table.at(n), f(n)));
            norm = std::max(norm, std::abs(range[n - 1]));
        }
        INFO(f.descriptor());
        CHECK(worst <= 1e-12);
        CHECK(norm <= 1 + 1e-12);
        CHECK(table.real() == f.real_valued());
    }
    auto partial = eval_range(MultFn::liouville(), {777, 4321}, s);
    for (std::int64_t n = 777; n <= 4321; ++n) REQUIRE(partial[n - 777] == cplx(oracle::liouville(n), 0));
}

TEST_CASE("multiplicativity on random coprime pairs") {
    std::mt19937_64 rng(12345);
    std::uniform_int_distribution<std::int64_t> pick(1, 3000);
    for (const auto& f : builtins()) {
        int done = 0, bad = 0;
        while (done < 10000) {
            std::int64_t m = pick(rng), n = pick(rng);
            bool coprime = std::gcd(m, n) == 1;
            if (!coprime && !f.completely_multiplicative()) continue;
            if (dist(f(m * n), f(m) * f(n)) > 1e-12) ++bad;
            ++done;
        }
        INFO(f.descriptor());
        CHECK(bad == 0);
    }
}

TEST_CASE("character structure") {
    for (std::uint64_t q = 1; q <= 60; ++q) {
        auto chars = DirichletCharacter::all(q);
        std::uint64_t phi = 0;
        for (std::uint64_t n = 1; n <= q; ++n) phi += std::gcd(n, q) == 1;
        REQUIRE(chars.size() == phi);

        // primitive count: sum over d | q of mu(q/d) phi(d)
        std::int64_t expect_primitive = 0;
        for (std::uint64_t d = 1; d <= q; ++d) {
            if (q % d) continue;
            std::int64_t phid = 0;
            for (std::uint64_t n = 1; n <= d; ++n) phid += std::gcd(n, d) == 1;
            expect_primitive += oracle::moebius(static_cast<std::int64_t>(q / d)) * phid;
        }
        std::int64_t primitive = 0;
        for (std::size_t i = 0; i < chars.size(); ++i) {
            const auto& chi = chars[i];
            primitive += chi.primitive();
            CHECK(chi(1) == cplx(1, 0));
            cplx total = 0;
            for (std::int64_t n = 1; n <= 10000; ++n) {
                REQUIRE(chi(n + static_cast<std::int64_t>(q)) == chi(n));
                REQUIRE((chi(n) == cplx(0, 0)) == (std::gcd<std::uint64_t>(n, q) != 1));
            }
            for (std::int64_t m = 1; m <= static_cast<std::int64_t>(q); ++m) {
                total += chi(m);
                for (std::int64_t n = 1; n <= static_cast<std::int64_t>(q); ++n)
                    REQUIRE(dist(chi(m * n), chi(m) * chi(n)) < 1e-12);
            }
            CHECK(std::abs(total) < 1e-9 * q + (i == 0 ? phi : 0.0));
            for (std::size_t j = 0; j < i; ++j) {
                double diff = 0;
                for (std::uint64_t n = 0; n < q; ++n) diff += std::abs(chars[j].table()[n] - chi.table()[n]);
                CHECK(diff > 1e-6);
            }
        }
        INFO("q = " << q);
        CHECK(primitive == expect_primitive);
    }
    CHECK_THROWS_AS(DirichletCharacter(4, 2), DomainError);
}

TEST_CASE("descriptors round trip") {
    for (const auto& f : builtins()) CHECK(MultFn::parse(f.descriptor()).descriptor() == f.descriptor());
    CHECK(MultFn::parse("dirichlet:4:1").descriptor() == "dirichlet:4:1");
    CHECK(MultFn::parse("root_twist:3").descriptor() == "root_twist:3:1");
    CHECK(MultFn::parse("archimedean:0.1").archimedean_t() == 0.1);
    CHECK(MultFn::parse(" mu ").kind() == FnKind::moebius);
    for (const char* bad : {"dirichlet:4", "dirichlet:4:7", "root_twist:1", "root_twist:4:8", "archimedean:x",
                            "archimedean", "liouville:2", "zeta", "", "custom:foo"})
        CHECK_THROWS_AS(MultFn::parse(bad), ParseError);
}
