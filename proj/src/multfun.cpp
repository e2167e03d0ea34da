#include "mcorr/multfun.hpp"

#include <cmath>
#include <string>

#include "mcorr/errors.hpp"
#include "mcorr/parallel.hpp"

namespace mcorr {

namespace {

cplx polar_unit(long double angle) {
    return {static_cast<double>(std::cos(angle)), static_cast<double>(std::sin(angle))};
}

} // namespace

MultFn MultFn::liouville() { return MultFn(FnKind::liouville, true, true); }
MultFn MultFn::moebius() { return MultFn(FnKind::moebius, false, true); }
MultFn MultFn::one() { return MultFn(FnKind::one, true, true); }
MultFn MultFn::mu_squared() { return MultFn(FnKind::mu_squared, false, true); }

MultFn MultFn::archimedean(double t) {
    if (!std::isfinite(t)) throw DomainError("archimedean: t must be finite");
    MultFn f(FnKind::archimedean, true, t == 0.0);
    f.t_ = t;
    return f;
}

MultFn MultFn::root_twist(unsigned d, unsigned k) {
    if (d < 2) throw DomainError("root_twist: order d must be at least 2");
    if (k % d == 0) throw DomainError("root_twist: root e(k/d) must be nontrivial (k not divisible by d)");
    MultFn f(FnKind::root_twist, true, (2 * k) % d == 0);
    f.d_ = d;
    f.k_ = k % d;
    return f;
}

MultFn MultFn::dirichlet(std::uint64_t q, std::uint64_t index) {
    auto chi = std::make_shared<const DirichletCharacter>(q, index);
    MultFn f(FnKind::dirichlet, true, chi->real_valued());
    f.character_ = std::move(chi);
    return f;
}

MultFn MultFn::custom(std::string name, PrimePowerRule rule, bool completely_multiplicative, bool real_valued) {
    if (!rule) throw DomainError("custom: prime-power rule is empty");
    MultFn f(FnKind::custom, completely_multiplicative, real_valued);
    f.rule_ = std::move(rule);
    f.name_ = std::move(name);
    return f;
}

std::string MultFn::descriptor() const {
    switch (kind_) {
    case FnKind::liouville: return "liouville";
    case FnKind::moebius: return "moebius";
    case FnKind::one: return "one";
    case FnKind::mu_squared: return "mu_squared";
    case FnKind::archimedean: return "archimedean:" + format_double(t_);
    case FnKind::root_twist: return "root_twist:" + std::to_string(d_) + ":" + std::to_string(k_);
    case FnKind::dirichlet:
        return "dirichlet:" + std::to_string(character_->modulus()) + ":" + std::to_string(character_->index());
    case FnKind::custom: return "custom:" + name_;
    }
    return {};
}

MultFn MultFn::parse(std::string_view text) {
    const std::string where = "function descriptor '" + std::string(text) + "'";
    auto parts = split_list(text, ':');
    if (parts.empty()) throw ParseError(where, "empty descriptor");
    const std::string& name = parts[0];
    auto arity = [&](std::size_t lo, std::size_t hi) {
        if (parts.size() - 1 < lo || parts.size() - 1 > hi)
            throw ParseError(where, "'" + name + "' takes " + std::to_string(lo) +
                                        (lo == hi ? "" : "-" + std::to_string(hi)) + " parameter(s)");
    };
    try {
        if (name == "liouville" || name == "lambda") { arity(0, 0); return liouville(); }
        if (name == "moebius" || name == "mobius" || name == "mu") { arity(0, 0); return moebius(); }
        if (name == "one") { arity(0, 0); return one(); }
        if (name == "mu_squared" || name == "mu2") { arity(0, 0); return mu_squared(); }
        if (name == "archimedean") {
            arity(1, 1);
            return archimedean(parse_double(parts[1], where));
        }
        if (name == "root_twist") {
            arity(1, 2);
            auto d = parse_int(parts[1], where);
            auto k = parts.size() > 2 ? parse_int(parts[2], where) : 1;
            if (d < 2 || d > 1'000'000 || k < 0) throw ParseError(where, "need d >= 2 and k >= 0");
            return root_twist(static_cast<unsigned>(d), static_cast<unsigned>(k % d));
        }
        if (name == "dirichlet") {
            arity(2, 2);
            return dirichlet(parse_uint(parts[1], where), parse_uint(parts[2], where));
        }
        if (name == "custom") throw ParseError(where, "custom functions have no textual form");
    } catch (const DomainError& e) {
        throw ParseError(where, e.what());
    }
    throw ParseError(where, "unknown function '" + name + "'");
}

cplx MultFn::at_prime_power(std::uint64_t p, unsigned e) const {
    switch (kind_) {
    case FnKind::liouville: return {e % 2 == 0 ? 1.0 : -1.0, 0.0};
    case FnKind::moebius: return {e == 1 ? -1.0 : 0.0, 0.0};
    case FnKind::one: return {1.0, 0.0};
    case FnKind::mu_squared: return {e == 1 ? 1.0 : 0.0, 0.0};
    case FnKind::archimedean:
        return polar_unit(static_cast<long double>(t_) * e * std::log(static_cast<long double>(p)));
    case FnKind::root_twist:
        return unit_root(static_cast<std::int64_t>(k_) * e, d_);
    case FnKind::dirichlet: {
        // completely multiplicative: chi(p^e) = chi(p^e mod q)
        std::uint64_t q = character_->modulus();
        unsigned __int128 r = 1 % q, b = p % q;
        for (unsigned i = 0; i < e; ++i) r = r * b % q;
        return character_->table()[static_cast<std::uint64_t>(r)];
    }
    case FnKind::custom: return rule_(p, e);
    }
    return {};
}

cplx MultFn::operator()(std::int64_t n) const {
    if (n <= 0) return {0.0, 0.0};
    auto m = static_cast<std::uint64_t>(n);
    switch (kind_) {
    case FnKind::one: return {1.0, 0.0};
    case FnKind::archimedean: return polar_unit(static_cast<long double>(t_) * std::log(static_cast<long double>(m)));
    case FnKind::dirichlet: return (*character_)(n);
    default: break;
    }
    cplx value{1.0, 0.0};
    for (std::uint64_t p = 2; p <= m / p; ++p) {
        if (m % p) continue;
        unsigned e = 0;
        while (m % p == 0) {
            m /= p;
            ++e;
        }
        value *= at_prime_power(p, e);
        if (value == cplx{0.0, 0.0}) return value;
    }
    if (m > 1) value *= at_prime_power(m, 1);
    return value;
}

namespace {

// f on [lo, hi] by visiting every prime-power factor; works for any rule.
void fill_by_prime_powers(const MultFn& f, Window w, const FactorSieve& sieve, double* re, double* im) {
    const std::uint64_t seg = sieve.segment_size();
    const std::size_t segments = (w.size() + seg - 1) / seg;
    parallel_for(segments, [&](std::size_t s) {
        std::uint64_t lo = w.lo + s * seg;
        std::uint64_t hi = std::min(w.hi, lo + seg - 1);
        std::size_t len = hi - lo + 1;
        std::vector<std::uint64_t> rest(len);
        std::vector<cplx> val(len, cplx{1.0, 0.0});
        for (std::size_t i = 0; i < len; ++i) rest[i] = lo + i;
        for (std::uint64_t p : sieve.base_primes()) {
            if (p * p > hi) break;
            for (std::uint64_t m = (lo + p - 1) / p * p; m <= hi; m += p) {
                std::size_t i = m - lo;
                unsigned e = 0;
                while (rest[i] % p == 0) {
                    rest[i] /= p;
                    ++e;
                }
                val[i] *= f.at_prime_power(p, e);
            }
        }
        for (std::size_t i = 0; i < len; ++i) {
            if (rest[i] > 1) val[i] *= f.at_prime_power(rest[i], 1);
            std::size_t out = (lo - w.lo) + i;
            re[out] = val[i].real();
            if (im) im[out] = val[i].imag();
        }
    });
}

// t may be null for kinds that never read it (archimedean, dirichlet, one).
void fill_direct(const MultFn& f, Window w, const ArithmeticTable* t, double* re, double* im) {
    const std::size_t len = w.size();
    const std::uint64_t lo = w.lo;
    switch (f.kind()) {
    case FnKind::liouville:
        for (std::size_t i = 0; i < len; ++i) re[i] = t->lambda[i];
        return;
    case FnKind::moebius:
        for (std::size_t i = 0; i < len; ++i) re[i] = t->mobius[i];
        return;
    case FnKind::one:
        for (std::size_t i = 0; i < len; ++i) re[i] = 1.0;
        return;
    case FnKind::mu_squared:
        for (std::size_t i = 0; i < len; ++i) re[i] = t->mobius[i] != 0 ? 1.0 : 0.0;
        return;
    case FnKind::root_twist: {
        std::vector<cplx> roots(f.root_order());
        for (unsigned r = 0; r < f.root_order(); ++r) roots[r] = unit_root(r, f.root_order());
        for (std::size_t i = 0; i < len; ++i) {
            cplx z = roots[(static_cast<std::uint64_t>(f.root_index()) * t->big_omega[i]) % f.root_order()];
            re[i] = z.real();
            if (im) im[i] = z.imag();
        }
        return;
    }
    case FnKind::archimedean:
    case FnKind::dirichlet:
        for (std::size_t i = 0; i < len; ++i) {
            cplx z = f(static_cast<std::int64_t>(lo + i));
            re[i] = z.real();
            if (im) im[i] = z.imag();
        }
        return;
    case FnKind::custom: break;
    }
}

bool needs_table(FnKind k) {
    return k == FnKind::liouville || k == FnKind::moebius || k == FnKind::mu_squared || k == FnKind::root_twist;
}

} // namespace

ValueTable value_table(const MultFn& f, const ArithmeticTable& arith, const FactorSieve& sieve) {
    if (arith.window.lo != 1) throw DomainError("value_table: arithmetic table must start at 1");
    std::size_t n = arith.window.hi + 1;
    std::vector<double> re(n, 0.0);
    std::vector<double> im(f.real_valued() ? 0 : n, 0.0);
    double* im_out = im.empty() ? nullptr : im.data() + 1;
    if (f.kind() == FnKind::custom)
        fill_by_prime_powers(f, arith.window, sieve, re.data() + 1, im_out);
    else
        fill_direct(f, arith.window, &arith, re.data() + 1, im_out);
    return ValueTable(std::move(re), std::move(im));
}

ValueTable value_table(const MultFn& f, std::uint64_t hi, const FactorSieve& sieve) {
    if (hi < 1) return ValueTable(std::vector<double>(1, 0.0), {});
    if (needs_table(f.kind())) return value_table(f, sieve.arithmetic_table({1, hi}), sieve);
    if (hi > sieve.limit())
        throw DomainError("value_table: " + std::to_string(hi) + " exceeds sieve limit " +
                          std::to_string(sieve.limit()));
    std::size_t n = hi + 1;
    std::vector<double> re(n, 0.0);
    std::vector<double> im(f.real_valued() ? 0 : n, 0.0);
    double* im_out = im.empty() ? nullptr : im.data() + 1;
    if (f.kind() == FnKind::custom) {
        fill_by_prime_powers(f, {1, hi}, sieve, re.data() + 1, im_out);
    } else {
        fill_direct(f, {1, hi}, nullptr, re.data() + 1, im_out);
    }
    return ValueTable(std::move(re), std::move(im));
}

std::vector<cplx> eval_range(const MultFn& f, Window window, const FactorSieve& sieve) {
    if (window.lo < 1 || window.lo > window.hi || window.hi > sieve.limit())
        throw DomainError("eval_range: window [" + std::to_string(window.lo) + ", " +
                          std::to_string(window.hi) + "] outside [1, " + std::to_string(sieve.limit()) + "]");
    std::size_t len = window.size();
    std::vector<double> re(len, 0.0), im(len, 0.0);
    if (f.kind() == FnKind::custom)
        fill_by_prime_powers(f, window, sieve, re.data(), im.data());
    else if (needs_table(f.kind())) {
        auto t = sieve.arithmetic_table(window);
        fill_direct(f, window, &t, re.data(), im.data());
    } else {
        fill_direct(f, window, nullptr, re.data(), im.data());
    }
    std::vector<cplx> out(len);
    for (std::size_t i = 0; i < len; ++i) out[i] = {re[i], im[i]};
    return out;
}

} // namespace mcorr
