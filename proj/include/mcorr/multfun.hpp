#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcorr/dirichlet.hpp"
#include "mcorr/phase.hpp"
#include "mcorr/sieve.hpp"
#include "mcorr/text.hpp"

namespace mcorr {

enum class FnKind { liouville, moebius, one, mu_squared, archimedean, root_twist, dirichlet, custom };

/// Value at p^e, e >= 1. Must land in the closed unit disc.
using PrimePowerRule = std::function<cplx(std::uint64_t prime, unsigned exponent)>;

/// A bounded multiplicative function N -> unit disc, extended by f(n) = 0
/// for n <= 0. Immutable; evaluation is thread-safe.
///
/// Descriptor grammar (parse/descriptor round-trip):
///   liouville | moebius | one | mu_squared
///   archimedean:<t>            n^{it}, t a finite real
///   root_twist:<d>[:<k>]       completely multiplicative, f(p) = e(k/d), k defaults to 1
///   dirichlet:<q>:<index>      character index as numbered by DirichletCharacter
/// Aliases on input: lambda, mobius, mu, mu2. Custom rules have no textual form.
class MultFn {
public:
    static MultFn liouville();
    static MultFn moebius();
    static MultFn one();
    static MultFn mu_squared();
    static MultFn archimedean(double t);
    static MultFn root_twist(unsigned d, unsigned k = 1);
    static MultFn dirichlet(std::uint64_t q, std::uint64_t index);
    static MultFn custom(std::string name, PrimePowerRule rule, bool completely_multiplicative,
                         bool real_valued = false);
    static MultFn parse(std::string_view descriptor);

    FnKind kind() const { return kind_; }
    bool completely_multiplicative() const { return completely_; }
    bool real_valued() const { return real_; }
    /// Takes only the values -1 and +1 on positive integers.
    bool sign_valued() const { return kind_ == FnKind::liouville || kind_ == FnKind::one; }
    std::string descriptor() const;

    cplx at_prime_power(std::uint64_t p, unsigned e) const;
    cplx at_prime(std::uint64_t p) const { return at_prime_power(p, 1); }

    /// Pointwise value; factors n by trial division, independent of any sieve.
    cplx operator()(std::int64_t n) const;

    double archimedean_t() const { return t_; }
    unsigned root_order() const { return d_; }
    unsigned root_index() const { return k_; }
    const DirichletCharacter* character() const { return character_.get(); }
    const PrimePowerRule& rule() const { return rule_; }

private:
    MultFn(FnKind kind, bool completely, bool real) : kind_(kind), completely_(completely), real_(real) {}

    FnKind kind_;
    bool completely_;
    bool real_;
    double t_ = 0.0;
    unsigned d_ = 0;
    unsigned k_ = 0;
    std::shared_ptr<const DirichletCharacter> character_;
    PrimePowerRule rule_;
    std::string name_;
};

inline cplx eval(const MultFn& f, std::int64_t n) { return f(n); }

/// Values over [0, hi] indexed by n (entry 0 is f(0) = 0). Real-valued
/// functions keep only the real parts.
class ValueTable {
public:
    ValueTable() = default;
    ValueTable(std::vector<double> re, std::vector<double> im) : re_(std::move(re)), im_(std::move(im)) {}

    bool real() const { return im_.empty(); }
    std::uint64_t hi() const { return re_.empty() ? 0 : re_.size() - 1; }
    /// f(n), zero outside [1, hi].
    cplx at(std::int64_t n) const {
        if (n <= 0 || static_cast<std::uint64_t>(n) > hi()) return {0.0, 0.0};
        auto i = static_cast<std::size_t>(n);
        return {re_[i], real() ? 0.0 : im_[i]};
    }
    std::span<const double> re() const { return re_; }
    std::span<const double> im() const { return im_; }

private:
    std::vector<double> re_;
    std::vector<double> im_;
};

/// Builds a table over [0, arith.window.hi]; arith must start at 1.
ValueTable value_table(const MultFn& f, const ArithmeticTable& arith, const FactorSieve& sieve);
ValueTable value_table(const MultFn& f, std::uint64_t hi, const FactorSieve& sieve);

/// Values on a window, computed from sieve tables; elementwise equal to eval.
std::vector<cplx> eval_range(const MultFn& f, Window window, const FactorSieve& sieve);

} // namespace mcorr
