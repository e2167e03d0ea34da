#include "mcorr/dirichlet.hpp"

#include <numeric>
#include <string>

#include "mcorr/errors.hpp"

namespace mcorr {

namespace {

std::uint64_t pow_mod(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
    unsigned __int128 r = 1 % m, x = b % m;
    while (e) {
        if (e & 1) r = r * x % m;
        x = x * x % m;
        e >>= 1;
    }
    return static_cast<std::uint64_t>(r);
}

std::vector<std::pair<std::uint64_t, unsigned>> factor_small(std::uint64_t n) {
    std::vector<std::pair<std::uint64_t, unsigned>> f;
    for (std::uint64_t p = 2; p * p <= n; ++p) {
        if (n % p) continue;
        unsigned e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        f.emplace_back(p, e);
    }
    if (n > 1) f.emplace_back(n, 1);
    return f;
}

std::uint64_t primitive_root_mod_prime(std::uint64_t p) {
    if (p == 2) return 1;
    auto fs = factor_small(p - 1);
    for (std::uint64_t g = 2;; ++g) {
        bool ok = true;
        for (auto [q, e] : fs)
            if (pow_mod(g, (p - 1) / q, p) == 1) {
                ok = false;
                break;
            }
        if (ok) return g;
    }
}

struct Generator {
    std::uint64_t value;  // unit mod q
    std::uint64_t order;
};

// Element of (Z/qZ)* congruent to g mod pk and to 1 mod q/pk.
std::uint64_t crt_lift(std::uint64_t g, std::uint64_t pk, std::uint64_t q) {
    std::uint64_t rest = q / pk;
    for (std::uint64_t x = g % pk; x < q; x += pk)
        if (x % rest == 1 % rest) return x;
    return g;
}

std::vector<Generator> generators(std::uint64_t q) {
    std::vector<Generator> gens;
    for (auto [p, e] : factor_small(q)) {
        std::uint64_t pk = 1;
        for (unsigned i = 0; i < e; ++i) pk *= p;
        if (p == 2) {
            if (e >= 2) gens.push_back({crt_lift(pk - 1, pk, q), 2});
            if (e >= 3) gens.push_back({crt_lift(5, pk, q), pk / 4});
        } else {
            std::uint64_t g = primitive_root_mod_prime(p);
            if (e >= 2 && pow_mod(g, p - 1, p * p) == 1) g += p;
            gens.push_back({crt_lift(g, pk, q), pk / p * (p - 1)});
        }
    }
    return gens;
}

std::uint64_t totient(std::uint64_t q) {
    std::uint64_t r = q;
    for (auto [p, e] : factor_small(q)) r = r / p * (p - 1);
    return r;
}

} // namespace

std::uint64_t DirichletCharacter::count(std::uint64_t modulus) { return totient(modulus); }

DirichletCharacter::DirichletCharacter(std::uint64_t modulus, std::uint64_t index)
    : modulus_(modulus), index_(index) {
    if (modulus < 1 || modulus > kMaxCharacterModulus)
        throw DomainError("character modulus must lie in [1, " +
                          std::to_string(kMaxCharacterModulus) + "]");
    if (index >= totient(modulus))
        throw DomainError("character index " + std::to_string(index) + " out of range for modulus " +
                          std::to_string(modulus) + " (phi = " + std::to_string(totient(modulus)) + ")");

    auto gens = generators(modulus);
    std::uint64_t lcm = 1;
    std::vector<std::uint64_t> digits;
    std::uint64_t rest = index;
    for (const auto& g : gens) {
        digits.push_back(rest % g.order);
        rest /= g.order;
        lcm = std::lcm(lcm, g.order);
    }

    // walk every exponent vector; the unit it reaches gets the phase sum
    table_.assign(modulus, {0.0, 0.0});
    std::vector<std::uint64_t> exps(gens.size(), 0);
    std::vector<std::uint64_t> phase_num(modulus, 0);
    std::uint64_t unit = 1 % modulus;
    std::uint64_t num = 0;
    for (;;) {
        table_[unit] = unit_root(static_cast<std::int64_t>(num % lcm), static_cast<std::int64_t>(lcm));
        phase_num[unit] = num % lcm;
        std::size_t i = 0;
        for (; i < gens.size(); ++i) {
            unit = static_cast<std::uint64_t>(static_cast<unsigned __int128>(unit) * gens[i].value % modulus);
            num += digits[i] * (lcm / gens[i].order);
            if (++exps[i] < gens[i].order) break;
            // generator i wrapped: unit and phase returned to their start
            exps[i] = 0;
            num -= digits[i] * (lcm / gens[i].order) * gens[i].order;
        }
        if (i == gens.size()) break;
    }

    for (const auto& z : table_)
        if (z.imag() != 0.0) real_ = false;

    // primitive iff no proper divisor d of q has chi trivial on units = 1 mod d
    primitive_ = true;
    for (std::uint64_t d = 1; d < modulus && primitive_; ++d) {
        if (modulus % d) continue;
        bool trivial = true;
        for (std::uint64_t n = 1; n < modulus; n += d) {
            if (std::gcd(n, modulus) != 1) continue;
            if (phase_num[n] != 0) {
                trivial = false;
                break;
            }
        }
        if (trivial) primitive_ = false;
    }
    if (modulus == 1) primitive_ = true;
}

std::vector<DirichletCharacter> DirichletCharacter::all(std::uint64_t modulus) {
    std::vector<DirichletCharacter> out;
    std::uint64_t n = totient(modulus);
    out.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) out.emplace_back(modulus, i);
    return out;
}

} // namespace mcorr
