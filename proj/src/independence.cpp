#include <algorithm>
#include <cmath>

#include "mcorr/errors.hpp"
#include "mcorr/parallel.hpp"
#include "mcorr/phase.hpp"
#include "mcorr/sequences.hpp"
#include "mcorr/summation.hpp"

namespace mcorr {

namespace {

namespace mp = boost::multiprecision;
using mp::cpp_int;

using Vec = std::vector<std::int64_t>;

std::int64_t max_abs(const Vec& k) {
    std::int64_t m = 0;
    for (auto x : k) m = std::max(m, x < 0 ? -x : x);
    return m;
}

// nonzero k in [-K, K]^l whose first nonzero entry is positive, lexicographic
std::vector<Vec> normalized_vectors(std::size_t l, std::int64_t bound) {
    std::vector<Vec> out;
    Vec k(l, -bound);
    for (;;) {
        auto first = std::find_if(k.begin(), k.end(), [](auto x) { return x != 0; });
        if (first != k.end() && *first > 0) out.push_back(k);
        std::size_t i = l;
        while (i > 0) {
            --i;
            if (++k[i] <= bound) break;
            k[i] = -bound;
            if (i == 0) return out;
        }
    }
}

int rational_rank(std::vector<std::vector<Rational>> m) {
    int rank = 0;
    std::size_t rows = m.size(), cols = rows ? m[0].size() : 0;
    for (std::size_t c = 0; c < cols && static_cast<std::size_t>(rank) < rows; ++c) {
        std::size_t piv = static_cast<std::size_t>(rank);
        while (piv < rows && m[piv][c] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(m[piv], m[static_cast<std::size_t>(rank)]);
        auto& p = m[static_cast<std::size_t>(rank)];
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == static_cast<std::size_t>(rank) || m[r][c] == 0) continue;
            Rational f = m[r][c] / p[c];
            for (std::size_t j = c; j < cols; ++j) m[r][j] -= f * p[j];
        }
        ++rank;
    }
    return rank;
}

double power_count(std::uint64_t n, unsigned r) { return std::pow(static_cast<double>(n), static_cast<double>(r)); }

// ---- exact: one-variable polynomials ----

CoefficientVerdict polynomial_verdict(const std::vector<Vec>& polys, const Vec& k, std::uint64_t horizon) {
    std::size_t deg = 0;
    for (const auto& p : polys) deg = std::max(deg, p.size());
    std::vector<cpp_int> q(deg, 0);
    for (std::size_t j = 0; j < polys.size(); ++j)
        for (std::size_t i = 0; i < polys[j].size(); ++i) q[i] += cpp_int(k[j]) * polys[j][i];
    while (!q.empty() && q.back() == 0) q.pop_back();

    CoefficientVerdict v;
    v.k = k;
    const std::uint64_t half = horizon / 2;
    if (q.empty()) {
        v.solutions = horizon;
        v.largest = {static_cast<std::int64_t>(horizon)};
        v.density = 1.0;
        v.density_half = half ? 1.0 : 0.0;
        v.infinite = true;
        return v;
    }
    v.infinite = false;
    // roots n >= 1 divide the lowest nonzero coefficient and obey the Cauchy bound
    std::size_t low = 0;
    while (q[low] == 0) ++low;
    if (low + 1 == q.size()) return v;  // c n^s has no positive roots
    cpp_int a_low = mp::abs(q[low]);
    cpp_int lead = mp::abs(q.back());
    cpp_int cauchy = 0;
    for (std::size_t i = 0; i + 1 < q.size(); ++i) cauchy = std::max(cauchy, cpp_int(mp::abs(q[i])));
    cauchy = cauchy / lead + 1;
    cpp_int limit = std::min({cpp_int(horizon), cauchy, a_low});
    auto lim = static_cast<std::uint64_t>(limit);
    std::uint64_t half_count = 0;
    for (std::uint64_t n = 1; n <= lim; ++n) {
        if (a_low % n != 0) continue;
        cpp_int acc = 0;
        for (auto it = q.rbegin(); it != q.rend(); ++it) acc = acc * n + *it;
        if (acc != 0) continue;
        ++v.solutions;
        if (n <= half) ++half_count;
        v.largest = {static_cast<std::int64_t>(n)};
    }
    v.density = static_cast<double>(v.solutions) / static_cast<double>(horizon);
    v.density_half = half ? static_cast<double>(half_count) / static_cast<double>(half) : 0.0;
    return v;
}

// ---- exact: linear forms on N^r ----

CoefficientVerdict linear_verdict(const std::vector<Vec>& forms, const Vec& k, std::uint64_t horizon) {
    std::size_t r = forms[0].size();
    std::vector<__int128> c(r, 0);
    for (std::size_t j = 0; j < forms.size(); ++j)
        for (std::size_t i = 0; i < r; ++i) c[i] += static_cast<__int128>(k[j]) * forms[j][i];
    bool pos = std::any_of(c.begin(), c.end(), [](auto x) { return x > 0; });
    bool neg = std::any_of(c.begin(), c.end(), [](auto x) { return x < 0; });

    CoefficientVerdict v;
    v.k = k;
    v.infinite = (!pos && !neg) || (pos && neg);
    const std::uint64_t half = horizon / 2;
    auto rr = static_cast<unsigned>(r);
    if (!pos && !neg) {
        v.solutions = static_cast<std::uint64_t>(power_count(horizon, rr));
        v.largest.assign(r, static_cast<std::int64_t>(horizon));
        v.density = 1.0;
        v.density_half = half ? 1.0 : 0.0;
        return v;
    }
    if (!*v.infinite) return v;

    // enumerate all coordinates except a pivot with c != 0, solve for the pivot
    std::size_t pivot = r;
    while (c[pivot - 1] == 0) --pivot;
    --pivot;
    Vec point(r, 1);
    std::uint64_t count = 0, half_count = 0;
    std::int64_t best = 0;
    for (;;) {
        __int128 rest = 0;
        for (std::size_t i = 0; i < r; ++i)
            if (i != pivot) rest += c[i] * point[i];
        if (rest % c[pivot] == 0) {
            __int128 x = -rest / c[pivot];
            if (x >= 1 && x <= static_cast<__int128>(horizon)) {
                point[pivot] = static_cast<std::int64_t>(x);
                ++count;
                std::int64_t m = *std::max_element(point.begin(), point.end());
                if (m <= static_cast<std::int64_t>(half)) ++half_count;
                if (m > best) {
                    best = m;
                    v.largest = point;
                }
            }
        }
        std::size_t i = r;
        bool done = true;
        while (i > 0) {
            --i;
            if (i == pivot) continue;
            if (++point[i] <= static_cast<std::int64_t>(horizon)) {
                done = false;
                break;
            }
            point[i] = 1;
        }
        if (done) break;
    }
    v.solutions = count;
    v.density = static_cast<double>(count) / power_count(horizon, rr);
    v.density_half = half ? static_cast<double>(half_count) / power_count(half, rr) : 0.0;
    return v;
}

// ---- enumeration ----

// acc[n] += k t[n] mod 2^32
__attribute__((target_clones("avx2", "default"))) void screen_add(std::uint32_t* acc, const std::uint32_t* t,
                                                                   std::uint32_t k, std::size_t len) {
    for (std::size_t n = 0; n < len; ++n) acc[n] += k * t[n];
}

__attribute__((target_clones("avx2", "default"))) std::size_t count_zeros(const std::uint32_t* acc,
                                                                          std::size_t len) {
    std::size_t zeros = 0;
    for (std::size_t n = 0; n < len; ++n) zeros += acc[n] == 0;
    return zeros;
}

std::vector<CoefficientVerdict> enumerate_one_variable(const SequenceFamily& family, const std::vector<Vec>& ks,
                                                       std::uint64_t horizon) {
    const std::size_t l = family.size();
    std::vector<Vec> table(l);
    // low 32 bits of each value: a zero combination must vanish mod 2^32,
    // which a vectorized screen checks before the exact test
    std::vector<std::vector<std::uint32_t>> low(l);
    for (std::size_t j = 0; j < l; ++j) {
        table[j] = family[j].values(1, static_cast<std::int64_t>(horizon));
        low[j].assign(table[j].begin(), table[j].end());
    }
    const std::uint64_t half = horizon / 2;
    std::vector<CoefficientVerdict> out(ks.size());
    std::vector<std::uint64_t> half_counts(ks.size(), 0);
    for (std::size_t i = 0; i < ks.size(); ++i) out[i].k = ks[i];
    constexpr std::size_t kTile = 4096;
    constexpr std::size_t kChunk = 16;
    std::size_t chunks = (ks.size() + kChunk - 1) / kChunk;
    parallel_for(chunks, [&](std::size_t c) {
        std::size_t k0 = c * kChunk, k1 = std::min(ks.size(), k0 + kChunk);
        std::vector<std::uint32_t> acc(kTile);
        for (std::size_t lo = 0; lo < horizon; lo += kTile) {
            std::size_t len = std::min<std::size_t>(horizon - lo, kTile);
            for (std::size_t ki = k0; ki < k1; ++ki) {
                const Vec& k = ks[ki];
                std::fill(acc.begin(), acc.begin() + static_cast<std::ptrdiff_t>(len), 0u);
                for (std::size_t j = 0; j < l; ++j)
                    screen_add(acc.data(), low[j].data() + lo, static_cast<std::uint32_t>(k[j]), len);
                if (!count_zeros(acc.data(), len)) continue;
                auto& v = out[ki];
                for (std::size_t n = 0; n < len; ++n) {
                    if (acc[n] != 0) continue;
                    __int128 s = 0;
                    for (std::size_t j = 0; j < l; ++j) s += static_cast<__int128>(k[j]) * table[j][lo + n];
                    if (s != 0) continue;
                    ++v.solutions;
                    if (lo + n + 1 <= half) ++half_counts[ki];
                    v.largest = {static_cast<std::int64_t>(lo + n + 1)};
                }
            }
        }
    });
    for (std::size_t i = 0; i < ks.size(); ++i) {
        out[i].density = static_cast<double>(out[i].solutions) / static_cast<double>(horizon);
        out[i].density_half = half ? static_cast<double>(half_counts[i]) / static_cast<double>(half) : 0.0;
    }
    return out;
}

std::vector<CoefficientVerdict> enumerate_points(const SequenceFamily& family, const std::vector<Vec>& ks,
                                                 std::uint64_t horizon) {
    const unsigned r = family.arity();
    const std::size_t l = family.size();
    const std::uint64_t half = horizon / 2;
    std::vector<CoefficientVerdict> out(ks.size());
    std::vector<std::uint64_t> half_counts(ks.size(), 0);
    std::vector<std::int64_t> best(ks.size(), 0);
    for (std::size_t i = 0; i < ks.size(); ++i) out[i].k = ks[i];
    Vec point(r, 1), values(l);
    for (;;) {
        for (std::size_t j = 0; j < l; ++j) values[j] = family[j](point);
        std::int64_t m = *std::max_element(point.begin(), point.end());
        for (std::size_t i = 0; i < ks.size(); ++i) {
            __int128 s = 0;
            for (std::size_t j = 0; j < l; ++j) s += static_cast<__int128>(ks[i][j]) * values[j];
            if (s != 0) continue;
            ++out[i].solutions;
            if (m <= static_cast<std::int64_t>(half)) ++half_counts[i];
            if (m > best[i]) {
                best[i] = m;
                out[i].largest = point;
            }
        }
        std::size_t i = r;
        while (i > 0) {
            --i;
            if (++point[i] <= static_cast<std::int64_t>(horizon)) break;
            point[i] = 1;
            if (i == 0) goto finished;
        }
    }
finished:
    for (std::size_t i = 0; i < ks.size(); ++i) {
        out[i].density = static_cast<double>(out[i].solutions) / power_count(horizon, r);
        out[i].density_half = half ? static_cast<double>(half_counts[i]) / power_count(half, r) : 0.0;
    }
    return out;
}

std::int64_t largest_coordinate(const CoefficientVerdict& v) {
    return v.largest.empty() ? 0 : *std::max_element(v.largest.begin(), v.largest.end());
}

CoefficientVerdict negated(CoefficientVerdict v) {
    for (auto& x : v.k) x = -x;
    return v;
}

IndependenceReport run_check(IndependenceMode mode, const SequenceFamily& family, std::int64_t bound,
                             std::uint64_t horizon, const IndependenceOptions& options) {
    if (bound < 1) throw DomainError("independence check: K must be at least 1");
    if (horizon < 1) throw DomainError("independence check: N must be at least 1");
    if (family.size() == 0) throw DomainError("independence check: empty family");

    IndependenceReport rep;
    rep.mode = mode;
    rep.bound = bound;
    rep.horizon = horizon;
    rep.arity = family.arity();
    rep.prefix = options.prefix ? options.prefix : std::max<std::uint64_t>(10, horizon / 100);
    rep.threshold = options.weak_threshold;

    const std::size_t l = family.size();
    const unsigned r = family.arity();
    auto ks = normalized_vectors(l, bound);

    std::vector<Vec> polys;
    bool all_poly = r == 1;
    for (const auto& m : family.members()) {
        auto p = m.polynomial_coefficients();
        if (!p) {
            all_poly = false;
            break;
        }
        polys.push_back(*p);
    }
    bool all_linear = std::all_of(family.members().begin(), family.members().end(),
                                  [](const Sequence& s) { return s.kind() == SeqKind::linear_form; });

    std::vector<CoefficientVerdict> verdicts;
    bool exact = false;
    if (all_poly && !options.force_enumeration) {
        std::size_t deg = 0;
        for (const auto& p : polys) deg = std::max(deg, p.size());
        std::vector<std::vector<Rational>> m(l, std::vector<Rational>(deg, 0));
        for (std::size_t j = 0; j < l; ++j)
            for (std::size_t i = 0; i < polys[j].size(); ++i) m[j][i] = polys[j][i];
        rep.rank = rational_rank(m);
        rep.certificate = "polynomial members, coefficient rank " + std::to_string(rep.rank) + " of " +
                          std::to_string(l) + " over Q";
        verdicts.resize(ks.size());
        parallel_for(ks.size(), [&](std::size_t i) { verdicts[i] = polynomial_verdict(polys, ks[i], horizon); });
        exact = true;
    } else if (r > 1 && all_linear && !options.force_enumeration) {
        std::vector<Vec> forms;
        for (const auto& s : family.members()) forms.push_back(s.linear_coefficients());
        std::vector<std::vector<Rational>> m(l, std::vector<Rational>(r, 0));
        for (std::size_t j = 0; j < l; ++j)
            for (std::size_t i = 0; i < r; ++i) m[j][i] = forms[j][i];
        rep.rank = rational_rank(m);
        rep.certificate = "linear forms, coefficient rank " + std::to_string(rep.rank) + " of " + std::to_string(l) +
                          " over Q; zero sets classified by coefficient signs";
        double cost = static_cast<double>(ks.size()) * power_count(horizon, r - 1);
        if (cost > static_cast<double>(options.budget))
            throw ResourceError("independence check: " + std::to_string(ks.size()) + " coefficient vectors over [" +
                                std::to_string(horizon) + "]^" + std::to_string(r) +
                                " exceed the enumeration budget; lower K or N");
        verdicts.resize(ks.size());
        parallel_for(ks.size(), [&](std::size_t i) { verdicts[i] = linear_verdict(forms, ks[i], horizon); });
        exact = true;
    } else {
        double cost = static_cast<double>(ks.size()) * power_count(horizon, r);
        if (cost > static_cast<double>(options.budget))
            throw ResourceError("independence check: " + std::to_string(ks.size()) + " coefficient vectors over [" +
                                std::to_string(horizon) + "]^" + std::to_string(r) +
                                " exceed the enumeration budget; lower K or N");
        verdicts = r == 1 ? enumerate_one_variable(family, ks, horizon) : enumerate_points(family, ks, horizon);
    }

    // verdict per normalized k
    auto fails = [&](const CoefficientVerdict& v) {
        if (mode == IndependenceMode::weakly_independent)
            return !(v.density <= options.weak_threshold && (v.density == 0.0 || v.density < v.density_half));
        if (exact) return v.infinite.value_or(false);
        return largest_coordinate(v) > static_cast<std::int64_t>(rep.prefix);
    };
    const CoefficientVerdict* worst = nullptr;
    for (const auto& v : verdicts) {
        if (!fails(v)) continue;
        if (!worst || v.solutions > worst->solutions ||
            (v.solutions == worst->solutions && max_abs(v.k) < max_abs(worst->k)))
            worst = &v;
    }
    rep.passed = worst == nullptr;
    if (worst) rep.counterexample = *worst;
    rep.exact = exact && mode == IndependenceMode::independent;

    // report every nonzero k: -k shares the zero set of k
    std::vector<CoefficientVerdict> all;
    all.reserve(2 * verdicts.size());
    for (const auto& v : verdicts) {
        all.push_back(v);
        all.push_back(negated(v));
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.k < b.k; });
    rep.verdicts = std::move(all);
    return rep;
}

} // namespace

IndependenceReport check_independence(const SequenceFamily& family, std::int64_t bound, std::uint64_t horizon,
                                      const IndependenceOptions& options) {
    return run_check(IndependenceMode::independent, family, bound, horizon, options);
}

IndependenceReport check_weak_independence(const SequenceFamily& family, std::int64_t bound,
                                           std::uint64_t horizon, const IndependenceOptions& options) {
    return run_check(IndependenceMode::weakly_independent, family, bound, horizon, options);
}

CongruenceReport check_congruence_equidistribution(const SequenceFamily& family, std::uint64_t max_modulus,
                                                   std::uint64_t horizon, std::uint64_t budget) {
    if (max_modulus < 2) throw DomainError("congruence check: U must be at least 2");
    if (horizon < 1) throw DomainError("congruence check: N must be at least 1");
    const std::size_t l = family.size();
    const unsigned r = family.arity();
    const double points = power_count(horizon, r);

    double cost = points * static_cast<double>(l);
    for (std::uint64_t u = 2; u <= max_modulus; ++u) cost += std::pow(static_cast<double>(u), 2.0 * l);
    if (cost > static_cast<double>(budget))
        throw ResourceError("congruence check: enumerating residues up to U = " + std::to_string(max_modulus) +
                            " for " + std::to_string(l) + " sequences exceeds the budget; use a smaller U or l");

    // values of every member at every point of [N]^r
    std::vector<Vec> values(l);
    if (r == 1) {
        for (std::size_t j = 0; j < l; ++j) values[j] = family[j].values(1, static_cast<std::int64_t>(horizon));
    } else {
        Vec point(r, 1);
        for (;;) {
            for (std::size_t j = 0; j < l; ++j) values[j].push_back(family[j](point));
            std::size_t i = r;
            bool done = true;
            while (i > 0) {
                --i;
                if (++point[i] <= static_cast<std::int64_t>(horizon)) {
                    done = false;
                    break;
                }
                point[i] = 1;
            }
            if (done) break;
        }
    }
    const std::size_t count = values[0].size();

    CongruenceReport rep;
    rep.max_modulus = max_modulus;
    rep.horizon = horizon;
    rep.statistic = -1.0;
    for (std::uint64_t u = 2; u <= max_modulus; ++u) {
        const auto uu = static_cast<std::int64_t>(u);
        std::size_t cells = 1;
        for (std::size_t j = 0; j < l; ++j) cells *= u;
        std::vector<std::uint64_t> hist(cells, 0);
        for (std::size_t n = 0; n < count; ++n) {
            std::size_t x = 0;
            for (std::size_t j = l; j-- > 0;) x = x * u + static_cast<std::size_t>(values[j][n] % uu);
            ++hist[x];
        }
        std::vector<cplx> roots(u);
        for (std::uint64_t t = 0; t < u; ++t) roots[t] = unit_root(static_cast<std::int64_t>(t), uu);
        Vec k(l, 0);
        std::vector<std::uint64_t> by_class(u);
        for (std::size_t kc = 1; kc < cells; ++kc) {
            std::size_t rem = kc;
            for (std::size_t j = 0; j < l; ++j) {
                k[j] = static_cast<std::int64_t>(rem % u);
                rem /= u;
            }
            std::fill(by_class.begin(), by_class.end(), 0);
            for (std::size_t x = 0; x < cells; ++x) {
                if (!hist[x]) continue;
                std::size_t xr = x;
                std::int64_t dot = 0;
                for (std::size_t j = 0; j < l; ++j) {
                    dot += k[j] * static_cast<std::int64_t>(xr % u);
                    xr /= u;
                }
                by_class[static_cast<std::size_t>(dot % uu)] += hist[x];
            }
            ComplexSum s;
            for (std::uint64_t t = 0; t < u; ++t) s.add(roots[t] * static_cast<double>(by_class[t]));
            double stat = std::abs(s.value()) / static_cast<double>(count);
            if (stat > rep.statistic) {
                rep.statistic = stat;
                rep.worst_modulus = u;
                rep.worst_k = k;
            }
        }
    }
    return rep;
}

} // namespace mcorr
