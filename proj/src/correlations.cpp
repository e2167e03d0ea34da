#include "mcorr/correlations.hpp"

#include <algorithm>
#include <cmath>

#include "mcorr/errors.hpp"
#include "mcorr/parallel.hpp"

namespace mcorr {

std::string to_string(CorrelationMode mode) {
    switch (mode) {
    case CorrelationMode::fixed: return "fixed";
    case CorrelationMode::family: return "family";
    case CorrelationMode::composition: return "composition";
    }
    return "?";
}

FunctionTables::Entry& FunctionTables::entry(const MultFn& f, std::uint64_t hi) {
    if (hi > sieve_->limit())
        throw DomainError("range [1, " + std::to_string(hi) + "] needed for " + f.descriptor() +
                          " exceeds the sieve limit " + std::to_string(sieve_->limit()));
    auto& e = entries_[f.descriptor()];
    if (e.table.hi() >= hi && e.table.hi() > 0) return e;
    e.table = value_table(f, std::max<std::uint64_t>(hi, 1), *sieve_);
    e.small = e.table.real();
    if (e.small) {
        auto re = e.table.re();
        e.bytes.resize(re.size());
        for (std::size_t i = 0; i < re.size() && e.small; ++i) {
            double v = re[i];
            if (v != 0.0 && v != 1.0 && v != -1.0) e.small = false;
            e.bytes[i] = static_cast<std::int8_t>(v);
        }
    }
    if (!e.small) std::vector<std::int8_t>().swap(e.bytes);
    return e;
}

const ValueTable& FunctionTables::values(const MultFn& f, std::uint64_t hi) { return entry(f, hi).table; }

const std::vector<std::int8_t>* FunctionTables::bytes(const MultFn& f, std::uint64_t hi) {
    auto& e = entry(f, hi);
    return e.small ? &e.bytes : nullptr;
}

namespace {

using Vec = std::vector<std::int64_t>;

void require_nonnegative(const Vec& shifts) {
    for (auto s : shifts)
        if (s < 0) throw DomainError("shifts must be nonnegative");
}

std::int64_t max_of(const Vec& v) { return v.empty() ? 0 : *std::max_element(v.begin(), v.end()); }

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw OverflowError("index exceeds the 64-bit range");
    return r;
}

// product of table values at the given indices; all indices lie in range
struct Product {
    std::vector<const ValueTable*> tables;
    bool real = true;

    Product(const std::vector<MultFn>& fs, FunctionTables& cache, std::uint64_t hi) {
        for (const auto& f : fs) {
            tables.push_back(&cache.values(f, hi));
            real = real && tables.back()->real();
        }
    }

    template <class Index>
    cplx operator()(Index&& index) const {
        if (real) {
            double p = 1.0;
            for (std::size_t j = 0; j < tables.size(); ++j) p *= tables[j]->re()[static_cast<std::size_t>(index(j))];
            return {p, 0.0};
        }
        cplx p{1.0, 0.0};
        for (std::size_t j = 0; j < tables.size(); ++j) p *= tables[j]->at(index(j));
        return p;
    }
};

// ---- batched kernel: sum_{m=1}^{N} w(m) prod_j f_j(m + offset_j) ----

constexpr std::size_t kTile = 2048;
constexpr std::size_t kLanes = 8;

__attribute__((target_clones("avx2", "default"))) void mul_bytes(std::int8_t* __restrict acc,
                                                                  const std::int8_t* __restrict src,
                                                                  std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) acc[i] = static_cast<std::int8_t>(acc[i] * src[i]);
}

__attribute__((target_clones("avx2", "default"))) void scale_bytes(double* __restrict out,
                                                                    const double* __restrict w,
                                                                    const std::int8_t* __restrict p,
                                                                    std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) out[i] = w[i] * static_cast<double>(p[i]);
}

__attribute__((target_clones("avx2", "default"))) void mul_real(double* __restrict acc,
                                                                 const double* __restrict src, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) acc[i] *= src[i];
}

__attribute__((target_clones("avx2", "default"))) double lane_sum(const double* __restrict x, std::size_t len) {
    double lane[kLanes] = {};
    std::size_t i = 0;
    for (; i + kLanes <= len; i += kLanes)
        for (std::size_t j = 0; j < kLanes; ++j) lane[j] += x[i + j];
    for (std::size_t j = 0; i < len; ++i, ++j) lane[j] += x[i];
    return ((lane[0] + lane[1]) + (lane[2] + lane[3])) + ((lane[4] + lane[5]) + (lane[6] + lane[7]));
}

struct KernelFactor {
    const std::int8_t* bytes = nullptr;
    const double* re = nullptr;
    const double* im = nullptr;
};

enum class KernelPath { bytes, real, complex };

class Kernel {
public:
    Kernel(const std::vector<MultFn>& fs, FunctionTables& cache, std::uint64_t hi, std::uint64_t n) : n_(n) {
        bool all_bytes = true, all_real = true;
        for (const auto& f : fs) {
            KernelFactor k;
            const auto& t = cache.values(f, hi);
            k.re = t.re().data();
            if (!t.real()) k.im = t.im().data();
            if (auto* b = cache.bytes(f, hi)) k.bytes = b->data();
            all_bytes = all_bytes && k.bytes;
            all_real = all_real && !k.im;
            factors_.push_back(k);
        }
        path_ = all_bytes ? KernelPath::bytes : (all_real ? KernelPath::real : KernelPath::complex);
        weights_.resize(n + 1);
        weights_[0] = 0.0;
        for (std::uint64_t m = 1; m <= n; ++m) weights_[m] = 1.0 / static_cast<double>(m);
        harmonic_ = sum({}).real();
    }

    /// sum_{m<=N} prod_j f_j(m + offsets[j]) / m over H_N
    cplx log_average(const Vec& offsets) const { return sum(offsets) / harmonic_; }

private:
    cplx sum(const Vec& offsets) const {
        KahanSum re, im;
        std::vector<double> buf(kTile), bufi(kTile), tmp(kTile);
        std::vector<std::int8_t> prod(kTile);
        const std::size_t used = offsets.size();
        for (std::uint64_t lo = 1; lo <= n_; lo += kTile) {
            const std::size_t len = static_cast<std::size_t>(std::min<std::uint64_t>(kTile, n_ - lo + 1));
            const double* w = weights_.data() + lo;
            if (used == 0) {
                re.add(lane_sum(w, len));
                continue;
            }
            switch (path_) {
            case KernelPath::bytes: {
                std::copy_n(factors_[0].bytes + lo + offsets[0], len, prod.data());
                for (std::size_t j = 1; j < used; ++j)
                    mul_bytes(prod.data(), factors_[j].bytes + lo + offsets[j], len);
                scale_bytes(buf.data(), w, prod.data(), len);
                re.add(lane_sum(buf.data(), len));
                break;
            }
            case KernelPath::real: {
                std::copy_n(w, len, buf.data());
                for (std::size_t j = 0; j < used; ++j) mul_real(buf.data(), factors_[j].re + lo + offsets[j], len);
                re.add(lane_sum(buf.data(), len));
                break;
            }
            case KernelPath::complex: {
                std::copy_n(w, len, buf.data());
                std::fill_n(bufi.data(), len, 0.0);
                for (std::size_t j = 0; j < used; ++j) {
                    const double* fr = factors_[j].re + lo + offsets[j];
                    const double* fi = factors_[j].im ? factors_[j].im + lo + offsets[j] : nullptr;
                    for (std::size_t i = 0; i < len; ++i) {
                        double a = buf[i], b = bufi[i], c = fr[i], d = fi ? fi[i] : 0.0;
                        buf[i] = a * c - b * d;
                        bufi[i] = a * d + b * c;
                    }
                }
                re.add(lane_sum(buf.data(), len));
                im.add(lane_sum(bufi.data(), len));
                break;
            }
            }
        }
        return {re.value(), im.value()};
    }

    std::vector<KernelFactor> factors_;
    KernelPath path_ = KernelPath::real;
    std::vector<double> weights_;
    std::uint64_t n_;
    double harmonic_ = 1.0;
};

Vec family_shifts(const SequenceFamily& family, const Vec& point) {
    Vec s{0};
    for (std::size_t j = 0; j < family.size(); ++j) s.push_back(family[j](point));
    return s;
}

std::int64_t max_norm(const Vec& v) {
    std::int64_t m = 0;
    for (auto x : v) m = std::max(m, x < 0 ? -x : x);
    return m;
}

void check_counts(const std::vector<MultFn>& fs, std::size_t expected, const char* what) {
    if (fs.size() != expected)
        throw DomainError(std::string(what) + ": expected " + std::to_string(expected) + " functions, got " +
                          std::to_string(fs.size()));
}

} // namespace

CorrelationResult correlate(const CorrelationSpec& spec, FunctionTables& tables) {
    const auto& fs = spec.functions;
    if (fs.empty()) throw DomainError("correlation needs at least one function");
    const auto top = static_cast<std::int64_t>(spec.schedule.final());
    CorrelationResult res;

    if (auto* fx = std::get_if<FixedShifts>(&spec.source)) {
        check_counts(fs, fx->shifts.size(), "fixed shifts");
        require_nonnegative(fx->shifts);
        res.mode = CorrelationMode::fixed;
        res.shifts = fx->shifts;
        Product prod(fs, tables, static_cast<std::uint64_t>(checked_add(top, max_of(fx->shifts))));
        const Vec& s = fx->shifts;
        res.report = average_trace(spec.schedule, spec.kind,
                                   [&](std::int64_t m) { return prod([&](std::size_t j) { return m + s[j]; }); });
        return res;
    }
    if (auto* fam = std::get_if<FamilyPoint>(&spec.source)) {
        check_counts(fs, fam->family.size() + 1, "family shifts");
        res.mode = CorrelationMode::family;
        res.outer_point = fam->point;
        res.outer_norm = max_norm(fam->point);
        res.shifts = family_shifts(fam->family, fam->point);
        Product prod(fs, tables, static_cast<std::uint64_t>(checked_add(top, max_of(res.shifts))));
        const Vec& s = res.shifts;
        res.report = average_trace(spec.schedule, spec.kind,
                                   [&](std::int64_t m) { return prod([&](std::size_t j) { return m + s[j]; }); });
        return res;
    }
    const auto& comp = std::get<Composition>(spec.source);
    check_counts(fs, comp.shifts.size(), "composition shifts");
    require_nonnegative(comp.shifts);
    res.mode = CorrelationMode::composition;
    res.shifts = comp.shifts;
    // a is increasing, so its largest argument bounds every lookup
    std::int64_t hi = comp.a(checked_add(top, max_of(comp.shifts)));
    Product prod(fs, tables, static_cast<std::uint64_t>(hi));
    const Vec& s = comp.shifts;
    const Sequence& a = comp.a;
    res.report = average_trace(spec.schedule, spec.kind,
                               [&](std::int64_t m) { return prod([&](std::size_t j) { return a(m + s[j]); }); });
    return res;
}

CorrelationResult correlate(const CorrelationSpec& spec, const FactorSieve& sieve) {
    FunctionTables tables(sieve);
    return correlate(spec, tables);
}

CorrelationResult corr_fixed_shifts(const std::vector<MultFn>& functions, const std::vector<std::int64_t>& shifts,
                                    const CheckpointSchedule& schedule, AverageKind kind, const FactorSieve& sieve) {
    return correlate({functions, FixedShifts{shifts}, kind, schedule}, sieve);
}

CorrelationResult corr_along_deterministic(const std::vector<MultFn>& functions, const Sequence& a,
                                           const std::vector<std::int64_t>& shifts,
                                           const CheckpointSchedule& schedule, const FactorSieve& sieve) {
    return correlate({functions, Composition{a, shifts}, AverageKind::logarithmic, schedule}, sieve);
}

CorrelationResult corr_shifted_by_family(const std::vector<MultFn>& functions, const SequenceFamily& family,
                                         const std::vector<std::int64_t>& point, const CheckpointSchedule& schedule,
                                         const FactorSieve& sieve) {
    return correlate({functions, FamilyPoint{family, point}, AverageKind::logarithmic, schedule}, sieve);
}

IdentityCheck identity_check_deterministic(const std::vector<MultFn>& functions, const Sequence& a,
                                           const std::vector<std::int64_t>& shifts, std::uint64_t n_outer,
                                           std::uint64_t n_inner, const FactorSieve& sieve) {
    if (n_outer < 1 || n_inner < 1) throw DomainError("identity check: N_outer and N_inner must be positive");
    check_counts(functions, shifts.size(), "identity check");
    require_nonnegative(shifts);
    FunctionTables tables(sieve);
    const std::int64_t top_shift = max_of(shifts);
    std::int64_t hi_rhs = checked_add(a(checked_add(static_cast<std::int64_t>(n_outer), top_shift)),
                                      static_cast<std::int64_t>(n_inner));
    std::int64_t hi_lhs = a(checked_add(static_cast<std::int64_t>(n_inner), top_shift));
    auto hi = static_cast<std::uint64_t>(std::max(hi_rhs, hi_lhs));
    tables.values(functions.front(), hi);  // range check before any work

    IdentityCheck out;
    out.lhs = correlate({functions, Composition{a, shifts}, AverageKind::logarithmic,
                         CheckpointSchedule::single(n_inner)},
                        tables)
                  .report.final_value();

    Kernel kernel(functions, tables, hi, n_inner);
    std::vector<cplx> inner(n_outer);
    parallel_for(n_outer, [&](std::size_t i) {
        auto n = static_cast<std::int64_t>(i + 1);
        Vec off(shifts.size());
        for (std::size_t j = 0; j < shifts.size(); ++j) off[j] = a(n + shifts[j]);
        inner[i] = kernel.log_average(off);
    });
    ComplexSum num;
    KahanSum den;
    for (std::size_t i = 0; i < n_outer; ++i) {
        double w = 1.0 / static_cast<double>(i + 1);
        num.add(inner[i] * w);
        den.add(w);
    }
    out.rhs = num.value() / den.value();
    out.gap = std::abs(out.lhs - out.rhs);
    return out;
}

ProductIdentity product_identity_check(const std::vector<MultFn>& functions, const SequenceFamily& family,
                                       std::uint64_t n_outer, std::uint64_t n_inner, const FactorSieve& sieve) {
    if (n_outer < 1 || n_inner < 1) throw DomainError("product identity: N_outer and N_inner must be positive");
    check_counts(functions, family.size() + 1, "product identity");
    for (const auto& f : functions)
        if (!f.real_valued())
            throw DomainError("product identity: " + f.descriptor() +
                              " is complex-valued; the identity holds only for real-valued functions");

    // outer points of [N_out]^r in lexicographic order
    const unsigned r = family.arity();
    double count = std::pow(static_cast<double>(n_outer), static_cast<double>(r));
    if (count > 1e8) throw ResourceError("product identity: too many outer points");
    std::vector<Vec> offsets;
    Vec point(r, 1);
    std::int64_t top = 0;
    for (;;) {
        offsets.push_back(family_shifts(family, point));
        top = std::max(top, max_of(offsets.back()));
        std::size_t i = r;
        bool done = true;
        while (i > 0) {
            --i;
            if (++point[i] <= static_cast<std::int64_t>(n_outer)) {
                done = false;
                break;
            }
            point[i] = 1;
        }
        if (done) break;
    }

    FunctionTables tables(sieve);
    auto hi = static_cast<std::uint64_t>(checked_add(top, static_cast<std::int64_t>(n_inner)));
    Kernel kernel(functions, tables, hi, n_inner);
    std::vector<double> inner(offsets.size());
    parallel_for(offsets.size(), [&](std::size_t i) { inner[i] = kernel.log_average(offsets[i]).real(); });
    KahanSum lhs;
    for (double v : inner) lhs.add(v);

    ProductIdentity out;
    out.lhs = lhs.value() / static_cast<double>(offsets.size());
    out.rhs_a = 1.0;
    out.rhs_b = 1.0;
    for (std::size_t j = 0; j < functions.size(); ++j) {
        Kernel single({functions[j]}, tables, hi, n_inner);
        double mean = single.log_average({0}).real();
        out.means.push_back(mean);
        out.rhs_b *= mean;
        if (j > 0) out.rhs_a *= mean;
    }
    out.gap_a = std::abs(out.lhs - out.rhs_a);
    out.gap_b = std::abs(out.lhs - out.rhs_b);
    return out;
}

CorrelationResult pattern_density(const std::vector<MultFn>& functions, const ShiftSource& source,
                                  const std::vector<int>& signs, const CheckpointSchedule& schedule,
                                  const FactorSieve& sieve) {
    check_counts(functions, signs.size(), "pattern density signs");
    for (int e : signs)
        if (e != 1 && e != -1) throw DomainError("pattern density: signs must be +1 or -1");

    // the ordinary correlation resolves shifts and ranges; the pattern
    // product reuses its tables
    FunctionTables tables(sieve);
    CorrelationSpec spec{functions, source, AverageKind::logarithmic, schedule};
    const auto top = static_cast<std::int64_t>(schedule.final());
    Vec shifts;
    const Sequence* a = nullptr;
    CorrelationResult res;
    if (auto* fx = std::get_if<FixedShifts>(&source)) {
        check_counts(functions, fx->shifts.size(), "fixed shifts");
        require_nonnegative(fx->shifts);
        res.mode = CorrelationMode::fixed;
        shifts = fx->shifts;
    } else if (auto* fam = std::get_if<FamilyPoint>(&source)) {
        check_counts(functions, fam->family.size() + 1, "family shifts");
        res.mode = CorrelationMode::family;
        res.outer_point = fam->point;
        res.outer_norm = max_norm(fam->point);
        shifts = family_shifts(fam->family, fam->point);
    } else {
        const auto& comp = std::get<Composition>(source);
        check_counts(functions, comp.shifts.size(), "composition shifts");
        require_nonnegative(comp.shifts);
        res.mode = CorrelationMode::composition;
        shifts = comp.shifts;
        a = &comp.a;
    }
    res.shifts = shifts;
    std::int64_t hi = checked_add(top, max_of(shifts));
    if (a) hi = (*a)(hi);

    std::vector<const ValueTable*> ts;
    for (const auto& f : functions) {
        auto* b = tables.bytes(f, static_cast<std::uint64_t>(hi));
        bool ok = b != nullptr;
        for (std::int64_t n = 1; ok && n <= hi; ++n) ok = (*b)[static_cast<std::size_t>(n)] != 0;
        if (!ok) throw DomainError("pattern density: " + f.descriptor() + " is not {-1, 1}-valued on [1, " +
                                   std::to_string(hi) + "]");
        ts.push_back(&tables.values(f, static_cast<std::uint64_t>(hi)));
    }
    res.report = average_trace(schedule, AverageKind::logarithmic, [&](std::int64_t m) {
        double p = 1.0;
        for (std::size_t j = 0; j < ts.size(); ++j) {
            std::int64_t idx = a ? (*a)(m + shifts[j]) : m + shifts[j];
            p *= (1.0 + signs[j] * ts[j]->re()[static_cast<std::size_t>(idx)]) * 0.5;
        }
        return p;
    });
    return res;
}

ConvergenceReport discrepancy_growth(const MultFn& f, const Sequence& a, const CheckpointSchedule& schedule,
                                     const FactorSieve& sieve) {
    FunctionTables tables(sieve);
    const auto top = static_cast<std::int64_t>(schedule.final());
    const auto& t = tables.values(f, static_cast<std::uint64_t>(std::max<std::int64_t>(a(top), 1)));
    ConvergenceReport rep;
    ComplexSum partial;
    double best = 0.0;
    std::size_t next = 0;
    const auto& pts = schedule.points();
    for (std::int64_t k = 1; k <= top; ++k) {
        partial.add(t.at(a(k)));
        best = std::max(best, std::abs(partial.value()));
        if (static_cast<std::uint64_t>(k) == pts[next]) {
            rep.points.push_back({pts[next], {best, 0.0}});
            ++next;
        }
    }
    return rep;
}

IdentityCheck prime_dilation_identity_check(const std::vector<MultFn>& functions,
                                            const std::vector<std::int64_t>& shifts, std::uint64_t d,
                                            std::uint64_t prime_bound, std::uint64_t n, const FactorSieve& sieve) {
    check_counts(functions, shifts.size(), "prime dilation");
    require_nonnegative(shifts);
    if (n < 1) throw DomainError("prime dilation: N must be positive");
    if (d < 1) throw DomainError("prime dilation: d must be positive");
    auto primes = sieve.primes_up_to(std::min(prime_bound, sieve.limit()), d);
    if (prime_bound > sieve.limit()) throw DomainError("prime dilation: P exceeds the sieve limit");
    if (primes.empty()) throw DomainError("prime dilation: no primes = 1 mod " + std::to_string(d) + " up to P");
    __int128 top = static_cast<__int128>(prime_bound) * max_of(shifts) + n;
    if (top > static_cast<__int128>(sieve.limit()))
        throw DomainError("prime dilation: P max n_j + N exceeds the sieve limit " + std::to_string(sieve.limit()));

    FunctionTables tables(sieve);
    Kernel kernel(functions, tables, static_cast<std::uint64_t>(top), n);
    IdentityCheck out;
    out.lhs = kernel.log_average(shifts);
    std::vector<cplx> inner(primes.size());
    parallel_for(primes.size(), [&](std::size_t i) {
        Vec off(shifts.size());
        for (std::size_t j = 0; j < shifts.size(); ++j) off[j] = static_cast<std::int64_t>(primes[i]) * shifts[j];
        inner[i] = kernel.log_average(off);
    });
    ComplexSum rhs;
    for (const auto& v : inner) rhs.add(v);
    out.rhs = rhs.value() / static_cast<double>(primes.size());
    out.gap = std::abs(out.lhs - out.rhs);
    return out;
}

} // namespace mcorr
