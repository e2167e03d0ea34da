#include "mcorr/pretentious.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mcorr/errors.hpp"
#include "mcorr/parallel.hpp"

namespace mcorr {

namespace {

constexpr std::int64_t kChunk = 256;  // grid points between exact reseeds
constexpr std::size_t kLanes = 32;

void require_sieve(std::uint64_t n, const FactorSieve& sieve) {
    if (n > sieve.limit())
        throw DomainError("N = " + std::to_string(n) + " exceeds the sieve limit " + std::to_string(sieve.limit()));
}

struct Candidate {
    double t;
    double value;
};

bool better(const Candidate& a, const Candidate& b) { return a.value < b.value || (a.value == b.value && a.t < b.t); }

// acc[s * kLanes + j] += Re z_j while z_j steps by r_j
__attribute__((target_clones("avx2", "default"))) void rotate_block(double* __restrict acc, double* zr_io,
                                                                     double* zi_io, const double* rr_in,
                                                                     const double* ri_in, std::size_t len) {
    double zr[kLanes], zi[kLanes], rr[kLanes], ri[kLanes];
    for (std::size_t j = 0; j < kLanes; ++j) {
        zr[j] = zr_io[j];
        zi[j] = zi_io[j];
        rr[j] = rr_in[j];
        ri[j] = ri_in[j];
    }
    for (std::size_t s = 0; s < len; ++s) {
        double* a = acc + s * kLanes;
        for (std::size_t j = 0; j < kLanes; ++j) {
            a[j] += zr[j];
            double nr = zr[j] * rr[j] - zi[j] * ri[j];
            double ni = zr[j] * ri[j] + zi[j] * rr[j];
            zr[j] = nr;
            zi[j] = ni;
        }
    }
    for (std::size_t j = 0; j < kLanes; ++j) {
        zr_io[j] = zr[j];
        zi_io[j] = zi[j];
    }
}

// S_c(t_k) = sum over the first cuts[c] primes of Re(f(p) p^{-i t_k}) / p
// for grid indices k in [k_lo, k_hi]
std::vector<std::vector<double>> grid_sums(const PrimeValues& f, const std::vector<std::size_t>& cuts, double step,
                                           std::int64_t k_lo, std::int64_t k_hi) {
    const std::size_t points = static_cast<std::size_t>(k_hi - k_lo + 1);
    std::vector<std::vector<double>> out(cuts.size(), std::vector<double>(points, 0.0));
    const std::size_t total = cuts.empty() ? 0 : cuts.back();
    std::vector<double> logp(total), wr(total), wi(total);
    for (std::size_t i = 0; i < total; ++i) {
        auto p = static_cast<double>(f.primes[i]);
        logp[i] = std::log(p);
        wr[i] = f.values[i].real() / p;
        wi[i] = f.values[i].imag() / p;
    }
    const std::size_t chunks = (points + kChunk - 1) / kChunk;
    parallel_for(chunks, [&](std::size_t c) {
        const std::int64_t first = k_lo + static_cast<std::int64_t>(c) * kChunk;
        const std::size_t len = std::min<std::size_t>(kChunk, points - c * kChunk);
        const double t0 = static_cast<double>(first) * step;
        std::vector<double> acc(len * kLanes, 0.0);
        std::size_t begin = 0;
        for (std::size_t cp = 0; cp < cuts.size(); ++cp) {
            for (std::size_t b = begin; b < cuts[cp]; b += kLanes) {
                alignas(32) double zr[kLanes] = {}, zi[kLanes] = {}, rr[kLanes], ri[kLanes];
                for (std::size_t j = 0; j < kLanes; ++j) {
                    rr[j] = 1.0;
                    ri[j] = 0.0;
                    std::size_t i = b + j;
                    if (i >= cuts[cp]) continue;
                    double a = -t0 * logp[i], s = std::sin(a), co = std::cos(a);
                    zr[j] = wr[i] * co - wi[i] * s;
                    zi[j] = wr[i] * s + wi[i] * co;
                    double d = -step * logp[i];
                    rr[j] = std::cos(d);
                    ri[j] = std::sin(d);
                }
                rotate_block(acc.data(), zr, zi, rr, ri, len);
            }
            begin = cuts[cp];
            double* dst = out[cp].data() + c * kChunk;
            for (std::size_t s = 0; s < len; ++s) {
                double v = 0.0;
                for (std::size_t j = 0; j < kLanes; ++j) v += acc[s * kLanes + j];
                dst[s] = v;
            }
        }
    });
    return out;
}

TwistMinimum minimize(const PrimeValues& f, std::size_t count, std::uint64_t n, const std::vector<double>& sums,
                      double weight, std::int64_t k_lo, bool mirrored, const TwistSearchConfig& cfg) {
    // best grid point; ties go to the smallest t
    Candidate best{0.0, INFINITY};
    for (std::size_t i = 0; i < sums.size(); ++i) {
        double t = static_cast<double>(k_lo + static_cast<std::int64_t>(i)) * cfg.grid_step;
        double v = weight - sums[i];
        if (mirrored && t > 0 && better({-t, v}, best)) best = {-t, v};
        if (better({t, v}, best)) best = {t, v};
    }
    auto eval = [&](double t) { return Candidate{t, twist_distance_sq(f, count, t)}; };

    Candidate result = eval(best.t);
    double lo = std::max(-cfg.t_max, best.t - cfg.grid_step);
    double hi = std::min(cfg.t_max, best.t + cfg.grid_step);
    if (cfg.refinement > 0 && hi > lo) {
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = lo, b = hi;
        Candidate x1 = eval(b - g * (b - a)), x2 = eval(a + g * (b - a));
        for (int it = 0; it < cfg.refinement; ++it) {
            if (x1.value <= x2.value) {
                b = x2.t;
                x2 = x1;
                x1 = eval(b - g * (b - a));
            } else {
                a = x1.t;
                x1 = x2;
                x2 = eval(a + g * (b - a));
            }
        }
        if (better(x1, result)) result = x1;
        if (better(x2, result)) result = x2;
    }
    Candidate zero = eval(0.0);
    if (better(zero, result)) result = zero;
    return {n, result.t, std::max(0.0, result.value)};
}

} // namespace

bool PrimeValues::real() const {
    return std::all_of(values.begin(), values.end(), [](const cplx& z) { return z.imag() == 0.0; });
}

PrimeValues prime_values(const MultFn& f, std::uint64_t n, const FactorSieve& sieve) {
    require_sieve(n, sieve);
    PrimeValues out;
    out.primes = sieve.primes_up_to(n);
    out.values.resize(out.primes.size());
    for (std::size_t i = 0; i < out.primes.size(); ++i) out.values[i] = f.at_prime(out.primes[i]);
    return out;
}

PrimeValues twisted(const PrimeValues& f, const DirichletCharacter& chi) {
    PrimeValues out = f;
    for (std::size_t i = 0; i < out.primes.size(); ++i)
        out.values[i] *= chi(static_cast<std::int64_t>(out.primes[i]));
    return out;
}

double pretentious_distance_sq(const PrimeValues& f, const PrimeValues& g) {
    if (f.primes != g.primes) throw DomainError("pretentious distance: prime lists differ");
    KahanSum s;
    for (std::size_t i = 0; i < f.primes.size(); ++i)
        s.add((1.0 - (f.values[i] * std::conj(g.values[i])).real()) / static_cast<double>(f.primes[i]));
    return std::max(0.0, s.value());
}

double pretentious_distance_sq(const MultFn& f, const MultFn& g, std::uint64_t n, const FactorSieve& sieve) {
    return pretentious_distance_sq(prime_values(f, n, sieve), prime_values(g, n, sieve));
}

double similarity_defect(const MultFn& a, const MultFn& b, std::uint64_t n, const FactorSieve& sieve) {
    auto fa = prime_values(a, n, sieve), fb = prime_values(b, n, sieve);
    if (fa.primes.empty()) throw DomainError("similarity_defect: no primes up to " + std::to_string(n));
    KahanSum num, den;
    for (std::size_t i = 0; i < fa.primes.size(); ++i) {
        double w = 1.0 / static_cast<double>(fa.primes[i]);
        num.add((1.0 - (fa.values[i] * std::conj(fb.values[i])).real()) * w);
        den.add(w);
    }
    return std::max(0.0, num.value() / den.value());
}

void TwistSearchConfig::validate() const {
    if (!(t_max > 0) || !std::isfinite(t_max)) throw DomainError("twist search: t_max must be positive");
    if (!(grid_step > 0) || !(grid_step < t_max)) throw DomainError("twist search: need 0 < grid_step < t_max");
    if (refinement < 0) throw DomainError("twist search: refinement must be nonnegative");
}

std::string TwistSearchConfig::describe() const {
    char buf[160];
    std::snprintf(buf, sizeof buf, "min over |t| <= %.17g on step %.17g with %d golden-section steps (not |t| <= N)",
                  t_max, grid_step, refinement);
    return buf;
}

double twist_distance_sq(const PrimeValues& f, std::size_t prime_count, double t) {
    KahanSum s;
    for (std::size_t i = 0; i < prime_count; ++i) {
        auto p = static_cast<double>(f.primes[i]);
        double a = -t * std::log(p);
        cplx z = f.values[i] * cplx(std::cos(a), std::sin(a));
        s.add((1.0 - z.real()) / p);
    }
    return s.value();
}

std::vector<TwistMinimum> archimedean_min_trace(const PrimeValues& f, const CheckpointSchedule& schedule,
                                                const TwistSearchConfig& config) {
    config.validate();
    std::vector<std::size_t> cuts;
    for (auto n : schedule.points())
        cuts.push_back(static_cast<std::size_t>(std::upper_bound(f.primes.begin(), f.primes.end(), n) - f.primes.begin()));
    if (!f.primes.empty() && schedule.final() < f.primes.back() && cuts.back() == f.primes.size())
        throw DomainError("archimedean_min_trace: inconsistent prime list");
    const auto k_max = static_cast<std::int64_t>(std::floor(config.t_max / config.grid_step + 1e-9));
    const bool mirrored = f.real();
    const std::int64_t k_lo = mirrored ? 0 : -k_max;
    auto sums = grid_sums(f, cuts, config.grid_step, k_lo, k_max);

    std::vector<TwistMinimum> out;
    for (std::size_t c = 0; c < cuts.size(); ++c) {
        double weight = 0.0;
        KahanSum w;
        for (std::size_t i = 0; i < cuts[c]; ++i) w.add(1.0 / static_cast<double>(f.primes[i]));
        weight = w.value();
        out.push_back(minimize(f, cuts[c], schedule.points()[c], sums[c], weight, k_lo, mirrored, config));
    }
    return out;
}

TwistMinimum archimedean_min(const MultFn& f, std::uint64_t n, const TwistSearchConfig& config,
                             const FactorSieve& sieve) {
    return archimedean_min_trace(prime_values(f, n, sieve), CheckpointSchedule::single(n), config).front();
}

bool AperiodicityScan::all_growing() const {
    return std::all_of(entries.begin(), entries.end(), [](const ScanEntry& e) { return e.growing; });
}

AperiodicityScan aperiodicity_scan(const MultFn& f, std::uint64_t max_modulus, const CheckpointSchedule& schedule,
                                   const TwistSearchConfig& config, const FactorSieve& sieve, double tolerance) {
    if (max_modulus < 1) throw DomainError("aperiodicity_scan: Q must be at least 1");
    if (max_modulus > kMaxCharacterModulus) throw DomainError("aperiodicity_scan: Q too large");
    config.validate();
    AperiodicityScan scan;
    scan.max_modulus = max_modulus;
    scan.schedule = schedule;
    scan.config = config;
    scan.tolerance = tolerance;
    auto base = prime_values(f, schedule.final(), sieve);
    for (std::uint64_t q = 1; q <= max_modulus; ++q) {
        for (const auto& chi : DirichletCharacter::all(q)) {
            if (!chi.principal() && !chi.primitive()) continue;
            ScanEntry e;
            e.modulus = q;
            e.index = chi.index();
            e.principal = chi.principal();
            e.minima = archimedean_min_trace(twisted(base, chi), schedule, config);
            e.growing = true;
            for (std::size_t k = 1; k < e.minima.size(); ++k)
                if (!(e.minima[k].value - e.minima[k - 1].value > tolerance)) e.growing = false;
            scan.entries.push_back(std::move(e));
        }
    }
    return scan;
}

} // namespace mcorr
