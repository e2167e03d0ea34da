#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcorr/averaging.hpp"
#include "mcorr/multfun.hpp"

namespace mcorr {

/// Values of a function at the primes p <= N, in increasing order.
struct PrimeValues {
    std::vector<std::uint64_t> primes;
    std::vector<cplx> values;

    bool real() const;
};

PrimeValues prime_values(const MultFn& f, std::uint64_t n, const FactorSieve& sieve);
/// (f chi)(p) = f(p) chi(p)
PrimeValues twisted(const PrimeValues& f, const DirichletCharacter& chi);

/// D(f, g; N)^2 = sum_{p<=N} (1 - Re f(p) conj g(p)) / p
double pretentious_distance_sq(const MultFn& f, const MultFn& g, std::uint64_t n, const FactorSieve& sieve);
double pretentious_distance_sq(const PrimeValues& f, const PrimeValues& g);

/// 1/p-weighted mean over p <= N of 1 - Re a(p) conj b(p).
double similarity_defect(const MultFn& a, const MultFn& b, std::uint64_t n, const FactorSieve& sieve);

/// The minimum over t is taken on the grid k * grid_step, |t| <= t_max,
/// followed by golden-section refinement around the best grid point. This
/// is a finite stand-in for the range |t| <= N.
struct TwistSearchConfig {
    double t_max = 100.0;
    double grid_step = 0.01;
    int refinement = 30;

    void validate() const;
    std::string describe() const;
};

struct TwistMinimum {
    std::uint64_t n = 0;
    double t = 0.0;
    double value = 0.0;
};

/// D(f, n^{it}; N)^2, summed directly.
double twist_distance_sq(const PrimeValues& f, std::size_t prime_count, double t);

/// min over t of D(f, n^{it}; N)^2.
TwistMinimum archimedean_min(const MultFn& f, std::uint64_t n, const TwistSearchConfig& config,
                             const FactorSieve& sieve);
/// The same minimum at every checkpoint, from one pass over the primes.
std::vector<TwistMinimum> archimedean_min_trace(const PrimeValues& f, const CheckpointSchedule& schedule,
                                                const TwistSearchConfig& config);

struct ScanEntry {
    std::uint64_t modulus = 1;
    std::uint64_t index = 0;
    bool principal = true;
    std::vector<TwistMinimum> minima;
    /// strictly increasing across checkpoints by more than the tolerance
    bool growing = false;
};

struct AperiodicityScan {
    std::uint64_t max_modulus = 1;
    CheckpointSchedule schedule;
    TwistSearchConfig config;
    double tolerance = 0.0;
    std::vector<ScanEntry> entries;

    bool all_growing() const;
};

/// M(f chi; N_k) for every primitive and every principal character of
/// modulus q <= Q.
AperiodicityScan aperiodicity_scan(const MultFn& f, std::uint64_t max_modulus, const CheckpointSchedule& schedule,
                                   const TwistSearchConfig& config, const FactorSieve& sieve,
                                   double tolerance = 0.0);

} // namespace mcorr
