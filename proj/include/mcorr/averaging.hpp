#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcorr/multfun.hpp"
#include "mcorr/summation.hpp"

namespace mcorr {

enum class AverageKind { cesaro, logarithmic };

std::string to_string(AverageKind kind);
AverageKind parse_average_kind(std::string_view text);

/// Scales N_k = ceil(start * ratio^k), capped at and always ending with
/// final. A value within 1e-9 (relative) of an integer is taken as that
/// integer, so 1000 * 10^k lands on powers of ten. Repeats are dropped.
class CheckpointSchedule {
public:
    static CheckpointSchedule make(std::uint64_t start, double ratio, std::uint64_t final);
    static CheckpointSchedule single(std::uint64_t n);
    /// "start,ratio,final"
    static CheckpointSchedule parse(std::string_view text);

    const std::vector<std::uint64_t>& points() const { return points_; }
    std::uint64_t start() const { return start_; }
    double ratio() const { return ratio_; }
    std::uint64_t final() const { return points_.back(); }
    std::string descriptor() const;

private:
    std::uint64_t start_ = 1;
    double ratio_ = 2.0;
    std::vector<std::uint64_t> points_;
};

struct Checkpoint {
    std::uint64_t n;
    cplx value;
};

struct TrendSummary {
    /// Checkpoints in the tail: the last ceil(K/2).
    std::size_t tail_length = 0;
    double tail_max = 0.0;
    /// Sign of |last| - |first tail value|.
    int drift = 0;
};

struct ConvergenceReport {
    std::vector<Checkpoint> points;

    TrendSummary trend() const;
    cplx final_value() const { return points.back().value; }
};

/// Harmonic number by the same blocked compensated order as log_avg.
double harmonic_number(std::uint64_t n);

/// Trace of E or lE over m <= N_k of term(m). The numerator and the weight
/// total share one blocked compensated order, so term = 1 yields exactly 1.
template <class Term>
ConvergenceReport average_trace(const CheckpointSchedule& schedule, AverageKind kind, Term&& term) {
    ConvergenceReport report;
    ComplexSum numerator;
    KahanSum weight;
    std::int64_t done = 0;
    for (std::uint64_t n : schedule.points()) {
        auto last = static_cast<std::int64_t>(n);
        if (kind == AverageKind::logarithmic) {
            numerator.merge(blocked_sum<ComplexSum>(done + 1, last, [&](std::int64_t m) {
                return cplx(term(m)) / static_cast<double>(m);
            }));
            weight.merge(blocked_sum<KahanSum>(done + 1, last, [](std::int64_t m) {
                return 1.0 / static_cast<double>(m);
            }));
            report.points.push_back({n, numerator.value() / weight.value()});
        } else {
            numerator.merge(blocked_sum<ComplexSum>(done + 1, last, [&](std::int64_t m) { return cplx(term(m)); }));
            report.points.push_back({n, numerator.value() / static_cast<double>(n)});
        }
        done = last;
    }
    return report;
}

/// (1/N) sum_{n<=N} a(n); samples[i] holds a(i + 1).
cplx cesaro_avg(std::span<const cplx> samples, std::uint64_t n);
/// sum a(n)/n over sum 1/n, n <= N.
cplx log_avg(std::span<const cplx> samples, std::uint64_t n);

/// Logarithmic average over primes p <= N in the class 1 mod d.
cplx log_avg_primes(const std::function<cplx(std::uint64_t)>& a, std::uint64_t n, std::uint64_t d,
                    const FactorSieve& sieve);

/// E_{n in [N]^r} |c(n)| for r in {1, 2, 3}.
double density_diagnostic(const std::function<double(std::span<const std::uint64_t>)>& c, std::uint64_t n,
                          unsigned r);

/// E_{m<=M} |E_{n<=W} f(n+m) - alpha|^2 with alpha = E_{n<=M} f(n).
/// values[i] holds f(i + 1) and must cover [1, M + W].
double short_interval_variance(std::span<const double> values, std::uint64_t window, std::uint64_t outer);
double short_interval_variance(const MultFn& f, std::uint64_t window, std::uint64_t outer,
                               const FactorSieve& sieve);

} // namespace mcorr
