#include "mcorr/averaging.hpp"

#include <cmath>

#include "mcorr/errors.hpp"

namespace mcorr {

std::string to_string(AverageKind kind) { return kind == AverageKind::cesaro ? "cesaro" : "logarithmic"; }

AverageKind parse_average_kind(std::string_view text) {
    text = trim(text);
    if (text == "cesaro") return AverageKind::cesaro;
    if (text == "logarithmic" || text == "log") return AverageKind::logarithmic;
    throw ParseError("average", "expected 'cesaro' or 'logarithmic', got '" + std::string(text) + "'");
}

CheckpointSchedule CheckpointSchedule::make(std::uint64_t start, double ratio, std::uint64_t final) {
    if (start < 1) throw DomainError("schedule: start must be at least 1");
    if (!(ratio > 1.0) || !std::isfinite(ratio)) throw DomainError("schedule: ratio must exceed 1");
    if (final < start) throw DomainError("schedule: final must be at least start");
    CheckpointSchedule s;
    s.start_ = start;
    s.ratio_ = ratio;
    for (int k = 0;; ++k) {
        long double x = static_cast<long double>(start) * std::pow(static_cast<long double>(ratio), k);
        long double r = std::round(x);
        long double v = std::fabs(x - r) <= 1e-9L * x ? r : std::ceil(x);
        if (v >= static_cast<long double>(final)) break;
        auto n = static_cast<std::uint64_t>(v);
        if (s.points_.empty() || n > s.points_.back()) s.points_.push_back(n);
    }
    s.points_.push_back(final);
    return s;
}

CheckpointSchedule CheckpointSchedule::single(std::uint64_t n) {
    if (n < 1) throw DomainError("schedule: N must be at least 1");
    CheckpointSchedule s;
    s.start_ = n;
    s.points_ = {n};
    return s;
}

CheckpointSchedule CheckpointSchedule::parse(std::string_view text) {
    auto f = split_list(text);
    if (f.size() != 3) throw ParseError("schedule", "expected 'start,ratio,final', got '" + std::string(text) + "'");
    try {
        return make(parse_uint(f[0], "schedule start"), parse_double(f[1], "schedule ratio"),
                    parse_uint(f[2], "schedule final"));
    } catch (const DomainError& e) {
        throw ParseError("schedule", e.what());
    }
}

std::string CheckpointSchedule::descriptor() const {
    return std::to_string(start_) + "," + format_double(ratio_) + "," + std::to_string(final());
}

TrendSummary ConvergenceReport::trend() const {
    TrendSummary t;
    if (points.empty()) return t;
    t.tail_length = (points.size() + 1) / 2;
    std::size_t first = points.size() - t.tail_length;
    for (std::size_t i = first; i < points.size(); ++i) t.tail_max = std::max(t.tail_max, std::abs(points[i].value));
    double d = std::abs(points.back().value) - std::abs(points[first].value);
    t.drift = d > 0 ? 1 : (d < 0 ? -1 : 0);
    return t;
}

double harmonic_number(std::uint64_t n) {
    return blocked_sum<KahanSum>(1, static_cast<std::int64_t>(n),
                                 [](std::int64_t m) { return 1.0 / static_cast<double>(m); })
        .value();
}

namespace {

void require_samples(std::span<const cplx> samples, std::uint64_t n) {
    if (n == 0) throw DomainError("average over an empty range (N = 0)");
    if (samples.size() < n)
        throw DomainError("samples cover [1, " + std::to_string(samples.size()) + "] but N = " + std::to_string(n));
}

} // namespace

cplx cesaro_avg(std::span<const cplx> samples, std::uint64_t n) {
    require_samples(samples, n);
    return average_trace(CheckpointSchedule::single(n), AverageKind::cesaro,
                         [&](std::int64_t m) { return samples[static_cast<std::size_t>(m - 1)]; })
        .final_value();
}

cplx log_avg(std::span<const cplx> samples, std::uint64_t n) {
    require_samples(samples, n);
    return average_trace(CheckpointSchedule::single(n), AverageKind::logarithmic,
                         [&](std::int64_t m) { return samples[static_cast<std::size_t>(m - 1)]; })
        .final_value();
}

cplx log_avg_primes(const std::function<cplx(std::uint64_t)>& a, std::uint64_t n, std::uint64_t d,
                    const FactorSieve& sieve) {
    auto primes = sieve.primes_up_to(n, d);
    if (primes.empty())
        throw DomainError("no primes = 1 mod " + std::to_string(d) + " up to " + std::to_string(n));
    auto last = static_cast<std::int64_t>(primes.size()) - 1;
    auto num = blocked_sum<ComplexSum>(0, last, [&](std::int64_t i) {
        auto p = primes[static_cast<std::size_t>(i)];
        return a(p) / static_cast<double>(p);
    });
    auto den = blocked_sum<KahanSum>(0, last, [&](std::int64_t i) {
        return 1.0 / static_cast<double>(primes[static_cast<std::size_t>(i)]);
    });
    return num.value() / den.value();
}

double density_diagnostic(const std::function<double(std::span<const std::uint64_t>)>& c, std::uint64_t n,
                          unsigned r) {
    if (r < 1 || r > 3) throw DomainError("density_diagnostic: r must be 1, 2 or 3");
    if (n == 0) throw DomainError("density_diagnostic: N must be positive");
    KahanSum total;
    std::vector<std::uint64_t> point(r, 1);
    for (;;) {
        total.add(std::fabs(c(point)));
        std::size_t i = r;
        while (i > 0) {
            --i;
            if (++point[i] <= n) break;
            point[i] = 1;
            if (i == 0) return total.value() / std::pow(static_cast<double>(n), static_cast<double>(r));
        }
    }
}

double short_interval_variance(std::span<const double> values, std::uint64_t window, std::uint64_t outer) {
    if (window == 0) throw DomainError("short_interval_variance: window must be positive");
    if (window >= outer) throw DomainError("short_interval_variance: window must be shorter than the outer range");
    if (values.size() < outer + window)
        throw DomainError("short_interval_variance: values must cover [1, M + W]");

    KahanSum mean;
    for (std::uint64_t i = 0; i < outer; ++i) mean.add(values[i]);
    const double alpha = mean.value() / static_cast<double>(outer);

    // prefix[k] = sum_{n<=k} f(n); exact for integer-valued f
    std::vector<long double> prefix(outer + window + 1, 0.0L);
    for (std::uint64_t k = 1; k <= outer + window; ++k) prefix[k] = prefix[k - 1] + values[k - 1];

    KahanSum total;
    const long double w = static_cast<long double>(window);
    for (std::uint64_t m = 1; m <= outer; ++m) {
        long double local = (prefix[m + window] - prefix[m]) / w - alpha;
        total.add(static_cast<double>(local * local));
    }
    return total.value() / static_cast<double>(outer);
}

double short_interval_variance(const MultFn& f, std::uint64_t window, std::uint64_t outer,
                               const FactorSieve& sieve) {
    if (!f.real_valued()) throw DomainError("short_interval_variance: function must be real-valued");
    if (window >= outer) throw DomainError("short_interval_variance: window must be shorter than the outer range");
    auto table = value_table(f, outer + window, sieve);
    return short_interval_variance(table.re().subspan(1), window, outer);
}

} // namespace mcorr
