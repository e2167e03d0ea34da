#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "mcorr/parallel.hpp"

namespace mcorr {

using cplx = std::complex<double>;

/// Neumaier-compensated accumulator.
class KahanSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    void merge(const KahanSum& other) {
        add(other.sum_);
        add(other.comp_);
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

class ComplexSum {
public:
    void add(cplx z) {
        re_.add(z.real());
        im_.add(z.imag());
    }
    void add(double x) { re_.add(x); }
    void merge(const ComplexSum& other) {
        re_.merge(other.re_);
        im_.merge(other.im_);
    }
    cplx value() const { return {re_.value(), im_.value()}; }

private:
    KahanSum re_;
    KahanSum im_;
};

/// Block width of the deterministic reduction. Blocks are anchored at the
/// first index of a summation range, never at worker boundaries.
inline constexpr std::int64_t kSumBlock = std::int64_t{1} << 14;

/// Combines partials pairwise, adjacent pairs first, in index order.
template <class Acc>
Acc tree_reduce(std::vector<Acc> parts) {
    if (parts.empty()) return Acc{};
    while (parts.size() > 1) {
        std::vector<Acc> next;
        next.reserve((parts.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < parts.size(); i += 2) {
            Acc a = parts[i];
            a.merge(parts[i + 1]);
            next.push_back(a);
        }
        if (parts.size() % 2 == 1) next.push_back(parts.back());
        parts = std::move(next);
    }
    return parts.front();
}

/// Compensated sum of term(i) over the closed range [first, last]. The result
/// is bit-identical for every worker count.
template <class Acc, class Term>
Acc blocked_sum(std::int64_t first, std::int64_t last, Term&& term) {
    if (last < first) return Acc{};
    std::int64_t length = last - first + 1;
    std::size_t blocks = static_cast<std::size_t>((length + kSumBlock - 1) / kSumBlock);
    std::vector<Acc> parts(blocks);
    parallel_for(blocks, [&](std::size_t b) {
        std::int64_t lo = first + static_cast<std::int64_t>(b) * kSumBlock;
        std::int64_t hi = std::min(last, lo + kSumBlock - 1);
        Acc acc;
        for (std::int64_t i = lo; i <= hi; ++i) acc.add(term(i));
        parts[b] = acc;
    });
    return tree_reduce(std::move(parts));
}

} // namespace mcorr
