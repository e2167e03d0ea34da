#include "mcorr/furstenberg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mcorr/errors.hpp"
#include "mcorr/parallel.hpp"
#include "mcorr/phase.hpp"
#include "mcorr/text.hpp"

namespace mcorr {

// ---- BoundedSequence ----

BoundedSequence BoundedSequence::constant(double c) {
    if (!(std::abs(c) <= 1.0)) throw DomainError("constant sequence must satisfy |c| <= 1");
    BoundedSequence s;
    s.kind_ = Kind::constant;
    s.c_ = c;
    s.descriptor_ = "const:" + format_double(c);
    return s;
}

BoundedSequence BoundedSequence::function(MultFn f) {
    BoundedSequence s;
    s.kind_ = Kind::function;
    s.descriptor_ = "fn:" + f.descriptor();
    s.f_ = std::move(f);
    return s;
}

BoundedSequence BoundedSequence::composed(MultFn f, Sequence a) {
    if (a.arity() != 1) throw DomainError("composition needs a one-variable sequence, got " + a.descriptor());
    BoundedSequence s;
    s.kind_ = Kind::composed;
    s.descriptor_ = "fn:" + f.descriptor() + "@" + a.descriptor();
    s.f_ = std::move(f);
    s.a_ = std::move(a);
    return s;
}

BoundedSequence BoundedSequence::phase(FixedReal theta) {
    BoundedSequence s;
    s.kind_ = Kind::phase;
    s.descriptor_ = "phase:" + theta.text();
    s.theta_ = std::move(theta);
    return s;
}

BoundedSequence BoundedSequence::log_phase(double c) {
    BoundedSequence s;
    s.kind_ = Kind::log_phase;
    s.c_ = c;
    s.descriptor_ = "logphase:" + format_double(c);
    return s;
}

BoundedSequence BoundedSequence::parse(std::string_view descriptor) {
    auto text = trim(descriptor);
    auto colon = text.find(':');
    if (colon == std::string_view::npos) throw ParseError(std::string(text), "expected kind:argument");
    auto kind = text.substr(0, colon);
    auto arg = text.substr(colon + 1);
    if (kind == "const") return constant(parse_double(arg, "constant"));
    if (kind == "phase") return phase(FixedReal::parse(arg));
    if (kind == "logphase") return log_phase(parse_double(arg, "log phase"));
    if (kind == "fn") {
        auto at = arg.find('@');
        if (at == std::string_view::npos) return function(MultFn::parse(arg));
        return composed(MultFn::parse(arg.substr(0, at)), Sequence::parse(arg.substr(at + 1)));
    }
    throw ParseError(std::string(text), "unknown bounded sequence kind '" + std::string(kind) + "'");
}

bool BoundedSequence::real_valued() const {
    switch (kind_) {
    case Kind::constant: return true;
    case Kind::function:
    case Kind::composed: return f_->real_valued();
    case Kind::phase: {
        auto q = theta_.rational();
        return q && boost::multiprecision::denominator(Rational(*q * 2)) == 1;
    }
    case Kind::log_phase: return c_ == 0.0;
    }
    return false;
}

std::uint64_t BoundedSequence::sieve_need(std::uint64_t hi) const {
    switch (kind_) {
    case Kind::function: return hi;
    case Kind::composed: return hi == 0 ? 0 : static_cast<std::uint64_t>((*a_)(static_cast<std::int64_t>(hi)));
    default: return 0;
    }
}

std::vector<cplx> BoundedSequence::sample(std::uint64_t hi, const FactorSieve& sieve) const {
    std::vector<cplx> out(hi + 1);
    switch (kind_) {
    case Kind::constant:
        std::fill(out.begin() + 1, out.end(), cplx(c_, 0.0));
        break;
    case Kind::function: {
        auto t = value_table(*f_, std::max<std::uint64_t>(hi, 1), sieve);
        for (std::uint64_t n = 1; n <= hi; ++n) out[n] = t.at(static_cast<std::int64_t>(n));
        break;
    }
    case Kind::composed: {
        auto top = sieve_need(hi);
        auto t = value_table(*f_, std::max<std::uint64_t>(top, 1), sieve);
        for (std::uint64_t n = 1; n <= hi; ++n) out[n] = t.at((*a_)(static_cast<std::int64_t>(n)));
        break;
    }
    case Kind::phase: {
        namespace bmp = boost::multiprecision;
        auto q = theta_.rational();
        if (q && bmp::denominator(*q) < bmp::cpp_int(std::int64_t(1) << 31)) {
            const auto den = static_cast<std::int64_t>(bmp::denominator(*q));
            auto wrapped = bmp::numerator(*q) % den;
            if (wrapped < 0) wrapped += den;
            const auto num = static_cast<std::int64_t>(wrapped);
            std::int64_t r = 0;
            for (std::uint64_t n = 1; n <= hi; ++n) {
                r = (r + num) % den;
                out[n] = unit_root(r, den);
            }
        } else {
            parallel_for(hi, [&](std::size_t i) {
                out[i + 1] = e_phase(frac_to_unit(theta_.frac_times(static_cast<std::int64_t>(i + 1))));
            });
        }
        break;
    }
    case Kind::log_phase:
        parallel_for(hi, [&](std::size_t i) {
            out[i + 1] = e_phase(c_ * std::log(static_cast<long double>(i + 1)));
        });
        break;
    }
    return out;
}

// ---- MomentSpec ----

MomentSpec MomentSpec::canonical() const {
    MomentSpec s = *this;
    if (s.factors.empty()) return s;
    std::int64_t lo = s.factors.front().shift;
    for (const auto& f : s.factors) lo = std::min(lo, f.shift);
    for (auto& f : s.factors) f.shift -= lo;
    std::sort(s.factors.begin(), s.factors.end(), [](const MomentFactor& x, const MomentFactor& y) {
        return std::tie(x.shift, x.component, x.conj) < std::tie(y.shift, y.component, y.conj);
    });
    return s;
}

MomentSpec MomentSpec::translated(std::int64_t h) const {
    MomentSpec s = *this;
    for (auto& f : s.factors) f.shift += h;
    return s;
}

std::string MomentSpec::key() const {
    std::string k;
    for (const auto& f : factors) {
        if (!k.empty()) k += ',';
        k += 'c' + std::to_string(f.component) + (f.conj ? "*" : "") + '@' + std::to_string(f.shift);
    }
    return k;
}

MomentSpec MomentSpec::parse(std::string_view key) {
    MomentSpec s;
    for (const auto& item : split_list(key)) {
        std::string_view t = item;
        auto at = t.find('@');
        if (t.empty() || t[0] != 'c' || at == std::string_view::npos)
            throw ParseError(item, "moment factor must read c<index>[*]@<shift>");
        auto comp = t.substr(1, at - 1);
        MomentFactor f;
        if (!comp.empty() && comp.back() == '*') {
            f.conj = true;
            comp.remove_suffix(1);
        }
        f.component = static_cast<std::size_t>(parse_uint(comp, "component index"));
        f.shift = parse_int(t.substr(at + 1), "shift");
        s.factors.push_back(f);
    }
    if (s.factors.empty()) throw ParseError(std::string(key), "empty moment spec");
    return s;
}

// ---- EmpiricalSystem ----

EmpiricalSystem::EmpiricalSystem(std::vector<BoundedSequence> sequences, CheckpointSchedule schedule,
                                 std::int64_t window, const FactorSieve& sieve)
    : sequences_(std::move(sequences)), schedule_(std::move(schedule)), window_(window) {
    if (window < 0) throw DomainError("moment window must be nonnegative");
    if (sequences_.empty()) throw DomainError("empirical system needs at least one sequence");
    const auto hi = schedule_.final() + static_cast<std::uint64_t>(window);
    for (const auto& s : sequences_) {
        if (s.sieve_need(hi) > sieve.limit())
            throw DomainError(s.descriptor() + " needs the sieve up to " + std::to_string(s.sieve_need(hi)) +
                              ", limit is " + std::to_string(sieve.limit()));
        samples_.push_back(s.sample(hi, sieve));
    }
}

void EmpiricalSystem::check(const MomentSpec& spec) const {
    if (spec.factors.empty()) throw DomainError("empty moment spec");
    for (const auto& f : spec.factors) {
        if (f.component >= samples_.size())
            throw DomainError("unknown component c" + std::to_string(f.component) + " (system has " +
                              std::to_string(samples_.size()) + ")");
        if (f.shift < 0 || f.shift > window_)
            throw DomainError("shift " + std::to_string(f.shift) + " outside the window [0, " +
                              std::to_string(window_) + "]");
    }
}

ConvergenceReport EmpiricalSystem::raw_moment(const MomentSpec& spec) const {
    check(spec);
    return average_trace(schedule_, AverageKind::logarithmic, [&](std::int64_t m) {
        cplx p{1.0, 0.0};
        for (const auto& f : spec.factors) {
            cplx v = samples_[f.component][static_cast<std::size_t>(m + f.shift)];
            p *= f.conj ? std::conj(v) : v;
        }
        return p;
    });
}

const ConvergenceReport& EmpiricalSystem::moment(const MomentSpec& spec) {
    auto c = spec.canonical();
    auto key = c.key();
    auto it = table_.find(key);
    if (it != table_.end()) return it->second;
    return table_.emplace(key, raw_moment(c)).first->second;
}

ShiftInvarianceResult shift_invariance_check(const EmpiricalSystem& emp, const std::vector<MomentSpec>& specs,
                                             std::int64_t h) {
    if (h < 1) throw DomainError("translation amount must be at least 1");
    ShiftInvarianceResult out;
    for (const auto& s : specs) {
        double gap = std::abs(emp.raw_moment(s).final_value() - emp.raw_moment(s.translated(h)).final_value());
        if (gap > out.max_gap || out.worst_key.empty()) {
            out.max_gap = std::max(out.max_gap, gap);
            out.worst_key = s.key();
        }
    }
    return out;
}

std::vector<AdmissionVerdict> admission_test(EmpiricalSystem& emp, const std::vector<MomentSpec>& specs,
                                             double tolerance) {
    if (emp.schedule().points().size() < 3) throw DomainError("admission test needs at least 3 checkpoints");
    std::vector<AdmissionVerdict> out;
    for (const auto& s : specs) {
        const auto& rep = emp.moment(s);
        const auto& p = rep.points;
        const std::size_t k = p.size();
        AdmissionVerdict v;
        v.key = s.canonical().key();
        v.max_step = std::max(std::abs(p[k - 1].value - p[k - 2].value), std::abs(p[k - 2].value - p[k - 3].value));
        v.stabilizing = v.max_step <= tolerance;
        out.push_back(v);
    }
    return out;
}

// ---- IndicatorCorrespondence ----

IndicatorCorrespondence::IndicatorCorrespondence(std::vector<std::uint8_t> y, bool finite_support)
    : y_(std::move(y)), finite_(finite_support) {
    prefix_.assign(y_.size() + 1, 0);
    for (std::size_t i = 0; i < y_.size(); ++i) {
        if (y_[i] > 1) throw DomainError("indicator values must be 0 or 1");
        prefix_[i + 1] = prefix_[i] + y_[i];
        if (y_[i]) ones_.push_back(i);
    }
}

IndicatorCorrespondence IndicatorCorrespondence::of_range(const Sequence& a, std::uint64_t n) {
    // 0-based: y(i) = 1 iff i is a value of a
    std::vector<std::uint8_t> y(n, 0);
    std::int64_t prev = INT64_MIN;
    for (std::int64_t k = 1;; ++k) {
        std::int64_t v = a(k);
        if (v <= prev) throw DomainError(a.descriptor() + " is not strictly increasing");
        prev = v;
        if (v >= 0 && static_cast<std::uint64_t>(v) >= n) break;
        if (v >= 0) y[static_cast<std::size_t>(v)] = 1;
    }
    return IndicatorCorrespondence(std::move(y));
}

std::uint8_t IndicatorCorrespondence::y(std::uint64_t i) const {
    if (i >= y_.size())
        throw RangeError("y(" + std::to_string(i) + ") beyond the cached range; extend the cache to " +
                         std::to_string(i + 1));
    return y_[i];
}

std::uint64_t IndicatorCorrespondence::tau(std::uint64_t n) const {
    if (finite_) return 0;
    if (n >= ones_.size())
        throw RangeError("tau(" + std::to_string(n) + ") needs " + std::to_string(n + 1) + " ones, the cache of " +
                         std::to_string(y_.size()) + " entries holds " + std::to_string(ones_.size()) +
                         "; extend it past the next one");
    return ones_[n];
}

std::uint64_t IndicatorCorrespondence::running_count(std::uint64_t m) const {
    if (m >= prefix_.size())
        throw RangeError("k_y(" + std::to_string(m) + ") beyond the cached range; extend the cache to " +
                         std::to_string(m));
    return prefix_[m];
}

// ---- correspondence identity ----

CorrespondenceCheck correspondence_identity_check(const std::vector<BoundedSequence>& b, const Sequence& a,
                                                  const std::vector<std::int64_t>& shifts, std::uint64_t n,
                                                  const FactorSieve& sieve) {
    if (b.size() != shifts.size()) throw DomainError("correspondence check: one shift per sequence");
    if (b.empty()) throw DomainError("correspondence check needs at least one sequence");
    if (n < 1) throw DomainError("correspondence check: N must be positive");
    for (auto s : shifts)
        if (s < 0) throw DomainError("shifts must be nonnegative");
    const auto big_n = static_cast<std::int64_t>(n);
    std::int64_t count = 0;
    while (a(count + 1) <= big_n) ++count;
    if (count == 0) throw DomainError("range of a has zero empirical density in [1, N]");
    const std::int64_t top_shift = *std::max_element(shifts.begin(), shifts.end());

    // y must reach the (count + max shift + 1)-th element of the range
    const auto y_hi = static_cast<std::uint64_t>(a(count + top_shift + 1)) + 1;
    const auto ic = IndicatorCorrespondence::of_range(a, y_hi);
    const auto b_hi = static_cast<std::uint64_t>(std::max(a(big_n + top_shift), a(count + top_shift + 1)));
    std::vector<std::vector<cplx>> samples;
    for (const auto& s : b) {
        if (s.sieve_need(b_hi) > sieve.limit())
            throw DomainError(s.descriptor() + " needs the sieve up to " + std::to_string(s.sieve_need(b_hi)));
        samples.push_back(s.sample(b_hi, sieve));
    }

    CorrespondenceCheck out;
    auto once = CheckpointSchedule::single(n);
    out.lhs = average_trace(once, AverageKind::logarithmic, [&](std::int64_t m) {
        // (S^m y)(0) = y(m); tau of the shifted indicator is tau_y(k_y(m) + n_j) - m
        const auto um = static_cast<std::uint64_t>(m);
        if (!ic.y(um)) return cplx{0.0, 0.0};
        const auto k = ic.running_count(um);
        cplx p{1.0, 0.0};
        for (std::size_t j = 0; j < b.size(); ++j) {
            const auto t = ic.tau(k + static_cast<std::uint64_t>(shifts[j])) - um;
            p *= samples[j][um + t];  // (R^m b_j)(t)
        }
        return p;
    }).final_value();
    out.density = static_cast<double>(count) / static_cast<double>(n);
    cplx mean = average_trace(once, AverageKind::logarithmic, [&](std::int64_t m) {
        cplx p{1.0, 0.0};
        for (std::size_t j = 0; j < b.size(); ++j) p *= samples[j][static_cast<std::size_t>(a(m + shifts[j]))];
        return p;
    }).final_value();
    out.rhs = out.density * mean;
    out.gap = std::abs(out.lhs - out.rhs);
    return out;
}

} // namespace mcorr
