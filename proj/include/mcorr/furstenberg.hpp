#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcorr/averaging.hpp"
#include "mcorr/multfun.hpp"
#include "mcorr/real.hpp"
#include "mcorr/sequences.hpp"
#include "mcorr/sieve.hpp"

namespace mcorr {

/// A bounded sequence on the positive integers.
///
/// Descriptors:
///   const:C            constant real C with |C| <= 1
///   fn:F               multiplicative function F (multfun grammar)
///   fn:F@S             F composed with the sequence S (sequence grammar)
///   phase:T            e(n T), T a fixed real (sqrt2, 1/2, pi, ...)
///   logphase:C         e(C log n)
class BoundedSequence {
public:
    static BoundedSequence constant(double c);
    static BoundedSequence function(MultFn f);
    static BoundedSequence composed(MultFn f, Sequence a);
    static BoundedSequence phase(FixedReal theta);
    static BoundedSequence log_phase(double c);
    static BoundedSequence parse(std::string_view descriptor);

    const std::string& descriptor() const { return descriptor_; }
    bool real_valued() const;

    /// Values at 0..hi (index 0 is 0 for arithmetic inputs).
    std::vector<cplx> sample(std::uint64_t hi, const FactorSieve& sieve) const;

    /// Largest integer the sieve must cover to sample up to hi.
    std::uint64_t sieve_need(std::uint64_t hi) const;

private:
    enum class Kind { constant, function, composed, phase, log_phase };
    Kind kind_ = Kind::constant;
    std::string descriptor_;
    double c_ = 1.0;
    std::optional<MultFn> f_;
    std::optional<Sequence> a_;
    FixedReal theta_;
};

/// One factor x_c(m + shift), conjugated when conj is set.
struct MomentFactor {
    std::size_t component = 0;
    std::int64_t shift = 0;
    bool conj = false;

    auto operator<=>(const MomentFactor&) const = default;
};

/// Product of factors; key grammar is "c0@0,c1*@2" (* marks conjugation).
struct MomentSpec {
    std::vector<MomentFactor> factors;

    std::size_t order() const { return factors.size(); }
    /// Shifts translated so the smallest is 0, factors sorted.
    MomentSpec canonical() const;
    MomentSpec translated(std::int64_t h) const;
    std::string key() const;
    static MomentSpec parse(std::string_view key);
};

/// Finite-scale surrogate of a joint Furstenberg system: the sequences
/// sampled on [1, N_max + window] and a table of logarithmic moments keyed by
/// canonical spec strings.
class EmpiricalSystem {
public:
    EmpiricalSystem(std::vector<BoundedSequence> sequences, CheckpointSchedule schedule, std::int64_t window,
                    const FactorSieve& sieve);

    std::size_t size() const { return samples_.size(); }
    const CheckpointSchedule& schedule() const { return schedule_; }
    std::int64_t window() const { return window_; }
    const std::vector<BoundedSequence>& sequences() const { return sequences_; }

    /// Moment of the canonical form of spec, computed once and tabled.
    const ConvergenceReport& moment(const MomentSpec& spec);
    /// Moment of spec exactly as given, bypassing canonicalization.
    ConvergenceReport raw_moment(const MomentSpec& spec) const;

    const std::map<std::string, ConvergenceReport>& table() const { return table_; }

private:
    void check(const MomentSpec& spec) const;

    std::vector<BoundedSequence> sequences_;
    CheckpointSchedule schedule_;
    std::int64_t window_;
    std::vector<std::vector<cplx>> samples_;
    std::map<std::string, ConvergenceReport> table_;
};

struct ShiftInvarianceResult {
    double max_gap = 0.0;
    std::string worst_key;
};

/// max over specs of |moment(spec) - moment(spec + h)| at N_max, both raw.
ShiftInvarianceResult shift_invariance_check(const EmpiricalSystem& emp, const std::vector<MomentSpec>& specs,
                                             std::int64_t h);

struct AdmissionVerdict {
    std::string key;
    bool stabilizing = false;
    double max_step = 0.0;  ///< largest change across the final three checkpoints
};

/// Stabilizing iff both changes across the final three checkpoints are at
/// most tolerance.
std::vector<AdmissionVerdict> admission_test(EmpiricalSystem& emp, const std::vector<MomentSpec>& specs,
                                             double tolerance);

/// y on Z_+ (0-based) with its positions of ones and prefix counts.
class IndicatorCorrespondence {
public:
    explicit IndicatorCorrespondence(std::vector<std::uint8_t> y, bool finite_support = false);
    /// y = indicator of the range of a on [0, n).
    static IndicatorCorrespondence of_range(const Sequence& a, std::uint64_t n);

    std::uint64_t cached() const { return prefix_.size() - 1; }
    bool finite_support() const { return finite_; }
    std::uint8_t y(std::uint64_t i) const;

    /// Position of the (n+1)-th one; 0 for finite-support y.
    std::uint64_t tau(std::uint64_t n) const;
    /// Number of ones among y(0..m-1).
    std::uint64_t running_count(std::uint64_t m) const;

private:
    std::vector<std::uint8_t> y_;
    std::vector<std::uint64_t> prefix_;
    std::vector<std::uint64_t> ones_;
    bool finite_;
};

struct CorrespondenceCheck {
    cplx lhs;
    cplx rhs;
    double density = 0.0;  ///< empirical density of the range of a in [1, N]
    double gap = 0.0;
};

/// LHS evaluates x_j(tau_y(n_j)) 1_{y(0)=1} along the orbit (R^m b, S^m y);
/// RHS = density * lE_{m<=N} prod_j b_j(a(m + n_j)).
CorrespondenceCheck correspondence_identity_check(const std::vector<BoundedSequence>& b, const Sequence& a,
                                                  const std::vector<std::int64_t>& shifts, std::uint64_t n,
                                                  const FactorSieve& sieve);

} // namespace mcorr
