#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mcorr/averaging.hpp"
#include "mcorr/multfun.hpp"
#include "mcorr/sequences.hpp"

namespace mcorr {

/// f_j(m + n_j) with n_j given directly.
struct FixedShifts {
    std::vector<std::int64_t> shifts;
};
/// f_0(m) prod_{j>=1} f_j(m + a_j(n)) at an outer point n of N^r.
struct FamilyPoint {
    SequenceFamily family;
    std::vector<std::int64_t> point;
};
/// prod_j f_j(a(m + n_j)).
struct Composition {
    Sequence a;
    std::vector<std::int64_t> shifts;
};
using ShiftSource = std::variant<FixedShifts, FamilyPoint, Composition>;

enum class CorrelationMode { fixed, family, composition };
std::string to_string(CorrelationMode mode);

struct CorrelationSpec {
    std::vector<MultFn> functions;
    ShiftSource source;
    AverageKind kind = AverageKind::logarithmic;
    CheckpointSchedule schedule;
};

struct CorrelationResult {
    CorrelationMode mode = CorrelationMode::fixed;
    ConvergenceReport report;
    /// shifts actually applied (family mode: 0, a_1(n), ..., a_l(n))
    std::vector<std::int64_t> shifts;
    std::vector<std::int64_t> outer_point;
    /// max-norm of the outer point
    std::int64_t outer_norm = 0;
};

/// Value tables of multiplicative functions, built once per descriptor and
/// grown on demand. Functions whose values lie in {-1, 0, 1} also get a
/// byte table for the batched kernels.
class FunctionTables {
public:
    explicit FunctionTables(const FactorSieve& sieve) : sieve_(&sieve) {}

    /// Table covering [0, hi]; DomainError when hi exceeds the sieve.
    const ValueTable& values(const MultFn& f, std::uint64_t hi);
    /// Byte table covering [0, hi], or nullptr when f leaves {-1, 0, 1}.
    const std::vector<std::int8_t>* bytes(const MultFn& f, std::uint64_t hi);
    const FactorSieve& sieve() const { return *sieve_; }

private:
    struct Entry {
        ValueTable table;
        std::vector<std::int8_t> bytes;
        bool small = false;
    };
    Entry& entry(const MultFn& f, std::uint64_t hi);

    const FactorSieve* sieve_;
    std::map<std::string, Entry> entries_;
};

CorrelationResult correlate(const CorrelationSpec& spec, FunctionTables& tables);
CorrelationResult correlate(const CorrelationSpec& spec, const FactorSieve& sieve);

CorrelationResult corr_fixed_shifts(const std::vector<MultFn>& functions, const std::vector<std::int64_t>& shifts,
                                    const CheckpointSchedule& schedule, AverageKind kind, const FactorSieve& sieve);
CorrelationResult corr_along_deterministic(const std::vector<MultFn>& functions, const Sequence& a,
                                           const std::vector<std::int64_t>& shifts,
                                           const CheckpointSchedule& schedule, const FactorSieve& sieve);
CorrelationResult corr_shifted_by_family(const std::vector<MultFn>& functions, const SequenceFamily& family,
                                         const std::vector<std::int64_t>& point, const CheckpointSchedule& schedule,
                                         const FactorSieve& sieve);

struct IdentityCheck {
    cplx lhs;
    cplx rhs;
    double gap = 0.0;
};

/// LHS = lE_{m<=N_in} prod_j f_j(a(m + n_j)),
/// RHS = lE_{n<=N_out} lE_{m<=N_in} prod_j f_j(m + a(n + n_j)).
IdentityCheck identity_check_deterministic(const std::vector<MultFn>& functions, const Sequence& a,
                                           const std::vector<std::int64_t>& shifts, std::uint64_t n_outer,
                                           std::uint64_t n_inner, const FactorSieve& sieve);

struct ProductIdentity {
    double lhs = 0.0;
    /// prod_{j>=1} lE f_j
    double rhs_a = 0.0;
    /// prod_{j>=0} lE f_j
    double rhs_b = 0.0;
    double gap_a = 0.0;
    double gap_b = 0.0;
    /// lE_{m<=N_in} f_j(m), j = 0..l
    std::vector<double> means;
};

/// LHS = E_{n in [N_out]^r} lE_{m<=N_in} f_0(m) prod_{j>=1} f_j(m + a_j(n)).
/// Real-valued functions only.
ProductIdentity product_identity_check(const std::vector<MultFn>& functions, const SequenceFamily& family,
                                       std::uint64_t n_outer, std::uint64_t n_inner, const FactorSieve& sieve);

/// lE_{m<=N_k} prod_j (1 + eps_j f_j(m + shift_j)) / 2 for {-1, 1}-valued f_j.
CorrelationResult pattern_density(const std::vector<MultFn>& functions, const ShiftSource& source,
                                  const std::vector<int>& signs, const CheckpointSchedule& schedule,
                                  const FactorSieve& sieve);

/// max_{n<=N_k} |sum_{k<=n} f(a(k))| per checkpoint (stored as real values).
ConvergenceReport discrepancy_growth(const MultFn& f, const Sequence& a, const CheckpointSchedule& schedule,
                                     const FactorSieve& sieve);

/// LHS = lE_{m<=N} prod_j f_j(m + n_j),
/// RHS = E_{p in P_d, p<=P} lE_{m<=N} prod_j f_j(m + p n_j).
IdentityCheck prime_dilation_identity_check(const std::vector<MultFn>& functions,
                                            const std::vector<std::int64_t>& shifts, std::uint64_t d,
                                            std::uint64_t prime_bound, std::uint64_t n, const FactorSieve& sieve);

} // namespace mcorr
