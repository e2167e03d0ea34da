#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace mcorr {

/// Closed integer interval [lo, hi].
struct Window {
    std::uint64_t lo = 1;
    std::uint64_t hi = 1;

    std::uint64_t size() const { return hi - lo + 1; }
    bool contains(std::uint64_t n) const { return lo <= n && n <= hi; }
    friend bool operator==(const Window&, const Window&) = default;
};

struct PrimePower {
    std::uint64_t prime;
    unsigned exponent;
    friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// Liouville, Moebius and Omega values over a window; index i holds n = lo + i.
struct ArithmeticTable {
    Window window;
    std::vector<std::int8_t> lambda;
    std::vector<std::int8_t> mobius;
    std::vector<std::uint8_t> big_omega;
    /// Smallest prime factor of composite n; 0 when n = 1 or n is prime.
    std::vector<std::uint32_t> smallest_factor;

    std::size_t size() const { return lambda.size(); }
};

struct SieveOptions {
    /// Width of one independently sieved segment.
    std::uint64_t segment_size = std::uint64_t{1} << 18;
    /// Upper bound on bytes for a full [1, limit] table.
    std::uint64_t memory_budget = std::uint64_t{4} << 30;
};

/// Bytes per table entry used for budget checks.
inline constexpr std::uint64_t kTableBytesPerEntry = 3 + sizeof(std::uint32_t);

/// Segmented smallest-prime-factor sieve over [1, limit]. Immutable after
/// build; windows may be sieved concurrently.
class FactorSieve {
public:
    static FactorSieve build(std::uint64_t limit, SieveOptions options = {});

    std::uint64_t limit() const { return limit_; }
    std::uint64_t segment_size() const { return options_.segment_size; }
    const SieveOptions& options() const { return options_; }
    /// Exactly the primes up to floor(sqrt(limit)).
    std::span<const std::uint64_t> base_primes() const { return base_primes_; }

    /// Prime factorization in increasing prime order; empty for n = 1.
    std::vector<PrimePower> factorize(std::uint64_t n) const;

    /// Primes <= n, restricted to the class 1 mod d when d > 1.
    std::vector<std::uint64_t> primes_up_to(std::uint64_t n, std::uint64_t d = 1) const;

    ArithmeticTable arithmetic_table(Window window) const;

    /// Serves later arithmetic_table calls inside table.window from a copy of
    /// the given (previously computed or loaded) table.
    void attach_cache(std::shared_ptr<const ArithmeticTable> table);

private:
    FactorSieve(std::uint64_t limit, SieveOptions options, std::vector<std::uint64_t> base);
    void check_window(Window w) const;
    void sieve_segment(Window w, ArithmeticTable& out, std::size_t offset) const;

    std::uint64_t limit_;
    SieveOptions options_;
    std::vector<std::uint64_t> base_primes_;
    std::shared_ptr<const ArithmeticTable> cache_;
};

/// Primes up to n by a plain Eratosthenes bitmap (used for base primes).
std::vector<std::uint64_t> simple_primes(std::uint64_t n);

std::uint64_t isqrt(std::uint64_t n);

/// Binary table dump. Layout (all integers little-endian):
///   bytes 0..7   magic "MCORRTBL"
///   bytes 8..11  u32 format version (kTableFormatVersion)
///   bytes 12..15 u32 reserved, zero
///   bytes 16..23 u64 window.lo
///   bytes 24..31 u64 window.hi
/// followed by len bytes lambda (i8), len bytes mobius (i8), len bytes
/// big_omega (u8) and len u32 smallest_factor, len = hi - lo + 1.
inline constexpr std::uint32_t kTableFormatVersion = 1;
void write_table(std::ostream& out, const ArithmeticTable& table);
ArithmeticTable read_table(std::istream& in);

} // namespace mcorr
