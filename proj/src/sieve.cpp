#include "mcorr/sieve.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "mcorr/errors.hpp"
#include "mcorr/parallel.hpp"

namespace mcorr {

std::uint64_t isqrt(std::uint64_t n) {
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(n)));
    while (r > 0 && r > n / r) --r;
    while ((r + 1) <= n / (r + 1)) ++r;
    return r;
}

std::vector<std::uint64_t> simple_primes(std::uint64_t n) {
    std::vector<std::uint64_t> primes;
    if (n < 2) return primes;
    std::vector<bool> composite(n + 1, false);
    for (std::uint64_t i = 2; i * i <= n; ++i)
        if (!composite[i])
            for (std::uint64_t j = i * i; j <= n; j += i) composite[j] = true;
    for (std::uint64_t i = 2; i <= n; ++i)
        if (!composite[i]) primes.push_back(i);
    return primes;
}

FactorSieve::FactorSieve(std::uint64_t limit, SieveOptions options, std::vector<std::uint64_t> base)
    : limit_(limit), options_(options), base_primes_(std::move(base)) {}

FactorSieve FactorSieve::build(std::uint64_t limit, SieveOptions options) {
    if (limit < 2) throw DomainError("sieve limit must be at least 2");
    if (options.segment_size == 0) throw DomainError("segment size must be positive");
    if (limit > options.memory_budget / kTableBytesPerEntry)
        throw ResourceError("sieve limit " + std::to_string(limit) + " needs " +
                            std::to_string(limit) + " x " + std::to_string(kTableBytesPerEntry) +
                            " bytes, exceeding the memory budget of " +
                            std::to_string(options.memory_budget) + " bytes");
    return FactorSieve(limit, options, simple_primes(isqrt(limit)));
}

std::vector<PrimePower> FactorSieve::factorize(std::uint64_t n) const {
    if (n < 1 || n > limit_)
        throw DomainError("factorize: " + std::to_string(n) + " outside [1, " +
                          std::to_string(limit_) + "]");
    std::vector<PrimePower> out;
    for (std::uint64_t p : base_primes_) {
        if (p * p > n) break;
        if (n % p != 0) continue;
        unsigned e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        out.push_back({p, e});
    }
    if (n > 1) out.push_back({n, 1});
    return out;
}

std::vector<std::uint64_t> FactorSieve::primes_up_to(std::uint64_t n, std::uint64_t d) const {
    if (n > limit_)
        throw DomainError("primes_up_to: " + std::to_string(n) + " exceeds sieve limit " +
                          std::to_string(limit_));
    if (d == 0) throw DomainError("primes_up_to: modulus d must be positive");
    std::vector<std::uint64_t> out;
    if (n < 2) return out;

    const std::uint64_t seg = options_.segment_size;
    const std::uint64_t segments = (n - 1 + seg - 1) / seg;
    std::vector<std::vector<std::uint64_t>> found(segments);
    parallel_for(segments, [&](std::size_t s) {
        std::uint64_t lo = 2 + s * seg;
        std::uint64_t hi = std::min(n, lo + seg - 1);
        std::vector<char> composite(hi - lo + 1, 0);
        for (std::uint64_t p : base_primes_) {
            if (p * p > hi) break;
            std::uint64_t start = std::max(p * p, (lo + p - 1) / p * p);
            for (std::uint64_t m = start; m <= hi; m += p) composite[m - lo] = 1;
        }
        auto& bucket = found[s];
        for (std::uint64_t m = lo; m <= hi; ++m)
            if (!composite[m - lo] && (d <= 1 || m % d == 1)) bucket.push_back(m);
    });
    for (auto& bucket : found) out.insert(out.end(), bucket.begin(), bucket.end());
    return out;
}

void FactorSieve::check_window(Window w) const {
    if (w.lo < 1 || w.lo > w.hi || w.hi > limit_)
        throw DomainError("window [" + std::to_string(w.lo) + ", " + std::to_string(w.hi) +
                          "] not inside [1, " + std::to_string(limit_) + "]");
    if (w.size() > options_.memory_budget / kTableBytesPerEntry)
        throw ResourceError("window of " + std::to_string(w.size()) +
                            " entries exceeds the memory budget of " +
                            std::to_string(options_.memory_budget) + " bytes");
}

void FactorSieve::sieve_segment(Window w, ArithmeticTable& out, std::size_t offset) const {
    const std::size_t len = w.size();
    // product of the prime powers found so far; a leftover factor > 1 is one
    // prime above sqrt(hi)
    std::vector<std::uint64_t> found(len, 1);
    std::uint8_t* omega = out.big_omega.data() + offset;
    std::uint32_t* spf = out.smallest_factor.data() + offset;
    std::vector<char> square_free(len, 1);

    for (std::uint64_t p : base_primes_) {
        if (p * p > w.hi) break;
        std::uint64_t pk = p;
        bool first = true;
        for (;;) {
            std::uint64_t start = (w.lo + pk - 1) / pk * pk;
            for (std::uint64_t m = start; m <= w.hi; m += pk) {
                std::size_t i = m - w.lo;
                ++omega[i];
                found[i] *= p;
                if (first) {
                    if (spf[i] == 0 && m != p) spf[i] = static_cast<std::uint32_t>(p);
                } else {
                    square_free[i] = 0;
                }
            }
            first = false;
            if (pk > w.hi / p) break;
            pk *= p;
        }
    }
    for (std::size_t i = 0; i < len; ++i) {
        std::uint64_t n = w.lo + i;
        if (found[i] != n) ++omega[i];
        out.lambda[offset + i] = (omega[i] % 2 == 0) ? 1 : -1;
        out.mobius[offset + i] = square_free[i] ? out.lambda[offset + i] : 0;
    }
}

ArithmeticTable FactorSieve::arithmetic_table(Window w) const {
    check_window(w);
    ArithmeticTable t;
    t.window = w;
    const std::size_t len = w.size();

    if (cache_ && cache_->window.lo <= w.lo && w.hi <= cache_->window.hi) {
        std::size_t off = w.lo - cache_->window.lo;
        t.lambda.assign(cache_->lambda.begin() + off, cache_->lambda.begin() + off + len);
        t.mobius.assign(cache_->mobius.begin() + off, cache_->mobius.begin() + off + len);
        t.big_omega.assign(cache_->big_omega.begin() + off, cache_->big_omega.begin() + off + len);
        t.smallest_factor.assign(cache_->smallest_factor.begin() + off,
                                 cache_->smallest_factor.begin() + off + len);
        return t;
    }

    t.lambda.assign(len, 0);
    t.mobius.assign(len, 0);
    t.big_omega.assign(len, 0);
    t.smallest_factor.assign(len, 0);
    const std::uint64_t seg = options_.segment_size;
    const std::size_t segments = (len + seg - 1) / seg;
    parallel_for(segments, [&](std::size_t s) {
        std::uint64_t lo = w.lo + s * seg;
        std::uint64_t hi = std::min(w.hi, lo + seg - 1);
        sieve_segment({lo, hi}, t, lo - w.lo);
    });
    return t;
}

void FactorSieve::attach_cache(std::shared_ptr<const ArithmeticTable> table) {
    if (table && table->window.hi > limit_)
        throw DomainError("cached table extends beyond the sieve limit");
    cache_ = std::move(table);
}

namespace {

constexpr std::array<char, 8> kMagic{'M', 'C', 'O', 'R', 'R', 'T', 'B', 'L'};

template <class T>
void put_le(std::ostream& out, T value) {
    static_assert(std::is_unsigned_v<T>);
    std::array<char, sizeof(T)> bytes{};
    for (std::size_t i = 0; i < sizeof(T); ++i)
        bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
    out.write(bytes.data(), bytes.size());
}

template <class T>
T get_le(std::istream& in) {
    std::array<unsigned char, sizeof(T)> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!in) throw ResourceError("table file truncated");
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
    return value;
}

template <class T>
void put_bytes(std::ostream& out, const std::vector<T>& v) {
    static_assert(sizeof(T) == 1);
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size()));
}

template <class T>
void get_bytes(std::istream& in, std::vector<T>& v, std::size_t len) {
    static_assert(sizeof(T) == 1);
    v.resize(len);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(len));
    if (!in) throw ResourceError("table file truncated");
}

} // namespace

void write_table(std::ostream& out, const ArithmeticTable& table) {
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(out, kTableFormatVersion);
    put_le<std::uint32_t>(out, 0);
    put_le<std::uint64_t>(out, table.window.lo);
    put_le<std::uint64_t>(out, table.window.hi);
    put_bytes(out, table.lambda);
    put_bytes(out, table.mobius);
    put_bytes(out, table.big_omega);
    if (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(table.smallest_factor.data()),
                  static_cast<std::streamsize>(table.smallest_factor.size() * sizeof(std::uint32_t)));
    } else {
        for (std::uint32_t v : table.smallest_factor) put_le<std::uint32_t>(out, v);
    }
    if (!out) throw ResourceError("failed writing table");
}

ArithmeticTable read_table(std::istream& in) {
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw ResourceError("not an arithmetic table file");
    auto version = get_le<std::uint32_t>(in);
    if (version != kTableFormatVersion)
        throw ResourceError("unsupported table format version " + std::to_string(version));
    (void)get_le<std::uint32_t>(in);
    ArithmeticTable t;
    t.window.lo = get_le<std::uint64_t>(in);
    t.window.hi = get_le<std::uint64_t>(in);
    if (t.window.lo < 1 || t.window.hi < t.window.lo) throw ResourceError("corrupt table header");
    std::size_t len = t.window.size();
    get_bytes(in, t.lambda, len);
    get_bytes(in, t.mobius, len);
    get_bytes(in, t.big_omega, len);
    t.smallest_factor.resize(len);
    if (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(t.smallest_factor.data()),
                static_cast<std::streamsize>(len * sizeof(std::uint32_t)));
        if (!in) throw ResourceError("table file truncated");
    } else {
        for (auto& v : t.smallest_factor) v = get_le<std::uint32_t>(in);
    }
    return t;
}

} // namespace mcorr
