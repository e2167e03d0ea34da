#include "mcorr/sequences.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <unordered_set>
#include <variant>

#include "mcorr/errors.hpp"
#include "mcorr/text.hpp"

namespace mcorr {

namespace {

namespace mp = boost::multiprecision;
using mp::cpp_int;
using Big = mp::number<mp::cpp_bin_float<256, mp::digit_base_2>>;

struct Beatty {
    FixedReal alpha, beta;
};
struct PowerFloor {
    FixedReal c;
};
struct Polynomial {
    std::vector<std::int64_t> coeffs;
};
struct LinearForm {
    std::vector<std::int64_t> coeffs;
};
struct VisitCache {
    std::mutex lock;
    std::vector<std::int64_t> times;
    std::int64_t scanned = 0;
};
struct Visit {
    unsigned d;
    FixedReal alpha, b, c;
    std::uint64_t cap;
    std::shared_ptr<VisitCache> cache;
};
struct Explicit {
    std::vector<std::int64_t> values;
};

std::string join(const std::vector<std::int64_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

Big to_big(const FixedReal& x) {
    if (x.rational()) return Big(*x.rational());
    cpp_int f = (cpp_int(static_cast<std::uint64_t>(x.frac_bits() >> 64)) << 64) |
                cpp_int(static_cast<std::uint64_t>(x.frac_bits()));
    return Big(x.floor_part()) + mp::ldexp(Big(f), -128);
}

std::int64_t checked(const __int128& v, const char* what, std::int64_t n) {
    if (v > INT64_MAX || v < INT64_MIN)
        throw OverflowError(std::string(what) + " value at n = " + std::to_string(n) + " exceeds the 64-bit range");
    return static_cast<std::int64_t>(v);
}

std::int64_t power_floor_at(const FixedReal& c, std::int64_t n) {
    if (n == 0) return c.floor_part() == 0 && c.frac_bits() == 0 ? 1 : 0;
    if (n == 1) return 1;
    long double x = std::pow(static_cast<long double>(n), c.to_long_double());
    if (!(x < 9.2e18L)) throw OverflowError("powerfloor value at n = " + std::to_string(n) + " exceeds the 64-bit range");
    long double r = std::round(x);
    if (std::fabs(x - r) > 1e-15L * x + 1e-12L) return static_cast<std::int64_t>(std::floor(x));
    // near an integer: decide exactly
    auto m = static_cast<std::int64_t>(r);
    if (c.rational()) {
        cpp_int p = mp::numerator(*c.rational());
        cpp_int q = mp::denominator(*c.rational());
        auto pu = static_cast<unsigned>(p), qu = static_cast<unsigned>(q);
        cpp_int target = mp::pow(cpp_int(n), pu);
        while (mp::pow(cpp_int(m), qu) > target) --m;
        while (mp::pow(cpp_int(m + 1), qu) <= target) ++m;
        return m;
    }
    Big v = mp::exp(to_big(c) * mp::log(Big(n)));
    return static_cast<std::int64_t>(mp::floor(v));
}

// {k alpha} in [b, c), with k = n^d
bool visit_hit(const Visit& v, std::int64_t n) {
    if (v.alpha.rational() && v.b.rational() && v.c.rational()) {
        const Rational& a = *v.alpha.rational();
        cpp_int q = mp::denominator(a);
        cpp_int k = mp::powm(cpp_int(n), v.d, q);
        cpp_int num = (k * mp::numerator(a)) % q;
        if (num < 0) num += q;
        Rational f(num, q);
        return f >= *v.b.rational() && f < *v.c.rational();
    }
    u128 k = 1;
    for (unsigned i = 0; i < v.d; ++i) k *= static_cast<u128>(n);
    u128 f = v.alpha.frac_times_wrapped(k);
    return f >= v.b.frac_bits() && f < v.c.frac_bits();
}

void extend_visits(const Visit& v, std::size_t count) {
    while (v.cache->times.size() < count) {
        if (static_cast<std::uint64_t>(v.cache->scanned) >= v.cap)
            throw ResourceError("visit times: search cap of " + std::to_string(v.cap) + " reached after " +
                                std::to_string(v.cache->times.size()) + " hits");
        std::int64_t n = ++v.cache->scanned;
        if (visit_hit(v, n)) v.cache->times.push_back(n);
    }
}

std::int64_t visit_at(const Visit& v, std::int64_t n) {
    if (n < 1) throw DomainError("visit times are indexed from 1");
    std::lock_guard<std::mutex> g(v.cache->lock);
    extend_visits(v, static_cast<std::size_t>(n));
    return v.cache->times[static_cast<std::size_t>(n - 1)];
}

void check_unit_interval(const FixedReal& b, const FixedReal& c) {
    bool ok = b.floor_part() == 0 && c.floor_part() == 0 && b < c;
    if (!ok) throw DomainError("visit times need 0 <= b < c < 1");
}

} // namespace

struct Sequence::Impl {
    std::variant<Beatty, PowerFloor, Polynomial, LinearForm, Visit, Explicit> v;
};

namespace {
template <class T>
std::shared_ptr<const Sequence::Impl> make_impl(T t) {
    return std::make_shared<const Sequence::Impl>(Sequence::Impl{std::move(t)});
}
} // namespace

Sequence Sequence::beatty(FixedReal alpha, FixedReal beta) {
    if (!(FixedReal{} < alpha)) throw DomainError("beatty: alpha must be positive");
    Sequence s;
    s.impl_ = make_impl(Beatty{std::move(alpha), std::move(beta)});
    return s;
}

Sequence Sequence::power_floor(FixedReal c) {
    if (c.floor_part() < 0) throw DomainError("powerfloor: exponent must be nonnegative");
    if (c.rational() && mp::denominator(*c.rational()) > 64)
        throw DomainError("powerfloor: rational exponent denominators are limited to 64");
    Sequence s;
    s.impl_ = make_impl(PowerFloor{std::move(c)});
    return s;
}

Sequence Sequence::polynomial(std::vector<std::int64_t> coeffs) {
    while (coeffs.size() > 1 && coeffs.back() == 0) coeffs.pop_back();
    if (coeffs.empty()) coeffs.push_back(0);
    Sequence s;
    s.impl_ = make_impl(Polynomial{std::move(coeffs)});
    return s;
}

Sequence Sequence::linear_form(std::vector<std::int64_t> coeffs) {
    if (coeffs.empty()) throw DomainError("linform: needs at least one coefficient");
    Sequence s;
    s.impl_ = make_impl(LinearForm{std::move(coeffs)});
    return s;
}

Sequence Sequence::visit(unsigned d, FixedReal alpha, FixedReal b, FixedReal c, std::uint64_t search_cap) {
    if (d < 1 || d > 8) throw DomainError("visit: degree must be in [1, 8]");
    check_unit_interval(b, c);
    Sequence s;
    s.impl_ = make_impl(Visit{d, std::move(alpha), std::move(b), std::move(c), search_cap,
                              std::make_shared<VisitCache>()});
    return s;
}

Sequence Sequence::explicit_table(std::vector<std::int64_t> values) {
    for (auto v : values)
        if (v < 0) throw DomainError("explicit: values must be nonnegative");
    Sequence s;
    s.impl_ = make_impl(Explicit{std::move(values)});
    return s;
}

Sequence Sequence::parse(std::string_view text) {
    std::string_view t = trim(text);
    std::string where = "sequence '" + std::string(t) + "'";
    auto colon = t.find(':');
    std::string_view head = t.substr(0, colon);
    std::string_view rest = colon == std::string_view::npos ? std::string_view{} : t.substr(colon + 1);
    auto fields = split_list(rest, ':');
    try {
        if (head == "id" && rest.empty()) return identity();
        if (head == "beatty" && (fields.size() == 1 || fields.size() == 2))
            return beatty(FixedReal::parse(fields[0]), fields.size() == 2 ? FixedReal::parse(fields[1]) : FixedReal{});
        if (head == "powerfloor" && fields.size() == 1) return power_floor(FixedReal::parse(fields[0]));
        if (head == "poly" && fields.size() == 1) return polynomial(parse_int_list(fields[0], where));
        if (head == "linform" && fields.size() == 1) return linear_form(parse_int_list(fields[0], where));
        if (head == "explicit" && fields.size() == 1) return explicit_table(parse_int_list(fields[0], where));
        if (head == "visit" && fields.size() == 4) {
            auto d = parse_uint(fields[0], where);
            return visit(static_cast<unsigned>(d), FixedReal::parse(fields[1]), FixedReal::parse(fields[2]),
                         FixedReal::parse(fields[3]));
        }
    } catch (const DomainError& e) {
        throw ParseError(where, e.what());
    }
    throw ParseError(where, "unknown sequence form (expected beatty, powerfloor, poly, linform, visit, explicit or id)");
}

SeqKind Sequence::kind() const { return static_cast<SeqKind>(impl_->v.index()); }

unsigned Sequence::arity() const {
    if (auto* l = std::get_if<LinearForm>(&impl_->v)) return static_cast<unsigned>(l->coeffs.size());
    return 1;
}

std::string Sequence::descriptor() const {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Beatty>) return "beatty:" + s.alpha.text() + ":" + s.beta.text();
            if constexpr (std::is_same_v<T, PowerFloor>) return "powerfloor:" + s.c.text();
            if constexpr (std::is_same_v<T, Polynomial>) return "poly:" + join(s.coeffs);
            if constexpr (std::is_same_v<T, LinearForm>) return "linform:" + join(s.coeffs);
            if constexpr (std::is_same_v<T, Visit>)
                return "visit:" + std::to_string(s.d) + ":" + s.alpha.text() + ":" + s.b.text() + ":" + s.c.text();
            if constexpr (std::is_same_v<T, Explicit>) return "explicit:" + join(s.values);
        },
        impl_->v);
}

std::int64_t Sequence::operator()(std::int64_t n) const {
    if (arity() != 1) throw DomainError("sequence " + descriptor() + " has arity " + std::to_string(arity()));
    return (*this)(std::span<const std::int64_t>(&n, 1));
}

std::int64_t Sequence::operator()(std::span<const std::int64_t> point) const {
    if (point.size() != arity())
        throw DomainError("sequence " + descriptor() + " expects a point of dimension " + std::to_string(arity()));
    for (auto x : point)
        if (x < 0) throw DomainError("sequence " + descriptor() + " evaluated at a negative index");
    const std::int64_t n = point[0];
    std::int64_t value = std::visit(
        [&](const auto& s) -> std::int64_t {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Beatty>) return s.alpha.floor_times(n, s.beta);
            if constexpr (std::is_same_v<T, PowerFloor>) return power_floor_at(s.c, n);
            if constexpr (std::is_same_v<T, Polynomial>) {
                __int128 acc = 0;
                for (auto it = s.coeffs.rbegin(); it != s.coeffs.rend(); ++it) {
                    acc = acc * n + *it;
                    checked(acc, "poly", n);
                }
                return static_cast<std::int64_t>(acc);
            }
            if constexpr (std::is_same_v<T, LinearForm>) {
                __int128 acc = 0;
                for (std::size_t i = 0; i < s.coeffs.size(); ++i) {
                    acc += static_cast<__int128>(s.coeffs[i]) * point[i];
                    checked(acc, "linform", n);
                }
                return static_cast<std::int64_t>(acc);
            }
            if constexpr (std::is_same_v<T, Visit>) return visit_at(s, n);
            if constexpr (std::is_same_v<T, Explicit>) {
                if (n < 1 || static_cast<std::size_t>(n) > s.values.size())
                    throw RangeError("explicit sequence defined on [1, " + std::to_string(s.values.size()) +
                                     "], asked for n = " + std::to_string(n));
                return s.values[static_cast<std::size_t>(n - 1)];
            }
        },
        impl_->v);
    if (value < 0)
        throw DomainError("sequence " + descriptor() + " is negative at n = " + std::to_string(n));
    return value;
}

std::vector<std::int64_t> Sequence::values(std::int64_t first, std::int64_t last) const {
    std::vector<std::int64_t> out;
    if (last < first) return out;
    out.reserve(static_cast<std::size_t>(last - first + 1));
    if (auto* v = std::get_if<Visit>(&impl_->v); v && first >= 1) {
        std::lock_guard<std::mutex> g(v->cache->lock);
        extend_visits(*v, static_cast<std::size_t>(last));
        out.assign(v->cache->times.begin() + (first - 1), v->cache->times.begin() + last);
        return out;
    }
    for (std::int64_t n = first; n <= last; ++n) out.push_back((*this)(n));
    return out;
}

std::optional<std::vector<std::int64_t>> Sequence::polynomial_coefficients() const {
    if (auto* p = std::get_if<Polynomial>(&impl_->v)) return p->coeffs;
    if (auto* l = std::get_if<LinearForm>(&impl_->v); l && l->coeffs.size() == 1)
        return std::vector<std::int64_t>{0, l->coeffs[0]};
    return std::nullopt;
}

const std::vector<std::int64_t>& Sequence::linear_coefficients() const {
    auto* l = std::get_if<LinearForm>(&impl_->v);
    if (!l) throw DomainError("sequence " + descriptor() + " is not a linear form");
    return l->coeffs;
}

SequenceFamily::SequenceFamily(std::vector<Sequence> members) : members_(std::move(members)) {
    if (members_.empty()) throw DomainError("sequence family needs at least one member");
    arity_ = members_.front().arity();
    for (const auto& m : members_)
        if (m.arity() != arity_) throw DomainError("sequence family members must share one arity");
}

SequenceFamily SequenceFamily::parse(std::string_view text) {
    std::vector<Sequence> members;
    for (const auto& field : split_list(text, ';')) members.push_back(Sequence::parse(field));
    try {
        return SequenceFamily(std::move(members));
    } catch (const DomainError& e) {
        throw ParseError("family", e.what());
    }
}

std::string SequenceFamily::descriptor() const {
    std::string s;
    for (std::size_t i = 0; i < members_.size(); ++i) s += (i ? ";" : "") + members_[i].descriptor();
    return s;
}

std::int64_t evaluate(const SequenceFamily& family, std::size_t j, std::span<const std::int64_t> n) {
    if (j >= family.size())
        throw DomainError("member index " + std::to_string(j) + " out of range for a family of " +
                          std::to_string(family.size()));
    return family[j](n);
}

std::vector<std::int64_t> visit_times(unsigned d, const FixedReal& alpha, const FixedReal& b, const FixedReal& c,
                                      std::uint64_t count, std::uint64_t search_cap) {
    auto s = Sequence::visit(d, alpha, b, c, search_cap);
    return count == 0 ? std::vector<std::int64_t>{} : s.values(1, static_cast<std::int64_t>(count));
}

std::vector<std::uint8_t> indicator_of_range(std::span<const std::int64_t> a, std::uint64_t n) {
    std::vector<std::uint8_t> out(n, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i > 0 && a[i] <= a[i - 1]) throw DomainError("indicator_of_range: input must be strictly increasing");
        if (a[i] >= 1 && static_cast<std::uint64_t>(a[i]) <= n) out[static_cast<std::size_t>(a[i] - 1)] = 1;
    }
    return out;
}

std::vector<std::uint8_t> indicator_of_range(const Sequence& a, std::uint64_t n) {
    std::vector<std::uint8_t> out(n, 0);
    std::int64_t prev = INT64_MIN;
    for (std::int64_t k = 1;; ++k) {
        std::int64_t v = a(k);
        if (v <= prev) throw DomainError("indicator_of_range: " + a.descriptor() + " is not strictly increasing");
        prev = v;
        if (static_cast<std::uint64_t>(v) > n) break;
        if (v >= 1) out[static_cast<std::size_t>(v - 1)] = 1;
    }
    return out;
}

std::uint64_t word_complexity(std::span<const std::uint8_t> w, std::uint64_t length, std::uint64_t n) {
    if (length == 0) throw DomainError("word_complexity: length must be positive");
    if (length > n) throw DomainError("word_complexity: length exceeds N");
    if (n > w.size()) throw DomainError("word_complexity: word shorter than N");
    for (std::uint64_t i = 0; i < n; ++i)
        if (w[i] > 1) throw DomainError("word_complexity: word must be binary");
    if (length <= 64) {
        std::vector<std::uint64_t> codes;
        codes.reserve(n - length + 1);
        std::uint64_t mask = length == 64 ? ~0ull : ((1ull << length) - 1);
        std::uint64_t code = 0;
        for (std::uint64_t i = 0; i < n; ++i) {
            code = ((code << 1) | w[i]) & mask;
            if (i + 1 >= length) codes.push_back(code);
        }
        std::sort(codes.begin(), codes.end());
        return static_cast<std::uint64_t>(std::unique(codes.begin(), codes.end()) - codes.begin());
    }
    std::string_view s(reinterpret_cast<const char*>(w.data()), n);
    std::unordered_set<std::string_view> seen;
    for (std::uint64_t i = 0; i + length <= n; ++i) seen.insert(s.substr(i, length));
    return seen.size();
}

} // namespace mcorr
