#include "mcorr/text.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "mcorr/errors.hpp"

namespace mcorr {

std::string_view trim(std::string_view text) {
    const char* ws = " \t\r\n";
    auto b = text.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = text.find_last_not_of(ws);
    return text.substr(b, e - b + 1);
}

std::vector<std::string> split_list(std::string_view text, char sep) {
    std::vector<std::string> out;
    text = trim(text);
    if (text.empty()) return out;
    std::size_t start = 0;
    for (;;) {
        auto pos = text.find(sep, start);
        out.emplace_back(trim(text.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::int64_t parse_int(std::string_view text, std::string_view what) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
        throw ParseError(std::string(what), "expected an integer, got '" + std::string(text) + "'");
    return v;
}

std::uint64_t parse_uint(std::string_view text, std::string_view what) {
    text = trim(text);
    // accept scientific shorthand for exact powers such as 1e7
    if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
        std::int64_t mant = parse_int(text.substr(0, e), what);
        std::int64_t exp = parse_int(text.substr(e + 1), what);
        if (mant < 0 || exp < 0 || exp > 19)
            throw ParseError(std::string(what), "expected a nonnegative integer, got '" + std::string(text) + "'");
        unsigned __int128 v = static_cast<unsigned __int128>(mant);
        for (std::int64_t i = 0; i < exp; ++i) v *= 10;
        if (v > UINT64_MAX) throw ParseError(std::string(what), "integer too large: '" + std::string(text) + "'");
        return static_cast<std::uint64_t>(v);
    }
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
        throw ParseError(std::string(what), "expected a nonnegative integer, got '" + std::string(text) + "'");
    return v;
}

double parse_double(std::string_view text, std::string_view what) {
    std::string s(trim(text));
    if (s.empty()) throw ParseError(std::string(what), "expected a number, got ''");
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
        throw ParseError(std::string(what), "expected a finite number, got '" + s + "'");
    return v;
}

std::vector<std::int64_t> parse_int_list(std::string_view text, std::string_view what) {
    std::vector<std::int64_t> out;
    for (const auto& field : split_list(text)) out.push_back(parse_int(field, what));
    return out;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace mcorr
