#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mcorr::runner {

/// Experiment config: one "key = value" per line, '#' starts a comment,
/// blank lines are ignored. Keys are [a-z0-9_]+ and may appear once. Every
/// entry remembers where it came from so errors can point at it.
class Config {
public:
    struct Entry {
        std::string key;
        std::string value;
        std::string origin;  // "file:line", "--set" or "default"
    };

    static Config parse(std::string_view text, const std::string& source);

    /// Adds or replaces key; used by --set.
    void set(const std::string& key, const std::string& value, const std::string& origin = "--set");

    bool has(const std::string& key) const;
    const Entry* find(const std::string& key) const;
    const std::vector<Entry>& entries() const { return entries_; }

    /// Raw text of a required key; ParseError when missing.
    const std::string& required(const std::string& key) const;
    /// Value of key, recording the default when absent so the echo is complete.
    std::string value_or(const std::string& key, const std::string& fallback);

    /// Runs parse(value) and rewrites any failure as a ParseError located at
    /// the entry.
    template <class T>
    T get(const std::string& key, const std::function<T(const std::string&)>& parse) const {
        const auto& v = required(key);
        return located(key, [&] { return parse(v); });
    }

    template <class F>
    auto located(const std::string& key, F&& f) const -> decltype(f());

    /// Canonical "key = value" lines in entry order.
    std::string text() const;

private:
    [[noreturn]] void rethrow(const std::string& key) const;
    std::vector<Entry> entries_;
};

template <class F>
auto Config::located(const std::string& key, F&& f) const -> decltype(f()) {
    try {
        return f();
    } catch (...) {
        rethrow(key);
    }
}

} // namespace mcorr::runner
