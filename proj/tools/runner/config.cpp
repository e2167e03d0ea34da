#include "config.hpp"

#include <algorithm>

#include "mcorr/errors.hpp"
#include "mcorr/text.hpp"

namespace mcorr::runner {

namespace {

bool valid_key(std::string_view k) {
    return !k.empty() && std::all_of(k.begin(), k.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    });
}

} // namespace

Config Config::parse(std::string_view text, const std::string& source) {
    Config cfg;
    std::size_t line_no = 0;
    while (!text.empty()) {
        auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        const std::string where = source + ":" + std::to_string(line_no);
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(where, "expected key = value");
        std::string key(trim(line.substr(0, eq)));
        if (!valid_key(key)) throw ParseError(where, "invalid key '" + key + "'");
        if (cfg.has(key)) throw ParseError(where, "duplicate key '" + key + "'");
        cfg.entries_.push_back({key, std::string(trim(line.substr(eq + 1))), where});
    }
    return cfg;
}

void Config::set(const std::string& key, const std::string& value, const std::string& origin) {
    if (!valid_key(key)) throw ParseError(origin, "invalid key '" + key + "'");
    for (auto& e : entries_)
        if (e.key == key) {
            e.value = value;
            e.origin = origin;
            return;
        }
    entries_.push_back({key, value, origin});
}

bool Config::has(const std::string& key) const { return find(key) != nullptr; }

const Config::Entry* Config::find(const std::string& key) const {
    for (const auto& e : entries_)
        if (e.key == key) return &e;
    return nullptr;
}

const std::string& Config::required(const std::string& key) const {
    if (auto* e = find(key)) return e->value;
    throw ParseError("config", "missing required key '" + key + "'");
}

std::string Config::value_or(const std::string& key, const std::string& fallback) {
    if (auto* e = find(key)) return e->value;
    entries_.push_back({key, fallback, "default"});
    return fallback;
}

std::string Config::text() const {
    std::string out;
    for (const auto& e : entries_) out += e.key + " = " + e.value + "\n";
    return out;
}

void Config::rethrow(const std::string& key) const {
    const auto* e = find(key);
    const std::string where = (e ? e->origin : std::string("config")) + " (" + key + ")";
    try {
        throw;
    } catch (const ParseError& err) {
        throw ParseError(where, err.what());
    } catch (const DomainError& err) {
        throw ParseError(where, err.what());
    } catch (const OverflowError& err) {
        throw ParseError(where, err.what());
    }
}

} // namespace mcorr::runner
