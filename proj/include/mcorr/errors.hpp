#pragma once

#include <stdexcept>
#include <string>

namespace mcorr {

/// Argument outside the mathematical domain of an operation (window out of
/// range, empty prime set, non-monotone input, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A request that would exceed a configured memory or enumeration budget.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lookup beyond a cached range; the message names the extension needed.
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Integer result does not fit in 64 bits.
class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

/// Malformed descriptor or config text. `where` locates the offending input.
class ParseError : public std::invalid_argument {
public:
    ParseError(const std::string& where, const std::string& what)
        : std::invalid_argument(where.empty() ? what : where + ": " + what), where_(where) {}

    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

} // namespace mcorr
