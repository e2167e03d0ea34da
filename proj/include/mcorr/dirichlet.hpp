#pragma once

#include <cstdint>
#include <vector>

#include "mcorr/phase.hpp"

namespace mcorr {

/// A Dirichlet character stored as its residue table mod q.
///
/// Characters mod q are numbered through the generators of (Z/qZ)*: one
/// cyclic generator per odd prime power (the least primitive root, lifted),
/// -1 for 4 | q, and -1, 5 for 8 | q. Generators are ordered by prime, the 2
/// part first, -1 before 5. Index c is read mixed-radix with the first
/// generator as the least significant digit; digit c_i sends generator i to
/// e(c_i / order_i). Index 0 is the principal character.
class DirichletCharacter {
public:
    DirichletCharacter(std::uint64_t modulus, std::uint64_t index);

    /// All phi(q) characters mod q, in index order.
    static std::vector<DirichletCharacter> all(std::uint64_t modulus);
    static std::uint64_t count(std::uint64_t modulus);

    std::uint64_t modulus() const { return modulus_; }
    std::uint64_t index() const { return index_; }
    bool principal() const { return index_ == 0; }
    bool primitive() const { return primitive_; }
    bool real_valued() const { return real_; }

    cplx operator()(std::int64_t n) const {
        if (n <= 0) return {0.0, 0.0};
        return table_[static_cast<std::uint64_t>(n) % modulus_];
    }
    const std::vector<cplx>& table() const { return table_; }

private:
    std::uint64_t modulus_;
    std::uint64_t index_;
    bool primitive_ = false;
    bool real_ = true;
    std::vector<cplx> table_;
};

/// Largest modulus accepted for character tables.
inline constexpr std::uint64_t kMaxCharacterModulus = 1'000'000;

} // namespace mcorr
