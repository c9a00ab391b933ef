#pragma once

// Arbitrary-precision integer and rational types shared by every module.

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace lacunaria {

using BigInt = mpz_class;
using Rational = mpq_class;

static_assert(GMP_LIMB_BITS == 64, "64-bit GMP limbs required");

/// Parses a decimal integer, optionally signed. Throws FormatError.
BigInt parse_bigint(std::string_view text);

/// Parses "p/q" or "p" into a canonical rational. Throws FormatError.
Rational parse_rational(std::string_view text);

std::string to_string(const BigInt& value);

/// Canonical "p/q" form; integers are written as "p/1".
std::string to_string(const Rational& value);

std::size_t bit_length(const BigInt& value);

/// Hash over the limbs and sign; for unordered containers keyed by BigInt.
struct BigIntHash {
    std::size_t operator()(const BigInt& value) const noexcept;
};

}  // namespace lacunaria
