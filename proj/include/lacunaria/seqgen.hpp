#pragma once

// Integer sequences (n_k), k = 1, 2, ..., and their generators.

#include "lacunaria/bigint.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace lacunaria {

/// Which left endpoint the randomized construction uses for I_k.
enum class RStarInterval {
    /// [a (k-1)^{w_{k-1}}, a k^{w_k})  (default)
    PreviousExponent,
    /// [a (k-1)^{w_k}, a k^{w_k})
    CurrentExponent,
};

struct RStarParams {
    double alpha = 1.0;  ///< w_k = (log k)^alpha
    std::uint64_t scale = 50;  ///< the constant a
    std::size_t count = 1;
    std::uint64_t seed = 0;
    RStarInterval interval = RStarInterval::PreviousExponent;
};

struct GeometricProvenance {
    Rational q;
    BigInt first;
};
struct PowerProvenance {
    unsigned long base = 2;
    int offset = 0;
};
struct SmoothProvenance {
    std::vector<BigInt> generators;
    bool include_one = true;
};
struct RStarProvenance {
    RStarParams params;
};
struct ExternalProvenance {
    std::string path;
};

using Provenance = std::variant<GeometricProvenance, PowerProvenance, SmoothProvenance,
                                RStarProvenance, ExternalProvenance>;

/// One signed binary digit: value contributes sign * 2^shift.
struct SignedDigit {
    int sign;
    std::size_t shift;
};

/// A strictly increasing sequence of positive integers, indexed from 1.
///
/// Terms are either stored explicitly or described by the closed form
/// base^k + offset. The closed form is materialized on demand, which keeps
/// sequences such as 2^k with k up to 2^20 usable without storing 2^39 bits.
class IntegerSequence {
public:
    /// Validates positivity and strict increase. Throws InvalidArgument.
    static IntegerSequence from_terms(std::vector<BigInt> terms, Provenance provenance);

    static IntegerSequence power_form(unsigned long base, int offset, std::size_t count);

    std::size_t size() const noexcept { return size_; }
    bool empty() const noexcept { return size_ == 0; }

    /// n_k for 1 <= k <= size().
    BigInt term(std::size_t k) const;

    std::size_t term_bit_length(std::size_t k) const;

    /// n_1, ..., n_count. Throws InvalidArgument if count > size().
    std::vector<BigInt> prefix(std::size_t count) const;

    /// Sparse signed-binary form of n_k when the closed form provides one
    /// directly (2^k and 2^k - 1); otherwise empty.
    std::optional<std::vector<SignedDigit>> closed_form_digits(std::size_t k) const;

    bool is_closed_form() const noexcept { return closed_.has_value(); }
    const Provenance& provenance() const noexcept { return provenance_; }

    /// Same sequence restricted to its first count terms.
    IntegerSequence truncated(std::size_t count) const;

private:
    struct PowerForm {
        unsigned long base;
        int offset;
    };

    IntegerSequence() = default;
    void check_index(std::size_t k) const;

    std::vector<BigInt> terms_;
    std::optional<PowerForm> closed_;
    std::size_t size_ = 0;
    Provenance provenance_;
};

struct GapProfile {
    Rational min_ratio;
    std::vector<Rational> ratios;  ///< ratios[k-1] = n_{k+1} / n_k
    /// Least-squares alpha in n_{k+1}/n_k - 1 ~ c k^{-alpha}; needs >= 3 ratios.
    std::optional<double> erdos_exponent;
};

/// n_1 = first, n_{k+1} = ceil(q n_k). Requires q > 1.
IntegerSequence gen_geometric(const Rational& q, const BigInt& first, std::size_t count);

/// n_k = base^k + offset for k = 1..count, offset in {0, -1}.
IntegerSequence gen_power(unsigned long base, int offset, std::size_t count);

/// The count smallest products of powers of pairwise coprime generators.
/// 1 (the empty product) is included unless include_one is false.
IntegerSequence gen_smooth(const std::vector<BigInt>& generators, std::size_t count,
                           bool include_one = true);

/// Randomized sequence with n_k uniform on the integers of I_k, made strictly
/// increasing by max(n_{k-1} + 1, draw). Draw k uses the counter stream (seed, k).
IntegerSequence gen_random_rstar(const RStarParams& params);

/// Integer bounds [lo, hi) of I_k for the randomized construction (k >= 1).
struct IntegerInterval {
    BigInt lo;
    BigInt hi;
};
IntegerInterval rstar_interval(const RStarParams& params, std::size_t k);

GapProfile gap_profile(const IntegerSequence& seq);

// Sequence files: "# lacunaria-seq v1", "# provenance: <json>", then one
// decimal integer per line. Reading tolerates a missing header.
void write_sequence(std::ostream& out, const IntegerSequence& seq);
void write_sequence_file(const std::string& path, const IntegerSequence& seq);
IntegerSequence read_sequence(std::istream& in, const std::string& source_name = "<stream>");
IntegerSequence read_sequence_file(const std::string& path);

}  // namespace lacunaria
