#pragma once

// Solution counting for the two-term equation a n_k + b n_l = c and the
// p-term relations sum_i a_i n_{k_i} = 0 over a finite prefix n_1..n_N.
//
// Conventions:
//  * Two-term counts are over ORDERED pairs (k, l) in [1, N]^2.
//  * Multi-term counts are over strictly increasing index tuples
//    k_1 < ... < k_p, and coefficient vectors are identified up to a global
//    sign (the first coefficient is taken positive).

#include "lacunaria/bigint.hpp"
#include "lacunaria/seqgen.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace lacunaria {

struct TwoTermQuery {
    long a = 1;
    long b = 1;
    BigInt c = 0;
    std::size_t N = 1;
    bool require_distinct = false;  ///< exclude k == l
};

struct IndexPair {
    std::size_t k;
    std::size_t l;
    friend bool operator==(const IndexPair&, const IndexPair&) = default;
};

struct TwoTermCount {
    std::size_t count = 0;
    std::vector<IndexPair> witnesses;
};

TwoTermCount count_two_term(const IntegerSequence& seq, const TwoTermQuery& query);

/// Which diagonal solutions k == l at c == 0 a D2* profile discards.
enum class DiagonalRule {
    /// Discard k == l whenever a + b == 0 (the only coefficients for which
    /// the diagonal solves the c == 0 equation).
    ExcludeTrivialDiagonal,
    /// Literal reading: discard k == l only when a == b and c == 0.
    StrictPaper,
};

struct PrefixMax {
    std::size_t N;
    std::size_t max_count;
};

struct DioReport {
    long a = 0;
    long b = 0;
    std::size_t max_count = 0;
    std::optional<BigInt> argmax_c;  ///< smallest c attaining max_count
    std::vector<std::pair<BigInt, std::size_t>> histogram;  ///< realized c, increasing
    std::vector<IndexPair> witnesses;  ///< solutions at argmax_c
    std::vector<PrefixMax> prefix_growth;  ///< at N/4, N/2, N
};

using CoefficientPair = std::pair<long, long>;
using DioProfile = std::map<CoefficientPair, DioReport>;

/// Condition D2 profile: every 0 < |a|, |b| <= d, all realized c != 0.
DioProfile d2_profile(const IntegerSequence& seq, long coeff_bound, std::size_t N);

/// Condition D2* profile: c ranges over all integers including 0.
DioProfile d2star_profile(const IntegerSequence& seq, long coeff_bound, std::size_t N,
                          DiagonalRule rule = DiagonalRule::ExcludeTrivialDiagonal);

/// Single-pair version used by both profiles.
DioReport two_term_report(const IntegerSequence& seq, long a, long b, std::size_t N, bool include_zero,
                          DiagonalRule rule = DiagonalRule::ExcludeTrivialDiagonal);

/// Checkpoints N/4, N/2, N (at least 1) used for growth diagnostics.
std::vector<std::size_t> growth_checkpoints(std::size_t N);

struct MultiTermQuery {
    std::size_t p = 2;
    long coeff_bound = 2;
    std::size_t N = 1;
    bool signed_only = false;  ///< coefficients restricted to {-1, +1}
    bool nondegenerate_only = false;  ///< drop solutions with a vanishing proper subsum
    std::size_t witness_cap = 16;
    std::size_t budget = 100'000'000;  ///< max stored half-sums
};

struct MultiTermSolution {
    std::vector<std::size_t> indices;  ///< k_1 < ... < k_p
    std::vector<long> coefficients;  ///< a_1 > 0
};

struct MultiTermCount {
    std::size_t count = 0;
    std::vector<MultiTermSolution> witnesses;
};

/// Meet-in-the-middle count of sum_i a_i n_{k_i} = 0. Throws ResourceLimit
/// when the half-sum table would exceed query.budget.
MultiTermCount count_multi_term(const IntegerSequence& seq, const MultiTermQuery& query);

/// +-n_{k_1} +- ... +- n_{k_p} = 0 with no vanishing proper subsum, counted
/// once per global sign class.
std::size_t count_signed_nondegenerate(const IntegerSequence& seq, std::size_t p, std::size_t N,
                                       std::size_t budget = 100'000'000);

/// True when some proper nonempty subset of the signed terms sums to zero.
bool has_vanishing_subsum(const std::vector<BigInt>& signed_terms);

struct AibeRatio {
    std::vector<std::pair<std::size_t, double>> ratios;  ///< (N', max_c count / N')
};

/// max over c != 0 of the number of (k, l) in [1, N']^2 with a n_k + b n_l = c,
/// divided by N', at N' = N/4, N/2, N.
AibeRatio aibe_ratio(const IntegerSequence& seq, long a, long b, std::size_t N);

}  // namespace lacunaria
