#pragma once

// Exact L^2 computations for trigonometric polynomials evaluated along
// permuted integer sequences. Frequencies are exact big integers and every
// coefficient is an exact rational; only the characteristic-function
// quadrature leaves exact arithmetic.

#include "lacunaria/bigint.hpp"
#include "lacunaria/permute.hpp"
#include "lacunaria/seqgen.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lacunaria {

/// f(x) = sum_{j=1}^d (a_j cos 2 pi j x + b_j sin 2 pi j x). No constant term.
class TrigPolynomial {
public:
    /// cos_coeffs[j-1] = a_j, sin_coeffs[j-1] = b_j; shorter vector is zero
    /// padded. Throws InvalidArgument when every coefficient vanishes.
    TrigPolynomial(std::vector<Rational> cos_coeffs, std::vector<Rational> sin_coeffs);

    /// Mini-grammar "cos:j=coef,sin:j=coef,..."; "cos:j" means coefficient 1.
    /// Repeated terms add. Throws FormatError.
    static TrigPolynomial parse(std::string_view spec);

    std::size_t degree() const noexcept { return cos_.size(); }
    const Rational& cos_coeff(std::size_t j) const { return cos_.at(j - 1); }
    const Rational& sin_coeff(std::size_t j) const { return sin_.at(j - 1); }

    /// Largest |a_j| or |b_j|.
    double max_abs_coeff() const;
    /// sum_j (|a_j| + |b_j|).
    Rational l1_coeff_sum() const;

    double evaluate(double x) const;
    std::string to_spec() const;

private:
    std::vector<Rational> cos_;
    std::vector<Rational> sin_;
};

struct FrequencyTerm {
    BigInt frequency;  ///< strictly positive
    Rational cos_coeff;
    Rational sin_coeff;
};

/// Merged frequency expansion, sorted by frequency, zero entries dropped.
struct FrequencyMultiset {
    std::vector<FrequencyTerm> terms;

    std::size_t size() const noexcept { return terms.size(); }
    bool empty() const noexcept { return terms.empty(); }
    /// integral over [0,1] of the square: sum (c^2 + s^2) / 2.
    Rational l2_norm_sq() const;
    /// Largest number of (j, k) products that merged into one frequency.
    std::size_t max_multiplicity = 0;
};

/// Expansion of sum_{k<=N} f(n_{s(k)} x).
FrequencyMultiset expand_frequencies(const TrigPolynomial& poly, const IntegerSequence& seq,
                                     const PermutationWindow& perm, std::size_t N);

/// (1/N) integral_0^1 (sum_{k<=N} f(n_{s(k)} x))^2 dx, exact.
Rational exact_variance(const TrigPolynomial& poly, const IntegerSequence& seq, const PermutationWindow& perm,
                        std::size_t N);

/// ||f||^2 + 2 sum_{k>=1} <f(x), f(2^k x)>, exact (the sum is finite).
Rational kac_variance(const TrigPolynomial& poly);

Rational l2_norm_sq(const TrigPolynomial& poly);

/// Limiting conditional variance v(x) = constant + sum_f (c_f cos 2 pi f x + s_f sin 2 pi f x)
/// retained up to a frequency cutoff, plus the discarded high-frequency mass.
struct MixtureProfile {
    Rational constant;
    std::vector<FrequencyTerm> low_terms;
    BigInt cutoff;
    std::size_t residual_terms = 0;
    Rational residual_l2_sq;  ///< integral of the square of the discarded part
    std::vector<std::string> warnings;

    double evaluate(double x) const;
    /// Minimum of v over [0, 1] from a dense grid refined by golden-section search.
    double min_value() const;
    bool is_nonnegative() const { return min_value() >= -1e-12; }
    /// E[v(U)^2] / E[v(U)]^2 for U uniform, exact.
    Rational second_moment_ratio() const;
    /// 3 E[v^2] / (E v)^2: kurtosis of Z sqrt(v(U)).
    double mixture_kurtosis() const { return 3.0 * second_moment_ratio().get_d(); }
};

/// (1/N) sum over certified pairs of (f(n_odd x) + f(n_even x))^2 with
/// N = certified slots. Cutoff defaults to max |c_m|. Throws InvalidArgument
/// for an empty certificate or a certificate that does not verify.
MixtureProfile mixture_profile(const TrigPolynomial& poly, const IntegerSequence& seq, const PermutationWindow& perm,
                               const PairingCertificate& cert, std::optional<BigInt> freq_cutoff = std::nullopt);

/// Ungrouped variant: (1/N) (sum_{k<=N} f(n_{s(k)} x))^2. Its constant term is
/// exact_variance(poly, seq, perm, N).
MixtureProfile window_profile(const TrigPolynomial& poly, const IntegerSequence& seq, const PermutationWindow& perm,
                              std::size_t N, const BigInt& freq_cutoff);

struct CharFnValue {
    double value;
    double error_estimate;
};

/// phi(s) = integral_0^1 exp(-s^2 v(t) / 2) dt by adaptive Gauss-Kronrod
/// quadrature. Throws Error if the tolerance is not reached.
CharFnValue mixture_charfn(const MixtureProfile& v, double s, double quad_tol = 1e-10);

/// exp(-s^2 g / 2) I_0(beta s^2 / 2) when v = g + beta cos(2 pi c t) has a
/// single cosine term and no sine terms; empty otherwise.
std::optional<double> mixture_charfn_closed_form(const MixtureProfile& v, double s);

std::string to_json(const FrequencyMultiset& m);
std::string to_json(const MixtureProfile& m);

}  // namespace lacunaria
