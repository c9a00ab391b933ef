#pragma once

// Monte Carlo evaluation of S_N(x) = sum_{k<=N} f(n_{s(k)} x) on a dyadic grid.
//
// A sample point is x = mantissa / 2^B. The fractional part {n x} is the
// exact residue n * mantissa mod 2^B; f is then evaluated from the top bits
// of that residue in double precision. Per evaluated frequency the phase
// error is below 2 pi 2^-52 plus one ulp of libm, giving the documented
// bound kTermErrorPerCoeff * sum_j (|a_j| + |b_j|) per term.

#include "lacunaria/bigint.hpp"
#include "lacunaria/permute.hpp"
#include "lacunaria/rng.hpp"
#include "lacunaria/seqgen.hpp"
#include "lacunaria/spectra.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace lacunaria {

inline constexpr double kTermErrorPerCoeff = 0x1.0p-49;

/// x = mantissa / 2^bits with 0 <= mantissa < 2^bits. Limbs are little-endian.
struct FixedPointSample {
    std::vector<std::uint64_t> limbs;
    std::size_t bits = 64;

    static FixedPointSample from_mantissa(const BigInt& mantissa, std::size_t bits);
    BigInt mantissa() const;
    /// Nearest double to x.
    double to_double() const;
    friend bool operator==(const FixedPointSample&, const FixedPointSample&) = default;
};

/// Point i of the stream (seed, stream): every limb is a counter word.
FixedPointSample sample_point(std::size_t bits, std::uint64_t seed, std::uint64_t index,
                              Stream stream = Stream::SamplePoints);

/// M points, point i = sample_point(bits, seed, i).
std::vector<FixedPointSample> sample_points(std::size_t bits, std::size_t M, std::uint64_t seed);

/// {n x} on the same grid: (n * mantissa mod 2^B) / 2^B.
FixedPointSample frac_part(const BigInt& n, const FixedPointSample& x);

/// Width needed by the window: bits(max n_{s(k)}) + bits(d) + 64.
std::size_t required_bits(const TrigPolynomial& poly, const IntegerSequence& seq, const PermutationWindow& perm,
                          std::size_t N);

struct PartialSum {
    double value = 0;
    double error_bound = 0;
};

/// Precomputed multipliers for one window; evaluation is const and may be
/// shared across threads.
class PartialSumEvaluator {
public:
    /// Throws InvalidArgument when bits < required_bits(...).
    PartialSumEvaluator(const TrigPolynomial& poly, const IntegerSequence& seq, const PermutationWindow& perm,
                        std::size_t N, std::size_t bits);
    ~PartialSumEvaluator();
    PartialSumEvaluator(PartialSumEvaluator&&) noexcept;
    PartialSumEvaluator& operator=(PartialSumEvaluator&&) noexcept;

    std::size_t bits() const noexcept;
    std::size_t size() const noexcept;

    PartialSum evaluate(const FixedPointSample& x) const;

    /// Calls visit(k, S_k) for k = 1..N.
    void evaluate_running(const FixedPointSample& x, const std::function<void(std::size_t, double)>& visit) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// S_N(x). Throws InvalidArgument naming the required width when x.bits is too small.
PartialSum partial_sum(const TrigPolynomial& poly, const IntegerSequence& seq, const PermutationWindow& perm,
                       const FixedPointSample& x, std::size_t N);

struct Moments {
    double mean = 0;
    double variance = 0;  ///< central second moment (divisor M)
    double m4 = 0;  ///< central fourth moment
    double kurtosis = 0;  ///< m4 / variance^2
    double se_mean = 0;
    double se_variance = 0;
    double se_kurtosis = 0;  ///< delta method from moments up to order 8
    double se_kurtosis_null = 0;  ///< sqrt(24 / M), Gaussian null
};

Moments summarize(std::span<const double> samples);

struct EmpiricalDistribution {
    std::vector<double> samples;  ///< S_N / sqrt(N), in sample-index order
    bool sorted = false;
    Moments summary;
    double max_error_bound = 0;  ///< worst per-sample bound on |S_N| / sqrt(N)
    std::size_t bits = 0;

    static EmpiricalDistribution from_samples(std::vector<double> samples);
};

struct CltParams {
    std::size_t N = 1;
    std::size_t M = 1;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::size_t bits = 0;  ///< 0 picks required_bits rounded up to a limb
};

EmpiricalDistribution clt_experiment(const TrigPolynomial& poly, const IntegerSequence& seq,
                                     const PermutationWindow& perm, const CltParams& params);

struct GaussianTarget {
    double mean = 0;
    double variance = 1;
};
struct MixtureTarget {
    MixtureProfile profile;
};
using DistributionTarget = std::variant<GaussianTarget, MixtureTarget>;

struct KsResult {
    double distance = 0;
    /// Largest |F_1024 - F_512| seen in the mixture CDF midpoint rule; 0 for Gaussians.
    double cdf_tolerance = 0;
};

/// Evaluates target CDFs; mixture CDFs use a 1024-point midpoint rule over t.
class TargetCdf {
public:
    explicit TargetCdf(const DistributionTarget& target);
    double operator()(double x) const;
    /// Same, also returning |F_1024 - F_512|.
    double with_tolerance(double x, double& tolerance) const;
    /// F(x-); differs from F(x) only for a point-mass target.
    double left_limit(double x) const;
    /// Location of the point mass of a zero-variance Gaussian target.
    std::optional<double> atom() const;
    double variance() const noexcept { return variance_; }

private:
    bool mixture_ = false;
    double mean_ = 0;
    double variance_ = 0;
    std::vector<double> sd_nodes_;  ///< sqrt(v) at the 1024 midpoints, then at the 512 midpoints
};

KsResult ks_distance(const EmpiricalDistribution& emp, const DistributionTarget& target);

/// Sup-distance between two target CDFs on a fine grid.
double cdf_distance(const DistributionTarget& lhs, const DistributionTarget& rhs);

/// Asymptotic Kolmogorov critical value sqrt(-ln(alpha/2) / 2) / sqrt(M).
double kolmogorov_threshold(double alpha, std::size_t M);

struct CharFnPoint {
    double s;
    double value;  ///< (1/M) sum cos(s X_i)
    double standard_error;
};

std::vector<CharFnPoint> charfn_experiment(const EmpiricalDistribution& emp, std::span<const double> s_grid);

struct LilCheckpoint {
    std::size_t N;
    double running_max;
};

/// Running max over 16 <= N' <= N of |S_N'| / sqrt(2 gamma2 N' log log N'), natural logs.
struct LilTrajectory {
    std::vector<LilCheckpoint> checkpoints;
    double gamma2 = 0;
    std::size_t start = 16;
    std::string normalization = "|S_N| / sqrt(2 * gamma2 * N * ln(ln N)), running max from N = 16";
};

/// Checkpoints at 16, 32, ..., powers of two up to N_max, plus N_max.
LilTrajectory lil_trajectory(const TrigPolynomial& poly, const IntegerSequence& seq, const PermutationWindow& perm,
                             const FixedPointSample& x, std::size_t N_max, double gamma2);

}  // namespace lacunaria
