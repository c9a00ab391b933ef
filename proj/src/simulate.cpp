#include "lacunaria/simulate.hpp"

#include "lacunaria/error.hpp"

#include <gmp.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

namespace lacunaria {

// ---------------------------------------------------------------------------
// Fixed-point samples
// ---------------------------------------------------------------------------

namespace {

using U128 = unsigned __int128;

std::size_t limb_count(std::size_t bits) { return (bits + 63) / 64; }

std::uint64_t top_mask(std::size_t bits) {
    return bits % 64 == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << (bits % 64)) - 1;
}

/// Bits [pos, pos + 64) of a little-endian limb array; positions outside
/// [0, 64 * n) read as zero.
std::uint64_t get64(const std::uint64_t* limbs, std::size_t n, long pos) {
    if (pos <= -64) return 0;
    if (pos < 0) return n == 0 ? 0 : limbs[0] << (-pos);
    const auto q = static_cast<std::size_t>(pos) / 64;
    const unsigned r = static_cast<unsigned>(pos % 64);
    const std::uint64_t lo = q < n ? limbs[q] : 0;
    if (r == 0) return lo;
    const std::uint64_t hi = q + 1 < n ? limbs[q + 1] : 0;
    return (lo >> r) | (hi << (64 - r));
}

/// dst = (src << shift) mod 2^(64 n).
void shift_into(std::uint64_t* dst, const std::uint64_t* src, std::size_t n, std::size_t shift) {
    const std::size_t q = shift / 64;
    const unsigned r = static_cast<unsigned>(shift % 64);
    if (q >= n) {
        std::fill(dst, dst + n, 0);
        return;
    }
    std::fill(dst, dst + q, 0);
    if (r == 0) {
        std::copy(src, src + (n - q), dst + q);
    } else {
        mpn_lshift(reinterpret_cast<mp_ptr>(dst + q), reinterpret_cast<mp_srcptr>(src), static_cast<mp_size_t>(n - q), r);
    }
}

}  // namespace

FixedPointSample FixedPointSample::from_mantissa(const BigInt& mantissa, std::size_t bits) {
    if (bits < 1) throw InvalidArgument("fixed-point width must be positive");
    if (mantissa < 0 || bit_length(mantissa) > bits) {
        throw InvalidArgument("mantissa does not fit in " + std::to_string(bits) + " bits");
    }
    FixedPointSample x;
    x.bits = bits;
    x.limbs.assign(limb_count(bits), 0);
    size_t written = 0;
    mpz_export(x.limbs.data(), &written, -1, sizeof(std::uint64_t), 0, 0, mantissa.get_mpz_t());
    return x;
}

BigInt FixedPointSample::mantissa() const {
    BigInt m;
    mpz_import(m.get_mpz_t(), limbs.size(), -1, sizeof(std::uint64_t), 0, 0, limbs.data());
    return m;
}

double FixedPointSample::to_double() const {
    const std::uint64_t top = get64(limbs.data(), limbs.size(), static_cast<long>(bits) - 64);
    return std::ldexp(static_cast<double>(top), -64);
}

FixedPointSample sample_point(std::size_t bits, std::uint64_t seed, std::uint64_t index, Stream stream) {
    if (bits < 1) throw InvalidArgument("fixed-point width must be positive");
    FixedPointSample x;
    x.bits = bits;
    x.limbs.resize(limb_count(bits));
    for (std::size_t j = 0; j < x.limbs.size(); ++j) x.limbs[j] = counter_word(seed, stream, index, j);
    x.limbs.back() &= top_mask(bits);
    return x;
}

std::vector<FixedPointSample> sample_points(std::size_t bits, std::size_t M, std::uint64_t seed) {
    if (bits < 64) throw InvalidArgument("sample width must be at least 64 bits");
    std::vector<FixedPointSample> out;
    out.reserve(M);
    for (std::size_t i = 0; i < M; ++i) out.push_back(sample_point(bits, seed, i));
    return out;
}

FixedPointSample frac_part(const BigInt& n, const FixedPointSample& x) {
    BigInt r = n * x.mantissa();
    mpz_fdiv_r_2exp(r.get_mpz_t(), r.get_mpz_t(), x.bits);
    return FixedPointSample::from_mantissa(r, x.bits);
}

std::size_t required_bits(const TrigPolynomial& poly, const IntegerSequence& seq, const PermutationWindow& perm,
                          std::size_t N) {
    if (N > perm.size()) throw InvalidArgument("window N exceeds the permutation size");
    std::size_t widest = 0;
    for (std::size_t k = 1; k <= N; ++k) widest = std::max(widest, seq.term_bit_length(perm(k)));
    return widest + bit_length(BigInt(static_cast<unsigned long>(poly.degree()))) + 64;
}

// ---------------------------------------------------------------------------
// Partial sums
// ---------------------------------------------------------------------------

namespace {

enum class PlanKind : std::uint8_t { PowerOfTwo, Sparse, Dense };

struct TermPlan {
    PlanKind kind;
    std::size_t first;  ///< shift (PowerOfTwo) or offset into digits/dense storage
    std::size_t count;
};

struct Frequency {
    unsigned long j;
    double cos_coeff;
    double sin_coeff;
};

struct Scratch {
    std::vector<std::uint64_t> y, tmp, prod, jy;
};

constexpr std::size_t kMaxSparseWeight = 4;

}  // namespace

struct PartialSumEvaluator::Impl {
    std::size_t bits = 0;
    std::size_t limbs = 0;
    std::uint64_t mask = 0;
    std::vector<TermPlan> plans;
    std::vector<SignedDigit> digits;
    std::vector<std::uint64_t> dense;
    std::size_t max_dense_limbs = 0;
    std::vector<Frequency> freqs;
    double term_error = 0;

    Scratch make_scratch() const {
        Scratch s;
        s.y.resize(limbs);
        s.tmp.resize(limbs);
        s.prod.resize(limbs + max_dense_limbs);
        s.jy.resize(limbs);
        return s;
    }

    void add_plan(const IntegerSequence& seq, std::size_t index) {
        if (auto closed = seq.closed_form_digits(index)) {
            add_digits(*closed);
            return;
        }
        const BigInt n = seq.term(index);
        // Non-adjacent form: n = np - nm.
        const BigInt half = n >> 1;
        const BigInt three_half = n + half;
        const BigInt c = half ^ three_half;
        const BigInt np = three_half & c;
        const BigInt nm = half & c;
        const auto weight = mpz_popcount(np.get_mpz_t()) + mpz_popcount(nm.get_mpz_t());
        if (weight <= kMaxSparseWeight) {
            std::vector<SignedDigit> ds;
            for (auto [v, sign] : {std::pair<const BigInt*, int>{&np, +1}, {&nm, -1}}) {
                for (mp_bitcnt_t b = mpz_scan1(v->get_mpz_t(), 0); b != ~mp_bitcnt_t{0};
                     b = mpz_scan1(v->get_mpz_t(), b + 1)) {
                    ds.push_back({sign, static_cast<std::size_t>(b)});
                }
            }
            // Positive digits first so the first step can be a plain copy.
            std::stable_sort(ds.begin(), ds.end(), [](const auto& x, const auto& y) { return x.sign > y.sign; });
            add_digits(ds);
            return;
        }
        const std::size_t nl = mpz_size(n.get_mpz_t());
        plans.push_back({PlanKind::Dense, dense.size(), nl});
        for (std::size_t i = 0; i < nl; ++i) dense.push_back(mpz_getlimbn(n.get_mpz_t(), static_cast<mp_size_t>(i)));
        max_dense_limbs = std::max(max_dense_limbs, nl);
    }

    void add_digits(const std::vector<SignedDigit>& ds) {
        if (ds.size() == 1 && ds[0].sign > 0) {
            plans.push_back({PlanKind::PowerOfTwo, ds[0].shift, 1});
            return;
        }
        plans.push_back({PlanKind::Sparse, digits.size(), ds.size()});
        digits.insert(digits.end(), ds.begin(), ds.end());
    }

    /// y = n * m mod 2^bits, written to s.y.
    void materialize(const TermPlan& p, const std::uint64_t* m, Scratch& s) const {
        auto* y = s.y.data();
        switch (p.kind) {
            case PlanKind::PowerOfTwo:
                shift_into(y, m, limbs, p.first);
                break;
            case PlanKind::Sparse: {
                bool started = false;
                for (std::size_t i = 0; i < p.count; ++i) {
                    const SignedDigit& d = digits[p.first + i];
                    if (!started && d.sign > 0) {
                        shift_into(y, m, limbs, d.shift);
                        started = true;
                        continue;
                    }
                    if (!started) {
                        std::fill(y, y + limbs, 0);
                        started = true;
                    }
                    shift_into(s.tmp.data(), m, limbs, d.shift);
                    const auto n = static_cast<mp_size_t>(limbs);
                    if (d.sign > 0) {
                        mpn_add_n(reinterpret_cast<mp_ptr>(y), reinterpret_cast<mp_srcptr>(y),
                                  reinterpret_cast<mp_srcptr>(s.tmp.data()), n);
                    } else {
                        mpn_sub_n(reinterpret_cast<mp_ptr>(y), reinterpret_cast<mp_srcptr>(y),
                                  reinterpret_cast<mp_srcptr>(s.tmp.data()), n);
                    }
                }
                break;
            }
            case PlanKind::Dense:
                mpn_mul(reinterpret_cast<mp_ptr>(s.prod.data()), reinterpret_cast<mp_srcptr>(m),
                        static_cast<mp_size_t>(limbs), reinterpret_cast<mp_srcptr>(dense.data() + p.first),
                        static_cast<mp_size_t>(p.count));
                std::copy(s.prod.begin(), s.prod.begin() + static_cast<std::ptrdiff_t>(limbs), y);
                break;
        }
        y[limbs - 1] &= mask;
    }

    /// Bits [bits - 128, bits) of n * m mod 2^bits.
    U128 top128(const TermPlan& p, const std::uint64_t* m, Scratch& s) const {
        const auto B = static_cast<long>(bits);
        if (p.kind == PlanKind::PowerOfTwo) {
            // Bit i of (m << shift) is bit i - shift of m.
            const long base = B - 128 - static_cast<long>(p.first);
            return (U128(get64(m, limbs, base + 64)) << 64) | get64(m, limbs, base);
        }
        materialize(p, m, s);
        return (U128(get64(s.y.data(), limbs, B - 64)) << 64) | get64(s.y.data(), limbs, B - 128);
    }

    /// Top 64 bits of j * y mod 2^bits given the top 128 bits of y.
    std::uint64_t phase(const TermPlan& p, unsigned long j, U128 top, const std::uint64_t* m, Scratch& s) const {
        if (j == 1) return static_cast<std::uint64_t>(top >> 64);
        const U128 prod = top * j;
        // Bits of y below the window add less than j units to the low word.
        if (static_cast<std::uint64_t>(prod) <= ~std::uint64_t{0} - (j - 1)) {
            return static_cast<std::uint64_t>(prod >> 64);
        }
        materialize(p, m, s);
        mpn_mul_1(reinterpret_cast<mp_ptr>(s.jy.data()), reinterpret_cast<mp_srcptr>(s.y.data()),
                  static_cast<mp_size_t>(limbs), j);
        s.jy[limbs - 1] &= mask;
        return get64(s.jy.data(), limbs, static_cast<long>(bits) - 64);
    }

    double term_value(const TermPlan& p, const std::uint64_t* m, Scratch& s) const {
        const U128 top = top128(p, m, s);
        double v = 0;
        for (const Frequency& f : freqs) {
            const double angle = 2 * std::numbers::pi * std::ldexp(static_cast<double>(phase(p, f.j, top, m, s)), -64);
            if (f.sin_coeff == 0) {
                v += f.cos_coeff * std::cos(angle);
            } else if (f.cos_coeff == 0) {
                v += f.sin_coeff * std::sin(angle);
            } else {
                v += f.cos_coeff * std::cos(angle) + f.sin_coeff * std::sin(angle);
            }
        }
        return v;
    }

    void check_sample(const FixedPointSample& x) const {
        if (x.bits != bits || x.limbs.size() != limbs) {
            throw InvalidArgument("sample width " + std::to_string(x.bits) + " does not match evaluator width " +
                                  std::to_string(bits));
        }
    }
};

PartialSumEvaluator::PartialSumEvaluator(const TrigPolynomial& poly, const IntegerSequence& seq,
                                         const PermutationWindow& perm, std::size_t N, std::size_t bits)
    : impl_(std::make_unique<Impl>()) {
    if (N > perm.size()) throw InvalidArgument("window N exceeds the permutation size");
    const std::size_t need = required_bits(poly, seq, perm, N);
    if (bits < need) {
        throw InvalidArgument("sample width B = " + std::to_string(bits) + " is too small; this window requires B >= " +
                              std::to_string(need));
    }
    impl_->bits = bits;
    impl_->limbs = limb_count(bits);
    impl_->mask = top_mask(bits);
    impl_->plans.reserve(N);
    for (std::size_t k = 1; k <= N; ++k) impl_->add_plan(seq, perm(k));
    for (std::size_t j = 1; j <= poly.degree(); ++j) {
        const double a = poly.cos_coeff(j).get_d(), b = poly.sin_coeff(j).get_d();
        if (a != 0 || b != 0) impl_->freqs.push_back({j, a, b});
    }
    impl_->term_error = kTermErrorPerCoeff * poly.l1_coeff_sum().get_d();
}

PartialSumEvaluator::~PartialSumEvaluator() = default;
PartialSumEvaluator::PartialSumEvaluator(PartialSumEvaluator&&) noexcept = default;
PartialSumEvaluator& PartialSumEvaluator::operator=(PartialSumEvaluator&&) noexcept = default;

std::size_t PartialSumEvaluator::bits() const noexcept { return impl_->bits; }
std::size_t PartialSumEvaluator::size() const noexcept { return impl_->plans.size(); }

namespace {

/// Neumaier compensated summation.
struct CompensatedSum {
    double sum = 0;
    double carry = 0;
    double abs_total = 0;

    void add(double v) {
        const double t = sum + v;
        if (std::fabs(sum) >= std::fabs(v)) {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
        abs_total += std::fabs(v);
    }
    double value() const { return sum + carry; }
};

}  // namespace

PartialSum PartialSumEvaluator::evaluate(const FixedPointSample& x) const {
    impl_->check_sample(x);
    Scratch s = impl_->make_scratch();
    CompensatedSum acc;
    for (const TermPlan& p : impl_->plans) acc.add(impl_->term_value(p, x.limbs.data(), s));
    const double n = static_cast<double>(impl_->plans.size());
    return {acc.value(), n * impl_->term_error + 0x1.0p-52 * acc.abs_total};
}

void PartialSumEvaluator::evaluate_running(const FixedPointSample& x,
                                           const std::function<void(std::size_t, double)>& visit) const {
    impl_->check_sample(x);
    Scratch s = impl_->make_scratch();
    CompensatedSum acc;
    for (std::size_t k = 0; k < impl_->plans.size(); ++k) {
        acc.add(impl_->term_value(impl_->plans[k], x.limbs.data(), s));
        visit(k + 1, acc.value());
    }
}

PartialSum partial_sum(const TrigPolynomial& poly, const IntegerSequence& seq, const PermutationWindow& perm,
                       const FixedPointSample& x, std::size_t N) {
    return PartialSumEvaluator(poly, seq, perm, N, x.bits).evaluate(x);
}

// ---------------------------------------------------------------------------
// Distributions
// ---------------------------------------------------------------------------

Moments summarize(std::span<const double> samples) {
    Moments m;
    const std::size_t M = samples.size();
    if (M == 0) return m;
    long double sum = 0;
    for (double v : samples) sum += v;
    const long double mean = sum / static_cast<long double>(M);
    long double c2 = 0, c4 = 0, c6 = 0, c8 = 0;
    for (double v : samples) {
        const long double d = v - mean, d2 = d * d, d4 = d2 * d2;
        c2 += d2;
        c4 += d4;
        c6 += d4 * d2;
        c8 += d4 * d4;
    }
    const auto n = static_cast<long double>(M);
    c2 /= n;
    c4 /= n;
    c6 /= n;
    c8 /= n;
    m.mean = static_cast<double>(mean);
    m.variance = static_cast<double>(c2);
    m.m4 = static_cast<double>(c4);
    m.se_mean = std::sqrt(static_cast<double>(c2 / n));
    m.se_variance = std::sqrt(std::max(0.0L, (c4 - c2 * c2) / n));
    m.se_kurtosis_null = std::sqrt(24.0 / static_cast<double>(M));
    if (c2 > 0) {
        m.kurtosis = static_cast<double>(c4 / (c2 * c2));
        // Delta method for m4 / m2^2 with Var(X^4), Var(X^2), Cov(X^4, X^2).
        const long double var_k = ((c8 - c4 * c4) / (c2 * c2 * c2 * c2) -
                                   4 * c4 * (c6 - c4 * c2) / (c2 * c2 * c2 * c2 * c2) +
                                   4 * c4 * c4 * (c4 - c2 * c2) / (c2 * c2 * c2 * c2 * c2 * c2)) /
                                  n;
        m.se_kurtosis = std::sqrt(static_cast<double>(std::max(0.0L, var_k)));
    }
    return m;
}

EmpiricalDistribution EmpiricalDistribution::from_samples(std::vector<double> samples) {
    EmpiricalDistribution e;
    e.samples = std::move(samples);
    e.summary = summarize(e.samples);
    return e;
}

EmpiricalDistribution clt_experiment(const TrigPolynomial& poly, const IntegerSequence& seq,
                                     const PermutationWindow& perm, const CltParams& params) {
    if (params.N < 1) throw InvalidArgument("CLT experiment needs N >= 1");
    if (params.M < 1) throw InvalidArgument("CLT experiment needs M >= 1");
    const std::size_t need = required_bits(poly, seq, perm, params.N);
    const std::size_t bits = params.bits == 0 ? limb_count(need) * 64 : params.bits;
    const PartialSumEvaluator evaluator(poly, seq, perm, params.N, bits);

    std::vector<double> samples(params.M);
    std::vector<double> bounds(params.M);
    const double norm = 1.0 / std::sqrt(static_cast<double>(params.N));
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const FixedPointSample x = sample_point(bits, params.seed, i);
            const PartialSum s = evaluator.evaluate(x);
            samples[i] = s.value * norm;
            bounds[i] = s.error_bound * norm;
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(params.threads, static_cast<unsigned>(params.M)));
    if (threads == 1) {
        work(0, params.M);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (params.M + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t begin = t * chunk, end = std::min(params.M, begin + chunk);
            if (begin < end) pool.emplace_back(work, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    EmpiricalDistribution out = EmpiricalDistribution::from_samples(std::move(samples));
    out.max_error_bound = *std::max_element(bounds.begin(), bounds.end());
    out.bits = bits;
    return out;
}

namespace {

constexpr std::size_t kMixtureNodes = 1024;

double normal_cdf(double x, double mean, double sd) {
    if (sd <= 0) return x >= mean ? 1.0 : 0.0;
    return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

}  // namespace

TargetCdf::TargetCdf(const DistributionTarget& target) {
    if (const auto* g = std::get_if<GaussianTarget>(&target)) {
        if (g->variance < 0) throw InvalidArgument("Gaussian target needs a nonnegative variance");
        mean_ = g->mean;
        variance_ = g->variance;
        return;
    }
    const auto& profile = std::get<MixtureTarget>(target).profile;
    if (!profile.is_nonnegative()) throw InvalidArgument("mixture profile takes negative values");
    mixture_ = true;
    variance_ = profile.constant.get_d();
    // Fine nodes first, then the nodes of the 512-point rule.
    sd_nodes_.resize(kMixtureNodes + kMixtureNodes / 2);
    for (std::size_t i = 0; i < kMixtureNodes; ++i) {
        const double t = (static_cast<double>(i) + 0.5) / kMixtureNodes;
        sd_nodes_[i] = std::sqrt(std::max(0.0, profile.evaluate(t)));
    }
    for (std::size_t i = 0; i < kMixtureNodes / 2; ++i) {
        const double t = (static_cast<double>(i) + 0.5) / (kMixtureNodes / 2);
        sd_nodes_[kMixtureNodes + i] = std::sqrt(std::max(0.0, profile.evaluate(t)));
    }
}

double TargetCdf::left_limit(double x) const {
    if (!mixture_ && variance_ == 0) return x > mean_ ? 1.0 : 0.0;
    return (*this)(x);
}

std::optional<double> TargetCdf::atom() const {
    if (!mixture_ && variance_ == 0) return mean_;
    return std::nullopt;
}

double TargetCdf::operator()(double x) const {
    double tol = 0;
    return with_tolerance(x, tol);
}

double TargetCdf::with_tolerance(double x, double& tolerance) const {
    if (!mixture_) {
        tolerance = 0;
        return normal_cdf(x, mean_, std::sqrt(variance_));
    }
    double fine = 0, coarse = 0;
    for (std::size_t i = 0; i < kMixtureNodes; ++i) fine += normal_cdf(x, 0.0, sd_nodes_[i]);
    fine /= kMixtureNodes;
    for (std::size_t i = kMixtureNodes; i < sd_nodes_.size(); ++i) coarse += normal_cdf(x, 0.0, sd_nodes_[i]);
    coarse /= static_cast<double>(kMixtureNodes / 2);
    tolerance = std::fabs(fine - coarse);
    return fine;
}

KsResult ks_distance(const EmpiricalDistribution& emp, const DistributionTarget& target) {
    if (emp.samples.empty()) throw InvalidArgument("KS distance needs at least one sample");
    std::vector<double> sorted = emp.samples;
    if (!emp.sorted) std::sort(sorted.begin(), sorted.end());
    const TargetCdf cdf(target);
    const auto M = static_cast<double>(sorted.size());
    KsResult r;
    // Compares both one-sided limits at every distinct sample value, so ties
    // and point-mass targets are handled exactly.
    const std::size_t stride = std::max<std::size_t>(1, sorted.size() / 512);
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        double tol = 0;
        const double F = (i % stride == 0) ? cdf.with_tolerance(sorted[i], tol) : cdf(sorted[i]);
        const double F_left = cdf.left_limit(sorted[i]);
        r.cdf_tolerance = std::max(r.cdf_tolerance, tol);
        r.distance = std::max({r.distance, std::fabs(static_cast<double>(j) / M - F),
                               std::fabs(static_cast<double>(i) / M - F_left)});
        i = j;
    }
    if (const auto atom = cdf.atom()) {
        const auto below = std::lower_bound(sorted.begin(), sorted.end(), *atom) - sorted.begin();
        const auto upto = std::upper_bound(sorted.begin(), sorted.end(), *atom) - sorted.begin();
        r.distance = std::max({r.distance, std::fabs(static_cast<double>(below) / M),
                               std::fabs(static_cast<double>(upto) / M - 1.0)});
    }
    return r;
}

double cdf_distance(const DistributionTarget& lhs, const DistributionTarget& rhs) {
    const TargetCdf f(lhs), g(rhs);
    const double scale = 8 * std::sqrt(std::max({f.variance(), g.variance(), 1e-300}));
    constexpr int kGrid = 20000;
    double best = 0;
    for (int i = -kGrid; i <= kGrid; ++i) {
        const double x = scale * i / kGrid;
        best = std::max(best, std::fabs(f(x) - g(x)));
    }
    return best;
}

double kolmogorov_threshold(double alpha, std::size_t M) {
    if (!(alpha > 0 && alpha < 1) || M == 0) throw InvalidArgument("threshold needs 0 < alpha < 1 and M >= 1");
    return std::sqrt(-0.5 * std::log(alpha / 2)) / std::sqrt(static_cast<double>(M));
}

std::vector<CharFnPoint> charfn_experiment(const EmpiricalDistribution& emp, std::span<const double> s_grid) {
    if (emp.samples.empty()) throw InvalidArgument("characteristic function needs at least one sample");
    const auto M = static_cast<double>(emp.samples.size());
    std::vector<CharFnPoint> out;
    out.reserve(s_grid.size());
    for (const double s : s_grid) {
        long double sum = 0, sum_sq = 0;
        for (const double x : emp.samples) {
            const double c = std::cos(s * x);
            sum += c;
            sum_sq += static_cast<long double>(c) * c;
        }
        const double mean = static_cast<double>(sum / M);
        const double var = std::max(0.0, static_cast<double>(sum_sq / M) - mean * mean);
        out.push_back({s, mean, std::sqrt(var / M)});
    }
    return out;
}

LilTrajectory lil_trajectory(const TrigPolynomial& poly, const IntegerSequence& seq, const PermutationWindow& perm,
                             const FixedPointSample& x, std::size_t N_max, double gamma2) {
    if (!(gamma2 > 0)) throw InvalidArgument("LIL normalisation needs gamma^2 > 0");
    LilTrajectory traj;
    traj.gamma2 = gamma2;
    if (N_max < traj.start) throw InvalidArgument("LIL trajectory needs N_max >= 16");
    const PartialSumEvaluator evaluator(poly, seq, perm, N_max, x.bits);

    std::size_t next_cp = traj.start;
    double running = 0;
    evaluator.evaluate_running(x, [&](std::size_t n, double s) {
        if (n < traj.start) return;
        const double dn = static_cast<double>(n);
        running = std::max(running, std::fabs(s) / std::sqrt(2 * gamma2 * dn * std::log(std::log(dn))));
        if (n == next_cp || n == N_max) {
            traj.checkpoints.push_back({n, running});
            if (n == next_cp) next_cp *= 2;
        }
    });
    return traj;
}

}  // namespace lacunaria
