#include "lacunaria/error.hpp"
#include "lacunaria/simulate.hpp"

#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <set>

using namespace lacunaria;

namespace {

const TrigPolynomial kCos1 = TrigPolynomial::parse("cos:1");

BigInt pow2(unsigned k) { return BigInt(1) << k; }

std::vector<double> gaussian_samples(std::size_t M, double sd, std::uint64_t seed) {
    std::vector<double> out(M);
    for (std::size_t i = 0; i < M; ++i) {
        CounterStream s(seed, Stream::SamplePoints, i);
        const double u1 = 1.0 - s.uniform(), u2 = s.uniform();
        out[i] = sd * std::sqrt(-2 * std::log(u1)) * std::cos(2 * std::numbers::pi * u2);
    }
    return out;
}

}  // namespace

TEST_CASE("sample points are deterministic and uniform") {
    CHECK(sample_points(64, 1, 5)[0] == sample_points(64, 1, 5)[0]);
    CHECK(sample_point(200, 5, 17) == sample_points(200, 20, 5)[17]);
    CHECK(sample_point(200, 5, 17).mantissa() < pow2(200));

    const std::size_t M = 100000;
    const auto xs = sample_points(64, M, 99);
    double mean = 0;
    for (const auto& x : xs) mean += x.to_double();
    mean /= M;
    CHECK(std::fabs(mean - 0.5) < 3 / std::sqrt(12.0 * M));

    std::set<std::uint64_t> seen;
    for (std::uint64_t seed : {1ULL, 2ULL}) {
        for (const auto& x : sample_points(64, 10000, seed)) seen.insert(x.limbs[0]);
    }
    CHECK(seen.size() == 20000);
    CHECK_THROWS_AS(sample_points(32, 1, 0), InvalidArgument);
}

TEST_CASE("FixedPointSample mantissa round-trip") {
    const BigInt m = parse_bigint("123456789012345678901234567890123456789");
    const auto x = FixedPointSample::from_mantissa(m, 130);
    CHECK(x.mantissa() == m);
    CHECK(x.to_double() == Catch::Approx(std::ldexp(m.get_d(), -130)).epsilon(1e-15));
    CHECK_THROWS_AS(FixedPointSample::from_mantissa(pow2(130), 130), InvalidArgument);
    CHECK_THROWS_AS(FixedPointSample::from_mantissa(BigInt(-1), 130), InvalidArgument);
}

TEST_CASE("frac_part examples") {
    const std::size_t B = 128;
    const auto half = FixedPointSample::from_mantissa(pow2(B - 1), B);
    CHECK(frac_part(3, half).mantissa() == pow2(B - 1));
    const auto quarter = FixedPointSample::from_mantissa(pow2(B - 2), B);
    CHECK(frac_part(5, quarter).mantissa() == pow2(B - 2));

    const std::size_t wide = 192;
    const BigInt m = sample_point(wide, 4, 0).mantissa();
    const auto x = FixedPointSample::from_mantissa(m, wide);
    const auto y = frac_part(pow2(100), x);
    CHECK(y.to_double() == Catch::Approx(oracle::frac_mpfr(pow2(100), m, wide)).epsilon(1e-15));
}

TEST_CASE("frac_part is exact modular arithmetic") {
    for (std::uint64_t i = 0; i < 200; ++i) {
        const auto x = sample_point(300, 8, i);
        const BigInt n = sample_point(250, 9, i).mantissa() + 1;
        BigInt expected = n * x.mantissa();
        mpz_fdiv_r_2exp(expected.get_mpz_t(), expected.get_mpz_t(), 300);
        CHECK(frac_part(n, x).mantissa() == expected);
    }
}

TEST_CASE("partial_sum examples") {
    const auto one = IntegerSequence::from_terms({BigInt(1)}, ExternalProvenance{});
    const auto zero = FixedPointSample::from_mantissa(0, 128);
    CHECK(partial_sum(kCos1, one, identity_permutation(1), zero, 1).value == Catch::Approx(1.0));

    const auto twelve = IntegerSequence::from_terms({BigInt(1), BigInt(2)}, ExternalProvenance{});
    const auto quarter = FixedPointSample::from_mantissa(pow2(126), 128);
    CHECK(partial_sum(kCos1, twelve, identity_permutation(2), quarter, 2).value == Catch::Approx(-1.0).margin(1e-15));
}

TEST_CASE("partial_sum on 2^k matches a high-precision oracle") {
    const auto seq = gen_power(2, 0, 64);
    const auto f = TrigPolynomial::parse("cos:1,sin:2=1/3,cos:3=-1/2");
    const std::size_t B = required_bits(f, seq, identity_permutation(64), 64);
    for (std::uint64_t i = 0; i < 10; ++i) {
        const auto x = sample_point(B, 21, i);
        const auto r = partial_sum(f, seq, identity_permutation(64), x, 64);
        const double expect =
            oracle::partial_sum_mpfr({1, 0, -0.5}, {0, 1.0 / 3}, seq.prefix(64), x.mantissa(), B);
        CHECK(std::fabs(r.value - expect) < 1e-12);
        CHECK(std::fabs(r.value - expect) <= r.error_bound);
    }
}

TEST_CASE("partial_sum on dense and sparse terms matches the oracle") {
    std::vector<BigInt> terms;
    BigInt v = 3;
    for (int k = 0; k < 40; ++k) {
        v = v * 5 + 1 + k;
        terms.push_back(v);
    }
    for (int k = 0; k < 10; ++k) terms.push_back(terms.back() * 4 + (pow2(40 + k) - 1));
    terms.push_back(pow2(300) + pow2(299) - pow2(5));
    const auto seq = IntegerSequence::from_terms(terms, ExternalProvenance{});
    const auto perm = random_permutation(seq.size(), 3);
    const auto f = TrigPolynomial::parse("cos:1=2,sin:5=-1");
    const std::size_t B = required_bits(f, seq, perm, seq.size());
    std::vector<BigInt> ordered;
    for (std::size_t k = 1; k <= seq.size(); ++k) ordered.push_back(seq.term(perm(k)));
    for (std::uint64_t i = 0; i < 10; ++i) {
        const auto x = sample_point(B, 77, i);
        const double expect = oracle::partial_sum_mpfr({2, 0, 0, 0, 0}, {0, 0, 0, 0, -1}, ordered, x.mantissa(), B);
        CHECK(std::fabs(partial_sum(f, seq, perm, x, seq.size()).value - expect) < 1e-12);
    }
}

TEST_CASE("partial_sum names the required width") {
    const auto seq = gen_power(2, 0, 100);
    const auto x = sample_point(128, 0, 0);
    try {
        partial_sum(kCos1, seq, identity_permutation(100), x, 100);
        FAIL("expected an error");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find(std::to_string(101 + 1 + 64)) != std::string::npos);
    }
    CHECK_THROWS_AS(partial_sum(kCos1, seq, identity_permutation(50), x, 51), InvalidArgument);
}

TEST_CASE("evaluate_running ends at the full sum") {
    const auto seq = gen_power(2, -1, 300);
    const auto perm = random_permutation(300, 8);
    const auto f = TrigPolynomial::parse("cos:1,cos:2");
    const PartialSumEvaluator ev(f, seq, perm, 300, 448);
    const auto x = sample_point(448, 2, 2);
    std::vector<double> run;
    ev.evaluate_running(x, [&](std::size_t k, double s) {
        CHECK(k == run.size() + 1);
        run.push_back(s);
    });
    REQUIRE(run.size() == 300);
    CHECK(run.back() == Catch::Approx(ev.evaluate(x).value).margin(1e-12));
    CHECK(run[9] == Catch::Approx(PartialSumEvaluator(f, seq, perm, 10, 448).evaluate(x).value).margin(1e-12));
}

TEST_CASE("summarize") {
    const std::vector<double> xs{1, 2, 3, 4};
    const auto m = summarize(xs);
    CHECK(m.mean == 2.5);
    CHECK(m.variance == 1.25);
    CHECK(m.m4 == Catch::Approx((2 * std::pow(1.5, 4) + 2 * std::pow(0.5, 4)) / 4));
    CHECK(m.kurtosis == Catch::Approx(m.m4 / (1.25 * 1.25)));
    CHECK(m.se_kurtosis_null == Catch::Approx(std::sqrt(6.0)));

    const auto g = summarize(gaussian_samples(200000, 1.0, 5));
    CHECK(g.kurtosis == Catch::Approx(3.0).margin(4 * g.se_kurtosis));
    CHECK(g.se_kurtosis == Catch::Approx(g.se_kurtosis_null).epsilon(0.1));
}

TEST_CASE("clt_experiment with N = 1 reproduces the law of f") {
    const auto seq = gen_power(2, 0, 1);
    CltParams p;
    p.N = 1;
    p.M = 100000;
    p.seed = 4;
    const auto emp = clt_experiment(kCos1, seq, identity_permutation(1), p);
    // Var(cos^2) = 1/8 gives the standard error of the sample variance.
    CHECK(std::fabs(emp.summary.variance - 0.5) < 4 * std::sqrt(0.125 / p.M));
}

TEST_CASE("clt_experiment variance tracks exact_variance") {
    const auto seq = gen_power(2, 0, 256);
    const auto f = TrigPolynomial::parse("cos:1,cos:2");
    const auto perm = random_permutation(256, 6);
    CltParams p;
    p.N = 256;
    p.M = 20000;
    p.seed = 12;
    const auto emp = clt_experiment(f, seq, perm, p);
    const double exact = exact_variance(f, seq, perm, 256).get_d();
    CHECK(std::fabs(emp.summary.variance - exact) <= 4 * std::sqrt(2.0 / p.M) * exact);
    CHECK(emp.max_error_bound < 1e-10);
}

TEST_CASE("clt_experiment is independent of the thread count") {
    const auto seq = gen_power(2, -1, 100);
    CltParams p;
    p.N = 100;
    p.M = 501;
    p.seed = 3;
    const auto one = clt_experiment(kCos1, seq, identity_permutation(100), p);
    p.threads = 3;
    const auto three = clt_experiment(kCos1, seq, identity_permutation(100), p);
    CHECK(one.samples == three.samples);
    CHECK(one.summary.variance == three.summary.variance);
}

TEST_CASE("ks_distance") {
    const std::size_t M = 100000;
    const auto emp = EmpiricalDistribution::from_samples(gaussian_samples(M, std::sqrt(0.5), 31));
    CHECK(ks_distance(emp, GaussianTarget{0, 0.5}).distance < 1.36 / std::sqrt(static_cast<double>(M)));

    const auto constant = EmpiricalDistribution::from_samples(std::vector<double>(100, 0.0));
    CHECK(ks_distance(constant, GaussianTarget{0, 1}).distance >= 0.5);
    CHECK(ks_distance(constant, GaussianTarget{0, 0}).distance == 0.0);
    const auto shifted = EmpiricalDistribution::from_samples(std::vector<double>(100, 1.0));
    CHECK(ks_distance(shifted, GaussianTarget{0, 0}).distance == 1.0);

    MixtureProfile v;
    v.constant = 1;
    v.cutoff = 1;
    v.low_terms.push_back({BigInt(1), Rational(1, 2), 0});
    CHECK(cdf_distance(MixtureTarget{v}, GaussianTarget{0, 1}) > 1e-3);
}

TEST_CASE("mixture CDF draws are consistent with the mixture target") {
    MixtureProfile v;
    v.constant = 1;
    v.cutoff = 1;
    v.low_terms.push_back({BigInt(1), Rational(1, 2), 0});
    const std::size_t M = 100000;
    auto z = gaussian_samples(M, 1.0, 8);
    for (std::size_t i = 0; i < M; ++i) {
        const double t = CounterStream(8, Stream::LilPoints, i).uniform();
        z[i] *= std::sqrt(v.evaluate(t));
    }
    const auto emp = EmpiricalDistribution::from_samples(z);
    const auto ks = ks_distance(emp, MixtureTarget{v});
    CHECK(ks.distance < 1.63 / std::sqrt(static_cast<double>(M)));
    CHECK(ks.cdf_tolerance < 1e-9);
}

TEST_CASE("kolmogorov_threshold") {
    CHECK(kolmogorov_threshold(0.05, 1) == Catch::Approx(1.3581).epsilon(1e-4));
    CHECK(kolmogorov_threshold(0.01, 10000) == Catch::Approx(0.016276).epsilon(1e-4));
    CHECK_THROWS_AS(kolmogorov_threshold(0, 10), InvalidArgument);
}

TEST_CASE("charfn_experiment") {
    const auto zeros = EmpiricalDistribution::from_samples(std::vector<double>(1000, 0.0));
    const std::vector<double> grid{0.5, 1, 2};
    for (const auto& p : charfn_experiment(zeros, grid)) CHECK(p.value == 1.0);

    const std::size_t M = 100000;
    const auto g = EmpiricalDistribution::from_samples(gaussian_samples(M, std::sqrt(0.5), 2));
    const std::vector<double> one{1.0};
    const auto pt = charfn_experiment(g, one)[0];
    CHECK(pt.standard_error <= 1 / std::sqrt(static_cast<double>(M)));
    CHECK(std::fabs(pt.value - std::exp(-0.25)) < 4 * pt.standard_error);
}

TEST_CASE("lil_trajectory") {
    const auto seq = gen_power(2, 0, 1 << 13);
    const auto perm = identity_permutation(1 << 13);
    const std::size_t B = required_bits(kCos1, seq, perm, 1 << 13);
    const auto x = sample_point(B, 1, 0, Stream::LilPoints);
    const auto small = lil_trajectory(kCos1, seq, perm, x, 1 << 12, 0.5);
    const auto big = lil_trajectory(kCos1, seq, perm, x, 1 << 13, 0.5);
    REQUIRE(small.checkpoints.size() == 9);
    CHECK(small.checkpoints.front().N == 16);
    CHECK(small.checkpoints.back().N == 4096);
    for (std::size_t i = 1; i < big.checkpoints.size(); ++i) {
        CHECK(big.checkpoints[i].running_max >= big.checkpoints[i - 1].running_max);
    }
    for (std::size_t i = 0; i < small.checkpoints.size(); ++i) {
        CHECK(big.checkpoints[i].running_max == small.checkpoints[i].running_max);
    }
    CHECK(big.checkpoints.back().running_max >= small.checkpoints.back().running_max);
    const auto odd = lil_trajectory(kCos1, seq, perm, x, 100, 0.5);
    CHECK(odd.checkpoints.back().N == 100);
    CHECK_THROWS_AS(lil_trajectory(kCos1, seq, perm, x, 1 << 12, 0.0), InvalidArgument);
    CHECK_THROWS_AS(lil_trajectory(kCos1, seq, perm, x, 8, 0.5), InvalidArgument);
}
