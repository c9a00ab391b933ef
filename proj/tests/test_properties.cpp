// Randomized properties. Each case draws its inputs from a CounterStream so a
// failure is reproducible from the printed trial number.

#include "lacunaria/diophantine.hpp"
#include "lacunaria/experiment.hpp"
#include "lacunaria/permute.hpp"
#include "lacunaria/simulate.hpp"
#include "lacunaria/spectra.hpp"

#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

using namespace lacunaria;

namespace {

constexpr std::uint64_t kSeed = 0x5eed;

CounterStream rng(std::uint64_t trial, std::uint64_t salt) {
    return CounterStream(kSeed ^ salt, Stream::PermutationSeeds, trial);
}

BigInt random_bits(CounterStream& r, std::size_t bits) {
    BigInt x = 0;
    for (std::size_t i = 0; i < bits; i += 64) {
        x <<= 64;
        x += static_cast<unsigned long>(r.next());
    }
    x >>= static_cast<mp_bitcnt_t>((bits + 63) / 64 * 64 - bits);
    return x;
}

std::vector<BigInt> random_increasing(CounterStream& r, std::size_t n, std::uint64_t max_gap) {
    std::vector<BigInt> v;
    BigInt x = 0;
    for (std::size_t i = 0; i < n; ++i) {
        x += static_cast<unsigned long>(1 + r.below(max_gap));
        v.push_back(x);
    }
    return v;
}

}  // namespace

TEST_CASE("frac_part equals the exact residue") {
    for (std::uint64_t trial = 0; trial < 200; ++trial) {
        CAPTURE(trial);
        auto r = rng(trial, 1);
        const std::size_t bits = 64 * (1 + r.below(4)) - r.below(30);
        const auto x = sample_point(bits, trial, 0);
        const BigInt n = random_bits(r, 1 + r.below(300));
        const BigInt modulus = BigInt(1) << static_cast<mp_bitcnt_t>(bits);
        BigInt expected = (n * x.mantissa()) % modulus;
        CHECK(frac_part(n, x).mantissa() == expected);
        CHECK(frac_part(n, x).bits == bits);
        CHECK(x.mantissa() < modulus);
        CHECK(FixedPointSample::from_mantissa(x.mantissa(), bits) == x);
    }
}

TEST_CASE("evaluator matches the MPFR oracle on sparse, dense and power-of-two terms") {
    for (std::uint64_t trial = 0; trial < 60; ++trial) {
        CAPTURE(trial);
        auto r = rng(trial, 2);
        const std::size_t N = 1 + r.below(40);
        std::vector<BigInt> terms;
        BigInt last = 0;
        for (std::size_t k = 0; k < N; ++k) {
            BigInt next;
            switch (trial % 3) {
                case 0: next = BigInt(1) << static_cast<mp_bitcnt_t>(3 * k + r.below(3)); break;
                case 1: {
                    next = BigInt(1) << static_cast<mp_bitcnt_t>(5 * k + 4);
                    next += (BigInt(1) << static_cast<mp_bitcnt_t>(r.below(5 * k + 3))) * (r.below(2) ? 1 : -1);
                    break;
                }
                default: next = last + random_bits(r, 8 + 6 * k) + 1; break;
            }
            if (next <= last) next = last + 1;
            terms.push_back(next);
            last = next;
        }
        const auto seq = IntegerSequence::from_terms(terms, ExternalProvenance{"random"});
        const std::size_t degree = 1 + r.below(3);
        std::vector<Rational> cs(degree), ss(degree);
        std::vector<double> cd(degree), sd(degree);
        for (std::size_t j = 0; j < degree; ++j) {
            cs[j] = Rational(static_cast<long>(r.below(9)) - 4, 3);
            ss[j] = Rational(static_cast<long>(r.below(9)) - 4, 5);
            cd[j] = cs[j].get_d();
            sd[j] = ss[j].get_d();
        }
        if (cs[0] == 0) { cs[0] = 1; cd[0] = 1; }
        const TrigPolynomial poly(cs, ss);
        const auto perm = random_permutation(N, trial);
        const std::size_t bits = required_bits(poly, seq, perm, N);
        const PartialSumEvaluator eval(poly, seq, perm, N, bits);
        std::vector<BigInt> ordered;
        for (std::size_t k = 1; k <= N; ++k) ordered.push_back(terms[perm(k) - 1]);
        for (std::uint64_t i = 0; i < 5; ++i) {
            const auto x = sample_point(bits, trial, i);
            const PartialSum got = eval.evaluate(x);
            const double want = oracle::partial_sum_mpfr(cd, sd, ordered, x.mantissa(), bits);
            CHECK(std::abs(got.value - want) <= got.error_bound + 1e-15);
            CHECK(got.error_bound < 1e-11);
        }
    }
}

TEST_CASE("two-term hash counts agree with brute force on random sequences") {
    for (std::uint64_t trial = 0; trial < 80; ++trial) {
        CAPTURE(trial);
        auto r = rng(trial, 3);
        const std::size_t n = 2 + r.below(40);
        const auto v = random_increasing(r, n, trial % 2 ? 4 : 1000);
        const auto seq = IntegerSequence::from_terms(v, ExternalProvenance{"random"});
        const long a = static_cast<long>(r.below(7)) - 3;
        const long b = static_cast<long>(r.below(7)) - 3;
        if (a == 0 || b == 0) continue;
        const auto k = r.below(n), l = r.below(n);
        const BigInt c = r.below(4) == 0 ? BigInt(static_cast<long>(r.below(20))) : a * v[k] + b * v[l];
        const bool distinct = r.below(2) == 1;
        const auto got = count_two_term(seq, TwoTermQuery{a, b, c, n, distinct});
        CHECK(got.count == oracle::two_term(v, a, b, c, distinct));
        for (const auto& w : got.witnesses) CHECK(a * v[w.k - 1] + b * v[w.l - 1] == c);
        const auto report = two_term_report(seq, a, b, n, false);
        CHECK(report.max_count == oracle::max_count(v, a, b, false));
    }
}

TEST_CASE("multi-term counts agree with exhaustive search on random sequences") {
    for (std::uint64_t trial = 0; trial < 24; ++trial) {
        CAPTURE(trial);
        auto r = rng(trial, 4);
        const std::size_t n = 4 + r.below(10);
        const auto v = random_increasing(r, n, 5);
        const auto seq = IntegerSequence::from_terms(v, ExternalProvenance{"random"});
        MultiTermQuery q;
        q.p = 2 + r.below(2);
        q.coeff_bound = 1 + static_cast<long>(r.below(2));
        q.N = n;
        q.signed_only = r.below(2) == 1;
        q.nondegenerate_only = r.below(2) == 1;
        CHECK(count_multi_term(seq, q).count ==
              oracle::multi_term(v, q.p, q.coeff_bound, q.signed_only, q.nondegenerate_only));
    }
}

TEST_CASE("random permutations are bijections and reproducible") {
    for (std::uint64_t trial = 0; trial < 50; ++trial) {
        CAPTURE(trial);
        const std::size_t N = 1 + trial * 13;
        const auto p = random_permutation(N, trial);
        std::vector<std::size_t> sorted = p.images();
        std::sort(sorted.begin(), sorted.end());
        std::vector<std::size_t> expected(N);
        std::iota(expected.begin(), expected.end(), std::size_t{1});
        CHECK(sorted == expected);
        CHECK(random_permutation(N, trial) == p);
        std::stringstream io;
        write_permutation(io, p);
        CHECK(read_permutation(io) == p);
        const auto inv = [&] {
            std::vector<std::size_t> im(N);
            for (std::size_t k = 1; k <= N; ++k) im[p(k) - 1] = k;
            return PermutationWindow(im);
        }();
        CHECK(compose(p, inv) == identity_permutation(N));
    }
}

TEST_CASE("pairing builder output survives certificate round-trip") {
    const auto seq = gen_power(2, -1, 400);
    for (std::size_t blocks = 1; blocks <= 4; ++blocks) {
        CAPTURE(blocks);
        const auto schedule = BlockSchedule::geometric_dominant(2, 4, blocks);
        const auto res = build_pairing_counterexample(seq, 1, 2, schedule, default_gap_ratio(1, 2, 2));
        CHECK(verify_certificate(res.permutation, seq, res.certificate).ok);
        const auto back = certificate_from_json(certificate_to_json(res.certificate));
        CHECK(certificate_to_json(back) == certificate_to_json(res.certificate));
        CHECK(verify_certificate(res.permutation, seq, back).ok);
        for (const auto& pr : res.certificate.pairs) {
            CHECK(res.permutation(pr.slot) == pr.odd_source);
            CHECK(res.permutation(pr.slot + 1) == pr.even_source);
        }
    }
}

TEST_CASE("exact variance is permutation invariant for sequences without two-term relations") {
    const auto seq = gen_power(2, 0, 200);
    const auto poly = TrigPolynomial::parse("cos:1=1,sin:3=1/2");
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        CAPTURE(trial);
        const std::size_t N = 1 + trial * 9;
        CHECK(exact_variance(poly, seq, random_permutation(N, trial), N) ==
              exact_variance(poly, seq, identity_permutation(N), N));
    }
}

TEST_CASE("rational and big integer text round-trip") {
    for (std::uint64_t trial = 0; trial < 200; ++trial) {
        CAPTURE(trial);
        auto r = rng(trial, 5);
        BigInt num = random_bits(r, 1 + r.below(200));
        if (r.below(2)) num = -num;
        const BigInt den = random_bits(r, 1 + r.below(100)) + 1;
        Rational q(num, den);
        q.canonicalize();
        CHECK(parse_rational(to_string(q)) == q);
        CHECK(parse_bigint(to_string(num)) == num);
    }
}

TEST_CASE("runs are deterministic across thread counts") {
    namespace fs = std::filesystem;
    for (const unsigned threads : {1u, 2u, 5u}) {
        CAPTURE(threads);
        const fs::path dir = fs::temp_directory_path() / ("lacunaria_prop_" + std::to_string(threads));
        ExperimentConfig c;
        c.command = "clt";
        c.seq = "pow2";
        c.f = "cos:1,sin:2=1/3";
        c.perm = "random:seed=11";
        c.params = {{"N", "200"}, {"M", "257"}, {"seed", "9"}};
        c.switches = {"samples"};
        c.threads = threads;
        run(c, dir);
        CHECK(verify(dir, 1u).ok);
        CHECK(verify(dir, 3u).ok);
        fs::remove_all(dir);
    }
}
