#include "lacunaria/error.hpp"
#include "lacunaria/permute.hpp"

#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <numeric>
#include <set>
#include <sstream>

using namespace lacunaria;

namespace {

bool is_bijection(const PermutationWindow& p) {
    const auto& im = p.images();
    const std::set<std::size_t> distinct(im.begin(), im.end());
    const std::size_t n = im.size();
    return distinct.size() == n && *distinct.begin() == 1 && *distinct.rbegin() == n &&
           std::accumulate(im.begin(), im.end(), std::size_t{0}) == n * (n + 1) / 2;
}

}  // namespace

TEST_CASE("identity permutation") {
    CHECK(identity_permutation(3).images() == std::vector<std::size_t>{1, 2, 3});
    CHECK(identity_permutation(1).images() == std::vector<std::size_t>{1});
    const auto s = random_permutation(40, 9);
    CHECK(compose(identity_permutation(40), s) == s);
    CHECK(compose(s, identity_permutation(40)) == s);
    CHECK_THROWS_AS(identity_permutation(0), InvalidArgument);
}

TEST_CASE("PermutationWindow validates bijectivity") {
    CHECK_THROWS_AS(PermutationWindow({1, 1, 3}), InvalidArgument);
    CHECK_THROWS_AS(PermutationWindow({0, 1, 2}), InvalidArgument);
    CHECK_THROWS_AS(PermutationWindow({1, 2, 4}), InvalidArgument);
    CHECK_THROWS_AS(compose(identity_permutation(3), identity_permutation(4)), InvalidArgument);
}

TEST_CASE("random permutations are deterministic bijections") {
    CHECK(random_permutation(100, 42) == random_permutation(100, 42));
    CHECK(random_permutation(100, 42) != random_permutation(100, 43));
    for (std::uint64_t seed = 0; seed < 20; ++seed) CHECK(is_bijection(random_permutation(52, seed)));
}

TEST_CASE("cycle counts of random permutations average to H_N") {
    const std::size_t N = 52, seeds = 10000;
    double sum = 0;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) sum += static_cast<double>(cycle_count(random_permutation(N, seed)));
    double h2 = 0;
    for (std::size_t k = 1; k <= N; ++k) h2 += 1.0 / static_cast<double>(k * k);
    const double se = std::sqrt((oracle::harmonic(N) - h2) / static_cast<double>(seeds));
    CHECK(std::fabs(sum / seeds - oracle::harmonic(N)) < 4 * se);
    CHECK(cycle_count(identity_permutation(7)) == 7);
}

TEST_CASE("block schedules") {
    const auto paper = BlockSchedule::paper_doubly_exponential(3);
    CHECK(paper.lengths == std::vector<std::size_t>{4, 16, 256});
    CHECK_THROWS_AS(BlockSchedule::paper_doubly_exponential(5), InvalidArgument);
    const auto g = BlockSchedule::geometric_dominant(4, 4, 6);
    CHECK(g.lengths.back() == 4096);
    CHECK(g.lengths.back() > g.total_slots() - g.lengths.back());
    CHECK(g.total_pairs() == 2730);
    CHECK_THROWS_AS(BlockSchedule::geometric_dominant(3, 4, 2), InvalidArgument);
    CHECK_THROWS_AS(BlockSchedule::explicit_lengths({2, 3}), InvalidArgument);
    BlockSchedule weak;
    weak.lengths = {8, 8};
    weak.factor = 4;
    CHECK_THROWS_AS(weak.validate(), InvalidArgument);
}

TEST_CASE("pairing on 2^k - 1 uses the identity n_{l+1} - 2 n_l = 1") {
    const auto seq = gen_power(2, -1, 40);
    const auto r = build_pairing_counterexample(seq, 1, 2, BlockSchedule::explicit_lengths({2, 4}),
                                                default_gap_ratio(1, 2, 2));
    const auto& cert = r.certificate;
    REQUIRE(cert.pairs.size() == 3);
    CHECK(cert.pairs[0].odd_source == 1);
    CHECK(cert.pairs[0].even_source == 2);
    CHECK(cert.pairs[1].odd_source == 5);
    CHECK(cert.pairs[1].even_source == 6);
    CHECK(cert.pairs[2].odd_source == 9);
    CHECK(cert.pairs[2].even_source == 10);
    for (const auto& b : cert.blocks) CHECK(b.c == 1);
    CHECK_FALSE(cert.experimental);
    CHECK(verify_certificate(r.permutation, seq, cert).ok);
    CHECK(is_bijection(r.permutation));
    // Unused indices follow the certified slots in increasing order.
    const auto& im = r.permutation.images();
    CHECK(std::is_sorted(im.begin() + 6, im.end()));
}

TEST_CASE("pairing on 2^k with nonzero c runs out of witnesses") {
    const auto seq = gen_power(2, 0, 60);
    try {
        build_pairing_counterexample(seq, 1, 2, BlockSchedule::explicit_lengths({4, 8}), Rational(4));
        FAIL("expected an error");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("insufficient witnesses") != std::string::npos);
        CHECK(std::string(e.what()).find("deficit") != std::string::npos);
    }
}

TEST_CASE("smallest schedule places one pair") {
    const auto seq = gen_power(2, -1, 10);
    const auto r = build_pairing_counterexample(seq, 1, 2, BlockSchedule::explicit_lengths({2}), Rational(4));
    REQUIRE(r.certificate.pairs.size() == 1);
    CHECK(r.permutation(1) == r.certificate.pairs[0].odd_source);
    CHECK(r.permutation(2) == r.certificate.pairs[0].even_source);
    CHECK(seq.term(r.permutation(2)) - 2 * seq.term(r.permutation(1)) == 1);
}

TEST_CASE("pairing rejects unsatisfiable spacing and bad coefficients") {
    const auto seq = gen_power(2, -1, 20);
    CHECK_THROWS_AS(build_pairing_counterexample(seq, 1, 2, BlockSchedule::explicit_lengths({2}), Rational(3)),
                    InvalidArgument);
    CHECK_THROWS_AS(build_pairing_counterexample(seq, 0, 2, BlockSchedule::explicit_lengths({2}), Rational(8)),
                    InvalidArgument);
    const auto eq = build_pairing_counterexample(gen_power(3, 0, 30), 1, 1, BlockSchedule::explicit_lengths({2}),
                                                 Rational(4));
    CHECK(eq.certificate.experimental);
}

TEST_CASE("verify_certificate catches mutations") {
    const auto seq = gen_power(2, -1, 200);
    const auto r = build_pairing_counterexample(seq, 1, 2, BlockSchedule::geometric_dominant(2, 4, 3),
                                                default_gap_ratio(1, 2, 2));
    REQUIRE(verify_certificate(r.permutation, seq, r.certificate).ok);

    auto images = r.permutation.images();
    std::swap(images[2], images[3]);
    const auto swapped = verify_certificate(PermutationWindow(images), seq, r.certificate);
    CHECK_FALSE(swapped.ok);
    REQUIRE(swapped.slot.has_value());
    CHECK(*swapped.slot == 3);
    CHECK(swapped.violation.find("slot 3") != std::string::npos);

    auto off = r.certificate;
    off.blocks[0].c += 1;
    CHECK_FALSE(verify_certificate(r.permutation, seq, off).ok);

    auto tight = r.certificate;
    tight.gap_ratio = 1000;
    CHECK_FALSE(verify_certificate(r.permutation, seq, tight).ok);
}

TEST_CASE("certified pairs never reuse an index") {
    const auto seq = gen_power(2, -1, 3000);
    const auto r = build_pairing_counterexample(seq, 1, 2, BlockSchedule::geometric_dominant(4, 4, 4),
                                                default_gap_ratio(1, 2, 2));
    std::set<std::size_t> used;
    for (const auto& p : r.certificate.pairs) {
        CHECK(used.insert(p.odd_source).second);
        CHECK(used.insert(p.even_source).second);
    }
}

TEST_CASE("permutation files and certificate JSON round-trip") {
    const auto p = random_permutation(30, 5);
    std::stringstream buf;
    write_permutation(buf, p);
    CHECK(buf.str().rfind("# lacunaria-perm v1\n", 0) == 0);
    CHECK(read_permutation(buf) == p);
    std::istringstream bad("# lacunaria-perm v1\n1\n1\n");
    CHECK_THROWS_AS(read_permutation(bad), FormatError);
    std::istringstream junk("1\nx\n");
    CHECK_THROWS_AS(read_permutation(junk), FormatError);

    const auto seq = gen_power(2, -1, 40);
    const auto r = build_pairing_counterexample(seq, 1, 2, BlockSchedule::explicit_lengths({2, 4}), Rational(8));
    const auto back = certificate_from_json(certificate_to_json(r.certificate));
    CHECK(certificate_to_json(back) == certificate_to_json(r.certificate));
    CHECK(verify_certificate(r.permutation, seq, back).ok);
    CHECK_THROWS_AS(certificate_from_json("{"), FormatError);
}
