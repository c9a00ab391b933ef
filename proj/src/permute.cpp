#include "lacunaria/permute.hpp"

#include "lacunaria/error.hpp"
#include "lacunaria/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <unordered_map>

namespace lacunaria {

PermutationWindow::PermutationWindow(std::vector<std::size_t> images) : images_(std::move(images)) {
    const std::size_t n = images_.size();
    std::vector<bool> seen(n + 1, false);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t v = images_[k];
        if (v < 1 || v > n) {
            throw InvalidArgument("permutation image " + std::to_string(v) + " at position " +
                                  std::to_string(k + 1) + " outside 1.." + std::to_string(n));
        }
        if (seen[v]) throw InvalidArgument("permutation repeats image " + std::to_string(v));
        seen[v] = true;
    }
}

PermutationWindow identity_permutation(std::size_t N) {
    if (N < 1) throw InvalidArgument("permutation window needs N >= 1");
    std::vector<std::size_t> images(N);
    std::iota(images.begin(), images.end(), std::size_t{1});
    return PermutationWindow(std::move(images));
}

PermutationWindow random_permutation(std::size_t N, std::uint64_t seed) {
    if (N < 1) throw InvalidArgument("permutation window needs N >= 1");
    std::vector<std::size_t> images(N);
    std::iota(images.begin(), images.end(), std::size_t{1});
    for (std::size_t i = N - 1; i > 0; --i) {
        CounterStream stream(seed, Stream::RandomPermutation, i);
        const std::size_t j = stream.below(i + 1);
        std::swap(images[i], images[j]);
    }
    return PermutationWindow(std::move(images));
}

PermutationWindow compose(const PermutationWindow& outer, const PermutationWindow& inner) {
    if (outer.size() != inner.size()) throw InvalidArgument("cannot compose permutations of different sizes");
    std::vector<std::size_t> images(inner.size());
    for (std::size_t k = 1; k <= inner.size(); ++k) images[k - 1] = outer(inner(k));
    return PermutationWindow(std::move(images));
}

std::size_t cycle_count(const PermutationWindow& perm) {
    std::vector<bool> seen(perm.size() + 1, false);
    std::size_t cycles = 0;
    for (std::size_t start = 1; start <= perm.size(); ++start) {
        if (seen[start]) continue;
        ++cycles;
        for (std::size_t k = start; !seen[k]; k = perm(k)) seen[k] = true;
    }
    return cycles;
}

// ---------------------------------------------------------------------------
// Block schedules
// ---------------------------------------------------------------------------

BlockSchedule BlockSchedule::paper_doubly_exponential(std::size_t blocks) {
    if (blocks < 1 || blocks > 4) {
        throw InvalidArgument("doubly exponential schedule supports 1..4 blocks (2^{2^5} slots is out of reach)");
    }
    BlockSchedule s;
    s.mode = ScheduleMode::PaperDoublyExponential;
    s.factor = 0;
    for (std::size_t m = 1; m <= blocks; ++m) s.lengths.push_back(std::size_t{1} << (std::size_t{1} << m));
    return s;
}

BlockSchedule BlockSchedule::geometric_dominant(std::size_t first, std::size_t factor, std::size_t blocks) {
    if (blocks < 1) throw InvalidArgument("schedule needs at least one block");
    if (factor < 2) throw InvalidArgument("geometric schedule factor must be >= 2");
    BlockSchedule s;
    s.mode = ScheduleMode::GeometricDominant;
    s.factor = factor;
    std::size_t len = first;
    for (std::size_t m = 0; m < blocks; ++m) {
        s.lengths.push_back(len);
        len *= factor;
    }
    s.validate();
    return s;
}

BlockSchedule BlockSchedule::explicit_lengths(std::vector<std::size_t> lengths) {
    BlockSchedule s;
    s.mode = ScheduleMode::GeometricDominant;
    s.factor = 0;
    s.lengths = std::move(lengths);
    s.validate();
    return s;
}

std::size_t BlockSchedule::total_slots() const {
    return std::accumulate(lengths.begin(), lengths.end(), std::size_t{0});
}

void BlockSchedule::validate() const {
    if (lengths.empty()) throw InvalidArgument("schedule has no blocks");
    for (std::size_t m = 0; m < lengths.size(); ++m) {
        if (lengths[m] == 0 || lengths[m] % 2 != 0) {
            throw InvalidArgument("block " + std::to_string(m + 1) + " length " + std::to_string(lengths[m]) +
                                  " is not a positive even number");
        }
    }
    if (mode == ScheduleMode::GeometricDominant && factor >= 4) {
        const std::size_t before = total_slots() - lengths.back();
        if (lengths.back() <= before) {
            throw InvalidArgument("final block does not dominate the preceding blocks");
        }
    }
}

// ---------------------------------------------------------------------------
// Pairing construction
// ---------------------------------------------------------------------------

Rational default_gap_ratio(long a, long b, std::size_t degree) {
    return Rational(2 * std::max(std::labs(a), std::labs(b)) * static_cast<long>(degree));
}

namespace {

struct Candidate {
    BigInt c;
    std::size_t hits;
};

}  // namespace

PairingResult build_pairing_counterexample(const IntegerSequence& seq, long a, long b,
                                           const BlockSchedule& schedule, const Rational& gap_ratio,
                                           const PairingOptions& options) {
    if (a < 1 || b < 1) throw InvalidArgument("pairing construction needs positive a and b");
    schedule.validate();
    const Rational min_gap(2 * std::max(a, b));
    if (gap_ratio < min_gap) {
        throw InvalidArgument("spacing unsatisfiable: gap ratio " + to_string(gap_ratio) + " is below 2 max(a,b) = " +
                              to_string(min_gap));
    }

    const auto values = seq.prefix(seq.size());
    const std::size_t L = values.size();
    std::unordered_map<BigInt, std::size_t, BigIntHash> index_of;
    index_of.reserve(2 * L);
    for (std::size_t i = 0; i < L; ++i) index_of.emplace(values[i], i + 1);

    // Right-hand sides realized by near neighbours: for each l, the k whose
    // a n_k lies closest to b n_l.
    std::unordered_map<BigInt, std::size_t, BigIntHash> hits;
    {
        std::vector<BigInt> scaled(L);
        for (std::size_t i = 0; i < L; ++i) scaled[i] = a * values[i];
        BigInt target;
        for (std::size_t l = 1; l <= L; ++l) {
            target = b * values[l - 1];
            const auto pos = static_cast<std::size_t>(
                std::lower_bound(scaled.begin(), scaled.end(), target) - scaled.begin());
            const std::size_t lo = pos > options.discovery_radius ? pos - options.discovery_radius : 0;
            const std::size_t hi = std::min(L, pos + options.discovery_radius + 1);
            for (std::size_t i = lo; i < hi; ++i) {
                const std::size_t k = i + 1;
                if (k <= l) continue;
                BigInt c = scaled[i] - target;
                if (options.nonzero_c_only && sgn(c) == 0) continue;
                ++hits[c];
            }
        }
    }
    std::vector<Candidate> candidates;
    candidates.reserve(hits.size());
    for (auto& [c, n] : hits) candidates.push_back({c, n});
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
        if (x.hits != y.hits) return x.hits > y.hits;
        const int by_abs = mpz_cmpabs(x.c.get_mpz_t(), y.c.get_mpz_t());
        if (by_abs != 0) return by_abs < 0;
        return x.c < y.c;
    });

    PairingCertificate cert;
    cert.a = a;
    cert.b = b;
    cert.gap_ratio = gap_ratio;
    cert.experimental = (a == b);

    std::size_t last_used = 0;
    std::optional<BigInt> last_even_value;
    BigInt rhs, k_value, rem, spacing_floor;
    const BigInt a_big(a);

    // Greedy selection of up to `needed` spaced pairs for right-hand side c,
    // starting after the current state. Returns the selected (l, k) pairs.
    auto select = [&](const BigInt& c, std::size_t needed) {
        std::vector<std::pair<std::size_t, std::size_t>> chosen;
        std::size_t used = last_used;
        std::optional<BigInt> prev = last_even_value;
        for (std::size_t l = used + 1; l <= L && chosen.size() < needed; ++l) {
            if (l <= used) continue;
            if (prev) {
                spacing_floor = gap_ratio.get_num() * *prev;
                if (values[l - 1] * gap_ratio.get_den() < spacing_floor) continue;
            }
            rhs = c + b * values[l - 1];
            mpz_tdiv_qr(k_value.get_mpz_t(), rem.get_mpz_t(), rhs.get_mpz_t(), a_big.get_mpz_t());
            if (rem != 0) continue;
            const auto it = index_of.find(k_value);
            if (it == index_of.end() || it->second <= l) continue;
            chosen.emplace_back(l, it->second);
            used = it->second;
            prev = values[it->second - 1];
            l = used;
        }
        return chosen;
    };

    constexpr std::size_t kMaxCandidatesTried = 64;
    for (std::size_t m = 0; m < schedule.lengths.size(); ++m) {
        const std::size_t needed = schedule.lengths[m] / 2;
        std::size_t best = 0;
        bool filled = false;
        for (std::size_t ci = 0; ci < candidates.size() && ci < kMaxCandidatesTried; ++ci) {
            auto chosen = select(candidates[ci].c, needed);
            best = std::max(best, chosen.size());
            if (chosen.size() < needed) continue;
            cert.blocks.push_back({schedule.lengths[m], candidates[ci].c});
            for (const auto& [l, k] : chosen) {
                cert.pairs.push_back({2 * cert.pairs.size() + 1, l, k, m});
            }
            last_used = chosen.back().second;
            last_even_value = values[last_used - 1];
            filled = true;
            break;
        }
        if (!filled) {
            throw InvalidArgument("insufficient witnesses: block " + std::to_string(m + 1) + " needs " +
                                  std::to_string(needed) + " disjoint spaced pairs, best right-hand side gives " +
                                  std::to_string(best) + " (deficit " + std::to_string(needed - best) + ")");
        }
    }

    // Certified slots first, then unused indices up to the largest used one.
    const std::size_t window = last_used;
    std::vector<std::size_t> images;
    images.reserve(window);
    std::vector<bool> used(window + 1, false);
    for (const auto& p : cert.pairs) {
        images.push_back(p.odd_source);
        images.push_back(p.even_source);
        used[p.odd_source] = used[p.even_source] = true;
    }
    for (std::size_t i = 1; i <= window; ++i) {
        if (!used[i]) images.push_back(i);
    }
    return {PermutationWindow(std::move(images)), std::move(cert)};
}

CertificateCheck verify_certificate(const PermutationWindow& perm, const IntegerSequence& seq,
                                    const PairingCertificate& cert) {
    auto fail = [](std::string msg, std::optional<std::size_t> slot = std::nullopt) {
        return CertificateCheck{false, std::move(msg), slot};
    };
    if (cert.a == 0 || cert.b == 0) return fail("coefficients must be nonzero");
    std::size_t block_slots = 0;
    for (const auto& blk : cert.blocks) {
        if (blk.length == 0 || blk.length % 2 != 0) return fail("block length must be positive and even");
        block_slots += blk.length;
    }
    if (block_slots != cert.certified_slots()) {
        return fail("blocks cover " + std::to_string(block_slots) + " slots but " +
                    std::to_string(cert.certified_slots()) + " are certified");
    }
    if (cert.certified_slots() > perm.size()) return fail("certificate exceeds the permutation window");

    std::size_t block = 0;
    std::size_t block_end = cert.blocks.empty() ? 0 : cert.blocks[0].length;
    BigInt lhs, spacing_floor;
    for (std::size_t j = 0; j < cert.pairs.size(); ++j) {
        const auto& p = cert.pairs[j];
        const std::size_t expected_slot = 2 * j + 1;
        if (p.slot != expected_slot) {
            return fail("pair " + std::to_string(j + 1) + " is recorded at slot " + std::to_string(p.slot) +
                            ", expected " + std::to_string(expected_slot),
                        p.slot);
        }
        while (p.slot > block_end) {
            ++block;
            block_end += cert.blocks[block].length;
        }
        if (p.block != block) return fail("slot " + std::to_string(p.slot) + " assigned to the wrong block", p.slot);
        if (perm(p.slot) != p.odd_source) {
            return fail("slot " + std::to_string(p.slot) + ": image " + std::to_string(perm(p.slot)) +
                            " differs from certified source " + std::to_string(p.odd_source),
                        p.slot);
        }
        if (perm(p.slot + 1) != p.even_source) {
            return fail("slot " + std::to_string(p.slot + 1) + ": image " + std::to_string(perm(p.slot + 1)) +
                            " differs from certified source " + std::to_string(p.even_source),
                        p.slot + 1);
        }
        if (p.even_source > seq.size() || p.odd_source > seq.size()) {
            return fail("slot " + std::to_string(p.slot) + " refers past the end of the sequence", p.slot);
        }
        if (p.even_source <= p.odd_source) {
            return fail("slot " + std::to_string(p.slot) + ": images not increasing within the pair", p.slot);
        }
        const BigInt n_odd = seq.term(p.odd_source);
        lhs = cert.a * seq.term(p.even_source) - cert.b * n_odd;
        if (lhs != cert.blocks[block].c) {
            return fail("slot " + std::to_string(p.slot) + ": a n_even - b n_odd = " + to_string(lhs) +
                            " but block constant is " + to_string(cert.blocks[block].c),
                        p.slot);
        }
        if (j > 0) {
            const auto& prev = cert.pairs[j - 1];
            if (p.odd_source <= prev.even_source) {
                return fail("slot " + std::to_string(p.slot) + ": images not increasing across pairs", p.slot);
            }
            spacing_floor = cert.gap_ratio.get_num() * seq.term(prev.even_source);
            if (n_odd * cert.gap_ratio.get_den() < spacing_floor) {
                return fail("slot " + std::to_string(p.slot) + ": value ratio to previous pair below gap ratio " +
                                to_string(cert.gap_ratio),
                            p.slot);
            }
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

void write_permutation(std::ostream& out, const PermutationWindow& perm) {
    out << "# lacunaria-perm v1\n";
    for (const std::size_t v : perm.images()) out << v << '\n';
}

PermutationWindow read_permutation(std::istream& in, const std::string& source_name) {
    std::vector<std::size_t> images;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        try {
            std::size_t used = 0;
            const unsigned long long v = std::stoull(line, &used);
            if (used != line.size()) throw std::invalid_argument("trailing characters");
            images.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw FormatError(source_name + ":" + std::to_string(line_no) + ": not a permutation image");
        }
    }
    try {
        return PermutationWindow(std::move(images));
    } catch (const InvalidArgument& e) {
        throw FormatError(source_name + ": " + e.what());
    }
}

void write_permutation_file(const std::string& path, const PermutationWindow& perm) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_permutation(out, perm);
}

PermutationWindow read_permutation_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open permutation file '" + path + "'");
    return read_permutation(in, path);
}

std::string certificate_to_json(const PairingCertificate& cert) {
    nlohmann::json j;
    j["a"] = cert.a;
    j["b"] = cert.b;
    j["gap_ratio"] = to_string(cert.gap_ratio);
    j["experimental"] = cert.experimental;
    j["blocks"] = nlohmann::json::array();
    for (const auto& blk : cert.blocks) j["blocks"].push_back({{"length", blk.length}, {"c", to_string(blk.c)}});
    j["pairs"] = nlohmann::json::array();
    for (const auto& p : cert.pairs) {
        j["pairs"].push_back({{"slot", p.slot}, {"odd", p.odd_source}, {"even", p.even_source}, {"block", p.block}});
    }
    return j.dump(1);
}

PairingCertificate certificate_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        PairingCertificate cert;
        cert.a = j.at("a").get<long>();
        cert.b = j.at("b").get<long>();
        cert.gap_ratio = parse_rational(j.at("gap_ratio").get<std::string>());
        cert.experimental = j.value("experimental", false);
        for (const auto& blk : j.at("blocks")) {
            cert.blocks.push_back({blk.at("length").get<std::size_t>(), parse_bigint(blk.at("c").get<std::string>())});
        }
        for (const auto& p : j.at("pairs")) {
            cert.pairs.push_back({p.at("slot").get<std::size_t>(), p.at("odd").get<std::size_t>(),
                                  p.at("even").get<std::size_t>(), p.at("block").get<std::size_t>()});
        }
        return cert;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed certificate JSON: ") + e.what());
    }
}

}  // namespace lacunaria
