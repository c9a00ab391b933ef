#pragma once

// Permutations of finite index windows {1..N} and the pairing construction
// that places Diophantine witness pairs a n_{s(2k)} - b n_{s(2k-1)} = c_m in
// consecutive slots.

#include "lacunaria/bigint.hpp"
#include "lacunaria/seqgen.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lacunaria {

/// A bijection s of {1..N}; images are 1-based.
class PermutationWindow {
public:
    /// Throws InvalidArgument unless images is a permutation of 1..size.
    explicit PermutationWindow(std::vector<std::size_t> images);

    std::size_t size() const noexcept { return images_.size(); }
    /// s(k), 1 <= k <= size().
    std::size_t operator()(std::size_t k) const { return images_.at(k - 1); }
    const std::vector<std::size_t>& images() const noexcept { return images_; }

    friend bool operator==(const PermutationWindow&, const PermutationWindow&) = default;

private:
    std::vector<std::size_t> images_;
};

PermutationWindow identity_permutation(std::size_t N);

/// Fisher-Yates shuffle driven by the counter stream (seed, step).
PermutationWindow random_permutation(std::size_t N, std::uint64_t seed);

/// (outer o inner)(k) = outer(inner(k)); sizes must match.
PermutationWindow compose(const PermutationWindow& outer, const PermutationWindow& inner);

std::size_t cycle_count(const PermutationWindow& perm);

enum class ScheduleMode { PaperDoublyExponential, GeometricDominant };

/// Lengths (in slots) of consecutive blocks D_1, D_2, ...
struct BlockSchedule {
    std::vector<std::size_t> lengths;
    ScheduleMode mode = ScheduleMode::GeometricDominant;
    std::size_t factor = 4;

    /// |D_m| = 2^{2^m}, m = 1..blocks, blocks <= 4.
    static BlockSchedule paper_doubly_exponential(std::size_t blocks);
    /// |D_m| = first * factor^{m-1}; first even, factor >= 2.
    static BlockSchedule geometric_dominant(std::size_t first, std::size_t factor, std::size_t blocks);
    /// Explicit lengths (mode GeometricDominant, factor 0: dominance unchecked).
    static BlockSchedule explicit_lengths(std::vector<std::size_t> lengths);

    std::size_t total_slots() const;
    std::size_t total_pairs() const { return total_slots() / 2; }
    /// Throws InvalidArgument on odd/zero lengths or failed dominance.
    void validate() const;
};

struct CertifiedPair {
    std::size_t slot;  ///< odd slot 2k-1; the even slot is slot + 1
    std::size_t odd_source;  ///< s(2k-1), coefficient b
    std::size_t even_source;  ///< s(2k), coefficient a
    std::size_t block;  ///< 0-based block number
};

struct CertifiedBlock {
    std::size_t length;  ///< slots
    BigInt c;
};

struct PairingCertificate {
    long a = 1;
    long b = 2;
    Rational gap_ratio;
    std::vector<CertifiedBlock> blocks;
    std::vector<CertifiedPair> pairs;
    bool experimental = false;  ///< a == b

    std::size_t certified_slots() const { return 2 * pairs.size(); }
};

struct PairingResult {
    PermutationWindow permutation;
    PairingCertificate certificate;
};

/// Default separation 2 max(|a|,|b|) d for a polynomial of degree d.
Rational default_gap_ratio(long a, long b, std::size_t degree);

struct PairingOptions {
    bool nonzero_c_only = true;
    /// Number of neighbouring candidates examined around b n_l / a when
    /// discovering right-hand sides.
    std::size_t discovery_radius = 2;
};

/// Greedy left-to-right construction. Throws InvalidArgument naming the
/// deficit when some block cannot be filled.
PairingResult build_pairing_counterexample(const IntegerSequence& seq, long a, long b,
                                           const BlockSchedule& schedule, const Rational& gap_ratio,
                                           const PairingOptions& options = {});

struct CertificateCheck {
    bool ok = true;
    std::string violation;  ///< first violation, empty when ok
    std::optional<std::size_t> slot;  ///< offending slot, when one applies
};

CertificateCheck verify_certificate(const PermutationWindow& perm, const IntegerSequence& seq,
                                    const PairingCertificate& cert);

// "# lacunaria-perm v1" followed by one image per line.
void write_permutation(std::ostream& out, const PermutationWindow& perm);
PermutationWindow read_permutation(std::istream& in, const std::string& source_name = "<stream>");
void write_permutation_file(const std::string& path, const PermutationWindow& perm);
PermutationWindow read_permutation_file(const std::string& path);

std::string certificate_to_json(const PairingCertificate& cert);
PairingCertificate certificate_from_json(const std::string& text);

}  // namespace lacunaria
