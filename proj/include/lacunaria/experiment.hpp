#pragma once

// Batch experiments: a serializable configuration, a runner that writes
// result files plus a run.json manifest, and a verifier that replays a run
// directory and compares outputs byte for byte.

#include "lacunaria/error.hpp"
#include "lacunaria/permute.hpp"
#include "lacunaria/seqgen.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace lacunaria {

inline constexpr const char* kVersion = "1.0.0";

/// The configuration does not match the schema of its command.
class ConfigError : public Error {
public:
    using Error::Error;
};

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,
    kExitModule = 3,
    kExitResource = 4,
    kExitIo = 5,
    kExitMismatch = 6,
};

int exit_code_for(const std::exception& e) noexcept;

/// Sequence specs:  pow2 | pow2m1 | power:base=B,offset=O | geometric:q=P/Q,n1=N
///                  | smooth:primes=2+3[,one=0] | rstar:alpha=A,a=S,seed=N[,interval=current]
///                  | file:PATH
/// Permutation specs: identity | random:seed=N | file:PATH
///                  | pairing:a=A,b=B[,first=F,factor=G,blocks=K | schedule=paper,blocks=K][,gap=P/Q]
struct ExperimentConfig {
    std::string command;  ///< seq, dio, perm, var, mix, clt, lil
    std::string seq;
    std::string f;
    std::string perm;
    std::map<std::string, std::string> params;
    std::set<std::string> switches;
    unsigned threads = 1;  ///< never changes an output byte

    std::string to_json() const;
    static ExperimentConfig from_json(const std::string& text);
    /// FNV-1a over the canonical JSON of everything except threads.
    std::uint64_t hash() const;
};

/// Throws ConfigError on unknown commands, parameters or switches, missing
/// required fields and malformed values.
void validate(const ExperimentConfig& config);

IntegerSequence make_sequence(const std::string& spec, std::size_t count);

struct PermutationBuild {
    PermutationWindow permutation;
    std::optional<PairingCertificate> certificate;
};

/// window is used by identity and random; degree feeds the default pairing gap.
PermutationBuild make_permutation(const std::string& spec, const IntegerSequence& seq, std::size_t window,
                                  std::size_t degree);

struct RunResult {
    std::vector<std::string> outputs;  ///< file names relative to the run directory
    double wall_time_seconds = 0;
};

/// Validates, writes outputs into dir (created if needed) and then run.json.
RunResult run(const ExperimentConfig& config, const std::filesystem::path& dir);

struct VerifyResult {
    bool ok = true;
    std::string divergence;  ///< first divergent file and field
};

/// Replays dir/run.json into a scratch directory and compares every output.
VerifyResult verify(const std::filesystem::path& dir, std::optional<unsigned> threads = std::nullopt);

}  // namespace lacunaria
