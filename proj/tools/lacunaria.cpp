// lacunaria: batch driver for sequence, Diophantine, variance and Monte Carlo experiments.

#include "lacunaria/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

using lacunaria::ConfigError;
using lacunaria::ExperimentConfig;

struct Shared {
    std::string seq;
    std::string f;
    std::string perm;
    std::string out = "run";
    unsigned threads = 1;
    std::vector<std::string> kv;
};

std::map<std::string, std::string> parse_kv(const std::vector<std::string>& items) {
    std::map<std::string, std::string> out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("expected key=value, got '" + item + "'");
        out[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return out;
}

/// Moves generator parameters out of the positional list into a sequence spec.
std::string generator_spec(const std::string& kind, std::map<std::string, std::string>& params,
                           const std::vector<std::string>& keys) {
    std::string spec = kind;
    char sep = ':';
    for (const auto& k : keys) {
        const auto it = params.find(k);
        if (it == params.end()) continue;
        spec += sep + k + "=" + it->second;
        sep = ',';
        params.erase(it);
    }
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lacunary series experiments: sequences, Diophantine counts, variances, limit laws"};
    app.set_version_flag("--version", std::string(lacunaria::kVersion));
    app.require_subcommand(1);
    app.allow_windows_style_options(false);

    Shared sh;
    std::map<std::string, bool> sw;
    std::string seq_kind;
    std::string verify_dir;

    auto add_shared = [&](CLI::App* sub, bool with_f, bool with_perm) {
        sub->add_option("--seq", sh.seq, "pow2 | pow2m1 | power:... | geometric:... | smooth:... | rstar:... | file:PATH");
        if (with_f) sub->add_option("--f", sh.f, "trigonometric polynomial, e.g. cos:1=1,cos:2=1/2");
        if (with_perm) sub->add_option("--perm", sh.perm, "identity | random:seed=N | pairing:a=1,b=2,... | file:PATH");
        sub->add_option("--out", sh.out, "run directory")->capture_default_str();
        sub->add_option("--threads", sh.threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("params", sh.kv, "key=value parameters");
    };
    auto add_switch = [&](CLI::App* sub, const std::string& name, const std::string& help) {
        sub->add_flag_callback("--" + name, [&sw, name] { sw[name] = true; }, help);
    };

    auto* seq = app.add_subcommand("seq", "generate a sequence file (N=count)");
    add_shared(seq, false, false);
    for (const char* kind : {"geometric", "power", "smooth", "rstar"}) {
        seq->add_flag_callback(std::string("--") + kind, [&seq_kind, kind] { seq_kind = kind; },
                               std::string("generator ") + kind + " with its key=value parameters");
    }

    auto* dio = app.add_subcommand("dio", "two-term and multi-term Diophantine counts");
    add_shared(dio, false, false);
    add_switch(dio, "profile", "D2 profile over 0 < |a|,|b| <= d");
    add_switch(dio, "star", "with --profile: include c = 0 (D2*)");
    add_switch(dio, "strict-diagonal", "with --star: literal diagonal rule");
    add_switch(dio, "histogram", "with --profile: include full c histograms");
    add_switch(dio, "multi", "p-term relations (p=, bound=)");
    add_switch(dio, "signed", "with --multi: coefficients +-1 only");
    add_switch(dio, "nondegenerate", "with --multi: no vanishing subsums");
    add_switch(dio, "distinct", "two-term count with k != l");

    auto* perm = app.add_subcommand("perm", "materialize a permutation (and pairing certificate)");
    add_shared(perm, true, true);
    auto* var = app.add_subcommand("var", "exact variance of the permuted sum");
    add_shared(var, true, true);
    auto* mix = app.add_subcommand("mix", "mixture variance profile of a pairing permutation");
    add_shared(mix, true, true);
    auto* clt = app.add_subcommand("clt", "Monte Carlo distribution of S_N / sqrt(N)");
    add_shared(clt, true, true);
    add_switch(clt, "samples", "also write samples.csv");
    auto* lil = app.add_subcommand("lil", "running LIL ratios at sampled points");
    add_shared(lil, true, true);

    auto* ver = app.add_subcommand("verify", "replay a run directory and compare outputs");
    ver->add_option("dir", verify_dir, "run directory containing run.json")->required();
    std::optional<unsigned> verify_threads;
    ver->add_option("--threads", verify_threads, "override the recorded thread count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : lacunaria::kExitUsage;
    }

    try {
        if (ver->parsed()) {
            const auto r = lacunaria::verify(verify_dir, verify_threads);
            if (!r.ok) {
                std::cerr << "verify: mismatch at " << r.divergence << "\n";
                return lacunaria::kExitMismatch;
            }
            std::cout << "verify: ok\n";
            return lacunaria::kExitOk;
        }

        ExperimentConfig config;
        config.command = app.get_subcommands().front()->get_name();
        config.params = parse_kv(sh.kv);
        config.f = sh.f;
        config.perm = sh.perm;
        config.threads = sh.threads;
        config.seq = sh.seq;
        if (!seq_kind.empty()) {
            if (!sh.seq.empty()) throw ConfigError("give either --seq or a generator flag, not both");
            static const std::map<std::string, std::vector<std::string>> keys = {
                {"geometric", {"q", "n1"}},
                {"power", {"base", "offset"}},
                {"smooth", {"primes", "one"}},
                {"rstar", {"alpha", "a", "seed", "interval"}},
            };
            config.seq = generator_spec(seq_kind, config.params, keys.at(seq_kind));
        }
        for (const auto& [name, on] : sw) {
            if (on) config.switches.insert(name);
        }

        const auto result = lacunaria::run(config, sh.out);
        for (const auto& name : result.outputs) std::cout << sh.out << "/" << name << "\n";
        std::cout << sh.out << "/run.json\n";
        return lacunaria::kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "lacunaria: " << e.what() << "\n";
        return lacunaria::exit_code_for(e);
    }
}
