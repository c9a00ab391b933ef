#include "lacunaria/experiment.hpp"

#include "lacunaria/diophantine.hpp"
#include "lacunaria/simulate.hpp"
#include "lacunaria/spectra.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include <unistd.h>

namespace lacunaria {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

int exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const ConfigError*>(&e)) return kExitUsage;
    if (dynamic_cast<const ResourceLimit*>(&e)) return kExitResource;
    if (dynamic_cast<const IoError*>(&e)) return kExitIo;
    return kExitModule;
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

namespace {

ojson hashed_part(const ExperimentConfig& c) {
    ojson j;
    j["command"] = c.command;
    j["seq"] = c.seq;
    j["f"] = c.f;
    j["perm"] = c.perm;
    j["params"] = ojson::object();
    for (const auto& [k, v] : c.params) j["params"][k] = v;
    j["switches"] = ojson::array();
    for (const auto& s : c.switches) j["switches"].push_back(s);
    return j;
}

struct CommandSchema {
    std::set<std::string> params;
    std::set<std::string> switches;
    bool needs_f = false;
};

const std::map<std::string, CommandSchema>& schemas() {
    static const std::map<std::string, CommandSchema> table = {
        {"seq", {{"N"}, {}, false}},
        {"dio",
         {{"N", "terms", "d", "a", "b", "c", "p", "bound", "budget"},
          {"profile", "star", "multi", "signed", "nondegenerate", "distinct", "strict-diagonal", "histogram"},
          false}},
        {"perm", {{"N", "terms"}, {}, false}},
        {"var", {{"N", "terms"}, {}, true}},
        {"mix", {{"s", "cutoff", "terms"}, {}, true}},
        {"clt", {{"N", "M", "seed", "B", "alpha", "s", "target", "terms"}, {"samples"}, true}},
        {"lil", {{"Nmax", "points", "seed", "gamma2", "terms"}, {}, true}},
    };
    return table;
}

std::size_t to_size(const std::string& key, const std::string& text) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ConfigError("parameter " + key + ": expected a nonnegative integer, got '" + text + "'");
    }
    return v;
}

long to_long(const std::string& key, const std::string& text) {
    long v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ConfigError("parameter " + key + ": expected an integer, got '" + text + "'");
    }
    return v;
}

double to_double(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("parameter " + key + ": expected a number, got '" + text + "'");
}

Rational to_rational(const std::string& key, const std::string& text) {
    try {
        return parse_rational(text);
    } catch (const FormatError&) {
        throw ConfigError("parameter " + key + ": expected p/q, got '" + text + "'");
    }
}

std::vector<double> to_double_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, '+')) out.push_back(to_double(key, item));
    if (out.empty()) throw ConfigError("parameter " + key + " is empty");
    return out;
}

class Params {
public:
    explicit Params(const std::map<std::string, std::string>& m) : m_(m) {}
    bool has(const std::string& k) const { return m_.count(k) != 0; }
    const std::string& raw(const std::string& k) const {
        const auto it = m_.find(k);
        if (it == m_.end()) throw ConfigError("missing required parameter " + k);
        return it->second;
    }
    std::size_t size(const std::string& k) const { return to_size(k, raw(k)); }
    std::size_t size(const std::string& k, std::size_t dflt) const { return has(k) ? size(k) : dflt; }
    long integer(const std::string& k, long dflt) const { return has(k) ? to_long(k, raw(k)) : dflt; }
    double real(const std::string& k, double dflt) const { return has(k) ? to_double(k, raw(k)) : dflt; }
    std::string text(const std::string& k, const std::string& dflt) const { return has(k) ? raw(k) : dflt; }

private:
    const std::map<std::string, std::string>& m_;
};

struct Spec {
    std::string kind;
    std::map<std::string, std::string> args;
};

Spec parse_spec(const std::string& text, const char* what) {
    Spec s;
    const auto colon = text.find(':');
    s.kind = text.substr(0, colon);
    if (colon == std::string::npos) return s;
    const std::string rest = text.substr(colon + 1);
    if (s.kind == "file") {
        s.args["path"] = rest;
        return s;
    }
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError(std::string(what) + " spec '" + text + "': expected key=value, got '" + item + "'");
        }
        s.args[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return s;
}

void check_keys(const Spec& s, const std::set<std::string>& allowed, const std::string& text) {
    for (const auto& [k, v] : s.args) {
        if (!allowed.count(k)) throw ConfigError("spec '" + text + "': unknown key '" + k + "'");
    }
}

}  // namespace

std::string ExperimentConfig::to_json() const {
    ojson j = hashed_part(*this);
    j["threads"] = threads;
    return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    try {
        const auto j = ojson::parse(text);
        ExperimentConfig c;
        c.command = j.at("command").get<std::string>();
        c.seq = j.value("seq", "");
        c.f = j.value("f", "");
        c.perm = j.value("perm", "");
        if (j.contains("params")) {
            for (const auto& [k, v] : j.at("params").items()) c.params[k] = v.get<std::string>();
        }
        if (j.contains("switches")) {
            for (const auto& s : j.at("switches")) c.switches.insert(s.get<std::string>());
        }
        c.threads = j.value("threads", 1u);
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed experiment config: ") + e.what());
    }
}

std::uint64_t ExperimentConfig::hash() const {
    const std::string text = hashed_part(*this).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void validate(const ExperimentConfig& config) {
    const auto it = schemas().find(config.command);
    if (it == schemas().end()) throw ConfigError("unknown command '" + config.command + "'");
    const CommandSchema& schema = it->second;
    for (const auto& [k, v] : config.params) {
        if (!schema.params.count(k)) throw ConfigError("command " + config.command + " takes no parameter '" + k + "'");
    }
    for (const auto& s : config.switches) {
        if (!schema.switches.count(s)) throw ConfigError("command " + config.command + " takes no flag --" + s);
    }
    if (config.seq.empty()) throw ConfigError("command " + config.command + " needs --seq");
    if (schema.needs_f && config.f.empty()) throw ConfigError("command " + config.command + " needs --f");
    if (config.command == "mix" && config.perm.rfind("pairing", 0) != 0) {
        throw ConfigError("mix needs --perm pairing:...");
    }
    if (config.threads < 1) throw ConfigError("--threads must be at least 1");
    if (!config.f.empty()) {
        try {
            TrigPolynomial::parse(config.f);
        } catch (const Error& e) {
            throw ConfigError(std::string("--f: ") + e.what());
        }
    }
}

// ---------------------------------------------------------------------------
// Sequence and permutation specs
// ---------------------------------------------------------------------------

IntegerSequence make_sequence(const std::string& spec, std::size_t count) {
    const Spec s = parse_spec(spec, "sequence");
    const Params p(s.args);
    if (s.kind == "pow2" || s.kind == "pow2m1") {
        check_keys(s, {}, spec);
        return gen_power(2, s.kind == "pow2" ? 0 : -1, count);
    }
    if (s.kind == "power") {
        check_keys(s, {"base", "offset"}, spec);
        return gen_power(static_cast<unsigned long>(p.size("base", 2)), static_cast<int>(p.integer("offset", 0)), count);
    }
    if (s.kind == "geometric") {
        check_keys(s, {"q", "n1"}, spec);
        return gen_geometric(to_rational("q", p.raw("q")), parse_bigint(p.text("n1", "1")), count);
    }
    if (s.kind == "smooth") {
        check_keys(s, {"primes", "one"}, spec);
        std::vector<BigInt> gens;
        std::stringstream ss(p.raw("primes"));
        std::string item;
        while (std::getline(ss, item, '+')) gens.push_back(parse_bigint(item));
        return gen_smooth(gens, count, p.integer("one", 1) != 0);
    }
    if (s.kind == "rstar") {
        check_keys(s, {"alpha", "a", "seed", "interval"}, spec);
        RStarParams r;
        r.alpha = p.real("alpha", 1.0);
        r.scale = p.size("a", 50);
        r.seed = p.size("seed", 0);
        r.count = count;
        const std::string iv = p.text("interval", "previous");
        if (iv == "current") {
            r.interval = RStarInterval::CurrentExponent;
        } else if (iv != "previous") {
            throw ConfigError("rstar interval must be previous or current, got '" + iv + "'");
        }
        return gen_random_rstar(r);
    }
    if (s.kind == "file") {
        if (!s.args.count("path")) throw ConfigError("file spec needs a path");
        IntegerSequence seq = read_sequence_file(s.args.at("path"));
        return count > 0 && count < seq.size() ? seq.truncated(count) : seq;
    }
    throw ConfigError("unknown sequence spec '" + spec + "'");
}

PermutationBuild make_permutation(const std::string& spec, const IntegerSequence& seq, std::size_t window,
                                  std::size_t degree) {
    const Spec s = parse_spec(spec.empty() ? std::string("identity") : spec, "permutation");
    const Params p(s.args);
    if (s.kind == "identity") {
        check_keys(s, {}, spec);
        return {identity_permutation(window), std::nullopt};
    }
    if (s.kind == "random") {
        check_keys(s, {"seed"}, spec);
        return {random_permutation(window, p.size("seed")), std::nullopt};
    }
    if (s.kind == "file") {
        return {read_permutation_file(s.args.at("path")), std::nullopt};
    }
    if (s.kind == "pairing") {
        check_keys(s, {"a", "b", "first", "factor", "blocks", "schedule", "gap"}, spec);
        const long a = p.integer("a", 1), b = p.integer("b", 2);
        BlockSchedule schedule;
        const std::string kind = p.text("schedule", "geometric");
        if (kind == "paper") {
            schedule = BlockSchedule::paper_doubly_exponential(p.size("blocks", 3));
        } else if (kind == "geometric") {
            schedule = BlockSchedule::geometric_dominant(p.size("first", 4), p.size("factor", 4), p.size("blocks", 6));
        } else {
            throw ConfigError("pairing schedule must be paper or geometric, got '" + kind + "'");
        }
        const Rational gap = p.has("gap") ? to_rational("gap", p.raw("gap")) : default_gap_ratio(a, b, degree);
        PairingResult r = build_pairing_counterexample(seq, a, b, schedule, gap);
        return {std::move(r.permutation), std::move(r.certificate)};
    }
    throw ConfigError("unknown permutation spec '" + spec + "'");
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

namespace {

class Outputs {
public:
    explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, const std::string& content) {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) throw IoError("cannot write " + (dir_ / name).string());
        out << content;
        if (!out) throw IoError("write failed for " + (dir_ / name).string());
        names_.push_back(name);
    }
    void json(const std::string& name, const ojson& j) { write(name, j.dump(2) + "\n"); }
    fs::path path(const std::string& name) {
        names_.push_back(name);
        return dir_ / name;
    }
    const std::vector<std::string>& names() const { return names_; }

private:
    fs::path dir_;
    std::vector<std::string> names_;
};

struct Context {
    const ExperimentConfig& config;
    Params params;
    Outputs& out;
};

std::size_t sequence_count(const Context& ctx, std::size_t needed) { return ctx.params.size("terms", needed); }

std::size_t poly_degree(const ExperimentConfig& c) { return c.f.empty() ? 1 : TrigPolynomial::parse(c.f).degree(); }

bool is_pairing(const ExperimentConfig& c) { return c.perm.rfind("pairing", 0) == 0; }

/// Terms needed before the pairing builder runs: enough for four indices per slot.
std::size_t pairing_terms(const ExperimentConfig& c) {
    const Spec s = parse_spec(c.perm, "permutation");
    const Params p(s.args);
    BlockSchedule schedule = p.text("schedule", "geometric") == "paper"
                                 ? BlockSchedule::paper_doubly_exponential(p.size("blocks", 3))
                                 : BlockSchedule::geometric_dominant(p.size("first", 4), p.size("factor", 4),
                                                                     p.size("blocks", 6));
    return 2 * schedule.total_slots() + 64;
}

ojson moments_json(const Moments& m) {
    return {{"mean", m.mean},
            {"variance", m.variance},
            {"m4", m.m4},
            {"kurtosis", m.kurtosis},
            {"se_mean", m.se_mean},
            {"se_variance", m.se_variance},
            {"se_kurtosis", m.se_kurtosis},
            {"se_kurtosis_null", m.se_kurtosis_null}};
}

ojson witnesses_json(const std::vector<IndexPair>& w) {
    ojson arr = ojson::array();
    for (const auto& p : w) arr.push_back({p.k, p.l});
    return arr;
}

void cmd_seq(Context& ctx) {
    const std::size_t N = ctx.params.size("N");
    const IntegerSequence seq = make_sequence(ctx.config.seq, N);
    write_sequence_file(ctx.out.path("sequence.txt").string(), seq);
    ojson j;
    j["count"] = seq.size();
    if (seq.size() >= 2) {
        const GapProfile g = gap_profile(seq);
        j["min_ratio"] = to_string(g.min_ratio);
        j["min_ratio_approx"] = g.min_ratio.get_d();
        j["erdos_exponent"] = g.erdos_exponent ? ojson(*g.erdos_exponent) : ojson(nullptr);
    }
    j["last_bit_length"] = seq.empty() ? 0 : seq.term_bit_length(seq.size());
    ctx.out.json("gaps.json", j);
}

ojson report_json(const DioReport& r, bool with_histogram) {
    ojson j;
    j["a"] = r.a;
    j["b"] = r.b;
    j["max_count"] = r.max_count;
    j["argmax_c"] = r.argmax_c ? ojson(to_string(*r.argmax_c)) : ojson(nullptr);
    j["prefix_growth"] = ojson::array();
    for (const auto& g : r.prefix_growth) j["prefix_growth"].push_back({{"N", g.N}, {"max_count", g.max_count}});
    j["witnesses"] = witnesses_json(r.witnesses);
    j["distinct_c"] = r.histogram.size();
    if (with_histogram) {
        j["histogram"] = ojson::array();
        for (const auto& [c, n] : r.histogram) j["histogram"].push_back({to_string(c), n});
    }
    return j;
}

void cmd_dio(Context& ctx) {
    const auto& sw = ctx.config.switches;
    const std::size_t N = ctx.params.size("N");
    const IntegerSequence seq = make_sequence(ctx.config.seq, sequence_count(ctx, N));
    ojson j;
    j["N"] = N;
    if (sw.count("multi")) {
        MultiTermQuery q;
        q.p = ctx.params.size("p", 3);
        q.coeff_bound = ctx.params.integer("bound", static_cast<long>(q.p));
        q.N = N;
        q.signed_only = sw.count("signed") != 0;
        q.nondegenerate_only = sw.count("nondegenerate") != 0;
        q.budget = ctx.params.size("budget", q.budget);
        const MultiTermCount r = count_multi_term(seq, q);
        j["kind"] = "multi";
        j["p"] = q.p;
        j["coeff_bound"] = q.coeff_bound;
        j["signed_only"] = q.signed_only;
        j["nondegenerate_only"] = q.nondegenerate_only;
        j["count"] = r.count;
        j["witnesses"] = ojson::array();
        for (const auto& w : r.witnesses) j["witnesses"].push_back({{"indices", w.indices}, {"coefficients", w.coefficients}});
        ctx.out.json("dio.json", j);
        return;
    }
    if (sw.count("profile")) {
        const long d = ctx.params.integer("d", 2);
        const bool star = sw.count("star") != 0;
        const DiagonalRule rule =
            sw.count("strict-diagonal") ? DiagonalRule::StrictPaper : DiagonalRule::ExcludeTrivialDiagonal;
        const DioProfile prof = star ? d2star_profile(seq, d, N, rule) : d2_profile(seq, d, N);
        j["kind"] = star ? "D2*" : "D2";
        j["d"] = d;
        if (star) j["diagonal_rule"] = sw.count("strict-diagonal") ? "strict" : "exclude-trivial";
        const DioReport* worst = nullptr;
        j["reports"] = ojson::array();
        std::ostringstream csv;
        csv << "a,b,max_count,argmax_c,count_N4,count_N2,count_N\n";
        for (const auto& [ab, r] : prof) {
            if (!worst || r.max_count > worst->max_count ||
                (r.max_count == worst->max_count && worst->a < 0 && r.a > 0)) {
                worst = &r;
            }
            j["reports"].push_back(report_json(r, sw.count("histogram") != 0));
            csv << r.a << ',' << r.b << ',' << r.max_count << ',' << (r.argmax_c ? to_string(*r.argmax_c) : "");
            for (const auto& g : r.prefix_growth) csv << ',' << g.max_count;
            csv << '\n';
        }
        if (worst) {
            j["max_count"] = worst->max_count;
            j["argmax"] = {{"a", worst->a},
                           {"b", worst->b},
                           {"c", worst->argmax_c ? ojson(to_string(*worst->argmax_c)) : ojson(nullptr)}};
        }
        ctx.out.json("dio.json", j);
        ctx.out.write("dio.csv", csv.str());
        return;
    }
    TwoTermQuery q;
    q.a = ctx.params.integer("a", 1);
    q.b = ctx.params.integer("b", 1);
    q.c = parse_bigint(ctx.params.text("c", "0"));
    q.N = N;
    q.require_distinct = sw.count("distinct") != 0;
    const TwoTermCount r = count_two_term(seq, q);
    j["kind"] = "two-term";
    j["a"] = q.a;
    j["b"] = q.b;
    j["c"] = to_string(q.c);
    j["count"] = r.count;
    j["witnesses"] = witnesses_json(r.witnesses);
    ctx.out.json("dio.json", j);
}

struct Window {
    IntegerSequence seq;
    PermutationBuild perm;
    std::size_t N;
};

/// Sequence plus permutation for commands that evaluate f along the window.
Window build_window(const Context& ctx, const std::string& n_key) {
    const ExperimentConfig& c = ctx.config;
    const std::size_t degree = poly_degree(c);
    if (is_pairing(c)) {
        IntegerSequence seq = make_sequence(c.seq, sequence_count(ctx, pairing_terms(c)));
        PermutationBuild perm = make_permutation(c.perm, seq, 0, degree);
        const std::size_t N = ctx.params.size(n_key, perm.certificate->certified_slots());
        return {std::move(seq), std::move(perm), N};
    }
    const std::size_t N = ctx.params.size(n_key);
    IntegerSequence seq = make_sequence(c.seq, sequence_count(ctx, N));
    const std::size_t window = c.perm.rfind("file", 0) == 0 ? 0 : N;
    PermutationBuild perm = make_permutation(c.perm, seq, window, degree);
    return {std::move(seq), std::move(perm), N};
}

void cmd_perm(Context& ctx) {
    const Window w = build_window(ctx, "N");
    write_permutation_file(ctx.out.path("permutation.txt").string(), w.perm.permutation);
    ojson j;
    j["size"] = w.perm.permutation.size();
    j["cycles"] = cycle_count(w.perm.permutation);
    if (w.perm.certificate) {
        ctx.out.write("certificate.json", certificate_to_json(*w.perm.certificate) + "\n");
        const CertificateCheck check = verify_certificate(w.perm.permutation, w.seq, *w.perm.certificate);
        j["certified_pairs"] = w.perm.certificate->pairs.size();
        j["certificate_ok"] = check.ok;
        if (!check.ok) j["violation"] = check.violation;
    }
    ctx.out.json("perm.json", j);
}

void cmd_var(Context& ctx) {
    const TrigPolynomial poly = TrigPolynomial::parse(ctx.config.f);
    const Window w = build_window(ctx, "N");
    const Rational v = exact_variance(poly, w.seq, w.perm.permutation, w.N);
    const FrequencyMultiset fm = expand_frequencies(poly, w.seq, w.perm.permutation, w.N);
    ojson j;
    j["N"] = w.N;
    j["f"] = poly.to_spec();
    j["exact_variance"] = to_string(v);
    j["exact_variance_approx"] = v.get_d();
    j["l2_norm_sq"] = to_string(l2_norm_sq(poly));
    j["kac_variance"] = to_string(kac_variance(poly));
    j["frequency_terms"] = fm.size();
    j["max_multiplicity"] = fm.max_multiplicity;
    ctx.out.json("var.json", j);
}

std::vector<double> s_grid(const Params& p) { return to_double_list("s", p.text("s", "1+2+3")); }

void cmd_mix(Context& ctx) {
    const TrigPolynomial poly = TrigPolynomial::parse(ctx.config.f);
    const Window w = build_window(ctx, "N");
    std::optional<BigInt> cutoff;
    if (ctx.params.has("cutoff")) cutoff = parse_bigint(ctx.params.raw("cutoff"));
    const MixtureProfile prof = mixture_profile(poly, w.seq, w.perm.permutation, *w.perm.certificate, cutoff);
    ojson j = ojson::parse(to_json(prof));
    j["certified_slots"] = w.perm.certificate->certified_slots();
    j["second_moment_ratio"] = to_string(prof.second_moment_ratio());
    j["min_value"] = prof.min_value();
    ctx.out.json("mixture.json", j);
    std::ostringstream csv;
    csv.precision(17);
    csv << "s,phi,quadrature_error,closed_form\n";
    for (const double s : s_grid(ctx.params)) {
        const CharFnValue phi = mixture_charfn(prof, s);
        const auto closed = mixture_charfn_closed_form(prof, s);
        csv << s << ',' << phi.value << ',' << phi.error_estimate << ',';
        if (closed) csv << *closed;
        csv << '\n';
    }
    ctx.out.write("charfn.csv", csv.str());
}

void cmd_clt(Context& ctx) {
    const TrigPolynomial poly = TrigPolynomial::parse(ctx.config.f);
    const Window w = build_window(ctx, "N");
    CltParams cp;
    cp.N = w.N;
    cp.M = ctx.params.size("M");
    cp.seed = ctx.params.size("seed", 0);
    cp.bits = ctx.params.size("B", 0);
    cp.threads = ctx.config.threads;
    const EmpiricalDistribution emp = clt_experiment(poly, w.seq, w.perm.permutation, cp);
    const double alpha = ctx.params.real("alpha", 0.05);
    const double threshold = kolmogorov_threshold(alpha, cp.M);

    ojson j;
    j["params"] = {{"N", cp.N}, {"M", cp.M}, {"B", emp.bits}, {"f", poly.to_spec()}, {"alpha", alpha}};
    j["seed"] = cp.seed;
    j["statistics"] = moments_json(emp.summary);
    j["error_bounds"] = {{"max_abs_error_normalized", emp.max_error_bound}};

    const std::string target = ctx.params.text("target", is_pairing(ctx.config) ? "mixture" : "gauss:exact");
    const Rational exact = exact_variance(poly, w.seq, w.perm.permutation, w.N);
    j["exact_variance"] = to_string(exact);
    DistributionTarget dist;
    if (target == "mixture") {
        if (!w.perm.certificate) throw ConfigError("target=mixture needs --perm pairing:...");
        dist = MixtureTarget{mixture_profile(poly, w.seq, w.perm.permutation, *w.perm.certificate)};
    } else if (target == "gauss:exact") {
        dist = GaussianTarget{0.0, exact.get_d()};
    } else if (target == "gauss:fit") {
        dist = GaussianTarget{emp.summary.mean, emp.summary.variance};
    } else if (target.rfind("gauss:", 0) == 0) {
        dist = GaussianTarget{0.0, to_rational("target", target.substr(6)).get_d()};
    } else {
        throw ConfigError("target must be gauss:exact, gauss:fit, gauss:P/Q or mixture, got '" + target + "'");
    }
    const KsResult ks = ks_distance(emp, dist);
    j["ks"] = {{"target", target},
               {"distance", ks.distance},
               {"threshold", threshold},
               {"exceeds_threshold", ks.distance > threshold},
               {"cdf_tolerance", ks.cdf_tolerance}};
    const auto grid = s_grid(ctx.params);
    j["charfn"] = ojson::array();
    for (const CharFnPoint& pt : charfn_experiment(emp, grid)) {
        j["charfn"].push_back({{"s", pt.s}, {"value", pt.value}, {"standard_error", pt.standard_error}});
    }
    ctx.out.json("clt.json", j);
    if (ctx.config.switches.count("samples")) {
        std::ostringstream csv;
        csv.precision(17);
        csv << "index,value\n";
        for (std::size_t i = 0; i < emp.samples.size(); ++i) csv << i << ',' << emp.samples[i] << '\n';
        ctx.out.write("samples.csv", csv.str());
    }
}

void cmd_lil(Context& ctx) {
    const TrigPolynomial poly = TrigPolynomial::parse(ctx.config.f);
    const Window w = build_window(ctx, "Nmax");
    const std::size_t points = ctx.params.size("points", 10);
    const std::uint64_t seed = ctx.params.size("seed", 0);
    const double gamma2 =
        ctx.params.has("gamma2") ? to_rational("gamma2", ctx.params.raw("gamma2")).get_d() : l2_norm_sq(poly).get_d();
    const std::size_t need = required_bits(poly, w.seq, w.perm.permutation, w.N);
    const std::size_t bits = (need + 63) / 64 * 64;

    std::vector<LilTrajectory> trajs(points);
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const FixedPointSample x = sample_point(bits, seed, i, Stream::LilPoints);
            trajs[i] = lil_trajectory(poly, w.seq, w.perm.permutation, x, w.N, gamma2);
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(ctx.config.threads, static_cast<unsigned>(points)));
    std::vector<std::thread> pool;
    const std::size_t chunk = (points + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t b = t * chunk, e = std::min(points, b + chunk);
        if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();

    std::ostringstream csv;
    csv.precision(17);
    csv << "point,N,running_max\n";
    ojson j;
    j["Nmax"] = w.N;
    j["gamma2"] = gamma2;
    j["B"] = bits;
    j["seed"] = seed;
    j["normalization"] = trajs.empty() ? LilTrajectory{}.normalization : trajs[0].normalization;
    j["checkpoints"] = "powers of two from 16, plus Nmax";
    j["final_ratios"] = ojson::array();
    bool monotone = true;
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        const auto& cps = trajs[i].checkpoints;
        for (std::size_t c = 0; c < cps.size(); ++c) {
            csv << i << ',' << cps[c].N << ',' << cps[c].running_max << '\n';
            if (c > 0 && cps[c].running_max < cps[c - 1].running_max) monotone = false;
        }
        j["final_ratios"].push_back(cps.empty() ? 0.0 : cps.back().running_max);
    }
    j["monotone"] = monotone;
    ctx.out.json("lil.json", j);
    ctx.out.write("lil.csv", csv.str());
}

const std::map<std::string, std::function<void(Context&)>>& commands() {
    static const std::map<std::string, std::function<void(Context&)>> table = {
        {"seq", cmd_seq}, {"dio", cmd_dio}, {"perm", cmd_perm}, {"var", cmd_var},
        {"mix", cmd_mix}, {"clt", cmd_clt}, {"lil", cmd_lil},
    };
    return table;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// First JSON pointer at which two documents differ; empty when equal.
std::string first_json_difference(const ojson& a, const ojson& b, const std::string& at) {
    if (a.type() != b.type()) return at.empty() ? "/" : at;
    if (a.is_object()) {
        for (const auto& [k, v] : a.items()) {
            if (!b.contains(k)) return at + "/" + k;
            const std::string d = first_json_difference(v, b.at(k), at + "/" + k);
            if (!d.empty()) return d;
        }
        for (const auto& [k, v] : b.items()) {
            if (!a.contains(k)) return at + "/" + k;
        }
        return "";
    }
    if (a.is_array()) {
        const std::size_t n = std::min(a.size(), b.size());
        for (std::size_t i = 0; i < n; ++i) {
            const std::string d = first_json_difference(a[i], b[i], at + "/" + std::to_string(i));
            if (!d.empty()) return d;
        }
        return a.size() == b.size() ? "" : at + "/" + std::to_string(n);
    }
    return a == b ? "" : (at.empty() ? "/" : at);
}

std::string describe_difference(const std::string& name, const std::string& expected, const std::string& actual) {
    if (name.size() > 5 && name.ends_with(".json")) {
        try {
            const std::string ptr = first_json_difference(ojson::parse(expected), ojson::parse(actual), "");
            if (!ptr.empty()) return name + ": field " + ptr;
        } catch (const nlohmann::json::exception&) {
            return name + ": not valid JSON";
        }
    }
    std::istringstream e(expected), a(actual);
    std::string le, la;
    for (std::size_t line = 1;; ++line) {
        const bool ge = static_cast<bool>(std::getline(e, le));
        const bool ga = static_cast<bool>(std::getline(a, la));
        if (!ge && !ga) break;
        if (ge != ga || le != la) return name + ": line " + std::to_string(line);
    }
    return name + ": bytes differ";
}

}  // namespace

RunResult run(const ExperimentConfig& config, const fs::path& dir) {
    validate(config);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create run directory " + dir.string() + ": " + ec.message());

    const auto start = std::chrono::steady_clock::now();
    Outputs out(dir);
    Context ctx{config, Params(config.params), out};
    commands().at(config.command)(ctx);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    ojson manifest;
    manifest["tool"] = "lacunaria";
    manifest["version"] = kVersion;
    manifest["command"] = config.command;
    manifest["config"] = ojson::parse(config.to_json());
    manifest["config_hash"] = hex64(config.hash());
    manifest["seed"] = config.params.count("seed") ? config.params.at("seed") : "0";
    manifest["wall_time_seconds"] = wall;
    manifest["outputs"] = out.names();
    std::ofstream m(dir / "run.json", std::ios::binary);
    if (!m) throw IoError("cannot write " + (dir / "run.json").string());
    m << manifest.dump(2) << "\n";
    return {out.names(), wall};
}

VerifyResult verify(const fs::path& dir, std::optional<unsigned> threads) {
    ojson manifest;
    try {
        manifest = ojson::parse(read_file(dir / "run.json"));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("run.json: " + std::string(e.what()));
    }
    ExperimentConfig config = ExperimentConfig::from_json(manifest.at("config").dump());
    if (manifest.value("config_hash", "") != hex64(config.hash())) {
        return {false, "run.json: field /config_hash"};
    }
    if (manifest.value("version", "") != std::string(kVersion)) {
        return {false, "run.json: field /version"};
    }
    if (threads) config.threads = *threads;

    static std::atomic<unsigned> counter{0};
    const fs::path scratch = fs::temp_directory_path() /
                             ("lacunaria-verify-" + hex64(config.hash()) + "-" + std::to_string(::getpid()) + "-" +
                              std::to_string(counter++));
    struct Cleanup {
        fs::path p;
        ~Cleanup() {
            std::error_code ec;
            fs::remove_all(p, ec);
        }
    } cleanup{scratch};

    const RunResult replay = run(config, scratch);
    const auto recorded = manifest.at("outputs").get<std::vector<std::string>>();
    if (recorded != replay.outputs) return {false, "run.json: field /outputs"};
    for (const auto& name : recorded) {
        if (!fs::exists(dir / name)) return {false, name + ": missing"};
        const std::string expected = read_file(dir / name);
        const std::string actual = read_file(scratch / name);
        if (expected != actual) return {false, describe_difference(name, expected, actual)};
    }
    return {true, ""};
}

}  // namespace lacunaria
