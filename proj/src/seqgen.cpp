#include "lacunaria/seqgen.hpp"

#include "lacunaria/error.hpp"
#include "lacunaria/rng.hpp"

#include <json.hpp>
#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <queue>
#include <sstream>

namespace lacunaria {

// ---------------------------------------------------------------------------
// IntegerSequence
// ---------------------------------------------------------------------------

IntegerSequence IntegerSequence::from_terms(std::vector<BigInt> terms, Provenance provenance) {
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (terms[i] < 1) {
            throw InvalidArgument("sequence term n_" + std::to_string(i + 1) + " = " +
                                  to_string(terms[i]) + " is not positive");
        }
        if (i > 0 && terms[i] <= terms[i - 1]) {
            throw InvalidArgument("sequence is not strictly increasing at k = " + std::to_string(i + 1));
        }
    }
    IntegerSequence seq;
    seq.size_ = terms.size();
    seq.terms_ = std::move(terms);
    seq.provenance_ = std::move(provenance);
    return seq;
}

IntegerSequence IntegerSequence::power_form(unsigned long base, int offset, std::size_t count) {
    if (base < 2) throw InvalidArgument("power sequence needs base >= 2");
    if (offset != 0 && offset != -1) throw InvalidArgument("power sequence offset must be 0 or -1");
    if (static_cast<long>(base) + offset < 1) throw InvalidArgument("power sequence has a non-positive first term");
    IntegerSequence seq;
    seq.closed_ = PowerForm{base, offset};
    seq.size_ = count;
    seq.provenance_ = PowerProvenance{base, offset};
    return seq;
}

void IntegerSequence::check_index(std::size_t k) const {
    if (k < 1 || k > size_) {
        throw InvalidArgument("sequence index " + std::to_string(k) + " outside 1.." + std::to_string(size_));
    }
}

BigInt IntegerSequence::term(std::size_t k) const {
    check_index(k);
    if (!closed_) return terms_[k - 1];
    BigInt value;
    mpz_ui_pow_ui(value.get_mpz_t(), closed_->base, k);
    value += closed_->offset;
    return value;
}

std::size_t IntegerSequence::term_bit_length(std::size_t k) const {
    check_index(k);
    if (!closed_) return bit_length(terms_[k - 1]);
    if (closed_->base == 2) return closed_->offset == 0 ? k + 1 : k;
    return bit_length(term(k));
}

std::vector<BigInt> IntegerSequence::prefix(std::size_t count) const {
    if (count > size_) {
        throw InvalidArgument("requested " + std::to_string(count) + " terms but the sequence has " +
                              std::to_string(size_));
    }
    if (!closed_) return {terms_.begin(), terms_.begin() + static_cast<std::ptrdiff_t>(count)};
    std::vector<BigInt> out;
    out.reserve(count);
    BigInt power = 1;
    for (std::size_t k = 1; k <= count; ++k) {
        power *= closed_->base;
        out.push_back(power + closed_->offset);
    }
    return out;
}

std::optional<std::vector<SignedDigit>> IntegerSequence::closed_form_digits(std::size_t k) const {
    check_index(k);
    if (!closed_ || closed_->base != 2) return std::nullopt;
    if (closed_->offset == 0) return std::vector<SignedDigit>{{+1, k}};
    if (k == 1) return std::vector<SignedDigit>{{+1, 0}};
    return std::vector<SignedDigit>{{+1, k}, {-1, 0}};
}

IntegerSequence IntegerSequence::truncated(std::size_t count) const {
    if (count > size_) throw InvalidArgument("cannot truncate to more terms than present");
    IntegerSequence out = *this;
    out.size_ = count;
    if (!closed_) out.terms_.resize(count);
    return out;
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

IntegerSequence gen_geometric(const Rational& q, const BigInt& first, std::size_t count) {
    if (q <= 1) throw InvalidArgument("geometric ratio q must exceed 1, got " + to_string(q));
    if (first < 1) throw InvalidArgument("geometric first term must be >= 1");
    if (count < 1) throw InvalidArgument("geometric sequence needs N >= 1");
    std::vector<BigInt> terms;
    terms.reserve(count);
    terms.push_back(first);
    for (std::size_t k = 1; k < count; ++k) {
        const BigInt num = q.get_num() * terms.back();
        BigInt next;
        mpz_cdiv_q(next.get_mpz_t(), num.get_mpz_t(), q.get_den().get_mpz_t());
        terms.push_back(std::move(next));
    }
    return IntegerSequence::from_terms(std::move(terms), GeometricProvenance{q, first});
}

IntegerSequence gen_power(unsigned long base, int offset, std::size_t count) {
    if (count < 1) throw InvalidArgument("power sequence needs N >= 1");
    return IntegerSequence::power_form(base, offset, count);
}

IntegerSequence gen_smooth(const std::vector<BigInt>& generators, std::size_t count, bool include_one) {
    if (generators.empty()) throw InvalidArgument("smooth sequence needs at least one generator");
    for (std::size_t i = 0; i < generators.size(); ++i) {
        if (generators[i] < 2) throw InvalidArgument("smooth generators must be >= 2");
        for (std::size_t j = 0; j < i; ++j) {
            BigInt g;
            mpz_gcd(g.get_mpz_t(), generators[i].get_mpz_t(), generators[j].get_mpz_t());
            if (g != 1) {
                throw InvalidArgument("smooth generators " + to_string(generators[j]) + " and " +
                                      to_string(generators[i]) + " are not coprime");
            }
        }
    }

    std::priority_queue<BigInt, std::vector<BigInt>, std::greater<>> heap;
    heap.push(BigInt(1));
    std::vector<BigInt> terms;
    terms.reserve(count);
    const std::size_t wanted = include_one ? count : count + 1;
    std::vector<BigInt> produced;
    produced.reserve(wanted);
    while (produced.size() < wanted) {
        BigInt v = heap.top();
        heap.pop();
        // Equal products reach the heap along several paths.
        while (!heap.empty() && heap.top() == v) heap.pop();
        for (const auto& g : generators) heap.push(v * g);
        produced.push_back(std::move(v));
    }
    if (include_one) {
        terms = std::move(produced);
    } else {
        terms.assign(produced.begin() + 1, produced.end());
    }
    return IntegerSequence::from_terms(std::move(terms), SmoothProvenance{generators, include_one});
}

namespace {

/// RAII wrapper for an MPFR variable.
class MpfrValue {
public:
    explicit MpfrValue(mpfr_prec_t prec) { mpfr_init2(v_, prec); }
    ~MpfrValue() { mpfr_clear(v_); }
    MpfrValue(const MpfrValue&) = delete;
    MpfrValue& operator=(const MpfrValue&) = delete;
    mpfr_ptr get() { return v_; }

private:
    mpfr_t v_;
};

// a * exp(w * log(base)) with w = (log w_index)^alpha, rounded up to an integer.
BigInt scaled_power_ceil(std::uint64_t scale, std::size_t base, std::size_t w_index, double alpha) {
    const double log_base = std::log(static_cast<double>(base));
    const double log_w = w_index >= 2 ? std::log(static_cast<double>(w_index)) : 0.0;
    const double estimate_bits = std::pow(log_w, alpha) * log_base / std::log(2.0) + 64.0;
    const auto prec = static_cast<mpfr_prec_t>(std::max(128.0, estimate_bits + 64.0));

    MpfrValue lb(prec), lw(prec), w(prec), exponent(prec), result(prec);
    mpfr_set_ui(lb.get(), base, MPFR_RNDN);
    mpfr_log(lb.get(), lb.get(), MPFR_RNDN);
    mpfr_set_ui(lw.get(), w_index, MPFR_RNDN);
    mpfr_log(lw.get(), lw.get(), MPFR_RNDN);
    if (w_index >= 2) {
        mpfr_set_d(exponent.get(), alpha, MPFR_RNDN);
        mpfr_pow(w.get(), lw.get(), exponent.get(), MPFR_RNDN);
    } else {
        mpfr_set_zero(w.get(), 1);
    }
    mpfr_mul(result.get(), w.get(), lb.get(), MPFR_RNDN);
    mpfr_exp(result.get(), result.get(), MPFR_RNDN);
    mpfr_mul_ui(result.get(), result.get(), scale, MPFR_RNDN);
    mpfr_ceil(result.get(), result.get());
    BigInt out;
    mpfr_get_z(out.get_mpz_t(), result.get(), MPFR_RNDN);
    return out;
}

BigInt uniform_below(const BigInt& bound, CounterStream& stream) {
    const std::size_t bits = bit_length(bound - 1);
    if (bits == 0) return 0;
    const std::size_t words = (bits + 63) / 64;
    std::vector<std::uint64_t> buf(words);
    for (;;) {
        for (auto& w : buf) w = stream.next();
        if (bits % 64 != 0) buf.back() &= (std::uint64_t{1} << (bits % 64)) - 1;
        BigInt v;
        mpz_import(v.get_mpz_t(), words, -1, sizeof(std::uint64_t), 0, 0, buf.data());
        if (v < bound) return v;
    }
}

}  // namespace

IntegerInterval rstar_interval(const RStarParams& params, std::size_t k) {
    if (k < 1) throw InvalidArgument("interval index must be >= 1");
    if (k == 1) return {BigInt(1), BigInt(params.scale) + 1};
    const std::size_t left_exponent_index =
        params.interval == RStarInterval::PreviousExponent ? k - 1 : k;
    return {scaled_power_ceil(params.scale, k - 1, left_exponent_index, params.alpha),
            scaled_power_ceil(params.scale, k, k, params.alpha)};
}

IntegerSequence gen_random_rstar(const RStarParams& params) {
    if (!(params.alpha > 0)) throw InvalidArgument("R* construction needs alpha > 0");
    if (params.scale < 2) throw InvalidArgument("R* construction needs a >= 2");
    if (params.count < 1) throw InvalidArgument("R* construction needs N >= 1");

    std::vector<BigInt> terms;
    terms.reserve(params.count);
    for (std::size_t k = 1; k <= params.count; ++k) {
        const IntegerInterval iv = rstar_interval(params, k);
        if (iv.hi <= iv.lo) {
            throw InvalidArgument("interval I_" + std::to_string(k) + " contains no integer; use a larger a");
        }
        CounterStream stream(params.seed, Stream::RStarSequence, k);
        BigInt draw = iv.lo + uniform_below(iv.hi - iv.lo, stream);
        if (!terms.empty() && draw <= terms.back()) draw = terms.back() + 1;
        if (draw >= iv.hi) {
            throw InvalidArgument("interval I_" + std::to_string(k) +
                                  " is empty after enforcing strict increase; use a larger a");
        }
        terms.push_back(std::move(draw));
    }
    return IntegerSequence::from_terms(std::move(terms), RStarProvenance{params});
}

GapProfile gap_profile(const IntegerSequence& seq) {
    if (seq.size() < 2) throw InvalidArgument("gap profile needs at least 2 terms");
    const auto terms = seq.prefix(seq.size());
    GapProfile profile;
    profile.ratios.reserve(terms.size() - 1);
    for (std::size_t i = 0; i + 1 < terms.size(); ++i) {
        Rational r(terms[i + 1], terms[i]);
        r.canonicalize();
        profile.ratios.push_back(std::move(r));
    }
    profile.min_ratio = *std::min_element(profile.ratios.begin(), profile.ratios.end());

    // Fit log(r_k - 1) = log c - alpha log k by ordinary least squares.
    if (profile.ratios.size() >= 3) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(profile.ratios.size());
        for (std::size_t i = 0; i < profile.ratios.size(); ++i) {
            const Rational excess = profile.ratios[i] - 1;
            const double x = std::log(static_cast<double>(i + 1));
            const double y = std::log(excess.get_d());
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double denom = n * sxx - sx * sx;
        if (denom > 0) profile.erdos_exponent = -(n * sxy - sx * sy) / denom;
    }
    return profile;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kSeqHeader = "# lacunaria-seq v1";

nlohmann::json provenance_json(const Provenance& p) {
    return std::visit(
        [](const auto& v) -> nlohmann::json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, GeometricProvenance>) {
                return {{"kind", "geometric"}, {"q", to_string(v.q)}, {"n1", to_string(v.first)}};
            } else if constexpr (std::is_same_v<T, PowerProvenance>) {
                return {{"kind", "power"}, {"base", v.base}, {"offset", v.offset}};
            } else if constexpr (std::is_same_v<T, SmoothProvenance>) {
                nlohmann::json gens = nlohmann::json::array();
                for (const auto& g : v.generators) gens.push_back(to_string(g));
                return {{"kind", "smooth"}, {"generators", gens}, {"include_one", v.include_one}};
            } else if constexpr (std::is_same_v<T, RStarProvenance>) {
                return {{"kind", "rstar"},
                        {"alpha", v.params.alpha},
                        {"a", v.params.scale},
                        {"seed", v.params.seed},
                        {"interval", v.params.interval == RStarInterval::PreviousExponent ? "previous"
                                                                                         : "current"}};
            } else {
                return {{"kind", "external"}, {"path", v.path}};
            }
        },
        p);
}

Provenance provenance_from_json(const nlohmann::json& j, const std::string& source_name) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "geometric") {
        return GeometricProvenance{parse_rational(j.at("q").get<std::string>()),
                                   parse_bigint(j.at("n1").get<std::string>())};
    }
    if (kind == "power") return PowerProvenance{j.at("base").get<unsigned long>(), j.at("offset").get<int>()};
    if (kind == "smooth") {
        SmoothProvenance s;
        for (const auto& g : j.at("generators")) s.generators.push_back(parse_bigint(g.get<std::string>()));
        s.include_one = j.at("include_one").get<bool>();
        return s;
    }
    if (kind == "rstar") {
        RStarParams p;
        p.alpha = j.at("alpha").get<double>();
        p.scale = j.at("a").get<std::uint64_t>();
        p.seed = j.at("seed").get<std::uint64_t>();
        p.interval = j.at("interval").get<std::string>() == "current" ? RStarInterval::CurrentExponent
                                                                      : RStarInterval::PreviousExponent;
        return RStarProvenance{p};
    }
    return ExternalProvenance{source_name};
}

}  // namespace

void write_sequence(std::ostream& out, const IntegerSequence& seq) {
    out << kSeqHeader << '\n';
    out << "# provenance: " << provenance_json(seq.provenance()).dump() << '\n';
    if (seq.is_closed_form()) {
        for (const auto& t : seq.prefix(seq.size())) out << to_string(t) << '\n';
    } else {
        for (std::size_t k = 1; k <= seq.size(); ++k) out << to_string(seq.term(k)) << '\n';
    }
}

void write_sequence_file(const std::string& path, const IntegerSequence& seq) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_sequence(out, seq);
    if (!out) throw IoError("failed writing '" + path + "'");
}

IntegerSequence read_sequence(std::istream& in, const std::string& source_name) {
    std::vector<BigInt> terms;
    Provenance provenance = ExternalProvenance{source_name};
    std::string line;
    std::size_t line_no = 0;
    static constexpr std::string_view kProvenanceTag = "# provenance: ";
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.starts_with(kProvenanceTag)) {
            try {
                provenance = provenance_from_json(nlohmann::json::parse(line.substr(kProvenanceTag.size())),
                                                  source_name);
            } catch (const std::exception& e) {
                throw FormatError(source_name + ":" + std::to_string(line_no) + ": bad provenance: " + e.what());
            }
            continue;
        }
        if (line.empty() || line[0] == '#') continue;
        try {
            terms.push_back(parse_bigint(line));
        } catch (const FormatError& e) {
            throw FormatError(source_name + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    try {
        return IntegerSequence::from_terms(std::move(terms), std::move(provenance));
    } catch (const InvalidArgument& e) {
        throw FormatError(source_name + ": " + e.what());
    }
}

IntegerSequence read_sequence_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open sequence file '" + path + "'");
    return read_sequence(in, path);
}

}  // namespace lacunaria
