#include "lacunaria/spectra.hpp"

#include "lacunaria/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

namespace lacunaria {

// ---------------------------------------------------------------------------
// TrigPolynomial
// ---------------------------------------------------------------------------

TrigPolynomial::TrigPolynomial(std::vector<Rational> cos_coeffs, std::vector<Rational> sin_coeffs)
    : cos_(std::move(cos_coeffs)), sin_(std::move(sin_coeffs)) {
    const std::size_t d = std::max(cos_.size(), sin_.size());
    cos_.resize(d);
    sin_.resize(d);
    while (!cos_.empty() && cos_.back() == 0 && sin_.back() == 0) {
        cos_.pop_back();
        sin_.pop_back();
    }
    if (cos_.empty()) throw InvalidArgument("trigonometric polynomial has no nonzero coefficient");
}

TrigPolynomial TrigPolynomial::parse(std::string_view spec) {
    std::vector<Rational> c, s;
    std::size_t start = 0;
    bool any = false;
    while (start <= spec.size()) {
        const std::size_t comma = std::min(spec.find(',', start), spec.size());
        std::string_view item = spec.substr(start, comma - start);
        start = comma + 1;
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (item.empty()) {
            if (comma == spec.size()) break;
            throw FormatError("empty term in polynomial spec '" + std::string(spec) + "'");
        }
        const auto colon = item.find(':');
        if (colon == std::string_view::npos) {
            throw FormatError("polynomial term '" + std::string(item) + "' is not of the form cos:j=coef");
        }
        const std::string_view kind = item.substr(0, colon);
        if (kind != "cos" && kind != "sin") {
            throw FormatError("polynomial term kind must be cos or sin, got '" + std::string(kind) + "'");
        }
        std::string_view rest = item.substr(colon + 1);
        Rational coef(1);
        const auto eq = rest.find('=');
        if (eq != std::string_view::npos) {
            coef = parse_rational(rest.substr(eq + 1));
            rest = rest.substr(0, eq);
        }
        const BigInt j = parse_bigint(rest);
        if (j < 1 || j > 1'000'000) throw FormatError("frequency index must lie in 1..10^6");
        const auto idx = static_cast<std::size_t>(j.get_ui());
        auto& target = kind == "cos" ? c : s;
        if (target.size() < idx) target.resize(idx);
        target[idx - 1] += coef;
        any = true;
        if (comma == spec.size()) break;
    }
    if (!any) throw FormatError("empty polynomial spec");
    try {
        return TrigPolynomial(std::move(c), std::move(s));
    } catch (const InvalidArgument& e) {
        throw FormatError(e.what());
    }
}

double TrigPolynomial::max_abs_coeff() const {
    double m = 0;
    for (std::size_t j = 0; j < cos_.size(); ++j) {
        m = std::max({m, std::fabs(cos_[j].get_d()), std::fabs(sin_[j].get_d())});
    }
    return m;
}

Rational TrigPolynomial::l1_coeff_sum() const {
    Rational total;
    for (std::size_t j = 0; j < cos_.size(); ++j) total += abs(cos_[j]) + abs(sin_[j]);
    return total;
}

double TrigPolynomial::evaluate(double x) const {
    double sum = 0;
    for (std::size_t j = 0; j < cos_.size(); ++j) {
        const double angle = 2 * std::numbers::pi * static_cast<double>(j + 1) * x;
        sum += cos_[j].get_d() * std::cos(angle) + sin_[j].get_d() * std::sin(angle);
    }
    return sum;
}

std::string TrigPolynomial::to_spec() const {
    std::string out;
    auto emit = [&](const char* kind, std::size_t j, const Rational& c) {
        if (c == 0) return;
        if (!out.empty()) out += ',';
        out += kind;
        out += ':' + std::to_string(j) + '=' + to_string(c);
    };
    for (std::size_t j = 1; j <= cos_.size(); ++j) emit("cos", j, cos_[j - 1]);
    for (std::size_t j = 1; j <= sin_.size(); ++j) emit("sin", j, sin_[j - 1]);
    return out;
}

Rational l2_norm_sq(const TrigPolynomial& poly) {
    Rational total;
    for (std::size_t j = 1; j <= poly.degree(); ++j) {
        total += poly.cos_coeff(j) * poly.cos_coeff(j) + poly.sin_coeff(j) * poly.sin_coeff(j);
    }
    return total / 2;
}

Rational kac_variance(const TrigPolynomial& poly) {
    const std::size_t d = poly.degree();
    Rational cross;
    // <f(x), f(2^k x)>: frequency 2^k j' of the dilate meets frequency j = 2^k j' of f.
    for (std::size_t shift = 1; (std::size_t{1} << shift) <= d; ++shift) {
        const std::size_t m = std::size_t{1} << shift;
        for (std::size_t jp = 1; m * jp <= d; ++jp) {
            cross += (poly.cos_coeff(m * jp) * poly.cos_coeff(jp) + poly.sin_coeff(m * jp) * poly.sin_coeff(jp)) / 2;
        }
    }
    return l2_norm_sq(poly) + 2 * cross;
}

// ---------------------------------------------------------------------------
// Frequency expansions
// ---------------------------------------------------------------------------

Rational FrequencyMultiset::l2_norm_sq() const {
    Rational total;
    for (const auto& t : terms) total += t.cos_coeff * t.cos_coeff + t.sin_coeff * t.sin_coeff;
    return total / 2;
}

namespace {

struct Accum {
    Rational c;
    Rational s;
    std::size_t multiplicity = 0;
};

using AccumMap = std::unordered_map<BigInt, Accum, BigIntHash>;

std::vector<FrequencyTerm> sorted_terms(const AccumMap& map) {
    std::vector<FrequencyTerm> out;
    out.reserve(map.size());
    for (const auto& [f, acc] : map) {
        if (acc.c == 0 && acc.s == 0) continue;
        out.push_back({f, acc.c, acc.s});
    }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.frequency < y.frequency; });
    return out;
}

/// Values n_{s(k)} for k = 1..N.
std::vector<BigInt> window_values(const IntegerSequence& seq, const PermutationWindow& perm, std::size_t N) {
    if (N > perm.size()) {
        throw InvalidArgument("window N = " + std::to_string(N) + " exceeds permutation size " +
                              std::to_string(perm.size()));
    }
    std::size_t max_index = 0;
    for (std::size_t k = 1; k <= N; ++k) max_index = std::max(max_index, perm(k));
    const auto values = seq.prefix(max_index);
    std::vector<BigInt> out;
    out.reserve(N);
    for (std::size_t k = 1; k <= N; ++k) out.push_back(values[perm(k) - 1]);
    return out;
}

void add_expansion(AccumMap& map, const TrigPolynomial& poly, const BigInt& nu) {
    BigInt f;
    for (std::size_t j = 1; j <= poly.degree(); ++j) {
        if (poly.cos_coeff(j) == 0 && poly.sin_coeff(j) == 0) continue;
        f = nu * static_cast<unsigned long>(j);
        auto& acc = map[f];
        acc.c += poly.cos_coeff(j);
        acc.s += poly.sin_coeff(j);
        ++acc.multiplicity;
    }
}

}  // namespace

FrequencyMultiset expand_frequencies(const TrigPolynomial& poly, const IntegerSequence& seq,
                                     const PermutationWindow& perm, std::size_t N) {
    FrequencyMultiset out;
    if (N == 0) return out;
    AccumMap map;
    map.reserve(N * poly.degree() * 2);
    for (const auto& nu : window_values(seq, perm, N)) add_expansion(map, poly, nu);
    for (const auto& [f, acc] : map) out.max_multiplicity = std::max(out.max_multiplicity, acc.multiplicity);
    out.terms = sorted_terms(map);
    return out;
}

Rational exact_variance(const TrigPolynomial& poly, const IntegerSequence& seq, const PermutationWindow& perm,
                        std::size_t N) {
    if (N < 1) throw InvalidArgument("exact variance needs N >= 1");
    Rational v = expand_frequencies(poly, seq, perm, N).l2_norm_sq();
    v /= static_cast<unsigned long>(N);
    return v;
}

// ---------------------------------------------------------------------------
// Mixture profiles
// ---------------------------------------------------------------------------

namespace {

/// Accumulates the square of a group sum g(x) = sum_i (c_i cos 2pi f_i x + s_i sin 2pi f_i x).
class SquareAccumulator {
public:
    void add_group_square(const std::vector<FrequencyTerm>& g) {
        BigInt diff, sum;
        for (const auto& ti : g) {
            for (const auto& tj : g) {
                // cos A cos B = (cos(A-B) + cos(A+B))/2,  sin A sin B = (cos(A-B) - cos(A+B))/2,
                // sin A cos B = (sin(A+B) + sin(A-B))/2,  cos A sin B = (sin(A+B) - sin(A-B))/2.
                const Rational cc = ti.cos_coeff * tj.cos_coeff / 2;
                const Rational ss = ti.sin_coeff * tj.sin_coeff / 2;
                const Rational sc = ti.sin_coeff * tj.cos_coeff / 2;
                const Rational cs = ti.cos_coeff * tj.sin_coeff / 2;
                sum = ti.frequency + tj.frequency;
                auto& hi = terms_[sum];
                hi.c += cc - ss;
                hi.s += sc + cs;
                diff = ti.frequency - tj.frequency;
                const int sign = sgn(diff);
                if (sign == 0) {
                    constant_ += cc + ss;
                } else {
                    // sin(A-B) with A-B < 0 flips sign.
                    if (sign < 0) diff = -diff;
                    auto& lo = terms_[diff];
                    lo.c += cc + ss;
                    lo.s += sign * (sc - cs);
                }
            }
        }
    }

    MixtureProfile finish(std::size_t normaliser, const BigInt& cutoff) const {
        MixtureProfile out;
        out.cutoff = cutoff;
        const Rational scale(1, normaliser);
        out.constant = constant_ * scale;
        Rational residual;
        for (const auto& t : sorted_terms(terms_)) {
            if (t.frequency <= cutoff) {
                out.low_terms.push_back({t.frequency, t.cos_coeff * scale, t.sin_coeff * scale});
            } else {
                ++out.residual_terms;
                residual += t.cos_coeff * t.cos_coeff + t.sin_coeff * t.sin_coeff;
            }
        }
        out.residual_l2_sq = residual * scale * scale / 2;
        return out;
    }

private:
    Rational constant_;
    AccumMap terms_;
};

std::vector<FrequencyTerm> group_terms(const TrigPolynomial& poly, const std::vector<BigInt>& nus) {
    AccumMap map;
    for (const auto& nu : nus) add_expansion(map, poly, nu);
    return sorted_terms(map);
}

}  // namespace

MixtureProfile mixture_profile(const TrigPolynomial& poly, const IntegerSequence& seq, const PermutationWindow& perm,
                               const PairingCertificate& cert, std::optional<BigInt> freq_cutoff) {
    if (cert.pairs.empty()) throw InvalidArgument("mixture profile needs a non-empty pairing certificate");
    const auto check = verify_certificate(perm, seq, cert);
    if (!check.ok) throw InvalidArgument("certificate does not verify: " + check.violation);

    BigInt max_c = 0, min_c = -1;
    for (const auto& blk : cert.blocks) {
        const BigInt c = abs(blk.c);
        if (c > max_c) max_c = c;
        if (min_c < 0 || c < min_c) min_c = c;
    }
    const BigInt cutoff = freq_cutoff.value_or(max_c);

    SquareAccumulator acc;
    for (const auto& p : cert.pairs) {
        acc.add_group_square(group_terms(poly, {seq.term(p.odd_source), seq.term(p.even_source)}));
    }
    MixtureProfile out = acc.finish(cert.certified_slots(), cutoff);
    if (cutoff < min_c) {
        out.warnings.push_back("frequency cutoff " + to_string(cutoff) + " is below every |c_m|; profile is constant");
    }
    return out;
}

MixtureProfile window_profile(const TrigPolynomial& poly, const IntegerSequence& seq, const PermutationWindow& perm,
                              std::size_t N, const BigInt& freq_cutoff) {
    if (N < 1) throw InvalidArgument("window profile needs N >= 1");
    SquareAccumulator acc;
    acc.add_group_square(group_terms(poly, window_values(seq, perm, N)));
    return acc.finish(N, freq_cutoff);
}

double MixtureProfile::evaluate(double x) const {
    double v = constant.get_d();
    for (const auto& t : low_terms) {
        const double phase = 2 * std::numbers::pi * std::fmod(t.frequency.get_d() * x, 1.0);
        v += t.cos_coeff.get_d() * std::cos(phase) + t.sin_coeff.get_d() * std::sin(phase);
    }
    return v;
}

double MixtureProfile::min_value() const {
    if (low_terms.empty()) return constant.get_d();
    const double top = low_terms.back().frequency.get_d();
    const std::size_t grid = static_cast<std::size_t>(std::clamp(64.0 * top, 4096.0, 1.0e7));
    double best_x = 0, best = evaluate(0);
    for (std::size_t i = 1; i < grid; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(grid);
        const double v = evaluate(x);
        if (v < best) {
            best = v;
            best_x = x;
        }
    }
    // Golden-section refinement inside the neighbouring grid cells.
    const double h = 1.0 / static_cast<double>(grid);
    double lo = best_x - h, hi = best_x + h;
    const double g = (std::sqrt(5.0) - 1) / 2;
    for (int it = 0; it < 80; ++it) {
        const double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
        if (evaluate(x1) < evaluate(x2)) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    return std::min(best, evaluate((lo + hi) / 2));
}

Rational MixtureProfile::second_moment_ratio() const {
    if (constant == 0) throw InvalidArgument("mixture profile has zero mean variance");
    Rational second = constant * constant;
    for (const auto& t : low_terms) second += (t.cos_coeff * t.cos_coeff + t.sin_coeff * t.sin_coeff) / 2;
    return second / (constant * constant);
}

CharFnValue mixture_charfn(const MixtureProfile& v, double s, double quad_tol) {
    if (!(quad_tol > 0)) throw InvalidArgument("quadrature tolerance must be positive");
    const double half_s2 = s * s / 2;
    auto integrand = [&](double t) { return std::exp(-half_s2 * v.evaluate(t)); };
    double error = 0;
    constexpr unsigned kMaxDepth = 20;
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, 1.0, kMaxDepth, quad_tol, &error);
    const double abs_error = error * std::max(1.0, std::fabs(value));
    if (!(abs_error <= quad_tol)) {
        throw Error("characteristic function quadrature did not converge: achieved error " + std::to_string(abs_error) +
                    ", requested " + std::to_string(quad_tol));
    }
    return {value, abs_error};
}

std::optional<double> mixture_charfn_closed_form(const MixtureProfile& v, double s) {
    const double g = v.constant.get_d();
    if (v.low_terms.empty()) return std::exp(-s * s * g / 2);
    if (v.low_terms.size() != 1 || v.low_terms[0].sin_coeff != 0) return std::nullopt;
    const double beta = std::fabs(v.low_terms[0].cos_coeff.get_d());
    return std::exp(-s * s * g / 2) * std::cyl_bessel_i(0.0, beta * s * s / 2);
}

std::string to_json(const FrequencyMultiset& m) {
    nlohmann::json j;
    j["frequencies"] = nlohmann::json::array();
    for (const auto& t : m.terms) {
        j["frequencies"].push_back({{"f", to_string(t.frequency)}, {"cos", to_string(t.cos_coeff)}, {"sin", to_string(t.sin_coeff)}});
    }
    j["max_multiplicity"] = m.max_multiplicity;
    j["l2_norm_sq"] = to_string(m.l2_norm_sq());
    return j.dump(1);
}

std::string to_json(const MixtureProfile& m) {
    nlohmann::json j;
    j["constant"] = to_string(m.constant);
    j["cutoff"] = to_string(m.cutoff);
    j["terms"] = nlohmann::json::array();
    for (const auto& t : m.low_terms) {
        j["terms"].push_back({{"f", to_string(t.frequency)}, {"cos", to_string(t.cos_coeff)}, {"sin", to_string(t.sin_coeff)}});
    }
    j["residual"] = {{"terms", m.residual_terms}, {"l2_sq", to_string(m.residual_l2_sq)}};
    j["kurtosis"] = m.mixture_kurtosis();
    j["warnings"] = m.warnings;
    return j.dump(1);
}

}  // namespace lacunaria
