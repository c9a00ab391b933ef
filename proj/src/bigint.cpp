#include "lacunaria/bigint.hpp"

#include "lacunaria/error.hpp"

#include <cctype>

namespace lacunaria {
namespace {

bool is_decimal_integer(std::string_view text) {
    if (text.empty()) return false;
    std::size_t i = (text[0] == '-' || text[0] == '+') ? 1 : 0;
    if (i == text.size()) return false;
    for (; i < text.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
    }
    return true;
}

std::string_view trim(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    return text;
}

}  // namespace

BigInt parse_bigint(std::string_view text) {
    text = trim(text);
    if (!is_decimal_integer(text)) {
        throw FormatError("not a decimal integer: '" + std::string(text) + "'");
    }
    if (text[0] == '+') text.remove_prefix(1);
    return BigInt(std::string(text), 10);
}

Rational parse_rational(std::string_view text) {
    text = trim(text);
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) return Rational(parse_bigint(text));
    const BigInt num = parse_bigint(text.substr(0, slash));
    const BigInt den = parse_bigint(text.substr(slash + 1));
    if (den == 0) throw FormatError("zero denominator in '" + std::string(text) + "'");
    Rational r(num, den);
    r.canonicalize();
    return r;
}

std::string to_string(const BigInt& value) { return value.get_str(10); }

std::string to_string(const Rational& value) {
    return value.get_num().get_str(10) + "/" + value.get_den().get_str(10);
}

std::size_t bit_length(const BigInt& value) {
    if (value == 0) return 0;
    return mpz_sizeinbase(value.get_mpz_t(), 2);
}

std::size_t BigIntHash::operator()(const BigInt& value) const noexcept {
    const mpz_srcptr z = value.get_mpz_t();
    std::size_t h = static_cast<std::size_t>(0x9e3779b97f4a7c15ULL) ^ static_cast<std::size_t>(mpz_sgn(z) + 1);
    const std::size_t n = mpz_size(z);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t x = mpz_getlimbn(z, static_cast<mp_size_t>(i)) + h;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        h = static_cast<std::size_t>(x ^ (x >> 31));
    }
    return h;
}

}  // namespace lacunaria
