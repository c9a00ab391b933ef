#include "lacunaria/diophantine.hpp"

#include "lacunaria/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <unordered_map>

namespace lacunaria {
namespace {

void check_prefix(const IntegerSequence& seq, std::size_t N) {
    if (N < 1) throw InvalidArgument("prefix length N must be >= 1");
    if (N > seq.size()) {
        throw InvalidArgument("prefix length N = " + std::to_string(N) + " exceeds sequence length " +
                              std::to_string(seq.size()));
    }
}

bool diagonal_excluded(long a, long b, DiagonalRule rule) {
    return rule == DiagonalRule::ExcludeTrivialDiagonal ? a + b == 0 : a == b;
}

}  // namespace

TwoTermCount count_two_term(const IntegerSequence& seq, const TwoTermQuery& query) {
    if (query.a == 0 || query.b == 0) throw InvalidArgument("two-term query needs nonzero a and b");
    check_prefix(seq, query.N);
    const auto values = seq.prefix(query.N);

    std::unordered_map<BigInt, std::size_t, BigIntHash> index_of;
    index_of.reserve(values.size() * 2);
    for (std::size_t i = 0; i < values.size(); ++i) index_of.emplace(values[i], i + 1);

    const BigInt b(query.b);
    TwoTermCount result;
    BigInt rhs, target, rem;
    for (std::size_t k = 1; k <= values.size(); ++k) {
        rhs = query.c - query.a * values[k - 1];
        mpz_tdiv_qr(target.get_mpz_t(), rem.get_mpz_t(), rhs.get_mpz_t(), b.get_mpz_t());
        if (rem != 0) continue;
        const auto it = index_of.find(target);
        if (it == index_of.end()) continue;
        if (query.require_distinct && it->second == k) continue;
        ++result.count;
        result.witnesses.push_back({k, it->second});
    }
    return result;
}

std::vector<std::size_t> growth_checkpoints(std::size_t N) {
    std::vector<std::size_t> cps{std::max<std::size_t>(1, N / 4), std::max<std::size_t>(1, N / 2), N};
    return cps;
}

DioReport two_term_report(const IntegerSequence& seq, long a, long b, std::size_t N, bool include_zero,
                          DiagonalRule rule) {
    if (a == 0 || b == 0) throw InvalidArgument("coefficients a and b must be nonzero");
    check_prefix(seq, N);
    const auto values = seq.prefix(N);
    std::vector<BigInt> av(N), bv(N);
    for (std::size_t i = 0; i < N; ++i) {
        av[i] = a * values[i];
        bv[i] = b * values[i];
    }
    const bool skip_diagonal_zero = diagonal_excluded(a, b, rule);

    std::unordered_map<BigInt, std::size_t, BigIntHash> hist;
    hist.reserve(N * N);
    const auto checkpoints = growth_checkpoints(N);
    DioReport report;
    report.a = a;
    report.b = b;

    std::size_t running_max = 0;
    std::size_t next_cp = 0;
    BigInt c;
    auto add = [&](std::size_t k, std::size_t l) {
        c = av[k] + bv[l];
        if (sgn(c) == 0) {
            if (!include_zero) return;
            if (k == l && skip_diagonal_zero) return;
        }
        const std::size_t cnt = ++hist[c];
        running_max = std::max(running_max, cnt);
    };
    // Layer n adds every pair whose larger index is n, so the table after
    // layer n is exactly the histogram of the prefix of length n.
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t l = 0; l <= n; ++l) add(n, l);
        for (std::size_t k = 0; k < n; ++k) add(k, n);
        while (next_cp < checkpoints.size() && checkpoints[next_cp] == n + 1) {
            report.prefix_growth.push_back({n + 1, running_max});
            ++next_cp;
        }
    }

    report.histogram.reserve(hist.size());
    for (auto& [value, count] : hist) report.histogram.emplace_back(value, count);
    std::sort(report.histogram.begin(), report.histogram.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    report.max_count = running_max;
    for (const auto& [value, count] : report.histogram) {
        if (count == running_max) {
            report.argmax_c = value;
            break;
        }
    }
    if (report.argmax_c) {
        TwoTermQuery q{a, b, *report.argmax_c, N, sgn(*report.argmax_c) == 0 && skip_diagonal_zero};
        report.witnesses = count_two_term(seq, q).witnesses;
    }
    return report;
}

namespace {

DioProfile profile(const IntegerSequence& seq, long d, std::size_t N, bool include_zero, DiagonalRule rule) {
    if (d < 1) throw InvalidArgument("coefficient bound d must be >= 1");
    DioProfile out;
    for (long a = -d; a <= d; ++a) {
        if (a == 0) continue;
        for (long b = -d; b <= d; ++b) {
            if (b == 0) continue;
            out.emplace(CoefficientPair{a, b}, two_term_report(seq, a, b, N, include_zero, rule));
        }
    }
    return out;
}

}  // namespace

DioProfile d2_profile(const IntegerSequence& seq, long coeff_bound, std::size_t N) {
    return profile(seq, coeff_bound, N, false, DiagonalRule::ExcludeTrivialDiagonal);
}

DioProfile d2star_profile(const IntegerSequence& seq, long coeff_bound, std::size_t N, DiagonalRule rule) {
    return profile(seq, coeff_bound, N, true, rule);
}

AibeRatio aibe_ratio(const IntegerSequence& seq, long a, long b, std::size_t N) {
    const DioReport report = two_term_report(seq, a, b, N, false);
    AibeRatio out;
    for (const auto& pm : report.prefix_growth) {
        out.ratios.emplace_back(pm.N, static_cast<double>(pm.max_count) / static_cast<double>(pm.N));
    }
    return out;
}

bool has_vanishing_subsum(const std::vector<BigInt>& signed_terms) {
    const std::size_t p = signed_terms.size();
    if (p >= 63) throw InvalidArgument("subsum check limited to fewer than 63 terms");
    const std::uint64_t full = (std::uint64_t{1} << p) - 1;
    BigInt s;
    for (std::uint64_t mask = 1; mask < full; ++mask) {
        s = 0;
        for (std::size_t i = 0; i < p; ++i) {
            if (mask & (std::uint64_t{1} << i)) s += signed_terms[i];
        }
        if (sgn(s) == 0) return true;
    }
    return false;
}

namespace {

long double binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    long double r = 1;
    for (std::size_t i = 0; i < k; ++i) r = r * static_cast<long double>(n - i) / static_cast<long double>(i + 1);
    return r;
}

/// Enumerates index tuples with fixed first or last element, paired with
/// every coefficient assignment, calling visit(indices, coeffs, sum).
class TupleEnumerator {
public:
    TupleEnumerator(const std::vector<BigInt>& values, const std::vector<long>& coeffs)
        : values_(values), coeffs_(coeffs) {}

    using Visit = std::function<void(const std::vector<std::size_t>&, const std::vector<long>&, const BigInt&)>;

    /// Tuples k_1 < ... < k_len with k_len == last, a_1 > 0.
    void left_tuples(std::size_t len, std::size_t last, const Visit& visit) {
        idx_.assign(len, 0);
        co_.assign(len, 0);
        idx_[len - 1] = last;
        choose_left(0, len, 1, visit);
    }

    /// Tuples first == k_1 < ... < k_len <= N, any coefficient signs.
    void right_tuples(std::size_t len, std::size_t first, const Visit& visit) {
        idx_.assign(len, 0);
        co_.assign(len, 0);
        idx_[0] = first;
        choose_right(1, len, first + 1, visit);
    }

private:
    void choose_left(std::size_t pos, std::size_t len, std::size_t lo, const Visit& visit) {
        if (pos == len - 1) {
            assign_coeffs(0, len, true, visit);
            return;
        }
        for (std::size_t k = lo; k < idx_[len - 1]; ++k) {
            idx_[pos] = k;
            choose_left(pos + 1, len, k + 1, visit);
        }
    }

    void choose_right(std::size_t pos, std::size_t len, std::size_t lo, const Visit& visit) {
        if (pos == len) {
            assign_coeffs(0, len, false, visit);
            return;
        }
        for (std::size_t k = lo; k <= values_.size(); ++k) {
            idx_[pos] = k;
            choose_right(pos + 1, len, k + 1, visit);
        }
    }

    void assign_coeffs(std::size_t pos, std::size_t len, bool first_positive, const Visit& visit) {
        if (pos == len) {
            sum_ = 0;
            for (std::size_t i = 0; i < len; ++i) sum_ += co_[i] * values_[idx_[i] - 1];
            visit(idx_, co_, sum_);
            return;
        }
        for (long c : coeffs_) {
            if (pos == 0 && first_positive && c < 0) continue;
            co_[pos] = c;
            assign_coeffs(pos + 1, len, first_positive, visit);
        }
    }

    const std::vector<BigInt>& values_;
    const std::vector<long>& coeffs_;
    std::vector<std::size_t> idx_;
    std::vector<long> co_;
    BigInt sum_;
};

}  // namespace

MultiTermCount count_multi_term(const IntegerSequence& seq, const MultiTermQuery& query) {
    if (query.p < 2) throw InvalidArgument("multi-term query needs p >= 2");
    if (query.coeff_bound < 1) throw InvalidArgument("multi-term query needs coeff_bound >= 1");
    check_prefix(seq, query.N);

    std::vector<long> coeffs;
    const long bound = query.signed_only ? 1 : query.coeff_bound;
    for (long c = -bound; c <= bound; ++c) {
        if (c != 0) coeffs.push_back(c);
    }

    MultiTermCount result;
    if (query.p > query.N) return result;

    const std::size_t h = (query.p + 1) / 2;
    const std::size_t r = query.p - h;
    const auto m = static_cast<long double>(coeffs.size());
    const long double left_entries = binomial(query.N, h) * std::pow(m, static_cast<long double>(h)) / 2;
    const long double right_tuples = binomial(query.N, r) * std::pow(m, static_cast<long double>(r));
    const auto budget = static_cast<long double>(query.budget);
    if (left_entries > budget || right_tuples > budget) {
        throw ResourceLimit("multi-term enumeration needs about " +
                            std::to_string(static_cast<double>(std::max(left_entries, right_tuples))) +
                            " half-sums, budget is " + std::to_string(query.budget));
    }

    const auto values = seq.prefix(query.N);
    TupleEnumerator enumerator(values, coeffs);

    // Left halves are stored flat; the table maps a half-sum to record ids.
    std::vector<std::size_t> left_idx;
    std::vector<long> left_co;
    std::unordered_map<BigInt, std::vector<std::uint32_t>, BigIntHash> table;

    std::vector<BigInt> signed_terms(query.p);
    BigInt target;
    for (std::size_t t = 1; t <= query.N; ++t) {
        // Table holds every left half whose largest index is below t.
        if (t - 1 >= h) {
            enumerator.left_tuples(h, t - 1, [&](const auto& idx, const auto& co, const BigInt& sum) {
                const auto id = static_cast<std::uint32_t>(left_co.size() / h);
                left_idx.insert(left_idx.end(), idx.begin(), idx.end());
                left_co.insert(left_co.end(), co.begin(), co.end());
                table[sum].push_back(id);
            });
        }
        if (t + r - 1 > query.N) break;
        enumerator.right_tuples(r, t, [&](const auto& idx, const auto& co, const BigInt& sum) {
            target = -sum;
            const auto it = table.find(target);
            if (it == table.end()) return;
            for (const std::uint32_t id : it->second) {
                if (query.nondegenerate_only) {
                    for (std::size_t i = 0; i < h; ++i) {
                        signed_terms[i] = left_co[id * h + i] * values[left_idx[id * h + i] - 1];
                    }
                    for (std::size_t i = 0; i < r; ++i) signed_terms[h + i] = co[i] * values[idx[i] - 1];
                    if (has_vanishing_subsum(signed_terms)) continue;
                }
                ++result.count;
                if (result.witnesses.size() < query.witness_cap) {
                    MultiTermSolution sol;
                    sol.indices.assign(left_idx.begin() + id * h, left_idx.begin() + (id + 1) * h);
                    sol.coefficients.assign(left_co.begin() + id * h, left_co.begin() + (id + 1) * h);
                    sol.indices.insert(sol.indices.end(), idx.begin(), idx.end());
                    sol.coefficients.insert(sol.coefficients.end(), co.begin(), co.end());
                    result.witnesses.push_back(std::move(sol));
                }
            }
        });
    }
    return result;
}

std::size_t count_signed_nondegenerate(const IntegerSequence& seq, std::size_t p, std::size_t N,
                                       std::size_t budget) {
    MultiTermQuery q;
    q.p = p;
    q.coeff_bound = 1;
    q.N = N;
    q.signed_only = true;
    q.nondegenerate_only = true;
    q.witness_cap = 0;
    q.budget = budget;
    return count_multi_term(seq, q).count;
}

}  // namespace lacunaria
