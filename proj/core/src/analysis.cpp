#include "lhc/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numeric>

#include "lhc/errors.hpp"

namespace lhc {

namespace {

// Visits every composition of n into `parts` nonnegative integers.
void for_each_composition(std::uint64_t n, std::size_t parts,
                          const std::function<void(const std::vector<std::uint64_t>&)>& fn) {
    std::vector<std::uint64_t> buf(parts, 0);
    std::function<void(std::size_t, std::uint64_t)> rec = [&](std::size_t idx,
                                                              std::uint64_t left) {
        if (idx + 1 == parts) {
            buf[idx] = left;
            fn(buf);
            return;
        }
        for (std::uint64_t v = 0; v <= left; ++v) {
            buf[idx] = v;
            rec(idx + 1, left - v);
        }
    };
    if (parts == 0)
        return;
    rec(0, n);
}

BigInt big_factorial(std::uint64_t n) {
    BigInt f = 1;
    for (std::uint64_t i = 2; i <= n; ++i)
        f *= i;
    return f;
}

BigInt big_multinomial(std::uint64_t n, std::span<const std::uint64_t> parts) {
    BigInt denom = 1;
    std::uint64_t sum = 0;
    for (auto p : parts) {
        denom *= big_factorial(p);
        sum += p;
    }
    if (sum != n)
        throw ContractViolation("big_multinomial: parts do not sum to n");
    return big_factorial(n) / denom;
}

BigInt big_binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n)
        return 0;
    const std::uint64_t parts[2] = {k, n - k};
    return big_multinomial(n, parts);
}

double log2_big(const BigInt& v) {
    if (v <= 0)
        throw ContractViolation("log2_big: nonpositive value");
    const unsigned bits = boost::multiprecision::msb(v);
    if (bits <= 62)
        return std::log2(v.convert_to<double>());
    const BigInt top = v >> (bits - 62);
    return std::log2(top.convert_to<double>()) + static_cast<double>(bits - 62);
}

void check_counts(const SequenceSpec& spec, const TargetCounts& x, std::size_t d) {
    if (x.counts.size() != spec.num_states())
        throw ContractViolation("target counts: wrong block count");
    for (std::size_t k = 0; k < x.counts.size(); ++k) {
        if (x.counts[k].size() != d)
            throw ContractViolation("target counts: wrong alphabet size");
        std::uint64_t sum = 0;
        for (auto c : x.counts[k])
            sum += c;
        if (sum != spec.block_counts[k])
            throw ContractViolation("target counts: block sum mismatch");
    }
}

// Canonical sequence with the given counts: blocks laid out as runs.
SequenceSpec spec_from_counts(std::span<const std::uint64_t> counts) {
    std::vector<std::uint32_t> labels;
    for (std::size_t k = 0; k < counts.size(); ++k)
        labels.insert(labels.end(), counts[k], static_cast<std::uint32_t>(k + 1));
    return block_structure(labels, counts.size());
}

// Largest-remainder rounding of `targets` to integers summing to `total`.
std::vector<std::uint64_t> round_preserving_sum(std::span<const double> targets,
                                                std::uint64_t total) {
    const std::size_t m = targets.size();
    std::vector<std::uint64_t> out(m);
    std::vector<std::pair<double, std::size_t>> rema(m);
    std::uint64_t assigned = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double f = std::floor(targets[i]);
        out[i] = static_cast<std::uint64_t>(std::max(f, 0.0));
        assigned += out[i];
        rema[i] = {targets[i] - f, i};
    }
    std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first)
            return a.first > b.first;
        return a.second < b.second;
    });
    std::size_t i = 0;
    while (assigned < total) {
        ++out[rema[i % m].second];
        ++assigned;
        ++i;
    }
    while (assigned > total) {  // can happen only via negative inputs; keep safe
        if (out[rema[m - 1 - (i % m)].second] > 0) {
            --out[rema[m - 1 - (i % m)].second];
            --assigned;
        }
        ++i;
    }
    return out;
}

}  // namespace

std::uint64_t DiagonalDistribution::length() const {
    return std::accumulate(block_counts.begin(), block_counts.end(), std::uint64_t{0});
}

double DiagonalDistribution::total_mass() const {
    double m = background;
    for (const auto& [key, p] : classes)
        m += p;
    return m;
}

double class_count(std::span<const std::uint64_t> block_counts, std::size_t d) {
    double total = 1;
    for (auto n : block_counts)
        total *= std::exp2(log2_binomial(n + d - 1, d - 1));
    return total;
}

double log2_match_probability(const SequenceSpec& spec, const TargetCounts& x,
                              std::span<const double> weights) {
    const std::size_t d = weights.size();
    check_counts(spec, x, d);
    double lg = 0;
    for (std::size_t k = 0; k < spec.num_states(); ++k) {
        lg += log2_multinomial(spec.block_counts[k], x.counts[k]);
        for (std::size_t j = 0; j < d; ++j) {
            if (x.counts[k][j] == 0)
                continue;
            if (weights[j] == 0)
                return -std::numeric_limits<double>::infinity();
            lg += static_cast<double>(x.counts[k][j]) * std::log2(weights[j]);
        }
    }
    return std::min(lg, 0.0);
}

double match_probability(const SequenceSpec& spec, const TargetCounts& x,
                         std::span<const double> weights) {
    return std::exp2(log2_match_probability(spec, x, weights));
}

double match_probability_positional(const SequenceSpec& spec, const TargetCounts& x,
                                    std::span<const double> weights) {
    const std::size_t d = weights.size();
    check_counts(spec, x, d);
    const std::uint64_t n = spec.length();
    std::vector<std::uint64_t> totals(d, 0);
    for (std::size_t k = 0; k < spec.num_states(); ++k)
        for (std::size_t j = 0; j < d; ++j)
            totals[j] += x.counts[k][j];
    // Q: probability the string has these symbol totals at all.
    const double q = multinomial_pmf(n, weights, totals);
    if (q == 0)
        return 0;
    // Positional factor: ratio of arrangements honoring the blocks.
    double lg = -log2_multinomial(n, totals);
    for (std::size_t k = 0; k < spec.num_states(); ++k)
        lg += log2_multinomial(spec.block_counts[k], x.counts[k]);
    return q * std::exp2(lg);
}

BigRational match_probability_exact(const SequenceSpec& spec, const TargetCounts& x,
                                    std::span<const BigRational> weights) {
    const std::size_t d = weights.size();
    check_counts(spec, x, d);
    BigRational r = 1;
    for (std::size_t k = 0; k < spec.num_states(); ++k) {
        r *= BigRational(big_multinomial(spec.block_counts[k], x.counts[k]));
        for (std::size_t j = 0; j < d; ++j) {
            for (std::uint64_t c = 0; c < x.counts[k][j]; ++c)
                r *= weights[j];
            if (x.counts[k][j] > 0 && weights[j] == 0)
                return 0;
        }
    }
    return r;
}

double error_probability(double match_prob, double s_log2) {
    if (match_prob < 0 || match_prob > 1)
        throw ContractViolation("error_probability: R outside [0,1]");
    if (match_prob == 0)
        return 1;
    if (match_prob == 1)
        return 0;
    // (1-R)^S = exp(-A), A = S * (-log1p(-R)); A built in log2 to survive
    // codebook sizes far beyond the integer range.
    const double neg_l1p = -std::log1p(-match_prob);
    const double a_log2 = s_log2 + std::log2(neg_l1p);
    if (a_log2 > 60)
        return 0;
    return std::exp(-std::exp2(a_log2));
}

double error_probability(double match_prob, const CodecParams& params) {
    return error_probability(match_prob, params.codebook_log2);
}

BigRational error_probability_exact(const BigRational& match_prob, std::uint64_t s) {
    if (match_prob < 0 || match_prob > 1)
        throw ContractViolation("error_probability_exact: R outside [0,1]");
    if (s > 1000000)
        throw ContractViolation("error_probability_exact: S too large for rational mode");
    BigRational base = 1 - match_prob;
    BigRational result = 1;
    std::uint64_t e = s;
    while (e > 0) {
        if (e & 1)
            result *= base;
        base *= base;
        e >>= 1;
    }
    return result;
}

namespace {

// Per-block tables driving the exact class sums: for each composition of
// n_k, its probability under lambda^k and its log2 match term under the
// mixture weights.
struct BlockTable {
    std::vector<std::vector<std::uint64_t>> comps;
    std::vector<double> pmf;        // P(x_k)
    std::vector<double> match_lg;   // log2 multinomial + sum x log2 P_j
};

std::vector<BlockTable> build_block_tables(const SequenceSpec& spec, const Ensemble& ensemble,
                                           double class_budget) {
    const std::size_t d = ensemble.dimension();
    if (class_count(spec.block_counts, d) > class_budget)
        throw BudgetExceeded("sequence_error: count-class table exceeds budget",
                             class_count(spec.block_counts, d));
    const std::vector<double> weights = mixture_weights(spec, ensemble);
    std::vector<BlockTable> tables(spec.num_states());
    for (std::size_t k = 0; k < spec.num_states(); ++k) {
        auto& tab = tables[k];
        const auto& lambda = ensemble.entries[k].state.eigenvalues;
        for_each_composition(spec.block_counts[k], d, [&](const std::vector<std::uint64_t>& x) {
            const double p = multinomial_pmf(spec.block_counts[k], lambda, x);
            if (p == 0)
                return;
            double lg = log2_multinomial(spec.block_counts[k], x);
            bool possible = true;
            for (std::size_t j = 0; j < d; ++j) {
                if (x[j] == 0)
                    continue;
                if (weights[j] == 0) {
                    possible = false;
                    break;
                }
                lg += static_cast<double>(x[j]) * std::log2(weights[j]);
            }
            tab.comps.push_back(x);
            tab.pmf.push_back(p);
            tab.match_lg.push_back(possible ? lg : -std::numeric_limits<double>::infinity());
        });
    }
    return tables;
}

// Runs fn(weight, match_log2, class_key) over the product of block tables.
void for_each_class(const std::vector<BlockTable>& tables, std::size_t d,
                    const std::function<void(double, double, const ClassKey&)>& fn) {
    const std::size_t blocks = tables.size();
    std::vector<std::size_t> idx(blocks, 0);
    ClassKey key(blocks * d, 0);
    while (true) {
        double weight = 1;
        double match_lg = 0;
        for (std::size_t k = 0; k < blocks; ++k) {
            weight *= tables[k].pmf[idx[k]];
            match_lg += tables[k].match_lg[idx[k]];
            for (std::size_t j = 0; j < d; ++j)
                key[k * d + j] = tables[k].comps[idx[k]][j];
        }
        fn(weight, match_lg, key);
        std::size_t k = 0;
        while (k < blocks && ++idx[k] == tables[k].comps.size()) {
            idx[k] = 0;
            ++k;
        }
        if (k == blocks)
            break;
    }
}

}  // namespace

double sequence_error(const SequenceSpec& spec, const Ensemble& ensemble,
                      const CodecParams& params, double class_budget) {
    const std::size_t d = ensemble.dimension();
    const auto tables = build_block_tables(spec, ensemble, class_budget);
    double total = 0;
    for_each_class(tables, d, [&](double weight, double match_lg, const ClassKey&) {
        total += weight * error_probability(std::exp2(match_lg), params);
    });
    return std::min(total, 1.0);
}

AverageErrorReport average_error_report(std::uint64_t n, const Ensemble& ensemble,
                                        const CodecParams& params, double eta,
                                        double class_budget) {
    const std::size_t num_states = ensemble.size();
    const std::size_t d = ensemble.dimension();
    std::vector<double> probs(num_states);
    for (std::size_t k = 0; k < num_states; ++k)
        probs[k] = ensemble.entries[k].weight;

    // Budget pass over all count vectors first.
    double budget_used = 0;
    for_each_composition(n, num_states, [&](const std::vector<std::uint64_t>& counts) {
        if (multinomial_pmf(n, probs, counts) == 0)
            return;
        budget_used += class_count(counts, d);
    });
    if (budget_used > class_budget)
        throw BudgetExceeded("average_error: total count-class table exceeds budget", budget_used);

    std::vector<IntWindow> windows(num_states);
    for (std::size_t k = 0; k < num_states; ++k)
        windows[k] = concentration_window(n, probs[k], eta);

    AverageErrorReport report;
    report.eta = eta;
    for_each_composition(n, num_states, [&](const std::vector<std::uint64_t>& counts) {
        const double weight = multinomial_pmf(n, probs, counts);
        if (weight == 0)
            return;
        const SequenceSpec spec = spec_from_counts(counts);
        const double ek = sequence_error(spec, ensemble, params, class_budget);
        report.average_error += weight * ek;
        bool in_window = true;
        for (std::size_t k = 0; k < num_states; ++k)
            if (!windows[k].contains(static_cast<std::int64_t>(counts[k])))
                in_window = false;
        if (in_window)
            report.windowed_max_sequence_error =
                std::max(report.windowed_max_sequence_error, ek);
    });
    report.average_error = std::min(report.average_error, 1.0);
    return report;
}

double average_error(std::uint64_t n, const Ensemble& ensemble, const CodecParams& params,
                     double class_budget) {
    return average_error_report(n, ensemble, params, 0.1, class_budget).average_error;
}

DiagonalDistribution alice_distribution(const SequenceSpec& spec, const Ensemble& ensemble) {
    const std::size_t d = ensemble.dimension();
    const auto tables = build_block_tables(spec, ensemble, kDefaultClassBudget);
    DiagonalDistribution dist;
    dist.block_counts = spec.block_counts;
    dist.alphabet_size = d;
    for_each_class(tables, d, [&](double weight, double, const ClassKey& key) {
        dist.classes[key] = weight;
    });
    return dist;
}

DiagonalDistribution bob_distribution(const SequenceSpec& spec, const Ensemble& ensemble,
                                      const CodecParams& params, double class_budget) {
    const std::size_t d = ensemble.dimension();
    const auto tables = build_block_tables(spec, ensemble, class_budget);
    DiagonalDistribution dist;
    dist.block_counts = spec.block_counts;
    dist.alphabet_size = d;
    for_each_class(tables, d, [&](double weight, double match_lg, const ClassKey& key) {
        const double err = error_probability(std::exp2(match_lg), params);
        if (err < 1)
            dist.classes[key] = weight * (1 - err);
        dist.background += weight * err;
    });
    return dist;
}

double fidelity(const DiagonalDistribution& a, const DiagonalDistribution& b) {
    if (a.block_counts != b.block_counts || a.alphabet_size != b.alphabet_size)
        throw ContractViolation("fidelity: mismatched block structure");
    const std::size_t d = a.alphabet_size;
    const std::size_t blocks = a.block_counts.size();
    const double n = static_cast<double>(a.length());
    const double log2_dn = n * std::log2(static_cast<double>(d));

    // log2 of the class size prod_k multinomial(n_k; x_k).
    const auto size_log2 = [&](const ClassKey& key) {
        double lg = 0;
        for (std::size_t k = 0; k < blocks; ++k)
            lg += log2_multinomial(a.block_counts[k],
                                   std::span<const std::uint64_t>(&key[k * d], d));
        return lg;
    };

    double f = 0;
    double covered_fraction = 0;
    auto it_a = a.classes.begin();
    auto it_b = b.classes.begin();
    // Merge over the union of both class tables.
    while (it_a != a.classes.end() || it_b != b.classes.end()) {
        const ClassKey* key;
        double ma = 0, mb = 0;
        if (it_b == b.classes.end() || (it_a != a.classes.end() && it_a->first < it_b->first)) {
            key = &it_a->first;
            ma = it_a->second;
            ++it_a;
        } else if (it_a == a.classes.end() || it_b->first < it_a->first) {
            key = &it_b->first;
            mb = it_b->second;
            ++it_b;
        } else {
            key = &it_a->first;
            ma = it_a->second;
            mb = it_b->second;
            ++it_a;
            ++it_b;
        }
        // Class fraction of the full d^N space; stays finite for any N.
        const double sfrac = std::exp2(size_log2(*key) - log2_dn);
        covered_fraction += sfrac;
        f += std::sqrt((ma + a.background * sfrac) * (mb + b.background * sfrac));
    }
    const double rest = std::max(0.0, 1.0 - covered_fraction);
    f += rest * std::sqrt(a.background * b.background);
    return std::min(f, 1.0);
}

double fidelity_lower_bound(double sequence_error) {
    if (sequence_error < 0 || sequence_error > 1)
        throw ContractViolation("fidelity_lower_bound: E_K outside [0,1]");
    return 1.0 - sequence_error;
}

LogProb typical_match_probability(const Ensemble& ensemble, std::uint64_t n) {
    const std::size_t num_states = ensemble.size();
    const std::size_t d = ensemble.dimension();
    std::vector<double> count_targets(num_states);
    for (std::size_t k = 0; k < num_states; ++k)
        count_targets[k] = static_cast<double>(n) * ensemble.entries[k].weight;
    const std::vector<std::uint64_t> nbar = round_preserving_sum(count_targets, n);

    std::vector<std::uint64_t> totals(d, 0);
    double lg = 0;
    for (std::size_t k = 0; k < num_states; ++k) {
        std::vector<double> sym_targets(d);
        for (std::size_t j = 0; j < d; ++j)
            sym_targets[j] =
                static_cast<double>(nbar[k]) * ensemble.entries[k].state.eigenvalues[j];
        const std::vector<std::uint64_t> xbar = round_preserving_sum(sym_targets, nbar[k]);
        lg += log2_multinomial(nbar[k], xbar);
        for (std::size_t j = 0; j < d; ++j)
            totals[j] += xbar[j];
    }
    lg -= log2_multinomial(n, totals);
    return LogProb{std::min(lg, 0.0)};
}

BlindReport blind_counterexample(std::uint64_t n) {
    if (n == 0 || n % 4 != 0)
        throw ContractViolation("blind_counterexample: N must be a positive multiple of 4");
    BlindReport report;
    report.n = n;
    const std::uint64_t three_quarters = 3 * n / 4;
    const std::uint64_t half = n / 2;
    report.compatible_sequences = big_binomial(three_quarters, half);
    report.typical_states = big_binomial(n, three_quarters);
    report.flip_error = BigRational(big_binomial(three_quarters - 1, half - 1),
                                    report.compatible_sequences);
    report.rate_bits_per_signal = log2_big(report.typical_states) / static_cast<double>(n);
    return report;
}

std::uint64_t basis_overhead(std::uint64_t n, std::size_t d) {
    if (n < 1)
        throw ContractViolation("basis_overhead: N < 1");
    const auto bits_per_state = static_cast<std::uint64_t>(std::bit_width(n + 1) - 1);
    return static_cast<std::uint64_t>(d) * bits_per_state;
}

RateReport make_rate_report(std::uint64_t n, double total_bits, const Ensemble& ensemble) {
    RateReport r;
    r.n = n;
    r.total_bits = total_bits;
    r.bits_per_signal = total_bits / static_cast<double>(n);
    r.levitin_holevo_reference = levitin_holevo(ensemble);
    r.excess_rate = r.bits_per_signal - r.levitin_holevo_reference;
    return r;
}

}  // namespace lhc
