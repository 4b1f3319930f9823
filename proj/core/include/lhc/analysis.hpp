#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "lhc/codec.hpp"
#include "lhc/combinatorics.hpp"
#include "lhc/ensemble.hpp"

// Exact protocol analysis. Everything is organized around count classes:
// the set of basis strings sharing a per-block symbol-count vector. Both
// Alice's and Bob's diagonal output distributions are uniform inside each
// class, so tables indexed by class scale polynomially in N where a
// per-string representation would need d^N entries.

namespace lhc {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

// Flattened per-block symbol counts: entry k*d + j holds x_{k,j}.
using ClassKey = std::vector<std::uint64_t>;

struct DiagonalDistribution {
    std::vector<std::uint64_t> block_counts;  // n_k
    std::size_t alphabet_size = 2;
    std::map<ClassKey, double> classes;       // total class probability
    double background = 0;                    // weight on the uniform d^N term

    std::uint64_t length() const;  // N
    double total_mass() const;
};

// Number of count classes prod_k C(n_k + d - 1, d - 1); exact sums refuse
// to run past this budget.
double class_count(std::span<const std::uint64_t> block_counts, std::size_t d);
inline constexpr double kDefaultClassBudget = 1e7;

// Probability that one codebook string carries exactly x_{k,j} copies of
// symbol j inside every block: product over blocks of multinomial pmfs.
double match_probability(const SequenceSpec& spec, const TargetCounts& x,
                         std::span<const double> weights);
double log2_match_probability(const SequenceSpec& spec, const TargetCounts& x,
                              std::span<const double> weights);
// Same quantity via the factorization Q(total) * positional ratio;
// kept as an independent algebraic route for cross-checking.
double match_probability_positional(const SequenceSpec& spec, const TargetCounts& x,
                                    std::span<const double> weights);
// Exact rational route (weights given as rationals).
BigRational match_probability_exact(const SequenceSpec& spec, const TargetCounts& x,
                                    std::span<const BigRational> weights);

// E(x, v) = (1 - R)^S, evaluated via exp(S log1p(-R)).
double error_probability(double match_prob, const CodecParams& params);
double error_probability(double match_prob, double s_log2);
BigRational error_probability_exact(const BigRational& match_prob, std::uint64_t s);

// E_K = sum_x P(x) E(x, v) over all target-count classes.
double sequence_error(const SequenceSpec& spec, const Ensemble& ensemble,
                      const CodecParams& params, double class_budget = kDefaultClassBudget);

// E = sum over count vectors (n_1..n_L) of their multinomial probability
// times E_K; E_K depends on the sequence only through its counts.
double average_error(std::uint64_t n, const Ensemble& ensemble, const CodecParams& params,
                     double class_budget = kDefaultClassBudget);

struct AverageErrorReport {
    double average_error = 0;           // full sum over all count vectors
    double windowed_max_sequence_error = 0;  // max E_K, counts inside the eta-window
    double eta = 0.1;
};
AverageErrorReport average_error_report(std::uint64_t n, const Ensemble& ensemble,
                                        const CodecParams& params, double eta = 0.1,
                                        double class_budget = kDefaultClassBudget);

// Alice's diagonal output distribution (class form of the product state).
DiagonalDistribution alice_distribution(const SequenceSpec& spec, const Ensemble& ensemble);

// Bob's output: per class P(x)[1 - E(x,v)] plus the error mass spread
// uniformly over all d^N strings.
DiagonalDistribution bob_distribution(const SequenceSpec& spec, const Ensemble& ensemble,
                                      const CodecParams& params,
                                      double class_budget = kDefaultClassBudget);

// Bhattacharyya overlap sum_m sqrt(p_m q_m), evaluated class by class.
double fidelity(const DiagonalDistribution& a, const DiagonalDistribution& b);

// Fidelity bound F >= 1 - E_K.
double fidelity_lower_bound(double sequence_error);

// The typical-sequence match probability p of the rate heuristic:
// prod_k multinomial(nbar_k; nbar_k lambda^k) / multinomial(N; N Pbar),
// with typical counts rounded to integers (largest-remainder repair).
LogProb typical_match_probability(const Ensemble& ensemble, std::uint64_t n);

// The blind-scenario counterexample quantities (N must be a multiple of 4).
struct BlindReport {
    std::uint64_t n = 0;
    BigRational flip_error;         // exactly 2/3
    BigInt compatible_sequences;    // q = C(3N/4, N/2)
    BigInt typical_states;          // g = C(N, 3N/4)
    double rate_bits_per_signal = 0;  // log2(g)/N
};
BlindReport blind_counterexample(std::uint64_t n);

// Bit cost of shipping the d eigenbasis states via symmetric-subspace
// compression: d * floor(log2(N+1)).
std::uint64_t basis_overhead(std::uint64_t n, std::size_t d);

// --- report records ----------------------------------------------------

struct ErrorReport {
    std::uint64_t n = 0;
    double s_log2 = 0;
    double average_error = 0;          // E
    double windowed_max_sequence_error = 0;
    bool exact = true;
};

struct RateReport {
    std::uint64_t n = 0;
    double total_bits = 0;
    double bits_per_signal = 0;
    double levitin_holevo_reference = 0;
    double excess_rate = 0;  // f_N = bits/N - I
};

RateReport make_rate_report(std::uint64_t n, double total_bits, const Ensemble& ensemble);

}  // namespace lhc
