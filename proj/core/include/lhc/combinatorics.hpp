#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "lhc/random.hpp"

// Log-domain binomial/multinomial machinery plus the two binomial
// distribution properties the protocol analysis relies on: the
// concentration window and the half-Gaussian lower bound on the pmf.

namespace lhc {

// A probability held as log2. value <= 0, or -inf for probability zero.
struct LogProb {
    double value = -std::numeric_limits<double>::infinity();

    static LogProb impossible() { return {}; }
    static LogProb certain() { return {0.0}; }
    static LogProb from_linear(double p);

    bool is_impossible() const { return value == -std::numeric_limits<double>::infinity(); }
    double to_linear() const;
};

// Nonnegative integer counts with their sum.
struct CountVector {
    std::vector<std::uint64_t> counts;
    std::uint64_t total() const;
};

// log2 of n! / prod(parts_i!). Exact integer arithmetic for n <= 20,
// lgamma-based beyond (absolute error well below 1e-9).
// Requires sum(parts) == n.
double log2_multinomial(std::uint64_t n, std::span<const std::uint64_t> parts);
double log2_multinomial(std::uint64_t n, const CountVector& parts);
double log2_binomial(std::uint64_t n, std::uint64_t k);

// (n choose y) p^y (1-p)^(n-y), evaluated in the log domain.
double binomial_pmf(std::uint64_t n, double p, std::uint64_t y);

// pmf of the multinomial(n, weights) vector `counts`.
double multinomial_pmf(std::uint64_t n, std::span<const double> weights,
                       std::span<const std::uint64_t> counts);

// Integer window [p n - n^(1/2+eta), p n + n^(1/2+eta)], rounded outward so
// that boundary integers such as ceil(p n + n^0.6) count as inside, then
// clipped to [0, n].
struct IntWindow {
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    bool contains(std::int64_t y) const { return lo <= y && y <= hi; }
};
IntWindow concentration_window(std::uint64_t n, double p, double eta);

// Exact binomial mass on the concentration window (compensated summation).
double concentration_window_mass(std::uint64_t n, double p, double eta);

// Checks Q_y > (1/2) exp(-(y-np)^2 / (2 n p (1-p))) / sqrt(2 pi n p (1-p))
// with the exact pmf on the left. y must lie inside the window.
bool gaussian_lower_bound_holds(std::uint64_t n, double p, std::uint64_t y, double eta);

// Binomial(n, p) draw consuming exactly one u64: inverse CDF with an
// ascending scan for n <= 64, a mode-centered scan beyond.
std::uint64_t sample_binomial(std::uint64_t n, double p, RandomStream& stream);

// Multinomial(n, weights) draw via sequential conditional binomials;
// consumes exactly weights.size()-1 u64s. out.size() == weights.size().
void sample_multinomial(std::uint64_t n, std::span<const double> weights,
                        RandomStream& stream, std::span<std::uint64_t> out);

}  // namespace lhc
