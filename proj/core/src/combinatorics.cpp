#include "lhc/combinatorics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lhc/errors.hpp"

namespace lhc {

namespace {

constexpr double kLn2 = 0.6931471805599453;

// n! as an exact integer, n <= 20.
std::uint64_t factorial_u64(std::uint64_t n) {
    std::uint64_t f = 1;
    for (std::uint64_t i = 2; i <= n; ++i)
        f *= i;
    return f;
}

double log2_factorial(std::uint64_t n) {
    if (n <= 20)
        return std::log2(static_cast<double>(factorial_u64(n)));
    return std::lgamma(static_cast<double>(n) + 1.0) / kLn2;
}

// x log2(w) with the 0 * log2(0) == 0 convention.
double xlog2(double x, double w) {
    if (x == 0)
        return 0;
    return x * std::log2(w);
}

}  // namespace

LogProb LogProb::from_linear(double p) {
    if (p < 0 || p > 1)
        throw ContractViolation("LogProb: probability outside [0,1]");
    if (p == 0)
        return impossible();
    return {std::log2(p)};
}

double LogProb::to_linear() const {
    if (is_impossible())
        return 0;
    return std::exp2(value);
}

std::uint64_t CountVector::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

double log2_multinomial(std::uint64_t n, std::span<const std::uint64_t> parts) {
    std::uint64_t sum = 0;
    for (auto p : parts)
        sum += p;
    if (sum != n)
        throw ContractViolation("log2_multinomial: parts do not sum to n");
    if (n <= 20) {
        // Exact: the coefficient itself is an integer that fits in 64 bits.
        std::uint64_t denom = 1;
        for (auto p : parts)
            denom *= factorial_u64(p);
        return std::log2(static_cast<double>(factorial_u64(n)) / static_cast<double>(denom));
    }
    double v = log2_factorial(n);
    for (auto p : parts)
        v -= log2_factorial(p);
    return std::max(v, 0.0);
}

double log2_multinomial(std::uint64_t n, const CountVector& parts) {
    return log2_multinomial(n, std::span<const std::uint64_t>(parts.counts));
}

double log2_binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n)
        throw ContractViolation("log2_binomial: k > n");
    const std::uint64_t parts[2] = {k, n - k};
    return log2_multinomial(n, parts);
}

double binomial_pmf(std::uint64_t n, double p, std::uint64_t y) {
    if (y > n)
        throw ContractViolation("binomial_pmf: y > n");
    if (p < 0 || p > 1)
        throw ContractViolation("binomial_pmf: p outside [0,1]");
    if (p == 0)
        return y == 0 ? 1.0 : 0.0;
    if (p == 1)
        return y == n ? 1.0 : 0.0;
    const double lg = log2_binomial(n, y) + xlog2(static_cast<double>(y), p) +
                      xlog2(static_cast<double>(n - y), 1.0 - p);
    return std::exp2(lg);
}

double multinomial_pmf(std::uint64_t n, std::span<const double> weights,
                       std::span<const std::uint64_t> counts) {
    if (weights.size() != counts.size())
        throw ContractViolation("multinomial_pmf: size mismatch");
    double lg = log2_multinomial(n, counts);
    for (std::size_t j = 0; j < counts.size(); ++j) {
        if (counts[j] > 0 && weights[j] == 0)
            return 0.0;
        lg += xlog2(static_cast<double>(counts[j]), weights[j]);
    }
    return std::exp2(lg);
}

IntWindow concentration_window(std::uint64_t n, double p, double eta) {
    if (n < 1)
        throw ContractViolation("concentration_window: n < 1");
    const double center = p * static_cast<double>(n);
    const double half = std::pow(static_cast<double>(n), 0.5 + eta);
    IntWindow w;
    w.lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(center - half)));
    w.hi = std::min<std::int64_t>(static_cast<std::int64_t>(n),
                                  static_cast<std::int64_t>(std::ceil(center + half)));
    return w;
}

double concentration_window_mass(std::uint64_t n, double p, double eta) {
    const IntWindow w = concentration_window(n, p, eta);
    // Kahan summation over the window.
    double sum = 0, c = 0;
    for (std::int64_t y = w.lo; y <= w.hi; ++y) {
        const double term = binomial_pmf(n, p, static_cast<std::uint64_t>(y)) - c;
        const double t = sum + term;
        c = (t - sum) - term;
        sum = t;
    }
    return std::min(sum, 1.0);
}

bool gaussian_lower_bound_holds(std::uint64_t n, double p, std::uint64_t y, double eta) {
    if (p <= 0 || p >= 1)
        throw ContractViolation("gaussian_lower_bound_holds: need 0 < p < 1");
    const IntWindow w = concentration_window(n, p, eta);
    if (!w.contains(static_cast<std::int64_t>(y)))
        throw ContractViolation("gaussian_lower_bound_holds: y outside the window");
    const double np = static_cast<double>(n) * p;
    const double var = np * (1.0 - p);
    const double dev = static_cast<double>(y) - np;
    const double rhs = 0.5 * std::exp(-dev * dev / (2.0 * var)) / std::sqrt(2.0 * M_PI * var);
    return binomial_pmf(n, p, y) > rhs;
}

std::uint64_t sample_binomial(std::uint64_t n, double p, RandomStream& stream) {
    if (p < 0 || p > 1)
        throw ContractViolation("sample_binomial: p outside [0,1]");
    const double u = stream.next_unit();  // always consume exactly one draw
    if (p == 0 || n == 0)
        return 0;
    if (p == 1)
        return n;
    const double q = 1.0 - p;
    const double ratio = p / q;
    if (n <= 64) {
        // Ascending inverse-CDF scan with the multiplicative pmf recurrence.
        double pmf = std::pow(q, static_cast<double>(n));
        double cum = pmf;
        std::uint64_t y = 0;
        while (cum <= u && y < n) {
            pmf *= ratio * static_cast<double>(n - y) / static_cast<double>(y + 1);
            ++y;
            cum += pmf;
        }
        return y;
    }
    // Mode-centered inverse CDF: walk outward from the mode, always taking
    // the larger remaining side first. Exact marginal, O(sqrt(n p q))
    // expected scan length, still a single uniform.
    const std::uint64_t mode =
        std::min<std::uint64_t>(n, static_cast<std::uint64_t>((static_cast<double>(n) + 1) * p));
    const double mode_pmf = binomial_pmf(n, p, mode);
    double cum = mode_pmf;
    if (u < cum)
        return mode;
    double lo_pmf = mode_pmf, hi_pmf = mode_pmf;
    std::int64_t lo = static_cast<std::int64_t>(mode), hi = static_cast<std::int64_t>(mode);
    const auto step_down = [&]() {
        lo_pmf *= static_cast<double>(lo) / (ratio * static_cast<double>(n - lo + 1));
        --lo;
    };
    const auto step_up = [&]() {
        hi_pmf *= ratio * static_cast<double>(n - hi) / static_cast<double>(hi + 1);
        ++hi;
    };
    while (lo > 0 || hi < static_cast<std::int64_t>(n)) {
        const double next_lo =
            lo > 0 ? lo_pmf * static_cast<double>(lo) / (ratio * static_cast<double>(n - lo + 1))
                   : -1.0;
        const double next_hi =
            hi < static_cast<std::int64_t>(n)
                ? hi_pmf * ratio * static_cast<double>(n - hi) / static_cast<double>(hi + 1)
                : -1.0;
        if (next_hi >= next_lo) {
            step_up();
            cum += hi_pmf;
            if (u < cum)
                return static_cast<std::uint64_t>(hi);
        } else {
            step_down();
            cum += lo_pmf;
            if (u < cum)
                return static_cast<std::uint64_t>(lo);
        }
    }
    return mode;  // numerical remainder; mass at this point is ~ulp level
}

void sample_multinomial(std::uint64_t n, std::span<const double> weights, RandomStream& stream,
                        std::span<std::uint64_t> out) {
    if (out.size() != weights.size())
        throw ContractViolation("sample_multinomial: size mismatch");
    std::uint64_t remaining = n;
    double weight_left = 1.0;
    for (std::size_t j = 0; j + 1 < weights.size(); ++j) {
        const double cond = weight_left > 0 ? std::clamp(weights[j] / weight_left, 0.0, 1.0) : 0.0;
        out[j] = sample_binomial(remaining, cond, stream);
        remaining -= out[j];
        weight_left -= weights[j];
    }
    out[weights.size() - 1] = remaining;
}

}  // namespace lhc
