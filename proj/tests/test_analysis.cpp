#include "lhc/analysis.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "lhc/combinatorics.hpp"
#include "lhc/errors.hpp"
#include "test_util.hpp"

using namespace lhc;

namespace {

Ensemble two_state(double p1, std::vector<double> a, std::vector<double> b) {
    return Ensemble::validated({{p1, DiagonalState::validated(std::move(a))},
                                {1 - p1, DiagonalState::validated(std::move(b))}});
}

std::vector<std::uint8_t> nth_string(std::uint64_t code, std::uint64_t n, std::size_t d) {
    std::vector<std::uint8_t> s(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        s[i] = static_cast<std::uint8_t>(code % d);
        code /= d;
    }
    return s;
}

ClassKey string_class(const std::vector<std::uint8_t>& s, const SequenceSpec& spec,
                      std::size_t d) {
    ClassKey key(spec.num_states() * d, 0);
    for (std::size_t k = 0; k < spec.num_states(); ++k)
        for (auto pos : spec.positions[k])
            ++key[k * d + s[pos - 1]];
    return key;
}

// Number of strings in a count class.
double class_size(const ClassKey& key, const SequenceSpec& spec, std::size_t d) {
    double size = 1;
    for (std::size_t k = 0; k < spec.num_states(); ++k) {
        std::vector<std::uint64_t> parts(key.begin() + static_cast<std::ptrdiff_t>(k * d),
                                         key.begin() + static_cast<std::ptrdiff_t>((k + 1) * d));
        size *= std::exp2(log2_multinomial(spec.block_counts[k], parts));
    }
    return size;
}

// Per-string probability under a class-table distribution.
double string_probability(const DiagonalDistribution& dist, const SequenceSpec& spec,
                          const std::vector<std::uint8_t>& s) {
    const std::size_t d = dist.alphabet_size;
    const auto key = string_class(s, spec, d);
    double p = dist.background * std::exp2(-static_cast<double>(spec.length()) *
                                           std::log2(static_cast<double>(d)));
    const auto it = dist.classes.find(key);
    if (it != dist.classes.end())
        p += it->second / class_size(key, spec, d);
    return p;
}

// A random instance small enough for 2^N brute force.
struct SmallInstance {
    Ensemble ensemble;
    SequenceSpec spec;
};

SmallInstance random_instance(testutil::Rng& rng, std::uint64_t max_n) {
    const std::size_t L = 1 + rng.below(3);
    SmallInstance inst{testutil::random_ensemble(rng, L, 2), {}};
    const std::uint64_t n = 4 + rng.below(max_n - 3);
    std::vector<std::uint32_t> labels(n);
    for (auto& l : labels)
        l = 1 + static_cast<std::uint32_t>(rng.below(L));
    inst.spec = block_structure(labels, L);
    return inst;
}

}  // namespace

TEST_CASE("match_probability examples") {
    const auto spec = block_structure(std::vector<std::uint32_t>{1, 2}, 2);
    const std::vector<double> w{0.25, 0.75};
    TargetCounts x;
    x.counts = {{0, 1}, {1, 0}};  // one 1 in block 1, none in block 2
    CHECK(match_probability(spec, x, w) == doctest::Approx(3.0 / 16.0).epsilon(1e-14));

    // Point-mass weights with the full counts match always.
    const std::vector<double> point{0.0, 1.0};
    TargetCounts full;
    full.counts = {{0, 1}, {0, 1}};
    CHECK(match_probability(spec, full, point) == doctest::Approx(1.0));

    // Impossible target under the weights.
    TargetCounts impossible;
    impossible.counts = {{1, 0}, {0, 1}};
    CHECK(match_probability(spec, impossible, point) == 0.0);
    CHECK(log2_match_probability(spec, impossible, point) ==
          -std::numeric_limits<double>::infinity());
}

TEST_CASE("the two match probability routes agree") {
    testutil::Rng rng(0xa1);
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t d = 2 + rng.below(2);
        const auto inst = [&] {
            const std::size_t L = 1 + rng.below(3);
            std::vector<std::uint32_t> labels(3 + rng.below(15));
            for (auto& l : labels)
                l = 1 + static_cast<std::uint32_t>(rng.below(L));
            return block_structure(labels, L);
        }();
        const auto w = testutil::random_simplex(rng, d);
        TargetCounts x;
        x.counts.resize(inst.num_states());
        for (std::size_t k = 0; k < inst.num_states(); ++k) {
            x.counts[k].assign(d, 0);
            for (std::uint64_t i = 0; i < inst.block_counts[k]; ++i)
                ++x.counts[k][rng.below(d)];
        }
        const double a = match_probability(inst, x, w);
        const double b = match_probability_positional(inst, x, w);
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
}

TEST_CASE("exact rational match probability agrees with the double route") {
    const auto spec = block_structure(std::vector<std::uint32_t>{1, 2, 1, 2, 2}, 2);
    const std::vector<BigRational> wr{BigRational(1, 4), BigRational(3, 4)};
    const std::vector<double> wd{0.25, 0.75};
    TargetCounts x;
    x.counts = {{1, 1}, {2, 1}};
    const auto exact = match_probability_exact(spec, x, wr);
    CHECK(static_cast<double>(exact.convert_to<double>()) ==
          doctest::Approx(match_probability(spec, x, wd)).epsilon(1e-12));
}

TEST_CASE("error_probability") {
    const auto s1 = CodecParams::with_size(2, 2, 1, CodecMode::fast);
    CHECK(error_probability(3.0 / 16.0, s1) == doctest::Approx(13.0 / 16.0).epsilon(1e-14));
    CHECK(error_probability(0.0, s1) == 1.0);
    CHECK(error_probability(1.0, s1) == 0.0);
    // S*R > 25 forces the error under 1e-9.
    const auto s200 = CodecParams::with_size(2, 2, 200, CodecMode::fast);
    CHECK(error_probability(0.15, s200) < 1e-9);
    // Astronomical S collapses to exactly zero without overflow.
    CHECK(error_probability(0.5, 1e6) == 0.0);
    CHECK(error_probability(1e-300, 2.0) == doctest::Approx(1.0));

    CHECK(error_probability_exact(BigRational(3, 16), 1) == BigRational(13, 16));
    CHECK(error_probability_exact(BigRational(1, 2), 3) == BigRational(1, 8));
    // The stable double evaluation tracks the rational one.
    const auto exact = error_probability_exact(BigRational(3, 16), 16);
    CHECK(error_probability(3.0 / 16.0, CodecParams::with_size(2, 2, 16, CodecMode::fast)) ==
          doctest::Approx(exact.convert_to<double>()).epsilon(1e-12));
}

TEST_CASE("sequence_error hand-computed cases") {
    // Deterministic states: a single target class, E_K = (1-R)^S.
    const auto point = two_state(0.5, {0.0, 1.0}, {1.0, 0.0});
    const auto spec = block_structure(std::vector<std::uint32_t>{1, 2, 1}, 2);
    const auto params = CodecParams::with_size(3, 2, 4, CodecMode::fast);
    const std::vector<double> w = mixture_weights(spec, point);
    TargetCounts x;
    x.counts = {{0, 2}, {1, 0}};
    const double r = match_probability(spec, x, w);
    CHECK(sequence_error(spec, point, params) ==
          doctest::Approx(std::pow(1 - r, 4)).epsilon(1e-12));

    // N=2 with one block per state of the blind example, S=1:
    // E_K = 1/2 (1 - 3/16) + 1/2 (1 - 9/16) = 5/8.
    const auto e = blind_example_ensemble();
    const auto pair = block_structure(std::vector<std::uint32_t>{1, 2}, 2);
    const auto s1 = CodecParams::with_size(2, 2, 1, CodecMode::fast);
    CHECK(sequence_error(pair, e, s1) == doctest::Approx(5.0 / 8.0).epsilon(1e-12));
}

TEST_CASE("sequence_error depends only on the block counts") {
    testutil::Rng rng(0xa2);
    const auto e = testutil::random_ensemble(rng, 2, 2);
    const auto params = CodecParams::with_size(8, 2, 16, CodecMode::fast);
    const auto a = block_structure(std::vector<std::uint32_t>{1, 1, 1, 2, 2, 2, 2, 2}, 2);
    const auto b = block_structure(std::vector<std::uint32_t>{2, 2, 1, 2, 1, 2, 1, 2}, 2);
    CHECK(sequence_error(a, e, params) == doctest::Approx(sequence_error(b, e, params)));
}

TEST_CASE("monte carlo error frequency matches exact E_K") {
    testutil::Rng rng(0xa3);
    const auto seed = testutil::test_seed(30);
    for (int rep = 0; rep < 3; ++rep) {
        const auto e = testutil::random_ensemble(rng, 2, 2);
        const auto spec = block_structure(std::vector<std::uint32_t>{1, 1, 1, 1, 2, 2, 2, 2}, 2);
        const auto params = CodecParams::with_size(8, 2, 16, CodecMode::fast);
        const double exact = sequence_error(spec, e, params);
        const std::uint64_t trials = 10000;
        std::uint64_t errors = 0;
        for (std::uint64_t t = 0; t < trials; ++t)
            errors += encode(spec, e, params, seed, rep * trials + t).index == 0 ? 1 : 0;
        const double sigma =
            std::sqrt(std::max(exact * (1 - exact), 1e-12) / static_cast<double>(trials));
        CHECK(std::abs(static_cast<double>(errors) / static_cast<double>(trials) - exact) <=
              3 * sigma + 1e-9);
    }
}

TEST_CASE("average_error basics and budget") {
    const auto e = blind_example_ensemble();
    const auto params = CodecParams::with_size(6, 2, 8, CodecMode::fast);

    // L = 1: the average is the single sequence error.
    const auto single = Ensemble::validated({{1.0, DiagonalState::validated({0.25, 0.75})}});
    const auto all1 = block_structure(std::vector<std::uint32_t>{1, 1, 1, 1, 1, 1}, 1);
    CHECK(average_error(6, single, params) ==
          doctest::Approx(sequence_error(all1, single, params)).epsilon(1e-12));

    // L = 2: direct binomial mixture over n_1.
    double manual = 0;
    for (std::uint64_t n1 = 0; n1 <= 6; ++n1) {
        std::vector<std::uint32_t> labels(6, 2);
        for (std::uint64_t i = 0; i < n1; ++i)
            labels[i] = 1;
        manual += binomial_pmf(6, 0.5, n1) *
                  sequence_error(block_structure(labels, 2), e, params);
    }
    CHECK(average_error(6, e, params) == doctest::Approx(manual).epsilon(1e-12));

    // The class budget is enforced, with the offending count reported.
    CHECK_THROWS_AS(average_error(6, e, params, 2.0), BudgetExceeded);
    try {
        sequence_error(block_structure(std::vector<std::uint32_t>{1, 1, 2, 2}, 2), e, params,
                       1.5);
        FAIL("expected BudgetExceeded");
    } catch (const BudgetExceeded& ex) {
        CHECK(ex.class_count > 1.5);
    }
}

TEST_CASE("average error falls with N at fixed rate margin") {
    const auto e = blind_example_ensemble();
    const double info = levitin_holevo(e);
    const double e10 = average_error(
        10, e, CodecParams::with_log2_size(10, 2, 10 * (info + 0.3), CodecMode::fast));
    const double e20 = average_error(
        20, e, CodecParams::with_log2_size(20, 2, 20 * (info + 0.3), CodecMode::fast));
    CHECK(e20 < e10);
}

TEST_CASE("average_error_report windowed maximum") {
    const auto e = blind_example_ensemble();
    const auto params = CodecParams::with_size(12, 2, 64, CodecMode::fast);
    const auto report = average_error_report(12, e, params);
    CHECK(report.eta == doctest::Approx(0.1));
    CHECK(report.average_error >= 0);
    CHECK(report.average_error <= 1);
    // The windowed maximum dominates every in-window sequence error; spot
    // check the typical counts (6, 6).
    const auto typical = block_structure(
        std::vector<std::uint32_t>{1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2}, 2);
    CHECK(report.windowed_max_sequence_error >=
          sequence_error(typical, e, params) - 1e-12);
}

TEST_CASE("alice_distribution classes") {
    // Point-mass states collapse to a single certain class.
    const auto point = two_state(0.5, {0.0, 1.0}, {1.0, 0.0});
    const auto spec = block_structure(std::vector<std::uint32_t>{1, 2, 1}, 2);
    const auto alice = alice_distribution(spec, point);
    REQUIRE(alice.classes.size() == 1);
    CHECK(alice.classes.begin()->second == doctest::Approx(1.0));
    CHECK(alice.classes.begin()->first == ClassKey{0, 2, 1, 0});
    CHECK(alice.background == 0.0);

    // Random ensembles normalize.
    testutil::Rng rng(0xa4);
    for (int rep = 0; rep < 20; ++rep) {
        const auto inst = random_instance(rng, 20);
        CHECK(alice_distribution(inst.spec, inst.ensemble).total_mass() ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("alice per-string probabilities match the product law") {
    testutil::Rng rng(0xa5);
    for (int rep = 0; rep < 10; ++rep) {
        const auto inst = random_instance(rng, 12);
        const auto alice = alice_distribution(inst.spec, inst.ensemble);
        const std::uint64_t n = inst.spec.length();
        // lambda of the state owning each position.
        std::vector<const std::vector<double>*> site(n);
        for (std::size_t k = 0; k < inst.spec.num_states(); ++k)
            for (auto pos : inst.spec.positions[k])
                site[pos - 1] = &inst.ensemble.entries[k].state.eigenvalues;
        for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code) {
            const auto s = nth_string(code, n, 2);
            double direct = 1;
            for (std::uint64_t i = 0; i < n; ++i)
                direct *= (*site[i])[s[i]];
            const double tabled = string_probability(alice, inst.spec, s);
            CHECK(tabled == doctest::Approx(direct).epsilon(1e-10));
        }
    }
}

TEST_CASE("bob_distribution mass and the error-free collapse") {
    testutil::Rng rng(0xa6);
    for (int rep = 0; rep < 10; ++rep) {
        const auto inst = random_instance(rng, 14);
        const auto params = CodecParams::with_size(inst.spec.length(), 2, 16, CodecMode::fast);
        const auto bob = bob_distribution(inst.spec, inst.ensemble, params);
        CHECK(bob.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    }

    // With S so large that every E(x,v) vanishes exactly, Bob's table is
    // Alice's, bit for bit.
    for (int rep = 0; rep < 10; ++rep) {
        const auto inst = random_instance(rng, 12);
        const auto params =
            CodecParams::with_log2_size(inst.spec.length(), 2, 500.0, CodecMode::fast);
        const auto alice = alice_distribution(inst.spec, inst.ensemble);
        const auto bob = bob_distribution(inst.spec, inst.ensemble, params);
        CHECK(bob.background == 0.0);
        REQUIRE(bob.classes.size() == alice.classes.size());
        for (const auto& [key, mass] : alice.classes) {
            REQUIRE(bob.classes.count(key) == 1);
            CHECK(bob.classes.at(key) == mass);  // exact equality
        }
    }
}

TEST_CASE("fidelity closed forms") {
    const auto point = two_state(0.5, {0.0, 1.0}, {1.0, 0.0});
    const auto spec = block_structure(std::vector<std::uint32_t>{1, 2, 1, 2}, 2);
    const auto alice = alice_distribution(spec, point);
    CHECK(fidelity(alice, alice) == doctest::Approx(1.0));

    // Point mass against the fully mixed background: d^(-N/2).
    DiagonalDistribution uniform;
    uniform.block_counts = alice.block_counts;
    uniform.alphabet_size = 2;
    uniform.background = 1.0;
    CHECK(fidelity(alice, uniform) == doctest::Approx(std::exp2(-2.0)).epsilon(1e-12));

    DiagonalDistribution wrong = uniform;
    wrong.block_counts = {1, 2};
    CHECK_THROWS_AS(fidelity(alice, wrong), ContractViolation);
}

TEST_CASE("class-factorized fidelity equals the brute-force sum") {
    testutil::Rng rng(0xa7);
    for (int rep = 0; rep < 50; ++rep) {
        const auto inst = random_instance(rng, 12);
        const auto params = CodecParams::with_size(
            inst.spec.length(), 2, 1 + rng.below(32), CodecMode::fast);
        const auto alice = alice_distribution(inst.spec, inst.ensemble);
        const auto bob = bob_distribution(inst.spec, inst.ensemble, params);
        const double fast_f = fidelity(alice, bob);
        double brute = 0;
        const std::uint64_t n = inst.spec.length();
        for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code) {
            const auto s = nth_string(code, n, 2);
            brute += std::sqrt(string_probability(alice, inst.spec, s) *
                               string_probability(bob, inst.spec, s));
        }
        CHECK(fast_f == doctest::Approx(brute).epsilon(1e-12));

        // Bound chain on the same instance.
        const double ek = sequence_error(inst.spec, inst.ensemble, params);
        CHECK(fidelity_lower_bound(ek) <= fast_f + 1e-12);
        CHECK(fast_f <= 1.0 + 1e-12);
    }
    CHECK(fidelity_lower_bound(0.0) == 1.0);
    CHECK(fidelity_lower_bound(0.25) == doctest::Approx(0.75));
}

TEST_CASE("typical_match_probability") {
    const auto e = blind_example_ensemble();
    // N=4: nbar=(2,2), typical counts (2 ones | 1 one), p = C(2,2)C(2,1)/C(4,3) = 1/2.
    CHECK(typical_match_probability(e, 4).value == doctest::Approx(-1.0).epsilon(1e-12));

    const auto single = Ensemble::validated({{1.0, DiagonalState::validated({0.25, 0.75})}});
    CHECK(typical_match_probability(single, 4).value == doctest::Approx(0.0).epsilon(1e-9));

    // -log2(p)/N approaches I from one side along the grid.
    const double info = levitin_holevo(e);
    double prev_gap = 1e300;
    for (std::uint64_t n : {40, 80, 160, 400}) {
        const double rate = -typical_match_probability(e, n).value / static_cast<double>(n);
        const double gap = std::abs(rate - info);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
    CHECK(prev_gap < 0.15);
}

TEST_CASE("blind_counterexample") {
    const auto r4 = blind_counterexample(4);
    CHECK(r4.flip_error == BigRational(2, 3));
    CHECK(r4.compatible_sequences == 3);
    CHECK(r4.typical_states == 4);
    for (std::uint64_t n = 4; n <= 128; n += 4)
        CHECK(blind_counterexample(n).flip_error == BigRational(2, 3));
    CHECK(std::abs(blind_counterexample(4000).rate_bits_per_signal - 0.8113) < 0.02);
    CHECK_THROWS_AS(blind_counterexample(6), ContractViolation);
    CHECK_THROWS_AS(blind_counterexample(0), ContractViolation);
}

TEST_CASE("basis_overhead") {
    CHECK(basis_overhead(7, 2) == 6);
    CHECK(basis_overhead(1, 2) == 2);
    const double per_signal = static_cast<double>(basis_overhead(1000000, 2)) / 1e6;
    CHECK(per_signal < 5e-5);

    // Adding the overhead leaves the excess-rate trend intact.
    const auto e = blind_example_ensemble();
    double prev = 1e300;
    for (std::uint64_t n : {100, 1000, 10000}) {
        const auto params = CodecParams::with_log2_size(
            n, 2, static_cast<double>(n) * (levitin_holevo(e) + 1.0 / std::sqrt(
                static_cast<double>(n))), CodecMode::fast);
        const double bits = static_cast<double>(message_bit_length(params, 2) +
                                                basis_overhead(n, 2));
        const auto report = make_rate_report(n, bits, e);
        CHECK(report.excess_rate < prev);
        prev = report.excess_rate;
    }
}

TEST_CASE("rate report fields") {
    const auto e = blind_example_ensemble();
    const auto report = make_rate_report(10, 25.0, e);
    CHECK(report.n == 10);
    CHECK(report.total_bits == doctest::Approx(25.0));
    CHECK(report.bits_per_signal == doctest::Approx(2.5));
    CHECK(report.levitin_holevo_reference == doctest::Approx(levitin_holevo(e)));
    CHECK(report.excess_rate == doctest::Approx(2.5 - levitin_holevo(e)));
}

TEST_CASE("class_count") {
    CHECK(class_count(std::vector<std::uint64_t>{2, 2}, 2) == doctest::Approx(9.0));
    CHECK(class_count(std::vector<std::uint64_t>{3}, 3) == doctest::Approx(10.0));
    CHECK(class_count(std::vector<std::uint64_t>{}, 2) == doctest::Approx(1.0));
}
