// Acceptance gate: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lhc/analysis.hpp"
#include "lhc/codec.hpp"
#include "lhc/combinatorics.hpp"
#include "lhc/ensemble.hpp"
#include "lhc/errors.hpp"
#include "lhc/experiment.hpp"
#include "lhc/random.hpp"
#include "test_util.hpp"

using namespace lhc;

namespace {

int failures = 0;

void report(int number, const std::string& name, bool ok, const std::string& detail = "") {
    std::printf("[%s] %d. %s%s%s\n", ok ? "PASS" : "FAIL", number, name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok)
        ++failures;
}

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

double class_size(const ClassKey& key, const SequenceSpec& spec, std::size_t d) {
    double size = 1;
    for (std::size_t k = 0; k < spec.num_states(); ++k) {
        std::vector<std::uint64_t> parts(key.begin() + static_cast<std::ptrdiff_t>(k * d),
                                         key.begin() + static_cast<std::ptrdiff_t>((k + 1) * d));
        size *= std::exp2(log2_multinomial(spec.block_counts[k], parts));
    }
    return size;
}

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

// ---------------------------------------------------------------------------

void criterion_1() {
    const auto e = blind_example_ensemble();
    const double s = entropy_bits(average_state(e));
    const double i = levitin_holevo(e);
    char detail[96];
    std::snprintf(detail, sizeof(detail), "S(rho)=%.6f I=%.6f", s, i);
    report(1, "information quantities of the reference ensemble",
           std::abs(s - 0.8113) < 1e-4 && std::abs(i - 0.3113) < 1e-4, detail);
}

void criterion_2() {
    bool ok = true;
    for (std::uint64_t n = 4; n <= 128; n += 4)
        ok = ok && blind_counterexample(n).flip_error == BigRational(2, 3);
    const double rate = blind_counterexample(4000).rate_bits_per_signal;
    ok = ok && std::abs(rate - 0.8113) < 0.02;
    char detail[96];
    std::snprintf(detail, sizeof(detail), "flip=2/3, log2(g)/N at N=4000: %.4f", rate);
    report(2, "blind counterexample", ok, detail);
}

void criterion_3() {
    const auto e = blind_example_ensemble();
    const double info = levitin_holevo(e);
    bool ok = true;
    std::vector<double> values;
    for (std::uint64_t n : {10, 20, 40, 80}) {
        const auto params = CodecParams::with_log2_size(
            n, 2, static_cast<double>(n) * (info + 0.25), CodecMode::fast);
        values.push_back(average_error(n, e, params));
        if (values.size() > 1 && values.back() > values[values.size() - 2] + 1e-15)
            ok = false;
    }
    ok = ok && values.back() < values.front();
    char detail[128];
    std::snprintf(detail, sizeof(detail), "E(10)=%.4g E(20)=%.4g E(40)=%.4g E(80)=%.4g",
                  values[0], values[1], values[2], values[3]);
    report(3, "average error nonincreasing at fixed rate margin", ok, detail);
}

bool mode_equivalence_exact() {
    // N=4, S=2, d=2, exact rationals for the joint (flag, string) law.
    const std::size_t d = 2;
    const auto spec = block_structure(std::vector<std::uint32_t>{1, 2, 2, 1}, 2);
    const std::vector<std::vector<BigRational>> lambda{
        {BigRational(3, 4), BigRational(1, 4)}, {BigRational(1, 2), BigRational(1, 2)}};
    const std::vector<BigRational> p{BigRational(5, 8), BigRational(3, 8)};

    std::vector<BigRational> q(16);
    std::vector<ClassKey> key(16);
    for (std::uint64_t code = 0; code < 16; ++code) {
        const auto s = nth_string(code, 4, d);
        BigRational prob = 1;
        for (auto sym : s)
            prob *= p[sym];
        q[code] = prob;
        key[code] = string_class(s, spec, d);
    }

    std::map<std::pair<int, std::uint64_t>, BigRational> lit, fast;
    for (std::uint64_t x1 = 0; x1 <= 2; ++x1) {
        for (std::uint64_t x2 = 0; x2 <= 2; ++x2) {
            BigRational px = 1;
            px *= x1 == 1 ? 2 : 1;
            for (std::uint64_t i = 0; i < x1; ++i) px *= lambda[0][1];
            for (std::uint64_t i = 0; i < 2 - x1; ++i) px *= lambda[0][0];
            px *= x2 == 1 ? 2 : 1;
            for (std::uint64_t i = 0; i < x2; ++i) px *= lambda[1][1];
            for (std::uint64_t i = 0; i < 2 - x2; ++i) px *= lambda[1][0];

            const ClassKey xkey{2 - x1, x1, 2 - x2, x2};
            BigRational r = 0;
            std::uint64_t members = 0;
            for (std::uint64_t code = 0; code < 16; ++code)
                if (key[code] == xkey) {
                    r += q[code];
                    ++members;
                }

            for (std::uint64_t a = 0; a < 16; ++a) {
                for (std::uint64_t b = 0; b < 16; ++b) {
                    const BigRational pair = px * q[a] * q[b];
                    const bool ma = key[a] == xkey, mb = key[b] == xkey;
                    if (!ma && !mb) {
                        for (std::uint64_t s = 0; s < 16; ++s)
                            lit[{1, s}] += pair / 16;
                    } else if (ma && mb) {
                        lit[{0, a}] += pair / 2;
                        lit[{0, b}] += pair / 2;
                    } else {
                        lit[{0, ma ? a : b}] += pair;
                    }
                }
            }

            const BigRational err = (1 - r) * (1 - r);
            for (std::uint64_t s = 0; s < 16; ++s)
                fast[{1, s}] += px * err / 16;
            if (members > 0) {
                const BigRational share = px * (1 - err) / members;
                for (std::uint64_t code = 0; code < 16; ++code)
                    if (key[code] == xkey)
                        fast[{0, code}] += share;
            }
        }
    }

    for (int flag = 0; flag <= 1; ++flag)
        for (std::uint64_t s = 0; s < 16; ++s)
            if (lit[{flag, s}] != fast[{flag, s}])
                return false;
    return true;
}

void criterion_4() {
    const bool exact_ok = mode_equivalence_exact();

    const auto e = two_state(0.5, {0.95, 0.05}, {0.85, 0.15});
    const auto spec = block_structure(std::vector<std::uint32_t>{1, 1, 1, 1, 2, 2, 2, 2}, 2);
    const auto lit = CodecParams::with_size(8, 2, 16, CodecMode::literal);
    const auto fast = CodecParams::with_size(8, 2, 16, CodecMode::fast);
    const auto seed = testutil::test_seed(101);
    const std::uint64_t trials = 100000;
    std::vector<std::int64_t> diff(512, 0);
    for (std::uint64_t t = 0; t < trials; ++t) {
        const auto ml = encode(spec, e, lit, seed, t);
        const auto sl = decode(ml, e, lit, seed, t);
        const auto mf = encode(spec, e, fast, seed, t);
        const auto sf = decode(mf, e, fast, seed, t, &spec);
        std::uint64_t cl = ml.index == 0 ? 256 : 0, cf = mf.index == 0 ? 256 : 0;
        for (int i = 0; i < 8; ++i) {
            cl |= static_cast<std::uint64_t>(sl[i]) << i;
            cf |= static_cast<std::uint64_t>(sf[i]) << i;
        }
        ++diff[cl];
        --diff[cf];
    }
    double tv = 0;
    for (auto c : diff)
        tv += std::abs(static_cast<double>(c));
    tv /= 2.0 * static_cast<double>(trials);

    char detail[96];
    std::snprintf(detail, sizeof(detail), "exact joint %s, empirical TV=%.4f",
                  exact_ok ? "equal" : "DIFFERS", tv);
    report(4, "literal/fast mode equivalence", exact_ok && tv < 0.02, detail);
}

void criterion_5() {
    testutil::Rng rng(0x5a5);
    bool brute_ok = true, bound_ok = true, collapse_ok = true;
    double worst = 0;
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t L = 1 + rng.below(3);
        const auto e = testutil::random_ensemble(rng, L, 2);
        const std::uint64_t n = 4 + rng.below(9);  // N in 4..12
        std::vector<std::uint32_t> labels(n);
        for (auto& l : labels)
            l = 1 + static_cast<std::uint32_t>(rng.below(L));
        const auto spec = block_structure(labels, L);
        const auto params = CodecParams::with_size(n, 2, 1 + rng.below(32), CodecMode::fast);

        const auto alice = alice_distribution(spec, e);
        const auto bob = bob_distribution(spec, e, params);
        const double fast_f = fidelity(alice, bob);
        double brute = 0;
        for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code) {
            const auto s = nth_string(code, n, 2);
            brute += std::sqrt(string_probability(alice, spec, s) *
                               string_probability(bob, spec, s));
        }
        worst = std::max(worst, std::abs(fast_f - brute));
        if (std::abs(fast_f - brute) > 1e-12)
            brute_ok = false;
        const double ek = sequence_error(spec, e, params);
        if (fidelity_lower_bound(ek) > fast_f + 1e-12)
            bound_ok = false;

        // All-errorless collapse: astronomically large S kills every E(x,v).
        const auto huge = CodecParams::with_log2_size(n, 2, 500.0, CodecMode::fast);
        const auto bob0 = bob_distribution(spec, e, huge);
        if (bob0.background != 0.0 || bob0.classes != alice.classes)
            collapse_ok = false;
    }
    char detail[96];
    std::snprintf(detail, sizeof(detail), "max |factorized - brute| = %.2e", worst);
    report(5, "fidelity machinery against brute force", brute_ok && bound_ok && collapse_ok,
           detail);
}

void criterion_6() {
    testutil::Rng rng(0x6b6);
    const auto seed = testutil::test_seed(102);
    const auto spec = block_structure(std::vector<std::uint32_t>{1, 1, 1, 1, 2, 2, 2, 2}, 2);
    const auto params = CodecParams::with_size(8, 2, 16, CodecMode::fast);
    bool ok = true;
    for (int rep = 0; rep < 10; ++rep) {
        const auto e = testutil::random_ensemble(rng, 2, 2);
        const double exact = sequence_error(spec, e, params);
        const std::uint64_t trials = 10000;
        std::uint64_t errors = 0;
        for (std::uint64_t t = 0; t < trials; ++t)
            errors += encode(spec, e, params, seed,
                             static_cast<std::uint64_t>(rep) * trials + t).index == 0;
        const double freq = static_cast<double>(errors) / static_cast<double>(trials);
        const double sigma =
            std::sqrt(std::max(exact * (1 - exact), 1e-12) / static_cast<double>(trials));
        if (std::abs(freq - exact) > 3 * sigma + 1e-9)
            ok = false;
    }
    report(6, "Monte Carlo error frequency vs exact E_K (10 ensembles)", ok);
}

void criterion_7() {
    const auto e = blind_example_ensemble();
    const double info = levitin_holevo(e);
    bool ok = true;
    double gap = 1e300;
    for (std::uint64_t n : {40, 80, 160, 400}) {
        const double rate = -typical_match_probability(e, n).value / static_cast<double>(n);
        const double g = std::abs(rate - info);
        if (g >= gap)
            ok = false;
        gap = g;
    }
    ok = ok && gap < 0.15;
    char detail[64];
    std::snprintf(detail, sizeof(detail), "|rate - I| at N=400: %.4f", gap);
    report(7, "rate heuristic -log2(p)/N approaches I", ok, detail);
}

void criterion_8() {
    bool mass_ok = true;
    for (double p : {0.25, 0.5, 0.9})
        mass_ok = mass_ok && concentration_window_mass(10000, p, 0.1) > 0.999;

    std::uint64_t scanned = 0, violations = 0;
    for (std::uint64_t n : {200, 400, 800}) {
        for (double p : {0.2, 0.5, 0.75}) {
            const IntWindow w = concentration_window(n, p, 0.1);
            for (std::int64_t y = w.lo; y <= w.hi; ++y) {
                ++scanned;
                if (!gaussian_lower_bound_holds(n, p, static_cast<std::uint64_t>(y), 0.1))
                    ++violations;
            }
        }
    }
    char detail[128];
    std::snprintf(detail, sizeof(detail),
                  "mass %s; gaussian bound violated at %llu of %llu window points",
                  mass_ok ? "ok" : "LOW", static_cast<unsigned long long>(violations),
                  static_cast<unsigned long long>(scanned));
    report(8, "binomial concentration and gaussian lower bound", mass_ok && violations == 0,
           detail);
}

void criterion_9() {
#ifndef LHC_CLI_PATH
    report(9, "golden-file bit-exactness", false, "CLI path not configured");
#else
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "lhc_acceptance_golden";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string ensemble = (dir / "ensemble.json").string();
    {
        std::ofstream out(ensemble);
        out << blind_example_ensemble().to_json_text();
    }
    const std::string labels = (dir / "labels.json").string();
    {
        std::ofstream out(labels);
        out << R"({"sequences": [[1,2,2,1,1,2,1,2], [2,2,1,1,2,1,2,1]]})";
    }
    const std::string seed(64, 'a');

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
    };
    auto run = [&](const std::string& args) {
        const std::string cmd =
            std::string(LHC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };

    bool ok = true;
    for (int pass = 1; pass <= 2; ++pass) {
        const fs::path out = dir / ("sim" + std::to_string(pass));
        ok = ok && run("simulate --ensemble " + ensemble + " --seed " + seed +
                       " --n 6,10 --s-policy explicit:16 --mode fast --trials 30 --out " +
                       out.string());
        ok = ok && run("encode --ensemble " + ensemble + " --seed " + seed + " --in " +
                       labels + " --s-policy explicit:16 --mode fast --out " +
                       (dir / ("stream" + std::to_string(pass) + ".lhc")).string());
    }
    ok = ok && !slurp(dir / "sim1" / "results.csv").empty();
    ok = ok && slurp(dir / "sim1" / "results.csv") == slurp(dir / "sim2" / "results.csv");
    ok = ok && slurp(dir / "sim1" / "summary.json") == slurp(dir / "sim2" / "summary.json");
    ok = ok && !slurp(dir / "stream1.lhc").empty();
    ok = ok && slurp(dir / "stream1.lhc") == slurp(dir / "stream2.lhc");
    fs::remove_all(dir);
    report(9, "golden-file bit-exactness of CLI outputs", ok);
#endif
}

}  // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    const auto seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%d/9 criteria passed in %.1f s\n", 9 - failures, seconds);
    return failures == 0 ? 0 : 1;
}
