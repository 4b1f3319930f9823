#include <benchmark/benchmark.h>

#include <vector>

#include "lhc/analysis.hpp"
#include "lhc/codec.hpp"
#include "lhc/combinatorics.hpp"
#include "lhc/ensemble.hpp"
#include "lhc/random.hpp"

using namespace lhc;

namespace {

SharedSeed bench_seed() {
    SharedSeed s;
    s.key[0] = 0xb3;
    s.session_label = "bench";
    return s;
}

SequenceSpec alternating_spec(std::uint64_t n) {
    std::vector<std::uint32_t> labels(n);
    for (std::uint64_t i = 0; i < n; ++i)
        labels[i] = 1 + static_cast<std::uint32_t>(i % 2);
    return block_structure(labels, 2);
}

void bm_sample_biased_string(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    auto stream = derive_stream(bench_seed(), "bench-string", 0);
    const std::vector<double> weights{0.25, 0.75};
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_biased_string(stream, n, weights));
        stream.seek(0);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n));
}
BENCHMARK(bm_sample_biased_string)->Arg(64)->Arg(1024)->Arg(16384);

void bm_log2_multinomial(benchmark::State& state) {
    const auto n = static_cast<std::uint64_t>(state.range(0));
    const std::vector<std::uint64_t> parts{n / 2, n - n / 2};
    for (auto _ : state)
        benchmark::DoNotOptimize(log2_multinomial(n, parts));
}
BENCHMARK(bm_log2_multinomial)->Arg(16)->Arg(1000)->Arg(100000);

void bm_encode_fast(benchmark::State& state) {
    const auto n = static_cast<std::uint64_t>(state.range(0));
    const auto e = blind_example_ensemble();
    const auto spec = alternating_spec(n);
    const auto params = CodecParams::with_log2_size(
        n, 2, static_cast<double>(n) * (levitin_holevo(e) + 0.25), CodecMode::fast);
    const auto seed = bench_seed();
    std::uint64_t t = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(encode(spec, e, params, seed, t++));
}
BENCHMARK(bm_encode_fast)->Arg(64)->Arg(512)->Arg(4096);

void bm_encode_literal(benchmark::State& state) {
    const auto e = blind_example_ensemble();
    const auto spec = alternating_spec(16);
    const auto params =
        CodecParams::with_size(16, 2, static_cast<std::uint64_t>(state.range(0)),
                               CodecMode::literal);
    const auto seed = bench_seed();
    std::uint64_t t = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(encode(spec, e, params, seed, t++));
}
BENCHMARK(bm_encode_literal)->Arg(16)->Arg(256)->Arg(4096);

void bm_sequence_error(benchmark::State& state) {
    const auto n = static_cast<std::uint64_t>(state.range(0));
    const auto e = blind_example_ensemble();
    const auto spec = alternating_spec(n);
    const auto params = CodecParams::with_log2_size(
        n, 2, static_cast<double>(n) * (levitin_holevo(e) + 0.25), CodecMode::fast);
    for (auto _ : state)
        benchmark::DoNotOptimize(sequence_error(spec, e, params));
}
BENCHMARK(bm_sequence_error)->Arg(16)->Arg(64)->Arg(256);

void bm_average_error(benchmark::State& state) {
    const auto n = static_cast<std::uint64_t>(state.range(0));
    const auto e = blind_example_ensemble();
    const auto params = CodecParams::with_log2_size(
        n, 2, static_cast<double>(n) * (levitin_holevo(e) + 0.25), CodecMode::fast);
    for (auto _ : state)
        benchmark::DoNotOptimize(average_error(n, e, params));
}
BENCHMARK(bm_average_error)->Arg(16)->Arg(40)->Arg(80);

void bm_fidelity(benchmark::State& state) {
    const auto n = static_cast<std::uint64_t>(state.range(0));
    const auto e = blind_example_ensemble();
    const auto spec = alternating_spec(n);
    const auto params = CodecParams::with_size(n, 2, 64, CodecMode::fast);
    const auto alice = alice_distribution(spec, e);
    const auto bob = bob_distribution(spec, e, params);
    for (auto _ : state)
        benchmark::DoNotOptimize(fidelity(alice, bob));
}
BENCHMARK(bm_fidelity)->Arg(16)->Arg(64)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
