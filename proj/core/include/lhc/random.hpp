#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lhc {

// The random number generator Alice and Bob share. Both sides hold the same
// 256-bit seed; every protocol role (codebook generation, target-count
// sampling, tie breaking, error fill) derives its own stream so that
// consumption in one role never desynchronizes another.
struct SharedSeed {
    std::array<std::uint8_t, 32> key{};
    std::string session_label;

    // Parses a 64-hex-character seed string.
    static SharedSeed from_hex(std::string_view hex64, std::string session_label);
    std::string to_hex() const;
};

// Deterministic counter-mode keyed stream. Output is a pure function of
// (seed, session_label, purpose, sequence_index, position); two parties
// deriving with equal arguments read bitwise-identical values.
class RandomStream {
  public:
    RandomStream(const SharedSeed& seed, std::string_view purpose, std::uint64_t sequence_index);

    std::uint64_t next_u64();

    // Uniform double in [0,1) with 53 random bits. Consumes one u64.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Number of u64 outputs consumed so far.
    std::uint64_t position() const { return position_; }

    // Rewind/advance; replaying from an earlier position repeats outputs.
    void seek(std::uint64_t position);

  private:
    void refill();

    std::array<std::uint32_t, 8> key_words_{};
    std::uint64_t nonce_ = 0;
    std::uint64_t position_ = 0;
    std::array<std::uint64_t, 8> block_{};
    std::uint64_t block_index_ = ~std::uint64_t{0};  // counter of the buffered block
};

RandomStream derive_stream(const SharedSeed& seed, std::string_view purpose,
                           std::uint64_t sequence_index);

// Stream purposes used by the protocol.
namespace purpose {
inline constexpr std::string_view codebook = "codebook";
inline constexpr std::string_view target_counts = "target-counts";
inline constexpr std::string_view choice = "choice";
inline constexpr std::string_view error_fill = "error-fill";
inline constexpr std::string_view source = "source";
}  // namespace purpose

// Length-n string with i.i.d. symbols from `weights` (one weight per symbol).
// Consumes exactly one u64 per symbol regardless of the sampled values, so
// encoder and decoder cursors stay aligned.
std::vector<std::uint8_t> sample_biased_string(RandomStream& stream, std::size_t n,
                                               std::span<const double> weights);

// Single symbol via inverse CDF on one u64.
std::uint8_t sample_symbol(RandomStream& stream, std::span<const double> weights);

}  // namespace lhc
