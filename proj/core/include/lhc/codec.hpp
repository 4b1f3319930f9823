#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lhc/ensemble.hpp"
#include "lhc/random.hpp"

// Encoder/decoder for the shared-randomness protocol. Literal mode really
// enumerates the S shared codebook strings; fast mode reproduces the exact
// joint distribution of (error flag, decoded string) without enumerating a
// codebook, which lets rate experiments run at sizes where S is astronomical.

namespace lhc {

// A concrete length-N sequence of state labels with its block structure.
struct SequenceSpec {
    std::vector<std::uint32_t> labels;                   // k_i in 1..L
    std::vector<std::uint64_t> block_counts;             // n_k, size L
    std::vector<std::vector<std::uint32_t>> positions;   // v_k, 1-based, ascending

    std::uint64_t length() const { return labels.size(); }
    std::size_t num_states() const { return block_counts.size(); }
};

// Derives counts n_k and sorted disjoint position lists v_k.
SequenceSpec block_structure(std::span<const std::uint32_t> labels, std::size_t num_states);

// x_{k,j}: for each block k, how many positions should carry symbol j.
struct TargetCounts {
    std::vector<std::vector<std::uint64_t>> counts;  // [block][symbol]
};

enum class CodecMode { literal, fast };

struct CodecParams {
    std::uint64_t sequence_length = 0;  // N
    std::size_t alphabet_size = 2;      // d
    CodecMode mode = CodecMode::fast;
    // S is kept exact while it fits an integer; codebook_log2 is always set.
    std::uint64_t codebook_size = 0;    // 0 when only the log2 form is usable
    double codebook_log2 = 0;
    std::uint64_t literal_cap = std::uint64_t{1} << 24;

    bool size_is_exact() const { return codebook_size != 0; }
    double codebook_size_as_double() const;

    static CodecParams with_size(std::uint64_t n, std::size_t d, std::uint64_t s,
                                 CodecMode mode);
    static CodecParams with_log2_size(std::uint64_t n, std::size_t d, double log2_s,
                                      CodecMode mode);
};

// Bit-exact message: count header (n_1..n_{L-1}), then the codebook index,
// 0 meaning error. Fast mode appends the sampled target counts in place of
// a real index; rate accounting still charges message_bit_length.
struct Message {
    std::vector<std::uint64_t> header_counts;  // n_1..n_{L-1}
    std::uint64_t index = 0;
    std::optional<TargetCounts> fast_counts;
};

// Field widths: counts use floor(log2 N)+1 bits, the index floor(log2(S+1))+1.
unsigned count_field_width(std::uint64_t n);
unsigned index_field_width(const CodecParams& params);
std::uint64_t message_bit_length(const CodecParams& params, std::size_t num_states);

// P_j = sum_k n_k lambda_j^k / N -- the mixture the codebook strings are
// drawn from; uses the actual counts of the sequence, not the ensemble
// average.
std::vector<double> mixture_weights(const SequenceSpec& spec, const Ensemble& ensemble);

// Step 1(a): per-block multinomial(n_k, lambda^k) target counts.
TargetCounts sample_target_counts(const SequenceSpec& spec, const Ensemble& ensemble,
                                  RandomStream& stream);

Message encode(const SequenceSpec& spec, const Ensemble& ensemble, const CodecParams& params,
               const SharedSeed& seed, std::uint64_t seq_index);

// Literal mode regenerates Alice's codebook and returns string number t
// (index 0: a uniform string, sampling the diagonal of the maximally mixed
// error state). Fast mode rebuilds a uniform member of the transmitted count
// class; that needs the block layout, which the caller supplies (it is
// information the literal index would have carried).
std::vector<std::uint8_t> decode(const Message& msg, const Ensemble& ensemble,
                                 const CodecParams& params, const SharedSeed& seed,
                                 std::uint64_t seq_index,
                                 const SequenceSpec* fast_layout = nullptr);

// S = N a_N b_N with a_N = sqrt(N) e^(alpha N^0.2) / K and
// b_N = 2^(N I + N^0.7), so log2(S)/N = I + f_N with f_N -> 0.
CodecParams paper_S_schedule(std::uint64_t n, const Ensemble& ensemble, double big_k,
                             double alpha, CodecMode mode = CodecMode::fast);

// --- wire format ------------------------------------------------------

std::vector<std::uint8_t> serialize_message(const Message& msg, const CodecParams& params,
                                            std::size_t num_states);
Message deserialize_message(std::span<const std::uint8_t> payload, std::uint64_t bit_length,
                            const CodecParams& params, std::size_t num_states);
std::uint64_t serialized_bit_length(const Message& msg, const CodecParams& params,
                                    std::size_t num_states);

// Compressed-stream file: magic "LHC1", then per-sequence records
// (seq_index: 64-bit LE, payload bit-length: 32-bit LE, payload bytes).
struct StreamRecord {
    std::uint64_t seq_index = 0;
    std::uint32_t bit_length = 0;
    std::vector<std::uint8_t> payload;
};

void write_stream_file(const std::string& path, std::span<const StreamRecord> records);
std::vector<StreamRecord> read_stream_file(const std::string& path);

}  // namespace lhc
