#include "lhc/codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "lhc/analysis.hpp"
#include "lhc/bitio.hpp"
#include "lhc/combinatorics.hpp"
#include "lhc/errors.hpp"

namespace lhc {

namespace {

void check_compatible(const SequenceSpec& spec, const Ensemble& ensemble) {
    if (spec.num_states() != ensemble.size())
        throw ContractViolation("sequence/ensemble state count mismatch");
}

// Does `s` carry exactly x_{k,j} copies of each symbol j at positions v_k?
bool matches_target(const std::vector<std::uint8_t>& s, const SequenceSpec& spec,
                    const TargetCounts& x, std::size_t d) {
    for (std::size_t k = 0; k < spec.num_states(); ++k) {
        std::vector<std::uint64_t> got(d, 0);
        for (std::uint32_t pos : spec.positions[k])
            ++got[s[pos - 1]];
        for (std::size_t j = 0; j < d; ++j)
            if (got[j] != x.counts[k][j])
                return false;
    }
    return true;
}

}  // namespace

SequenceSpec block_structure(std::span<const std::uint32_t> labels, std::size_t num_states) {
    if (num_states == 0)
        throw ContractViolation("block_structure: num_states == 0");
    SequenceSpec spec;
    spec.labels.assign(labels.begin(), labels.end());
    spec.block_counts.assign(num_states, 0);
    spec.positions.assign(num_states, {});
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const std::uint32_t k = labels[i];
        if (k < 1 || k > num_states)
            throw ContractViolation("block_structure: label outside 1..L");
        ++spec.block_counts[k - 1];
        spec.positions[k - 1].push_back(static_cast<std::uint32_t>(i + 1));
    }
    return spec;
}

double CodecParams::codebook_size_as_double() const {
    return size_is_exact() ? static_cast<double>(codebook_size) : std::exp2(codebook_log2);
}

CodecParams CodecParams::with_size(std::uint64_t n, std::size_t d, std::uint64_t s,
                                   CodecMode mode) {
    if (s == 0)
        throw ContractViolation("CodecParams: S must be >= 1");
    CodecParams p;
    p.sequence_length = n;
    p.alphabet_size = d;
    p.mode = mode;
    p.codebook_size = s;
    p.codebook_log2 = std::log2(static_cast<double>(s));
    return p;
}

CodecParams CodecParams::with_log2_size(std::uint64_t n, std::size_t d, double log2_s,
                                        CodecMode mode) {
    if (log2_s < 0)
        throw ContractViolation("CodecParams: log2(S) must be >= 0");
    if (log2_s <= 62.0) {
        const auto s = static_cast<std::uint64_t>(std::llround(std::exp2(log2_s)));
        return with_size(n, d, std::max<std::uint64_t>(1, s), mode);
    }
    CodecParams p;
    p.sequence_length = n;
    p.alphabet_size = d;
    p.mode = mode;
    p.codebook_size = 0;
    p.codebook_log2 = log2_s;
    return p;
}

unsigned count_field_width(std::uint64_t n) {
    if (n == 0)
        throw ContractViolation("count_field_width: N == 0");
    return std::bit_width(n);  // floor(log2 N) + 1
}

unsigned index_field_width(const CodecParams& params) {
    if (params.size_is_exact())
        return std::bit_width(params.codebook_size + 1);  // floor(log2(S+1)) + 1
    return static_cast<unsigned>(std::floor(params.codebook_log2)) + 1;
}

std::uint64_t message_bit_length(const CodecParams& params, std::size_t num_states) {
    return static_cast<std::uint64_t>(index_field_width(params)) +
           static_cast<std::uint64_t>(num_states - 1) * count_field_width(params.sequence_length);
}

std::vector<double> mixture_weights(const SequenceSpec& spec, const Ensemble& ensemble) {
    check_compatible(spec, ensemble);
    const std::size_t d = ensemble.dimension();
    const double n = static_cast<double>(spec.length());
    std::vector<double> w(d, 0.0);
    for (std::size_t k = 0; k < spec.num_states(); ++k)
        for (std::size_t j = 0; j < d; ++j)
            w[j] += static_cast<double>(spec.block_counts[k]) *
                    ensemble.entries[k].state.eigenvalues[j] / n;
    return w;
}

TargetCounts sample_target_counts(const SequenceSpec& spec, const Ensemble& ensemble,
                                  RandomStream& stream) {
    check_compatible(spec, ensemble);
    const std::size_t d = ensemble.dimension();
    TargetCounts x;
    x.counts.resize(spec.num_states());
    for (std::size_t k = 0; k < spec.num_states(); ++k) {
        x.counts[k].assign(d, 0);
        sample_multinomial(spec.block_counts[k], ensemble.entries[k].state.eigenvalues, stream,
                           x.counts[k]);
    }
    return x;
}

Message encode(const SequenceSpec& spec, const Ensemble& ensemble, const CodecParams& params,
               const SharedSeed& seed, std::uint64_t seq_index) {
    check_compatible(spec, ensemble);
    if (spec.length() != params.sequence_length)
        throw ContractViolation("encode: sequence length != params.N");
    const std::size_t num_states = spec.num_states();
    const std::size_t d = params.alphabet_size;

    auto target_stream = derive_stream(seed, purpose::target_counts, seq_index);
    const TargetCounts target = sample_target_counts(spec, ensemble, target_stream);

    Message msg;
    msg.header_counts.assign(spec.block_counts.begin(), spec.block_counts.end() - 1);

    const std::vector<double> weights = mixture_weights(spec, ensemble);
    auto choice_stream = derive_stream(seed, purpose::choice, seq_index);

    if (params.mode == CodecMode::literal) {
        if (!params.size_is_exact() || params.codebook_size > params.literal_cap)
            throw ContractViolation(
                "encode: S exceeds the literal-mode cap; use fast mode for this codebook size");
        auto codebook = derive_stream(seed, purpose::codebook, seq_index);
        std::vector<std::uint64_t> matching;
        for (std::uint64_t t = 1; t <= params.codebook_size; ++t) {
            const auto candidate = sample_biased_string(codebook, spec.length(), weights);
            if (matches_target(candidate, spec, target, d))
                matching.push_back(t);
        }
        if (matching.empty()) {
            msg.index = 0;
        } else {
            msg.index = matching[choice_stream.next_u64() % matching.size()];
        }
        return msg;
    }

    // Fast mode: the error flag has exactly the literal-mode probability
    // (1-R)^S; a non-error message carries the sampled target counts, which
    // by conditional uniformity determine the decoded-string distribution.
    const double r_log2 = log2_match_probability(spec, target, weights);
    const double err = error_probability(std::exp2(r_log2), params.codebook_log2);
    if (choice_stream.next_unit() < err) {
        msg.index = 0;
    } else {
        msg.index = 1;
        msg.fast_counts = target;
    }
    return msg;
}

std::vector<std::uint8_t> decode(const Message& msg, const Ensemble& ensemble,
                                 const CodecParams& params, const SharedSeed& seed,
                                 std::uint64_t seq_index, const SequenceSpec* fast_layout) {
    const std::uint64_t n = params.sequence_length;
    const std::size_t d = params.alphabet_size;
    if (params.size_is_exact() && msg.index > params.codebook_size)
        throw MalformedMessage("decode: index exceeds codebook size");

    if (msg.index == 0) {
        // Error state sigma_0 = 1l/d^N: uniform string.
        auto fill = derive_stream(seed, purpose::error_fill, seq_index);
        const std::vector<double> uniform(d, 1.0 / static_cast<double>(d));
        return sample_biased_string(fill, n, uniform);
    }

    if (params.mode == CodecMode::literal) {
        // Rebuild the mixture from the count header alone (n_L is implied).
        std::uint64_t seen = 0;
        std::vector<std::uint64_t> counts(msg.header_counts);
        for (auto c : counts)
            seen += c;
        if (seen > n)
            throw MalformedMessage("decode: header counts exceed N");
        counts.push_back(n - seen);
        std::vector<double> weights(d, 0.0);
        for (std::size_t k = 0; k < counts.size(); ++k)
            for (std::size_t j = 0; j < d; ++j)
                weights[j] += static_cast<double>(counts[k]) *
                              ensemble.entries[k].state.eigenvalues[j] / static_cast<double>(n);
        auto codebook = derive_stream(seed, purpose::codebook, seq_index);
        // Each codebook string consumes exactly N draws, so string t starts
        // at position (t-1) N.
        codebook.seek((msg.index - 1) * n);
        return sample_biased_string(codebook, n, weights);
    }

    // Fast mode: uniform member of the transmitted count class.
    if (!msg.fast_counts)
        throw MalformedMessage("decode: fast-mode message lacks target counts");
    if (fast_layout == nullptr)
        throw ContractViolation("decode: fast mode needs the block layout");
    auto fill = derive_stream(seed, purpose::error_fill, seq_index);
    std::vector<std::uint8_t> out(n, 0);
    for (std::size_t k = 0; k < fast_layout->num_states(); ++k) {
        const auto& xk = msg.fast_counts->counts[k];
        std::vector<std::uint8_t> block;
        block.reserve(fast_layout->block_counts[k]);
        for (std::size_t j = 0; j < d; ++j)
            block.insert(block.end(), xk[j], static_cast<std::uint8_t>(j));
        if (block.size() != fast_layout->positions[k].size())
            throw MalformedMessage("decode: target counts inconsistent with block size");
        for (std::size_t i = block.size(); i > 1; --i)
            std::swap(block[i - 1], block[fill.next_u64() % i]);
        for (std::size_t i = 0; i < block.size(); ++i)
            out[fast_layout->positions[k][i] - 1] = block[i];
    }
    return out;
}

CodecParams paper_S_schedule(std::uint64_t n, const Ensemble& ensemble, double big_k, double alpha,
                             CodecMode mode) {
    if (n == 0 || big_k <= 0 || alpha <= 0)
        throw ContractViolation("paper_S_schedule: need N >= 1 and positive constants");
    const double info = levitin_holevo(ensemble);
    const double nd = static_cast<double>(n);
    const double log2e = 1.4426950408889634;
    // log2(N a_N b_N): a_N = sqrt(N) e^(alpha N^0.2)/K, b_N = 2^(N I + N^0.7).
    const double log2_s = std::log2(nd) + 0.5 * std::log2(nd) + alpha * std::pow(nd, 0.2) * log2e -
                          std::log2(big_k) + nd * info + std::pow(nd, 0.7);
    return CodecParams::with_log2_size(n, ensemble.dimension(), std::max(log2_s, 0.0), mode);
}

// --- wire format ------------------------------------------------------

namespace {

void write_wide_field(BitWriter& w, std::uint64_t value, unsigned width) {
    while (width > 64) {
        w.write(0, std::min(width - 64u, 64u));
        width -= std::min(width - 64u, 64u);
    }
    w.write(value, width);
}

std::uint64_t read_wide_field(BitReader& r, unsigned width) {
    while (width > 64) {
        if (r.read(std::min(width - 64u, 64u)) != 0)
            throw MalformedMessage("deserialize: oversized index field");
        width -= std::min(width - 64u, 64u);
    }
    return r.read(width);
}

}  // namespace

std::uint64_t serialized_bit_length(const Message& msg, const CodecParams& params,
                                    std::size_t num_states) {
    std::uint64_t bits = message_bit_length(params, num_states);
    if (params.mode == CodecMode::fast && msg.index != 0)
        bits += static_cast<std::uint64_t>(num_states) *
                (params.alphabet_size - 1) * count_field_width(params.sequence_length);
    return bits;
}

std::vector<std::uint8_t> serialize_message(const Message& msg, const CodecParams& params,
                                            std::size_t num_states) {
    BitWriter w;
    const unsigned cw = count_field_width(params.sequence_length);
    for (std::uint64_t c : msg.header_counts)
        w.write(c, cw);
    write_wide_field(w, msg.index, index_field_width(params));
    if (params.mode == CodecMode::fast && msg.index != 0) {
        if (!msg.fast_counts)
            throw ContractViolation("serialize_message: fast-mode message lacks counts");
        for (const auto& xk : msg.fast_counts->counts)
            for (std::size_t j = 0; j + 1 < xk.size(); ++j)
                w.write(xk[j], cw);
    }
    return w.bytes();
}

Message deserialize_message(std::span<const std::uint8_t> payload, std::uint64_t bit_length,
                            const CodecParams& params, std::size_t num_states) {
    BitReader r(payload.data(), bit_length);
    const unsigned cw = count_field_width(params.sequence_length);
    Message msg;
    std::uint64_t seen = 0;
    for (std::size_t k = 0; k + 1 < num_states; ++k) {
        msg.header_counts.push_back(r.read(cw));
        seen += msg.header_counts.back();
    }
    if (seen > params.sequence_length)
        throw MalformedMessage("deserialize: header counts exceed N");
    msg.index = read_wide_field(r, index_field_width(params));
    if (params.size_is_exact() && msg.index > params.codebook_size)
        throw MalformedMessage("deserialize: index exceeds codebook size");
    if (params.mode == CodecMode::fast && msg.index != 0) {
        std::vector<std::uint64_t> counts(msg.header_counts);
        counts.push_back(params.sequence_length - seen);
        TargetCounts x;
        x.counts.resize(num_states);
        for (std::size_t k = 0; k < num_states; ++k) {
            x.counts[k].assign(params.alphabet_size, 0);
            std::uint64_t block_seen = 0;
            for (std::size_t j = 0; j + 1 < params.alphabet_size; ++j) {
                x.counts[k][j] = r.read(cw);
                block_seen += x.counts[k][j];
            }
            if (block_seen > counts[k])
                throw MalformedMessage("deserialize: target counts exceed block size");
            x.counts[k][params.alphabet_size - 1] = counts[k] - block_seen;
        }
        msg.fast_counts = std::move(x);
    }
    return msg;
}

namespace {

void put_u32le(std::ofstream& out, std::uint32_t v) {
    std::uint8_t b[4];
    for (int i = 0; i < 4; ++i)
        b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64le(std::ofstream& out, std::uint64_t v) {
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i)
        b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

}  // namespace

void write_stream_file(const std::string& path, std::span<const StreamRecord> records) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ValidationError("cannot open stream file for writing: " + path);
    out.write("LHC1", 4);
    for (const auto& rec : records) {
        put_u64le(out, rec.seq_index);
        put_u32le(out, rec.bit_length);
        out.write(reinterpret_cast<const char*>(rec.payload.data()),
                  static_cast<std::streamsize>(rec.payload.size()));
    }
    if (!out)
        throw ValidationError("failed writing stream file: " + path);
}

std::vector<StreamRecord> read_stream_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("cannot open stream file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "LHC1", 4) != 0)
        throw MalformedMessage("stream file: bad magic");
    std::vector<StreamRecord> records;
    while (true) {
        std::uint8_t hdr[12];
        in.read(reinterpret_cast<char*>(hdr), 12);
        if (in.gcount() == 0)
            break;
        if (in.gcount() != 12)
            throw MalformedMessage("stream file: truncated record header");
        StreamRecord rec;
        for (int i = 0; i < 8; ++i)
            rec.seq_index |= static_cast<std::uint64_t>(hdr[i]) << (8 * i);
        for (int i = 0; i < 4; ++i)
            rec.bit_length |= static_cast<std::uint32_t>(hdr[8 + i]) << (8 * i);
        rec.payload.resize((rec.bit_length + 7) / 8);
        in.read(reinterpret_cast<char*>(rec.payload.data()),
                static_cast<std::streamsize>(rec.payload.size()));
        if (static_cast<std::size_t>(in.gcount()) != rec.payload.size())
            throw MalformedMessage("stream file: truncated payload");
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace lhc
