#include "lhc/random.hpp"

#include <algorithm>
#include <cstring>

#include "lhc/errors.hpp"

namespace lhc {

namespace {

int hex_digit(char c) {
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> data, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (std::uint8_t b : data) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t fnv1a64_str(std::string_view s, std::uint64_t h) {
    return fnv1a64({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}, h);
}

inline std::uint32_t rotl32(std::uint32_t x, int r) { return (x << r) | (x >> (32 - r)); }

// ChaCha20 block function (the original 64-bit-nonce/64-bit-counter layout).
void chacha20_block(const std::array<std::uint32_t, 8>& key, std::uint64_t counter,
                    std::uint64_t nonce, std::array<std::uint32_t, 16>& out) {
    static constexpr std::uint32_t sigma[4] = {0x61707865u, 0x3320646eu, 0x79622d32u, 0x6b206574u};
    std::array<std::uint32_t, 16> x;
    x[0] = sigma[0];
    x[1] = sigma[1];
    x[2] = sigma[2];
    x[3] = sigma[3];
    for (int i = 0; i < 8; ++i)
        x[4 + i] = key[i];
    x[12] = static_cast<std::uint32_t>(counter);
    x[13] = static_cast<std::uint32_t>(counter >> 32);
    x[14] = static_cast<std::uint32_t>(nonce);
    x[15] = static_cast<std::uint32_t>(nonce >> 32);
    std::array<std::uint32_t, 16> s = x;
    const auto quarter = [&](int a, int b, int c, int d) {
        s[a] += s[b];
        s[d] = rotl32(s[d] ^ s[a], 16);
        s[c] += s[d];
        s[b] = rotl32(s[b] ^ s[c], 12);
        s[a] += s[b];
        s[d] = rotl32(s[d] ^ s[a], 8);
        s[c] += s[d];
        s[b] = rotl32(s[b] ^ s[c], 7);
    };
    for (int round = 0; round < 10; ++round) {
        quarter(0, 4, 8, 12);
        quarter(1, 5, 9, 13);
        quarter(2, 6, 10, 14);
        quarter(3, 7, 11, 15);
        quarter(0, 5, 10, 15);
        quarter(1, 6, 11, 12);
        quarter(2, 7, 8, 13);
        quarter(3, 4, 9, 14);
    }
    for (int i = 0; i < 16; ++i)
        out[i] = s[i] + x[i];
}

}  // namespace

SharedSeed SharedSeed::from_hex(std::string_view hex64, std::string session_label) {
    if (hex64.size() != 64)
        throw ValidationError("SharedSeed: expected 64 hex characters");
    SharedSeed s;
    for (std::size_t i = 0; i < 32; ++i) {
        const int hi = hex_digit(hex64[2 * i]);
        const int lo = hex_digit(hex64[2 * i + 1]);
        if (hi < 0 || lo < 0)
            throw ValidationError("SharedSeed: invalid hex character");
        s.key[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    s.session_label = std::move(session_label);
    return s;
}

std::string SharedSeed::to_hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (std::uint8_t b : key) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

RandomStream::RandomStream(const SharedSeed& seed, std::string_view purpose,
                           std::uint64_t sequence_index) {
    for (int i = 0; i < 8; ++i) {
        std::uint32_t w = 0;
        for (int b = 0; b < 4; ++b)
            w |= static_cast<std::uint32_t>(seed.key[4 * i + b]) << (8 * b);
        key_words_[i] = w;
    }
    // Stream identity: hash of (session label, purpose, sequence index) with
    // NUL separators so label pairs cannot collide by concatenation.
    std::uint64_t h = fnv1a64_str(seed.session_label, 0xcbf29ce484222325ull);
    h = fnv1a64(std::array<std::uint8_t, 1>{0}, h);
    h = fnv1a64_str(purpose, h);
    h = fnv1a64(std::array<std::uint8_t, 1>{0}, h);
    std::array<std::uint8_t, 8> idx;
    for (int i = 0; i < 8; ++i)
        idx[i] = static_cast<std::uint8_t>(sequence_index >> (8 * i));
    nonce_ = fnv1a64(idx, h);
}

void RandomStream::refill() {
    std::array<std::uint32_t, 16> words;
    chacha20_block(key_words_, block_index_, nonce_, words);
    for (int i = 0; i < 8; ++i)
        block_[i] = static_cast<std::uint64_t>(words[2 * i]) |
                    (static_cast<std::uint64_t>(words[2 * i + 1]) << 32);
}

std::uint64_t RandomStream::next_u64() {
    const std::uint64_t block = position_ / 8;
    if (block != block_index_) {
        block_index_ = block;
        refill();
    }
    return block_[position_++ % 8];
}

void RandomStream::seek(std::uint64_t position) { position_ = position; }

RandomStream derive_stream(const SharedSeed& seed, std::string_view purpose,
                           std::uint64_t sequence_index) {
    return RandomStream(seed, purpose, sequence_index);
}

std::uint8_t sample_symbol(RandomStream& stream, std::span<const double> weights) {
    const double u = stream.next_unit();
    double cum = 0;
    for (std::size_t j = 0; j + 1 < weights.size(); ++j) {
        cum += weights[j];
        if (u < cum)
            return static_cast<std::uint8_t>(j);
    }
    return static_cast<std::uint8_t>(weights.size() - 1);
}

std::vector<std::uint8_t> sample_biased_string(RandomStream& stream, std::size_t n,
                                               std::span<const double> weights) {
    std::vector<std::uint8_t> s(n);
    if (weights.size() == 2) {
        // Binary special case; same single-draw threshold decision as the
        // generic scan.
        const double w0 = weights[0];
        for (std::size_t i = 0; i < n; ++i)
            s[i] = stream.next_unit() < w0 ? 0 : 1;
        return s;
    }
    for (std::size_t i = 0; i < n; ++i)
        s[i] = sample_symbol(stream, weights);
    return s;
}

}  // namespace lhc
