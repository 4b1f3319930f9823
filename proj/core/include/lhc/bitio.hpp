#pragma once

#include <cstdint>
#include <vector>

#include "lhc/errors.hpp"

// Fixed-width big-endian bit fields over a byte buffer. Bit 0 of the stream
// is the MSB of byte 0.

namespace lhc {

class BitWriter {
  public:
    void write(std::uint64_t value, unsigned width) {
        if (width > 64)
            throw ContractViolation("BitWriter: field width > 64");
        if (width < 64 && value >> width)
            throw ContractViolation("BitWriter: value does not fit field");
        for (unsigned i = width; i-- > 0;)
            push_bit((value >> i) & 1u);
    }

    std::uint64_t bit_size() const { return bits_; }

    // Remaining bits of the last byte are zero padding.
    const std::vector<std::uint8_t>& bytes() const { return data_; }

  private:
    void push_bit(unsigned b) {
        if (bits_ % 8 == 0)
            data_.push_back(0);
        if (b)
            data_.back() |= static_cast<std::uint8_t>(0x80u >> (bits_ % 8));
        ++bits_;
    }

    std::vector<std::uint8_t> data_;
    std::uint64_t bits_ = 0;
};

class BitReader {
  public:
    BitReader(const std::uint8_t* data, std::uint64_t bit_count)
        : data_(data), bit_count_(bit_count) {}
    explicit BitReader(const std::vector<std::uint8_t>& data)
        : data_(data.data()), bit_count_(8 * data.size()) {}

    std::uint64_t read(unsigned width) {
        if (width > 64)
            throw ContractViolation("BitReader: field width > 64");
        if (pos_ + width > bit_count_)
            throw MalformedMessage("BitReader: read past end of payload");
        std::uint64_t v = 0;
        for (unsigned i = 0; i < width; ++i) {
            v <<= 1;
            v |= (data_[pos_ / 8] >> (7 - pos_ % 8)) & 1u;
            ++pos_;
        }
        return v;
    }

    std::uint64_t position() const { return pos_; }
    std::uint64_t remaining() const { return bit_count_ - pos_; }

  private:
    const std::uint8_t* data_;
    std::uint64_t bit_count_;
    std::uint64_t pos_ = 0;
};

}  // namespace lhc
