#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sqs/ranking.hpp"

namespace sqs {

// Append-only bit buffer, MSB-first within each field, zero-padded to a
// byte boundary on demand. Fixed-width byte helpers are little-endian and
// require byte alignment.
class BitWriter {
 public:
  // Appends the width low-order bits of value, most significant first.
  // Throws std::invalid_argument if value does not fit.
  void append_bits(const BigInt& value, std::uint32_t width);
  void append_bits(std::uint64_t value, std::uint32_t width);

  void append_u8(std::uint8_t value);
  void append_u16(std::uint16_t value);
  void append_u32(std::uint32_t value);

  // Pads with zero bits to the next byte boundary.
  void byte_align();

  std::uint64_t bit_size() const { return bit_size_; }
  bool aligned() const { return bit_size_ % 8 == 0; }
  const std::vector<std::uint8_t>& bytes() const;  // throws if not aligned
  std::vector<std::uint8_t> take();                // byte-aligns, then moves the buffer out

 private:
  void push_bit(bool bit);

  std::vector<std::uint8_t> buf_;
  std::uint64_t bit_size_ = 0;
};

// Sequential reader over a byte span; mirrors BitWriter's layout. Reads
// past the end throw DecodeError{Truncated}.
class BitReader {
 public:
  BitReader(const std::uint8_t* data, std::size_t size) : data_(data), bit_count_(8 * size) {}
  explicit BitReader(const std::vector<std::uint8_t>& bytes)
      : BitReader(bytes.data(), bytes.size()) {}

  BigInt read_bits(std::uint32_t width);
  std::uint64_t read_u64_bits(std::uint32_t width);  // width <= 64

  std::uint8_t read_u8();
  std::uint16_t read_u16();
  std::uint32_t read_u32();

  // Consumes padding to the byte boundary; throws DecodeError{TrailingData}
  // if any padding bit is set.
  void skip_padding();

  std::uint64_t bits_consumed() const { return pos_; }
  std::uint64_t bits_remaining() const { return bit_count_ - pos_; }

 private:
  bool next_bit();
  void require(std::uint64_t bits) const;

  const std::uint8_t* data_;
  std::uint64_t bit_count_;
  std::uint64_t pos_ = 0;
};

}  // namespace sqs
