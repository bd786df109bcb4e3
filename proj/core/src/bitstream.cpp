#include "sqs/bitstream.hpp"

#include <stdexcept>

#include "sqs/errors.hpp"

namespace sqs {

void BitWriter::push_bit(bool bit) {
  if (bit_size_ % 8 == 0) buf_.push_back(0);
  if (bit) buf_.back() |= static_cast<std::uint8_t>(1u << (7 - bit_size_ % 8));
  ++bit_size_;
}

void BitWriter::append_bits(const BigInt& value, std::uint32_t width) {
  if (value < 0 || (value >> width) != 0) {
    throw std::invalid_argument("append_bits: value does not fit the field width");
  }
  for (std::uint32_t i = width; i-- > 0;) {
    push_bit(boost::multiprecision::bit_test(value, i));
  }
}

void BitWriter::append_bits(std::uint64_t value, std::uint32_t width) {
  if (width < 64 && (value >> width) != 0) {
    throw std::invalid_argument("append_bits: value does not fit the field width");
  }
  for (std::uint32_t i = width; i-- > 0;) {
    push_bit(((value >> i) & 1u) != 0);
  }
}

void BitWriter::append_u8(std::uint8_t value) { append_bits(std::uint64_t{value}, 8); }

void BitWriter::append_u16(std::uint16_t value) {
  append_u8(static_cast<std::uint8_t>(value & 0xFF));
  append_u8(static_cast<std::uint8_t>(value >> 8));
}

void BitWriter::append_u32(std::uint32_t value) {
  for (int i = 0; i < 4; ++i) append_u8(static_cast<std::uint8_t>((value >> (8 * i)) & 0xFF));
}

void BitWriter::byte_align() {
  while (bit_size_ % 8 != 0) push_bit(false);
}

const std::vector<std::uint8_t>& BitWriter::bytes() const {
  if (!aligned()) throw std::logic_error("BitWriter::bytes: buffer not byte-aligned");
  return buf_;
}

std::vector<std::uint8_t> BitWriter::take() {
  byte_align();
  bit_size_ = 0;
  return std::move(buf_);
}

bool BitReader::next_bit() {
  const std::uint64_t byte = pos_ / 8;
  const std::uint32_t offset = 7 - pos_ % 8;
  ++pos_;
  return ((data_[byte] >> offset) & 1u) != 0;
}

void BitReader::require(std::uint64_t bits) const {
  if (pos_ + bits > bit_count_) {
    throw DecodeError(DecodeError::Kind::Truncated, "bitstream ends mid-field");
  }
}

BigInt BitReader::read_bits(std::uint32_t width) {
  require(width);
  BigInt value = 0;
  for (std::uint32_t i = 0; i < width; ++i) {
    value <<= 1;
    if (next_bit()) value |= 1;
  }
  return value;
}

std::uint64_t BitReader::read_u64_bits(std::uint32_t width) {
  if (width > 64) throw std::invalid_argument("read_u64_bits: width exceeds 64");
  require(width);
  std::uint64_t value = 0;
  for (std::uint32_t i = 0; i < width; ++i) {
    value = (value << 1) | (next_bit() ? 1u : 0u);
  }
  return value;
}

std::uint8_t BitReader::read_u8() {
  return static_cast<std::uint8_t>(read_u64_bits(8));
}

std::uint16_t BitReader::read_u16() {
  const std::uint16_t lo = read_u8();
  const std::uint16_t hi = read_u8();
  return static_cast<std::uint16_t>(lo | (hi << 8));
}

std::uint32_t BitReader::read_u32() {
  std::uint32_t value = 0;
  for (int i = 0; i < 4; ++i) value |= static_cast<std::uint32_t>(read_u8()) << (8 * i);
  return value;
}

void BitReader::skip_padding() {
  while (pos_ % 8 != 0) {
    if (next_bit()) {
      throw DecodeError(DecodeError::Kind::TrailingData, "nonzero padding bit");
    }
  }
}

}  // namespace sqs
