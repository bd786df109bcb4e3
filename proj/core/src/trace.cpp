#include "sqs/trace.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

#include "sqs/errors.hpp"

namespace sqs {

namespace {

constexpr char kMagic[4] = {'S', 'Q', 'S', 'T'};
constexpr std::uint8_t kVersion = 1;

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

void put_f64(std::string& out, double d) {
  auto bits = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
}

class Reader {
 public:
  Reader(const unsigned char* data, std::size_t size) : data_(data), size_(size) {}

  bool done() const { return pos_ == size_; }
  std::size_t remaining() const { return size_ - pos_; }

  std::uint8_t u8() { return take(1)[0]; }

  std::uint16_t u16() {
    const unsigned char* p = take(2);
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }

  std::uint32_t u32() {
    const unsigned char* p = take(4);
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  }

  double f64() {
    const unsigned char* p = take(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
      bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    }
    return std::bit_cast<double>(bits);
  }

 private:
  const unsigned char* take(std::size_t n) {
    if (size_ - pos_ < n) {
      throw TraceError(TraceError::Kind::Truncated, "trace record cut off mid-field");
    }
    const unsigned char* p = data_ + pos_;
    pos_ += n;
    return p;
  }

  const unsigned char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

class TraceModel final : public ModelPair {
 public:
  TraceModel(std::uint32_t vocab_size,
             std::map<std::vector<TokenId>, std::pair<std::vector<double>, std::vector<double>>>
                 table)
      : ModelPair(vocab_size), table_(std::move(table)) {}

  std::vector<double> draft_logits(const Context& ctx) const override {
    return lookup(ctx).first;
  }
  std::vector<double> target_logits(const Context& ctx) const override {
    return lookup(ctx).second;
  }

 private:
  const std::pair<std::vector<double>, std::vector<double>>& lookup(const Context& ctx) const {
    auto it = table_.find(ctx.token_ids);
    if (it == table_.end()) {
      throw TraceError(TraceError::Kind::UnknownContext,
                       "trace has no record for a context of length " +
                           std::to_string(ctx.token_ids.size()));
    }
    return it->second;
  }

  std::map<std::vector<TokenId>, std::pair<std::vector<double>, std::vector<double>>> table_;
};

}  // namespace

void write_trace(const std::string& path, std::uint32_t vocab_size,
                 const std::vector<TraceRecord>& records) {
  if (vocab_size == 0) {
    throw std::invalid_argument("write_trace: vocab_size must be positive");
  }
  std::string buf;
  buf.append(kMagic, 4);
  buf.push_back(static_cast<char>(kVersion));
  put_u32(buf, vocab_size);
  for (const auto& rec : records) {
    if (rec.draft_logits.size() != vocab_size || rec.target_logits.size() != vocab_size) {
      throw std::invalid_argument("write_trace: logits length must equal vocab_size");
    }
    if (rec.context.size() > 0xFFFF) {
      throw std::invalid_argument("write_trace: context longer than 65535 tokens");
    }
    put_u16(buf, static_cast<std::uint16_t>(rec.context.size()));
    for (TokenId id : rec.context) {
      put_u32(buf, id);
    }
    for (double l : rec.draft_logits) {
      put_f64(buf, l);
    }
    for (double l : rec.target_logits) {
      put_f64(buf, l);
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("write_trace: cannot open " + path);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) {
    throw IoError("write_trace: write failed for " + path);
  }
}

std::unique_ptr<ModelPair> trace_pair(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw TraceError(TraceError::Kind::MissingFile, "trace file not found: " + path);
  }
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (data.size() < 9) {
    throw TraceError(TraceError::Kind::BadHeader, "trace header incomplete: " + path);
  }
  if (std::memcmp(data.data(), kMagic, 4) != 0) {
    throw TraceError(TraceError::Kind::BadHeader, "trace magic mismatch: " + path);
  }
  Reader r(data.data() + 4, data.size() - 4);
  std::uint8_t version = r.u8();
  if (version != kVersion) {
    throw TraceError(TraceError::Kind::BadHeader,
                     "unsupported trace version " + std::to_string(version));
  }
  std::uint32_t vocab_size = r.u32();
  if (vocab_size == 0) {
    throw TraceError(TraceError::Kind::BadHeader, "trace declares an empty vocabulary");
  }

  std::map<std::vector<TokenId>, std::pair<std::vector<double>, std::vector<double>>> table;
  while (!r.done()) {
    std::uint16_t len = r.u16();
    std::vector<TokenId> ctx(len);
    for (auto& id : ctx) {
      id = r.u32();
    }
    std::vector<double> draft(vocab_size);
    for (auto& l : draft) {
      l = r.f64();
    }
    std::vector<double> target(vocab_size);
    for (auto& l : target) {
      l = r.f64();
    }
    table[std::move(ctx)] = {std::move(draft), std::move(target)};
  }
  return std::make_unique<TraceModel>(vocab_size, std::move(table));
}

}  // namespace sqs
