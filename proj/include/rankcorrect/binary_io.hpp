#pragma once

// Little-endian buffer encoding shared by the checkpoint and cache formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>

#include "rankcorrect/common.hpp"

namespace rankcorrect::detail {

inline void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_f64(std::string& buf, double v) {
  put_u64(buf, std::bit_cast<std::uint64_t>(v));
}

inline void put_string(std::string& buf, const std::string& s) {
  put_u64(buf, s.size());
  buf.append(s);
}

class Reader {
 public:
  explicit Reader(const std::string& buf) : buf_(buf) {}

  std::uint32_t u32() {
    check(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte()) << (8 * i);
    return v;
  }

  std::uint64_t u64() {
    check(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(byte()) << (8 * i);
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  std::string string() {
    const std::uint64_t n = u64();
    check(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void skip(std::size_t n) {
    check(n);
    pos_ += n;
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  unsigned char byte() { return static_cast<unsigned char>(buf_[pos_++]); }

  void check(std::uint64_t n) const {
    if (pos_ + n > buf_.size()) throw IoError("binary payload truncated");
  }

  const std::string& buf_;
  std::size_t pos_ = 0;
};

// FNV-1a 64-bit, used as the integrity checksum of serialized containers.
inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace rankcorrect::detail
