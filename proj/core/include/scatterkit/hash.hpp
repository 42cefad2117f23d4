#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>

namespace spk {

// FNV-1a, 64 bit. Used for medium/config fingerprints and manifest file
// hashes; stable across runs of the same build.
class Fnv1a64 {
 public:
  void update(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= static_cast<std::uint64_t>(p[i]);
      h_ *= 0x100000001b3ull;
    }
  }
  void update_u8(std::uint8_t v) { update(&v, 1); }
  void update_u32(std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    update(b, 4);
  }
  void update_u64(std::uint64_t v) {
    update_u32(static_cast<std::uint32_t>(v));
    update_u32(static_cast<std::uint32_t>(v >> 32));
  }
  void update_f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    update_u64(bits);
  }
  std::uint64_t digest() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ull;
};

inline std::uint64_t hash_bytes(std::span<const unsigned char> bytes) {
  Fnv1a64 h;
  h.update(bytes.data(), bytes.size());
  return h.digest();
}

inline std::uint64_t hash_string(const std::string& s) {
  Fnv1a64 h;
  h.update(s.data(), s.size());
  return h.digest();
}

// 16 lowercase hex digits, zero padded.
inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (std::size_t i = 16; i-- > 0; v >>= 4) {
    s[i] = digits[v & 0xf];
  }
  return s;
}

}  // namespace spk
