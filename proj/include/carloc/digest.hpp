#pragma once

#include <cstdint>
#include <fstream>
#include <string>

namespace carloc {

/// Streaming FNV-1a (64-bit) used for stage-cache keys and report digests.
class Digest {
 public:
  Digest& add(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  Digest& add(const std::string& s) { return add(s.data(), s.size()).add("|", 1); }
  Digest& add(std::int64_t v) {
    return add(std::to_string(v));
  }
  Digest& add(double v) { return add(std::to_string(v)); }

  Digest& add_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    char buf[1 << 14];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) add(buf, std::size_t(in.gcount()));
    return *this;
  }

  std::string hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    std::uint64_t v = state_;
    for (int i = 15; i >= 0; --i, v >>= 4) out[std::size_t(i)] = digits[v & 0xF];
    return out;
  }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace carloc
