#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

namespace tta {

/// Incremental FNV-1a (64-bit) over raw bytes. Used for parameter snapshots,
/// corpus fingerprints and episodic reset checks; bit-level, not cryptographic.
class Digest {
 public:
  void update(const void* bytes, size_t n) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }

  void update(std::string_view s) { update(s.data(), s.size()); }

  template <typename T>
  void update_pod(const T& x) {
    static_assert(std::is_trivially_copyable_v<T>);
    update(&x, sizeof(T));
  }

  template <typename T>
  void update_vec(const std::vector<T>& xs) {
    static_assert(std::is_trivially_copyable_v<T>);
    update_pod<std::uint64_t>(xs.size());
    if (!xs.empty()) update(xs.data(), xs.size() * sizeof(T));
  }

  std::uint64_t value() const { return h_; }

  std::string hex() const {
    static const char* k = "0123456789abcdef";
    std::string out(16, '0');
    std::uint64_t h = h_;
    for (int i = 15; i >= 0; --i) {
      out[static_cast<size_t>(i)] = k[h & 0xf];
      h >>= 4;
    }
    return out;
  }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace tta
