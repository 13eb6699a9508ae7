#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "vlcsec/error.hpp"
#include "vlcsec/rng.hpp"

namespace vlcsec {

/// Binary IRS allocation vector s. Bit n = 1 assigns element n to Bob,
/// 0 to Eve; Eve always holds the complement. Entry order follows the
/// panel's element index order.
class AllocationVector {
 public:
  AllocationVector() = default;

  explicit AllocationVector(std::size_t n, bool ones = false)
      : bits_(n, ones ? std::uint8_t{1} : std::uint8_t{0}) {}

  /// Parses a string of '0'/'1' characters, first character = element 1.
  static AllocationVector from_string(std::string_view text) {
    AllocationVector v;
    v.bits_.reserve(text.size());
    for (char c : text) {
      if (c != '0' && c != '1') {
        throw ConfigError("allocation bitstring: characters must be '0' or '1'");
      }
      v.bits_.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return v;
  }

  /// Uniformly random vector, one independent fair bit per element.
  static AllocationVector random(std::size_t n, Rng& rng) {
    AllocationVector v(n);
    for (auto& b : v.bits_) b = rng.bernoulli(0.5) ? 1 : 0;
    return v;
  }

  std::string to_string() const {
    std::string s(bits_.size(), '0');
    for (std::size_t i = 0; i < bits_.size(); ++i) s[i] = static_cast<char>('0' + bits_[i]);
    return s;
  }

  std::size_t size() const { return bits_.size(); }

  bool test(std::size_t n) const { return bits_[n] != 0; }

  void set(std::size_t n, bool value) { bits_[n] = value ? 1 : 0; }

  void flip(std::size_t n) { bits_[n] ^= 1; }

  /// Number of elements assigned to Bob.
  std::size_t count() const {
    return std::accumulate(bits_.begin(), bits_.end(), std::size_t{0});
  }

  /// Eve's mask: every bit inverted.
  AllocationVector complement() const {
    AllocationVector v(*this);
    for (auto& b : v.bits_) b ^= 1;
    return v;
  }

  /// Numeric order with the first element as the most significant digit;
  /// used to break exact fitness ties toward the lowest binary value.
  bool less_binary(const AllocationVector& other) const {
    return std::lexicographical_compare(bits_.begin(), bits_.end(), other.bits_.begin(),
                                        other.bits_.end());
  }

  bool operator==(const AllocationVector&) const = default;

  const std::vector<std::uint8_t>& bits() const { return bits_; }

 private:
  std::vector<std::uint8_t> bits_;
};

}  // namespace vlcsec
