#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace gt {

// Fixed-width packed bit vector. Used for defective-set membership masks,
// codebook columns, and received words.
class Bits {
 public:
  Bits() = default;
  explicit Bits(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}

  std::size_t size() const { return n_; }

  void set(std::size_t i, bool v = true) {
    if (v)
      w_[i >> 6] |= (uint64_t{1} << (i & 63));
    else
      w_[i >> 6] &= ~(uint64_t{1} << (i & 63));
  }

  bool test(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1; }

  std::size_t count() const {
    std::size_t c = 0;
    for (uint64_t w : w_) c += std::popcount(w);
    return c;
  }

  // Number of positions where the two vectors differ.
  static std::size_t hamming(const Bits& a, const Bits& b) {
    if (a.n_ != b.n_) throw std::invalid_argument("Bits::hamming: size mismatch");
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.w_.size(); ++i) d += std::popcount(a.w_[i] ^ b.w_[i]);
    return d;
  }

  bool operator==(const Bits& o) const { return n_ == o.n_ && w_ == o.w_; }

  const std::vector<uint64_t>& words() const { return w_; }
  std::vector<uint64_t>& words() { return w_; }

  // Masks off bits beyond size(); call after writing whole words directly.
  void trim() {
    std::size_t tail = n_ & 63;
    if (tail != 0 && !w_.empty()) w_.back() &= (uint64_t{1} << tail) - 1;
  }

 private:
  std::size_t n_ = 0;
  std::vector<uint64_t> w_;
};

}  // namespace gt
