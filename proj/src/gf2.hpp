#pragma once
#include <cassert>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rng.hpp"

namespace stairway {

// Packing convention (fixed; serialized forms depend on it): row-major,
// 64-bit words, bit j of a row lives in word j/64 at bit position j%64
// (LSB-first).  Bits past `size` in the last word are always zero.

class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(size_t n) : n_(n), w_((n + 63) / 64, 0) {}

  size_t size() const { return n_; }
  bool get(size_t i) const {
    assert(i < n_);
    return (w_[i >> 6] >> (i & 63)) & 1;
  }
  void set(size_t i, bool v) {
    assert(i < n_);
    uint64_t m = 1ull << (i & 63);
    if (v)
      w_[i >> 6] |= m;
    else
      w_[i >> 6] &= ~m;
  }
  void flip(size_t i) {
    assert(i < n_);
    w_[i >> 6] ^= 1ull << (i & 63);
  }
  void clear() { std::fill(w_.begin(), w_.end(), 0); }

  void xor_in(const BitVec& o) {
    assert(o.n_ == n_);
    for (size_t k = 0; k < w_.size(); ++k) w_[k] ^= o.w_[k];
  }
  // Parity of the AND of two vectors (symplectic building block).
  bool dot(const BitVec& o) const {
    assert(o.n_ == n_);
    uint64_t acc = 0;
    for (size_t k = 0; k < w_.size(); ++k) acc ^= w_[k] & o.w_[k];
    return __builtin_parityll(acc);
  }
  bool intersects(const BitVec& o) const {
    assert(o.n_ == n_);
    for (size_t k = 0; k < w_.size(); ++k)
      if (w_[k] & o.w_[k]) return true;
    return false;
  }
  size_t count() const {
    size_t c = 0;
    for (uint64_t w : w_) c += __builtin_popcountll(w);
    return c;
  }
  bool any() const {
    for (uint64_t w : w_)
      if (w) return true;
    return false;
  }
  // Lowest set bit index, or size() when empty.
  size_t first_set() const {
    for (size_t k = 0; k < w_.size(); ++k)
      if (w_[k]) return k * 64 + __builtin_ctzll(w_[k]);
    return n_;
  }
  std::vector<uint32_t> indices() const {
    std::vector<uint32_t> out;
    for (size_t k = 0; k < w_.size(); ++k) {
      uint64_t w = w_[k];
      while (w) {
        out.push_back(uint32_t(k * 64 + __builtin_ctzll(w)));
        w &= w - 1;
      }
    }
    return out;
  }

  bool operator==(const BitVec& o) const { return n_ == o.n_ && w_ == o.w_; }
  bool operator<(const BitVec& o) const;  // lexicographic by index set

  const std::vector<uint64_t>& words() const { return w_; }
  std::vector<uint64_t>& words() { return w_; }

 private:
  size_t n_ = 0;
  std::vector<uint64_t> w_;
};

class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(size_t rows, size_t cols)
      : rows_(rows), cols_(cols), stride_((cols + 63) / 64), w_(rows * stride_, 0) {}

  static BitMatrix identity(size_t n) {
    BitMatrix m(n, n);
    for (size_t i = 0; i < n; ++i) m.set(i, i, true);
    return m;
  }
  static BitMatrix random(size_t rows, size_t cols, Rng& rng);

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }

  bool get(size_t r, size_t c) const {
    assert(r < rows_ && c < cols_);
    return (w_[r * stride_ + (c >> 6)] >> (c & 63)) & 1;
  }
  void set(size_t r, size_t c, bool v) {
    assert(r < rows_ && c < cols_);
    uint64_t m = 1ull << (c & 63);
    if (v)
      w_[r * stride_ + (c >> 6)] |= m;
    else
      w_[r * stride_ + (c >> 6)] &= ~m;
  }

  void row_xor(size_t dst, size_t src) {
    assert(dst < rows_ && src < rows_);
    uint64_t* d = &w_[dst * stride_];
    const uint64_t* s = &w_[src * stride_];
    for (size_t k = 0; k < stride_; ++k) d[k] ^= s[k];
  }
  void swap_rows(size_t a, size_t b) {
    if (a == b) return;
    for (size_t k = 0; k < stride_; ++k) std::swap(w_[a * stride_ + k], w_[b * stride_ + k]);
  }
  BitVec row(size_t r) const {
    BitVec v(cols_);
    std::copy(w_.begin() + r * stride_, w_.begin() + (r + 1) * stride_, v.words().begin());
    return v;
  }
  void set_row(size_t r, const BitVec& v) {
    assert(v.size() == cols_);
    std::copy(v.words().begin(), v.words().end(), w_.begin() + r * stride_);
  }
  void append_row(const BitVec& v) {
    assert(v.size() == cols_);
    rows_ += 1;
    w_.resize(rows_ * stride_, 0);
    set_row(rows_ - 1, v);
  }
  size_t row_weight(size_t r) const {
    size_t c = 0;
    for (size_t k = 0; k < stride_; ++k) c += __builtin_popcountll(w_[r * stride_ + k]);
    return c;
  }
  bool row_any(size_t r) const {
    for (size_t k = 0; k < stride_; ++k)
      if (w_[r * stride_ + k]) return true;
    return false;
  }

  BitMatrix transposed() const;
  BitMatrix operator*(const BitMatrix& o) const;
  BitVec mul_vec(const BitVec& x) const;  // A * x

  bool operator==(const BitMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && w_ == o.w_;
  }

  std::string to_string() const;

 private:
  size_t rows_ = 0, cols_ = 0, stride_ = 0;
  std::vector<uint64_t> w_;
};

struct RrefResult {
  BitMatrix reduced;
  std::vector<size_t> pivots;  // pivot column per reduced row, in row order
  size_t rank = 0;
};

// Reduced row-echelon form over GF(2).  When pivot_cols is nonempty those
// columns are eliminated first, in the given order, before the remaining
// columns in ascending order (the two-stage elimination needs this).
RrefResult rref_rank(BitMatrix m, const std::vector<size_t>& pivot_cols = {});

// x with a*x = b, or nullopt when inconsistent.  Free variables are zero, so
// the result is deterministic.
std::optional<BitVec> solve_linear(const BitMatrix& a, const BitVec& b);

// Rows form a basis of the kernel {x : a*x = 0}; row count = cols - rank.
BitMatrix nullspace_basis(const BitMatrix& a);

}  // namespace stairway
