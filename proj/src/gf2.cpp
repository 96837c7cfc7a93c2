#include "gf2.hpp"

#include <algorithm>

namespace stairway {

bool BitVec::operator<(const BitVec& o) const {
  // Lexicographic over the sorted index sets: the vector whose first
  // differing bit position is set *earlier* wins.  Used for deterministic
  // certificate tie-breaking.
  assert(n_ == o.n_);
  for (size_t k = 0; k < w_.size(); ++k) {
    uint64_t d = w_[k] ^ o.w_[k];
    if (d) {
      uint64_t low = d & -d;
      return w_[k] & low;  // we own the earliest differing index
    }
  }
  return false;
}

BitMatrix BitMatrix::random(size_t rows, size_t cols, Rng& rng) {
  BitMatrix m(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    for (size_t k = 0; k < m.stride_; ++k) m.w_[r * m.stride_ + k] = rng.u64();
    // Re-zero the tail past `cols`.
    if (cols & 63) m.w_[r * m.stride_ + m.stride_ - 1] &= (1ull << (cols & 63)) - 1;
  }
  return m;
}

BitMatrix BitMatrix::transposed() const {
  BitMatrix t(cols_, rows_);
  for (size_t r = 0; r < rows_; ++r)
    for (size_t k = 0; k < stride_; ++k) {
      uint64_t w = w_[r * stride_ + k];
      while (w) {
        size_t c = k * 64 + __builtin_ctzll(w);
        t.set(c, r, true);
        w &= w - 1;
      }
    }
  return t;
}

BitMatrix BitMatrix::operator*(const BitMatrix& o) const {
  assert(cols_ == o.rows_);
  BitMatrix out(rows_, o.cols_);
  // out.row(r) = XOR of o.row(c) over set bits c of this->row(r).
  for (size_t r = 0; r < rows_; ++r)
    for (size_t k = 0; k < stride_; ++k) {
      uint64_t w = w_[r * stride_ + k];
      while (w) {
        size_t c = k * 64 + __builtin_ctzll(w);
        uint64_t* d = &out.w_[r * out.stride_];
        const uint64_t* s = &o.w_[c * o.stride_];
        for (size_t j = 0; j < o.stride_; ++j) d[j] ^= s[j];
        w &= w - 1;
      }
    }
  return out;
}

BitVec BitMatrix::mul_vec(const BitVec& x) const {
  assert(x.size() == cols_);
  BitVec out(rows_);
  for (size_t r = 0; r < rows_; ++r) {
    uint64_t acc = 0;
    const uint64_t* row = &w_[r * stride_];
    for (size_t k = 0; k < stride_; ++k) acc ^= row[k] & x.words()[k];
    if (__builtin_parityll(acc)) out.set(r, true);
  }
  return out;
}

std::string BitMatrix::to_string() const {
  std::string s;
  s.reserve(rows_ * (cols_ + 1));
  for (size_t r = 0; r < rows_; ++r) {
    for (size_t c = 0; c < cols_; ++c) s += get(r, c) ? '1' : '0';
    s += '\n';
  }
  return s;
}

RrefResult rref_rank(BitMatrix m, const std::vector<size_t>& pivot_cols) {
  std::vector<size_t> order;
  order.reserve(m.cols());
  std::vector<char> used(m.cols(), 0);
  for (size_t c : pivot_cols) {
    assert(c < m.cols() && !used[c]);
    used[c] = 1;
    order.push_back(c);
  }
  for (size_t c = 0; c < m.cols(); ++c)
    if (!used[c]) order.push_back(c);

  RrefResult res;
  size_t r = 0;
  for (size_t c : order) {
    size_t pivot = m.rows();
    for (size_t i = r; i < m.rows(); ++i)
      if (m.get(i, c)) {
        pivot = i;
        break;
      }
    if (pivot == m.rows()) continue;
    m.swap_rows(r, pivot);
    for (size_t i = 0; i < m.rows(); ++i)
      if (i != r && m.get(i, c)) m.row_xor(i, r);
    res.pivots.push_back(c);
    ++r;
    if (r == m.rows()) break;
  }
  res.rank = r;
  res.reduced = std::move(m);
  return res;
}

std::optional<BitVec> solve_linear(const BitMatrix& a, const BitVec& b) {
  assert(b.size() == a.rows());
  // Augment with b as the last column, then eliminate A's columns first.
  BitMatrix aug(a.rows(), a.cols() + 1);
  for (size_t r = 0; r < a.rows(); ++r) {
    BitVec row = a.row(r);
    BitVec wide(a.cols() + 1);
    std::copy(row.words().begin(), row.words().end(), wide.words().begin());
    if (b.get(r)) wide.set(a.cols(), true);
    aug.set_row(r, wide);
  }
  std::vector<size_t> prio(a.cols());
  for (size_t c = 0; c < a.cols(); ++c) prio[c] = c;
  RrefResult rr = rref_rank(std::move(aug), prio);
  BitVec x(a.cols());
  for (size_t i = 0; i < rr.pivots.size(); ++i) {
    if (rr.pivots[i] == a.cols()) return std::nullopt;  // row (0..0 | 1)
    if (rr.reduced.get(i, a.cols())) x.set(rr.pivots[i], true);
  }
  return x;
}

BitMatrix nullspace_basis(const BitMatrix& a) {
  RrefResult rr = rref_rank(a);
  std::vector<char> is_pivot(a.cols(), 0);
  std::vector<size_t> pivot_row(a.cols(), 0);
  for (size_t i = 0; i < rr.pivots.size(); ++i) {
    is_pivot[rr.pivots[i]] = 1;
    pivot_row[rr.pivots[i]] = i;
  }
  BitMatrix basis(a.cols() - rr.rank, a.cols());
  size_t out = 0;
  for (size_t f = 0; f < a.cols(); ++f) {
    if (is_pivot[f]) continue;
    basis.set(out, f, true);
    for (size_t c = 0; c < a.cols(); ++c)
      if (is_pivot[c] && rr.reduced.get(pivot_row[c], f)) basis.set(out, c, true);
    ++out;
  }
  assert(out == basis.rows());
  return basis;
}

}  // namespace stairway
