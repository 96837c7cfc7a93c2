#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gf2.hpp"

namespace stairway {

// Finite abelian group Z_{d1} x ... x Z_{dm}.  Elements are exponent tuples;
// the linear index is mixed-radix with the FIRST factor fastest:
//   index(e) = e1 + d1*(e2 + d2*(e3 + ...))
struct AbelianGroupSpec {
  std::vector<uint32_t> factors;

  size_t order() const;
  size_t index_of(const std::vector<int64_t>& elem) const;
  std::vector<int64_t> element_at(size_t idx) const;
  std::vector<int64_t> add(const std::vector<int64_t>& a,
                           const std::vector<int64_t>& b) const;
  std::vector<int64_t> neg(const std::vector<int64_t>& a) const;
  // Component-wise reduction into [0, d_i).
  std::vector<int64_t> normalize(const std::vector<int64_t>& a) const;
};

// Regular-representation permutation matrix of adding g:  P e_h = e_{g+h}.
BitMatrix group_perm_matrix(const AbelianGroupSpec& g,
                            const std::vector<int64_t>& elem);

struct TwoBlockCode {
  AbelianGroupSpec group;
  BitMatrix a;   // sum of permutation matrices over the a terms
  BitMatrix b;
  BitMatrix hx;  // [A | B]
  BitMatrix hz;  // [B^T | A^T]
};

// Two-block group-algebra code over an abelian group.  A and B commute, so
// hx * hz^T = AB + BA = 0 automatically; build_2bga asserts that anyway.
// Duplicate terms cancel over GF(2) and are rejected.
TwoBlockCode build_2bga(const AbelianGroupSpec& g,
                        const std::vector<std::vector<int64_t>>& a_terms,
                        const std::vector<std::vector<int64_t>>& b_terms);

struct CodeParams {
  size_t n;
  size_t k;
};

// Throws if hx * hz^T != 0.
CodeParams code_params_nk(const BitMatrix& hx, const BitMatrix& hz);

struct TwoBlockSpec {
  AbelianGroupSpec group;
  std::vector<std::vector<int64_t>> a_terms;
  std::vector<std::vector<int64_t>> b_terms;
};

// JSON file with keys {factors, a, b}; a "format" key is optional on input.
TwoBlockSpec load_twoblock_spec(const std::string& path);
TwoBlockSpec twoblock_spec_from_json_text(const std::string& text);
std::string twoblock_spec_to_json_text(const TwoBlockSpec& spec);

}  // namespace stairway
