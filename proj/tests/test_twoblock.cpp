#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "group2block.hpp"
#include "rng.hpp"
#include "support/naive_gf2.hpp"

using namespace stairway;

TEST_CASE("mixed radix indexing, first factor fastest") {
  AbelianGroupSpec g{{3, 4}};
  CHECK(g.order() == 12);
  CHECK(g.index_of({0, 0}) == 0);
  CHECK(g.index_of({1, 0}) == 1);
  CHECK(g.index_of({2, 0}) == 2);
  CHECK(g.index_of({0, 1}) == 3);
  CHECK(g.index_of({1, 2}) == 7);
  CHECK(g.index_of({-1, -1}) == g.index_of({2, 3}));
  for (size_t i = 0; i < g.order(); ++i)
    CHECK(g.index_of(g.element_at(i)) == i);
}

TEST_CASE("perm matrix is the regular representation") {
  AbelianGroupSpec g{{4, 3}};
  size_t n = g.order();

  BitMatrix p0 = group_perm_matrix(g, {0, 0});
  CHECK(p0 == BitMatrix::identity(n));

  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int64_t> ga = g.element_at(rng.below(n));
    std::vector<int64_t> gb = g.element_at(rng.below(n));
    BitMatrix pa = group_perm_matrix(g, ga);
    BitMatrix pb = group_perm_matrix(g, gb);
    // Homomorphism: P_a P_b = P_{a+b}; abelian, so they commute.
    CHECK(pa * pb == group_perm_matrix(g, g.add(ga, gb)));
    CHECK(pa * pb == pb * pa);
    // Permutation: one 1 per row and per column.
    for (size_t r = 0; r < n; ++r) CHECK(pa.row_weight(r) == 1);
    BitMatrix pat = pa.transposed();
    for (size_t r = 0; r < n; ++r) CHECK(pat.row_weight(r) == 1);
    // P_{-a} is the inverse.
    CHECK(pa * group_perm_matrix(g, g.neg(ga)) == BitMatrix::identity(n));
  }
}

TEST_CASE("toric code as a two-block code has k = 2") {
  for (uint32_t L : {3u, 4u, 5u}) {
    AbelianGroupSpec g{{L, L}};
    TwoBlockCode code = build_2bga(g, {{0, 0}, {1, 0}}, {{0, 0}, {0, 1}});
    CodeParams p = code_params_nk(code.hx, code.hz);
    CHECK(p.n == 2 * L * L);
    CHECK(p.k == 2);
    // Independent rank check against the unpacked elimination oracle.
    if (L == 3) {
      naive::Mat m(code.hx.rows(), std::vector<uint8_t>(code.hx.cols()));
      for (size_t r = 0; r < code.hx.rows(); ++r)
        for (size_t c = 0; c < code.hx.cols(); ++c)
          m[r][c] = code.hx.get(r, c);
      CHECK(naive::rank(m) == rref_rank(code.hx).rank);
    }
  }
}

TEST_CASE("gross code from shipped spec is [[144, 12]]") {
  TwoBlockSpec spec = load_twoblock_spec(DATA_DIR "/gross.json");
  CHECK(spec.group.factors == std::vector<uint32_t>{12, 6});
  TwoBlockCode code = build_2bga(spec.group, spec.a_terms, spec.b_terms);
  CodeParams p = code_params_nk(code.hx, code.hz);
  CHECK(p.n == 144);
  CHECK(p.k == 12);
  for (size_t r = 0; r < code.hx.rows(); ++r) {
    CHECK(code.hx.row_weight(r) == 6);
    CHECK(code.hz.row_weight(r) == 6);
  }
}

TEST_CASE("spec json round trips") {
  TwoBlockSpec spec = load_twoblock_spec(DATA_DIR "/gross.json");
  TwoBlockSpec again = twoblock_spec_from_json_text(twoblock_spec_to_json_text(spec));
  CHECK(again.group.factors == spec.group.factors);
  CHECK(again.a_terms == spec.a_terms);
  CHECK(again.b_terms == spec.b_terms);
}

TEST_CASE("validation") {
  AbelianGroupSpec g{{3, 3}};
  // Duplicate term would silently cancel over GF(2); rejected instead.
  CHECK_THROWS(build_2bga(g, {{0, 0}, {0, 0}}, {{0, 0}}));
  // Non-orthogonal pair rejected.
  BitMatrix hx(1, 2), hz(1, 2);
  hx.set(0, 0, true);
  hz.set(0, 0, true);
  CHECK_THROWS(code_params_nk(hx, hz));
}
