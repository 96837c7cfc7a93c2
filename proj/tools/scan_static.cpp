// Offline scan: which weight-8 two-block codes over the space-time quotient
// group reproduce the published (n, k) of all three shipped lattices?
//
// The quotient group is G = Z^7 / <periodicity rows, (1,...,1)>; its order is
// 8 * cosets_per_time (the all-ones vector has time 8 and every periodicity
// row has time 0).  Structure imposed by the cell picture:
//   - each of the 6 non-tau ports carries a fixed step vector s_d with
//     t.s_d = 1 (edges span exactly one time step);
//   - the two worldline cycles jointly traverse every port once, the two tau
//     crossings contribute e0, and each cycle displaces (1,...,1) per period,
//     so sum(s_d) = (0,1,1,1,1,1,1) and every s_d has zero j0 component;
//   - supports are {identity} + 3 signed steps per side (weight-8 check),
//     sides partitioning the six directions.
// Candidate steps: spatial vectors of l1-norm <= 3 with coordinate sum 1,
// i.e. units e_i, composites e_i+e_j-e_k, and 2e_i-e_j.  The scan enumerates
// 6-subsets with the required sum (meet-in-the-middle), then all side splits
// and sign patterns, computing k = n - rank(hz) - rank(hx) on the first
// lattice and re-validating hits on the other two.  hz = [B^T|A^T],
// hx = [A|B] commute for any abelian group.
#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "gf2.hpp"
#include "lattice.hpp"

using namespace stairway;

namespace {

struct Published {
  std::string name;
  IMat rows;
  size_t n;
  size_t k;
};

std::vector<Published> published_lattices() {
  return {
      {"l192",
       {{-2, 4, 0, 0, 0, 0, 0},
        {-3, 0, 6, 0, 0, 0, 0},
        {-2, 0, 5, -1, 0, 0, 0},
        {-1, 3, 0, 0, -1, 0, 0},
        {-3, 3, 4, 0, 0, -1, 0},
        {-2, 3, 2, 0, 0, 0, -1}},
       192,
       16},
      {"l288",
       {{-3, 6, 0, 0, 0, 0, 0},
        {-3, 0, 6, 0, 0, 0, 0},
        {-2, 3, 2, -1, 0, 0, 0},
        {-4, 5, 4, 0, -1, 0, 0},
        {-2, 4, 1, 0, 0, -1, 0},
        {-3, 4, 3, 0, 0, 0, -1}},
       288,
       14},
      {"l576",
       {{-3, 6, 0, 0, 0, 0, 0},
        {-6, 0, 12, 0, 0, 0, 0},
        {-4, 4, 5, -1, 0, 0, 0},
        {-1, 1, 2, 0, -1, 0, 0},
        {-3, 2, 5, 0, 0, -1, 0},
        {-5, 1, 10, 0, 0, 0, -1}},
       576,
       14},
  };
}

StairwayLattice make_lattice(const IMat& rows) {
  StairwayLattice lat;
  lat.t = default_time_covector(7);
  lat.periodicity = rows;
  return lat;
}

// Spatial step candidates: t.v = 1, v[0] = 0, |v|_1 <= 3.
std::vector<IVec> step_pool() {
  std::vector<IVec> pool;
  auto push = [&](std::array<int, 6> c) {
    IVec v(7, 0);
    for (int i = 0; i < 6; ++i) v[i + 1] = c[i];
    pool.push_back(v);
  };
  for (int i = 0; i < 6; ++i) {
    std::array<int, 6> c{};
    c[i] = 1;
    push(c);
  }
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j)
      for (int k = 0; k < 6; ++k) {
        if (k == i || k == j) continue;
        std::array<int, 6> c{};
        c[i] = 1;
        c[j] = 1;
        c[k] = -1;
        push(c);
      }
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      if (i == j) continue;
      std::array<int, 6> c{};
      c[i] = 2;
      c[j] = -1;
      push(c);
    }
  return pool;
}

// G as (time mod 8) x (coset index); addition by lifting to Z^7.
struct Quotient {
  CosetGeometry geo;
  size_t cosets;
  size_t order;

  explicit Quotient(const StairwayLattice& lat)
      : geo(lat), cosets(geo.cosets_per_time()), order(8 * cosets) {}

  size_t id_of(const IVec& p) const {
    int64_t t = 0;
    for (size_t i = 0; i < 7; ++i) t += (i == 0 ? 2 : 1) * p[i];
    int64_t m = t >= 0 ? t / 8 : -((-t + 7) / 8);
    IVec q = p;
    for (auto& c : q) c -= m;
    return static_cast<size_t>(t - 8 * m) * cosets + geo.index_of(q);
  }
  IVec lift(size_t id) const {
    return geo.rep_at(static_cast<int64_t>(id / cosets), id % cosets);
  }
  // perm[g] = g + v.
  std::vector<uint32_t> perm_of(const IVec& v) const {
    std::vector<uint32_t> perm(order);
    for (size_t e = 0; e < order; ++e) {
      IVec p = lift(e);
      for (size_t i = 0; i < 7; ++i) p[i] += v[i];
      perm[e] = static_cast<uint32_t>(id_of(p));
    }
    return perm;
  }
};

// One signed step: supports are {0, sgn[0]*s[d0], sgn[1]*s[d1], sgn[2]*s[d2]}.
struct Side {
  std::array<const std::vector<uint32_t>*, 3> perm;  // of the signed vectors
};

size_t code_k(const Quotient& g, const Side& a, const Side& b) {
  const size_t ord = g.order;
  BitMatrix hz(ord, 2 * ord), hx(ord, 2 * ord);
  // neg of a perm applied to r is found via the inverse walk: store inverse?
  // All perms here are group translations; the inverse of adding v is adding
  // -v, which the caller supplies as the signed-vector perm itself.  To keep
  // this function simple the caller passes, for each support element, the
  // permutation of ADDING it; row r of hz needs r - s, so we invert by lookup.
  auto inv_at = [&](const std::vector<uint32_t>& p, size_t r) {
    // p is a permutation; find q with p[q] = r via precomputed inverse cache.
    return r;  // replaced below
  };
  (void)inv_at;
  // Build inverse tables once per call (cheap relative to the rank).
  std::array<std::vector<uint32_t>, 3> ia, ib;
  for (int i = 0; i < 3; ++i) {
    ia[i].resize(ord);
    ib[i].resize(ord);
    for (size_t e = 0; e < ord; ++e) {
      ia[i][(*a.perm[i])[e]] = static_cast<uint32_t>(e);
      ib[i][(*b.perm[i])[e]] = static_cast<uint32_t>(e);
    }
  }
  for (size_t r = 0; r < ord; ++r) {
    hz.set(r, r, true);
    hz.set(r, ord + r, true);
    hx.set(r, r, true);
    hx.set(r, ord + r, true);
    for (int i = 0; i < 3; ++i) {
      hz.set(r, ib[i][r], true);             // B^T: L data at r - b
      hz.set(r, ord + ia[i][r], true);       // A^T: R data at r - a
      hx.set(r, (*a.perm[i])[r], true);      // A: L data at r + a
      hx.set(r, ord + (*b.perm[i])[r], true);  // B: R data at r + b
    }
  }
  size_t rz = rref_rank(hz).rank;
  size_t rx = rref_rank(hx).rank;
  return 2 * ord - rz - rx;
}

// Supports must be 4 distinct group elements per side.
bool side_ok(const Side& s, size_t id0) {
  std::array<uint32_t, 3> e{};
  for (int i = 0; i < 3; ++i) {
    e[i] = (*s.perm[i])[id0];
    if (e[i] == id0) return false;
  }
  return e[0] != e[1] && e[0] != e[2] && e[1] != e[2];
}

std::string vec_str(const IVec& v) {
  std::string s;
  for (size_t d = 1; d < 7; ++d) {
    for (int64_t r = 0; r < (v[d] > 0 ? v[d] : -v[d]); ++r) {
      s += v[d] > 0 ? "+" : "-";
      s += "j" + std::to_string(d);
    }
  }
  return s.empty() ? "0" : s;
}

struct SixSet {
  std::array<uint16_t, 6> idx;
};

// All 6-subsets of the pool whose vectors sum to (0,1,1,1,1,1,1).
std::vector<SixSet> six_sets(const std::vector<IVec>& pool) {
  const size_t np = pool.size();
  struct Tri {
    std::array<uint16_t, 3> idx;
    std::array<int8_t, 6> sum;
  };
  std::vector<Tri> tris;
  for (uint16_t a = 0; a < np; ++a)
    for (uint16_t b = a + 1; b < np; ++b)
      for (uint16_t c = b + 1; c < np; ++c) {
        Tri t{{a, b, c}, {}};
        for (int d = 0; d < 6; ++d)
          t.sum[d] = static_cast<int8_t>(pool[a][d + 1] + pool[b][d + 1] +
                                         pool[c][d + 1]);
        tris.push_back(t);
      }
  auto key = [](const std::array<int8_t, 6>& s) {
    uint64_t k = 0;
    for (int d = 0; d < 6; ++d) k = k * 32 + static_cast<uint64_t>(s[d] + 12);
    return k;
  };
  std::map<uint64_t, std::vector<uint32_t>> by_sum;
  for (uint32_t i = 0; i < tris.size(); ++i) by_sum[key(tris[i].sum)].push_back(i);

  std::vector<SixSet> out;
  for (uint32_t i = 0; i < tris.size(); ++i) {
    std::array<int8_t, 6> want;
    for (int d = 0; d < 6; ++d) want[d] = static_cast<int8_t>(1 - tris[i].sum[d]);
    auto it = by_sum.find(key(want));
    if (it == by_sum.end()) continue;
    for (uint32_t j : it->second) {
      if (j <= i) continue;  // unordered pair of triples
      // Disjointness plus canonical form: require max(first) < min(second)
      // fails to cover interleaved subsets, so dedupe by sorting instead.
      const auto& t1 = tris[i];
      const auto& t2 = tris[j];
      std::array<uint16_t, 6> all{t1.idx[0], t1.idx[1], t1.idx[2],
                                  t2.idx[0], t2.idx[1], t2.idx[2]};
      std::sort(all.begin(), all.end());
      bool distinct = true;
      for (int d = 0; d + 1 < 6; ++d)
        if (all[d] == all[d + 1]) distinct = false;
      if (!distinct) continue;
      out.push_back({all});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const SixSet& a, const SixSet& b) { return a.idx < b.idx; });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const SixSet& a, const SixSet& b) {
                          return a.idx == b.idx;
                        }),
            out.end());
  return out;
}

constexpr std::array<std::array<uint8_t, 3>, 10> kSplits = {{
    // side A as a 3-subset of {0..5}; side B is the complement.  (A,B) and
    // (B,A) give the same k, so only splits with 0 in side A are listed.
    {{0, 1, 2}},
    {{0, 1, 3}},
    {{0, 1, 4}},
    {{0, 1, 5}},
    {{0, 2, 3}},
    {{0, 2, 4}},
    {{0, 2, 5}},
    {{0, 3, 4}},
    {{0, 3, 5}},
    {{0, 4, 5}},
}};

}  // namespace

int main() {
  auto pubs = published_lattices();
  auto pool = step_pool();
  std::printf("step pool: %zu vectors\n", pool.size());
  auto sets = six_sets(pool);
  std::printf("6-sets with sum (0,1,1,1,1,1,1): %zu\n", sets.size());

  StairwayLattice lat1 = make_lattice(pubs[0].rows);
  Quotient g1(lat1);
  std::printf("lattice %s: |G| = %zu\n", pubs[0].name.c_str(), g1.order);
  size_t id0 = g1.id_of(IVec(7, 0));

  // Permutations of +v and -v for every pool vector, built lazily.
  std::vector<std::vector<uint32_t>> pp(pool.size()), pn(pool.size());
  auto perm_pos = [&](size_t i) -> const std::vector<uint32_t>& {
    if (pp[i].empty()) pp[i] = g1.perm_of(pool[i]);
    return pp[i];
  };
  auto perm_neg = [&](size_t i) -> const std::vector<uint32_t>& {
    if (pn[i].empty()) {
      IVec m = pool[i];
      for (auto& c : m) c = -c;
      pn[i] = g1.perm_of(m);
    }
    return pn[i];
  };

  struct Hit {
    SixSet set;
    uint8_t split;
    uint8_t signs;
  };
  std::vector<Hit> hits;
  std::map<size_t, size_t> hist;
  for (size_t si = 0; si < sets.size(); ++si) {
    const auto& ss = sets[si];
    for (uint8_t sp = 0; sp < kSplits.size(); ++sp) {
      std::array<uint16_t, 3> da{}, db{};
      {
        std::array<bool, 6> in_a{};
        for (uint8_t x : kSplits[sp]) in_a[x] = true;
        int ia = 0, ib = 0;
        for (int d = 0; d < 6; ++d)
          (in_a[d] ? da[ia++] : db[ib++]) = ss.idx[d];
      }
      // Global inversion maps sign pattern s to ~s, so pin bit 0.
      for (uint8_t sg = 0; sg < 64; sg += 2) {
        Side a, b;
        for (int i = 0; i < 3; ++i) {
          bool neg_a = sg & (1u << i);
          bool neg_b = sg & (1u << (3 + i));
          a.perm[i] = neg_a ? &perm_neg(da[i]) : &perm_pos(da[i]);
          b.perm[i] = neg_b ? &perm_neg(db[i]) : &perm_pos(db[i]);
        }
        if (!side_ok(a, id0) || !side_ok(b, id0)) continue;
        size_t k = code_k(g1, a, b);
        ++hist[k];
        if (k == pubs[0].k) hits.push_back({ss, sp, sg});
      }
    }
    if ((si + 1) % 50 == 0)
      std::fprintf(stderr, "  ... %zu/%zu 6-sets, %zu hits\n", si + 1,
                   sets.size(), hits.size());
  }
  std::printf("k histogram on %s:\n", pubs[0].name.c_str());
  for (auto& [k, c] : hist) std::printf("  k=%zu: %zu\n", k, c);

  // Re-validate hits on the remaining lattices.
  size_t survivors = 0;
  for (size_t li = 1; li < pubs.size() && !hits.empty(); ++li) {
    StairwayLattice lat = make_lattice(pubs[li].rows);
    Quotient g(lat);
    size_t idz = g.id_of(IVec(7, 0));
    std::vector<Hit> keep;
    for (const auto& h : hits) {
      std::array<std::vector<uint32_t>, 6> pos, neg;
      std::array<bool, 6> in_a{};
      for (uint8_t x : kSplits[h.split]) in_a[x] = true;
      std::array<uint16_t, 3> da{}, db{};
      int iac = 0, ibc = 0;
      for (int d = 0; d < 6; ++d)
        (in_a[d] ? da[iac++] : db[ibc++]) = h.set.idx[d];
      Side a, b;
      std::array<std::vector<uint32_t>, 6> store;
      int sc = 0;
      auto get = [&](uint16_t pi, bool negate) -> const std::vector<uint32_t>* {
        IVec v = pool[pi];
        if (negate)
          for (auto& c : v) c = -c;
        store[sc] = g.perm_of(v);
        return &store[sc++];
      };
      for (int i = 0; i < 3; ++i) {
        a.perm[i] = get(da[i], h.signs & (1u << i));
        b.perm[i] = get(db[i], h.signs & (1u << (3 + i)));
      }
      if (!side_ok(a, idz) || !side_ok(b, idz)) continue;
      if (2 * g.order != pubs[li].n) continue;
      if (code_k(g, a, b) == pubs[li].k) keep.push_back(h);
    }
    std::printf("hits surviving %s: %zu\n", pubs[li].name.c_str(), keep.size());
    hits = keep;
  }
  survivors = hits.size();
  for (const auto& h : hits) {
    std::string sa, sb;
    std::array<bool, 6> in_a{};
    for (uint8_t x : kSplits[h.split]) in_a[x] = true;
    int ia = 0, ib = 0;
    for (int d = 0; d < 6; ++d) {
      IVec v = pool[h.set.idx[d]];
      bool negate = in_a[d] ? (h.signs & (1u << ia)) : (h.signs & (1u << (3 + ib)));
      (in_a[d] ? ia : ib)++;
      if (negate)
        for (auto& c : v) c = -c;
      std::string& tgt = in_a[d] ? sa : sb;
      tgt += tgt.empty() ? "" : ", ";
      tgt += vec_str(v);
    }
    std::printf("SURVIVOR  split=%u signs=%02x  A~{1,%s}  B~{1,%s}\n", h.split,
                h.signs, sa.c_str(), sb.c_str());
  }
  std::printf("total survivors: %zu\n", survivors);
  return 0;
}
