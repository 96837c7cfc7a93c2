#include "distance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "rng.hpp"

namespace stairway {

namespace {

struct Clock {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double limit;
  explicit Clock(double lim) : limit(lim) {}
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  bool expired() const { return elapsed() >= limit; }
};

bool anticommutes(const PauliString& a, const PauliString& b) { return !a.commutes(b); }

// The two parity families every engine runs on.  checks: l lies in
// span(stabs, logicals) iff it commutes with each (the symplectic complement
// of that span).  duals: <l, duals[q]> recovers the q-th logical coefficient
// of l, so "nonzero logical part" is "anticommutes with some dual".
struct Problem {
  size_t n = 0;
  std::vector<PauliString> checks;
  std::vector<PauliString> duals;
};

PauliString from_coords(const BitVec& u, size_t n) {
  PauliString p(n);
  for (size_t i = 0; i < n; ++i) {
    if (u.get(i)) p.x.set(i, true);
    if (u.get(n + i)) p.z.set(i, true);
  }
  return p;
}

Problem build_problem(const std::vector<PauliString>& stabs,
                      const std::vector<PauliString>& logicals) {
  if (logicals.empty()) throw std::invalid_argument("distance: empty logical set");
  const size_t n = logicals[0].width();
  for (const auto& g : stabs)
    if (g.width() != n) throw std::invalid_argument("distance: operator width mismatch");
  for (const auto& g : logicals)
    if (g.width() != n) throw std::invalid_argument("distance: operator width mismatch");

  // Row r maps operator coords [x|z] to <l, g_r> = x.g_z + z.g_x.
  BitMatrix m(stabs.size() + logicals.size(), 2 * n);
  auto fill = [&](size_t r, const PauliString& g) {
    for (size_t i = 0; i < n; ++i) {
      if (g.z.get(i)) m.set(r, i, true);
      if (g.x.get(i)) m.set(r, n + i, true);
    }
  };
  for (size_t j = 0; j < stabs.size(); ++j) fill(j, stabs[j]);
  for (size_t q = 0; q < logicals.size(); ++q) fill(stabs.size() + q, logicals[q]);

  Problem pr;
  pr.n = n;
  BitMatrix ker = nullspace_basis(m);
  pr.checks.reserve(ker.rows());
  for (size_t r = 0; r < ker.rows(); ++r) pr.checks.push_back(from_coords(ker.row(r), n));
  for (size_t q = 0; q < logicals.size(); ++q) {
    BitVec b(m.rows());
    b.set(stabs.size() + q, true);
    auto w = solve_linear(m, b);
    if (!w)
      throw std::invalid_argument("distance: a logical is dependent on the other generators");
    pr.duals.push_back(from_coords(*w, n));
  }
  return pr;
}

bool member_nontrivial(const Problem& pr, const PauliString& cand) {
  for (const auto& c : pr.checks)
    if (anticommutes(cand, c)) return false;
  for (const auto& d : pr.duals)
    if (anticommutes(cand, d)) return true;
  return false;
}

bool is_pure(const PauliString& p) { return !(p.x.any() && p.z.any()); }

uint64_t fnv_words(const uint64_t* w, size_t k) {
  uint64_t h = 1469598103934665603ull;
  for (size_t i = 0; i < k; ++i) {
    h ^= w[i];
    h *= 1099511628211ull;
    h ^= h >> 29;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Meet-in-the-middle engine.
//
// A Space is a set of positions with a few variants each, every (position,
// variant) contributing a fixed syndrome (checks then duals, packed in
// words).  Sector mode: positions are qubits of a single-Pauli-type
// candidate (CSS fast path).  General mode: three variants per qubit (X, Z,
// Y).  A weight-w operator splits into disjoint halves of sizes ceil(w/2)
// and floor(w/2); halves are enumerated, keyed by the checks part of the
// syndrome, and matched (equal checks, differing duals).

constexpr uint32_t kVarX = 0, kVarZ = 1, kVarY = 2;

struct Space {
  size_t n = 0;
  uint32_t variants = 1;
  bool general = false;
  bool x_sector = false;  // sector mode: candidates are pure X (else pure Z)
  size_t wc = 0, wd = 0;
  std::vector<uint64_t> atoms;  // (pos * variants + v) * (wc + wd) words
  bool inert = false;           // no duals: no nontrivial candidate can exist

  size_t stride() const { return wc + wd; }
  const uint64_t* atom(size_t pos, uint32_t v) const {
    return &atoms[(pos * variants + v) * stride()];
  }
  // The candidate Pauli contribution of one (position, variant).
  void apply(PauliString& p, size_t pos, uint32_t v) const {
    if (!general) {
      (x_sector ? p.x : p.z).flip(pos);
      return;
    }
    if (v == kVarX || v == kVarY) p.x.flip(pos);
    if (v == kVarZ || v == kVarY) p.z.flip(pos);
  }
};

Space sector_space(const Problem& pr, bool x_sector) {
  // A pure-X candidate sees <l, c> = l.x . c.z, so only the z parts of the
  // checks constrain it (and symmetrically for pure Z).
  std::vector<const BitVec*> cvec, dvec;
  for (const auto& c : pr.checks) {
    const BitVec& rel = x_sector ? c.z : c.x;
    if (rel.any()) cvec.push_back(&rel);
  }
  for (const auto& d : pr.duals) {
    const BitVec& rel = x_sector ? d.z : d.x;
    if (rel.any()) dvec.push_back(&rel);
  }
  Space s;
  s.n = pr.n;
  s.variants = 1;
  s.x_sector = x_sector;
  s.wc = (cvec.size() + 63) / 64;
  s.wd = (dvec.size() + 63) / 64;
  if (dvec.empty()) {
    s.inert = true;
    return s;
  }
  s.atoms.assign(s.n * s.stride(), 0);
  for (size_t pos = 0; pos < s.n; ++pos) {
    uint64_t* a = &s.atoms[pos * s.stride()];
    for (size_t i = 0; i < cvec.size(); ++i)
      if (cvec[i]->get(pos)) a[i >> 6] ^= 1ull << (i & 63);
    for (size_t i = 0; i < dvec.size(); ++i)
      if (dvec[i]->get(pos)) a[s.wc + (i >> 6)] ^= 1ull << (i & 63);
  }
  return s;
}

Space general_space(const Problem& pr) {
  Space s;
  s.n = pr.n;
  s.variants = 3;
  s.general = true;
  s.wc = (pr.checks.size() + 63) / 64;
  s.wd = (pr.duals.size() + 63) / 64;
  s.atoms.assign(s.n * 3 * s.stride(), 0);
  auto bit = [](const PauliString& g, size_t pos, uint32_t v) {
    // <P_v(pos), g> with P in {X, Z, Y}.
    bool px = v == kVarX || v == kVarY;
    bool pz = v == kVarZ || v == kVarY;
    return (px && g.z.get(pos)) ^ (pz && g.x.get(pos));
  };
  for (size_t pos = 0; pos < s.n; ++pos)
    for (uint32_t v = 0; v < 3; ++v) {
      uint64_t* a = &s.atoms[(pos * 3 + v) * s.stride()];
      for (size_t i = 0; i < pr.checks.size(); ++i)
        if (bit(pr.checks[i], pos, v)) a[i >> 6] ^= 1ull << (i & 63);
      for (size_t i = 0; i < pr.duals.size(); ++i)
        if (bit(pr.duals[i], pos, v)) a[s.wc + (i >> 6)] ^= 1ull << (i & 63);
    }
  return s;
}

// Packed half: 12 bits per element, (pos << 2) | variant, low elements first.
uint64_t pack_elem(uint64_t packed, uint32_t depth, size_t pos, uint32_t v) {
  return packed | ((uint64_t(pos) << 2 | v) << (12 * depth));
}
void unpack(uint64_t packed, uint32_t h, std::vector<std::pair<uint32_t, uint32_t>>& out) {
  out.clear();
  for (uint32_t i = 0; i < h; ++i) {
    uint64_t e = (packed >> (12 * i)) & 0xfff;
    out.push_back({uint32_t(e >> 2), uint32_t(e & 3)});
  }
}

// Depth-first enumeration of all h-subsets of positions x variants with a
// running syndrome; f(packed, acc) per leaf.  Returns false when the clock
// expired.
template <class F>
bool enum_halves(const Space& s, uint32_t h, Clock& clock, F&& f) {
  std::vector<uint64_t> acc(s.stride(), 0);
  uint64_t leaves = 0;
  std::function<bool(size_t, uint32_t, uint64_t)> rec = [&](size_t from, uint32_t depth,
                                                            uint64_t packed) -> bool {
    if (depth == h) {
      if ((++leaves & 8191) == 0 && clock.expired()) return false;
      return f(packed, acc.data());
    }
    for (size_t pos = from; pos + (h - depth - 1) < s.n; ++pos)
      for (uint32_t v = 0; v < s.variants; ++v) {
        const uint64_t* a = s.atom(pos, v);
        for (size_t k = 0; k < s.stride(); ++k) acc[k] ^= a[k];
        bool ok = rec(pos + 1, depth + 1, pack_elem(packed, depth, pos, v));
        for (size_t k = 0; k < s.stride(); ++k) acc[k] ^= a[k];
        if (!ok) return false;
      }
    return true;
  };
  return rec(0, 0, 0);
}

double level_size_estimate(size_t n, uint32_t variants, uint32_t h) {
  double c = 1;
  for (uint32_t i = 0; i < h; ++i) c = c * double(n - i) / double(i + 1) * variants;
  return c;
}

struct Hit {
  std::vector<uint32_t> support;
  PauliString op;
};

std::vector<uint32_t> cand_support(const PauliString& p) {
  std::vector<uint32_t> out;
  for (size_t i = 0; i < p.width(); ++i)
    if (p.x.get(i) || p.z.get(i)) out.push_back(uint32_t(i));
  return out;
}

bool hit_less(const Hit& a, const Hit& b) {
  if (a.support != b.support) return a.support < b.support;
  if (!(a.op.x == b.op.x)) return a.op.x < b.op.x;
  return a.op.z < b.op.z;
}

struct Search {
  Space space;
  // levels[h]: all weight-h halves as (hash of checks part, packed), sorted.
  std::vector<std::vector<std::pair<uint64_t, uint64_t>>> levels;
  uint32_t capped_at = kInfWeight;
};

enum class RoundRc { kNoHit, kHit, kCapped, kTimeout };

// Runs one exhaustive weight-w round on a search space.  Any hit appended to
// `best` (kept lexicographically minimal).
RoundRc run_round(Search& se, uint32_t w, Clock& clock, uint64_t mem_entries,
                  std::optional<Hit>& best) {
  const Space& s = se.space;
  const uint32_t h1 = (w + 1) / 2, h2 = w / 2;
  if (se.levels.size() <= h1) se.levels.resize(h1 + 1);
  if (se.levels[h1].empty()) {
    if (level_size_estimate(s.n, s.variants, h1) > double(mem_entries)) {
      se.capped_at = w;
      return RoundRc::kCapped;
    }
    auto& lvl = se.levels[h1];
    bool ok = enum_halves(s, h1, clock, [&](uint64_t packed, const uint64_t* acc) {
      lvl.push_back({fnv_words(acc, s.wc), packed});
      return true;
    });
    if (!ok) {
      lvl.clear();
      return RoundRc::kTimeout;
    }
    std::sort(lvl.begin(), lvl.end());
  }

  const auto& lvl = se.levels[h1];
  std::vector<uint64_t> accA(s.stride());
  std::vector<std::pair<uint32_t, uint32_t>> ea, eb;
  bool found = false;
  bool ok = enum_halves(s, h2, clock, [&](uint64_t packedB, const uint64_t* accB) {
    uint64_t key = fnv_words(accB, s.wc);
    auto it = std::lower_bound(lvl.begin(), lvl.end(),
                               std::make_pair(key, uint64_t(0)));
    for (; it != lvl.end() && it->first == key; ++it) {
      // Rebuild the stored half's syndrome; the hash may collide.
      unpack(it->second, h1, ea);
      std::fill(accA.begin(), accA.end(), 0);
      for (auto [pos, v] : ea) {
        const uint64_t* a = s.atom(pos, v);
        for (size_t k = 0; k < s.stride(); ++k) accA[k] ^= a[k];
      }
      bool same_checks = std::equal(accA.begin(), accA.begin() + s.wc, accB);
      if (!same_checks) continue;
      bool duals_differ = !std::equal(accA.begin() + s.wc, accA.end(), accB + s.wc);
      if (!duals_differ) continue;
      // Candidate: product of the two halves.
      PauliString cand(s.n);
      for (auto [pos, v] : ea) s.apply(cand, pos, v);
      unpack(packedB, h2, eb);
      for (auto [pos, v] : eb) s.apply(cand, pos, v);
      if (cand.weight() != w) continue;  // halves overlapped; not a weight-w find
      Hit h{cand_support(cand), cand};
      if (!best || hit_less(h, *best)) best = std::move(h);
      found = true;
    }
    return true;
  });
  if (!ok) return RoundRc::kTimeout;
  return found ? RoundRc::kHit : RoundRc::kNoHit;
}

// ---------------------------------------------------------------------------
// Seeded incumbent search: greedy weight descent over the span generators
// with random restarts.  Only ever produces verified upper bounds.

size_t xor_weight(const PauliString& a, const PauliString& b) {
  const auto &ax = a.x.words(), &az = a.z.words(), &bx = b.x.words(), &bz = b.z.words();
  size_t c = 0;
  for (size_t k = 0; k < ax.size(); ++k)
    c += __builtin_popcountll((ax[k] ^ bx[k]) | (az[k] ^ bz[k]));
  return c;
}

struct Incumbent {
  PauliString op;
  uint32_t weight = kInfWeight;
};

Incumbent hill_climb(const std::vector<PauliString>& stabs,
                     const std::vector<PauliString>& logicals,
                     const DistanceBudget& budget, Clock& clock) {
  const size_t ns = stabs.size(), k = logicals.size(), m = ns + k;
  std::vector<const PauliString*> gens(m);
  for (size_t j = 0; j < ns; ++j) gens[j] = &stabs[j];
  for (size_t q = 0; q < k; ++q) gens[ns + q] = &logicals[q];

  Rng rng(budget.seed);
  Incumbent best;
  const size_t wb = (k + 63) / 64;
  std::vector<uint64_t> beta(wb);
  std::vector<uint32_t> order(m);
  std::iota(order.begin(), order.end(), 0u);

  auto beta_any = [&] {
    for (uint64_t w : beta)
      if (w) return true;
    return false;
  };
  auto toggle = [&](PauliString& l, size_t j) {
    l.x.xor_in(gens[j]->x);
    l.z.xor_in(gens[j]->z);
    if (j >= ns) beta[(j - ns) >> 6] ^= 1ull << ((j - ns) & 63);
  };

  for (uint32_t r = 0; r < budget.restarts && !clock.expired(); ++r) {
    std::fill(beta.begin(), beta.end(), 0);
    size_t q0 = rng.below(k);
    PauliString l = logicals[q0];
    beta[q0 >> 6] ^= 1ull << (q0 & 63);

    uint32_t mix = 1 + uint32_t(rng.below(2 * m));
    for (uint32_t t = 0; t < mix; ++t) {
      size_t j = rng.below(m);
      toggle(l, j);
      if (!beta_any()) toggle(l, j);  // keep the logical part nonzero
    }

    size_t cur = l.weight();
    bool improved = true;
    while (improved && !clock.expired()) {
      improved = false;
      for (size_t i = m; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
      for (uint32_t j : order) {
        size_t w2 = xor_weight(l, *gens[j]);
        if (w2 >= cur) continue;
        if (j >= ns) {
          size_t q = j - ns;
          beta[q >> 6] ^= 1ull << (q & 63);
          if (!beta_any()) {
            beta[q >> 6] ^= 1ull << (q & 63);
            continue;
          }
          beta[q >> 6] ^= 1ull << (q & 63);
        }
        toggle(l, j);
        cur = w2;
        improved = true;
        break;
      }
    }
    if (cur < best.weight) {
      best.weight = uint32_t(cur);
      best.op = l;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Shared driver for the exhaustive-rounds engines.

DistanceResult drive(const std::vector<PauliString>& stabs,
                     const std::vector<PauliString>& logicals,
                     const DistanceBudget& budget, bool with_incumbents,
                     uint32_t w_cap) {
  Clock clock(budget.wall_seconds);
  Problem pr = build_problem(stabs, logicals);
  DistanceResult res;

  if (with_incumbents) {
    Incumbent inc = hill_climb(stabs, logicals, budget, clock);
    if (inc.weight != kInfWeight && member_nontrivial(pr, inc.op)) {
      res.upper = inc.weight;
      res.certificate = inc.op;
    }
  }

  bool pure = true;
  for (const auto& g : stabs) pure = pure && is_pure(g);
  for (const auto& g : logicals) pure = pure && is_pure(g);
  for (const auto& g : pr.checks) pure = pure && is_pure(g);
  for (const auto& g : pr.duals) pure = pure && is_pure(g);

  std::vector<Search> searches;
  if (pure) {
    for (bool xs : {false, true}) {
      Space s = sector_space(pr, xs);
      if (!s.inert) searches.push_back({std::move(s), {}, kInfWeight});
    }
  } else {
    searches.push_back({general_space(pr), {}, kInfWeight});
  }
  if (searches.empty())
    throw std::runtime_error("distance: internal: no search space");

  for (uint32_t w = 1;; ++w) {
    if (res.upper != kInfWeight && w >= res.upper) {
      res.lower = res.upper;
      res.status = DistanceResult::Status::kExact;
      break;
    }
    if (w > w_cap) {
      res.lower = w;
      res.status = DistanceResult::Status::kBounds;
      break;
    }
    uint32_t cap = kInfWeight;
    for (const auto& se : searches) cap = std::min(cap, se.capped_at);
    if (w >= cap) {
      res.lower = cap;
      res.status = DistanceResult::Status::kBounds;
      break;
    }
    if (clock.expired()) {
      res.lower = w;
      res.status = DistanceResult::Status::kTimeout;
      break;
    }
    std::optional<Hit> best;
    bool timeout = false;
    for (auto& se : searches) {
      RoundRc rc = run_round(se, w, clock, budget.mem_entries, best);
      if (rc == RoundRc::kTimeout) {
        timeout = true;
        break;
      }
    }
    if (timeout) {
      res.lower = w;
      res.status = DistanceResult::Status::kTimeout;
      break;
    }
    if (best) {
      if (!member_nontrivial(pr, best->op))
        throw std::runtime_error("distance: internal certificate verification failed");
      res.lower = res.upper = w;
      res.certificate = best->op;
      res.status = DistanceResult::Status::kExact;
      break;
    }
  }
  res.wall_seconds = clock.elapsed();
  return res;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string status_name(DistanceResult::Status s) {
  switch (s) {
    case DistanceResult::Status::kExact: return "exact";
    case DistanceResult::Status::kBounds: return "bounds";
    case DistanceResult::Status::kTimeout: return "timeout";
  }
  return "unknown";
}

std::string pauli_text(const PauliString& p) {
  std::string out;
  for (size_t i = 0; i < p.width(); ++i) {
    bool x = p.x.get(i), z = p.z.get(i);
    if (!x && !z) continue;
    if (!out.empty()) out += ' ';
    out += x ? (z ? 'Y' : 'X') : 'Z';
    out += std::to_string(i);
  }
  return out;
}

std::string distance_report_json(const DistanceResult& r) {
  nlohmann::ordered_json j;
  j["lower"] = r.lower;
  if (r.upper == kInfWeight)
    j["upper"] = nullptr;
  else
    j["upper"] = r.upper;
  if (r.certificate.width() != 0)
    j["certificate"] = pauli_text(r.certificate);
  else if (!r.fault_set.empty())
    j["certificate"] = r.fault_set;
  else
    j["certificate"] = nullptr;
  if (r.step_index >= 0) j["step"] = r.step_index;
  j["status"] = status_name(r.status);
  j["wall_seconds"] = r.wall_seconds;
  return j.dump(2);
}

namespace {

BitVec symplectic_vec(const PauliString& p) {
  const size_t n = p.width();
  BitVec v(2 * n);
  for (size_t i : p.x.indices()) v.set(i, true);
  for (size_t i : p.z.indices()) v.set(n + i, true);
  return v;
}

bool in_span(const std::vector<PauliString>& gens, const PauliString& cand) {
  const size_t n = cand.width();
  BitMatrix m(gens.size(), 2 * n);
  for (size_t r = 0; r < gens.size(); ++r) m.set_row(r, symplectic_vec(gens[r]));
  return solve_linear(m.transposed(), symplectic_vec(cand)).has_value();
}

}  // namespace

bool verify_logical(const std::vector<PauliString>& stabs,
                    const std::vector<PauliString>& logicals,
                    const PauliString& cand) {
  // Direct span membership rather than an anticommutation probe: the two only
  // agree when `logicals` is a complete symplectic basis, and this routine
  // must also be correct for class-restricted logical lists.
  std::vector<PauliString> all = stabs;
  all.insert(all.end(), logicals.begin(), logicals.end());
  return in_span(all, cand) && !in_span(stabs, cand);
}

uint32_t IlpInstance::add_var(std::string name, bool binary, bool integer, double lo,
                              double hi) {
  vars.push_back({std::move(name), binary, integer, lo, hi});
  return uint32_t(vars.size() - 1);
}

IlpInstance make_ilp(const std::vector<PauliString>& stabs,
                     const std::vector<PauliString>& logicals) {
  if (logicals.empty()) throw std::invalid_argument("make_ilp: empty logical set");
  const size_t n = logicals[0].width();
  const size_t ns = stabs.size(), nl = logicals.size();

  IlpInstance ilp;
  std::vector<uint32_t> alpha(ns), beta(nl), vx(n), vz(n), sup(n), slack(2 * n);
  for (size_t j = 0; j < ns; ++j)
    alpha[j] = ilp.add_var("a" + std::to_string(j), true, false, 0, 1);
  for (size_t q = 0; q < nl; ++q)
    beta[q] = ilp.add_var("b" + std::to_string(q), true, false, 0, 1);
  for (size_t i = 0; i < n; ++i) {
    vx[i] = ilp.add_var("x" + std::to_string(i), true, false, 0, 1);
    vz[i] = ilp.add_var("z" + std::to_string(i), true, false, 0, 1);
    sup[i] = ilp.add_var("s" + std::to_string(i), true, false, 0, 1);
  }
  const double tmax = std::floor(double(ns + nl) / 2.0);
  for (size_t c = 0; c < 2 * n; ++c)
    slack[c] = ilp.add_var("t" + std::to_string(c), false, true, 0, tmax);

  for (size_t i = 0; i < n; ++i) ilp.objective.push_back({1.0, sup[i]});

  // Per symplectic coordinate: sum of the selected generators' bits minus
  // the coordinate bit is even (slack t_c absorbs the factor of two).
  auto coord_bit = [&](const PauliString& g, size_t c) {
    return c < n ? g.x.get(c) : g.z.get(c - n);
  };
  for (size_t c = 0; c < 2 * n; ++c) {
    IlpInstance::Constraint ct;
    ct.name = "p" + std::to_string(c);
    for (size_t j = 0; j < ns; ++j)
      if (coord_bit(stabs[j], c)) ct.terms.push_back({1.0, alpha[j]});
    for (size_t q = 0; q < nl; ++q)
      if (coord_bit(logicals[q], c)) ct.terms.push_back({1.0, beta[q]});
    ct.terms.push_back({-1.0, c < n ? vx[c] : vz[c - n]});
    ct.terms.push_back({-2.0, slack[c]});
    ct.sense = '=';
    ct.rhs = 0;
    ilp.constraints.push_back(std::move(ct));
  }
  // Support indicator is the OR of the two coordinate bits.
  for (size_t i = 0; i < n; ++i) {
    ilp.constraints.push_back(
        {"ox" + std::to_string(i), {{1.0, sup[i]}, {-1.0, vx[i]}}, '>', 0});
    ilp.constraints.push_back(
        {"oz" + std::to_string(i), {{1.0, sup[i]}, {-1.0, vz[i]}}, '>', 0});
    ilp.constraints.push_back(
        {"os" + std::to_string(i), {{1.0, vx[i]}, {1.0, vz[i]}, {-1.0, sup[i]}}, '>', 0});
  }
  IlpInstance::Constraint card;
  card.name = "card";
  for (size_t q = 0; q < nl; ++q) card.terms.push_back({1.0, beta[q]});
  card.sense = '>';
  card.rhs = 1;
  ilp.constraints.push_back(std::move(card));
  return ilp;
}

std::string lp_text(const IlpInstance& ilp) {
  std::ostringstream os;
  auto put_terms = [&](const std::vector<IlpInstance::Term>& terms) {
    bool first = true;
    for (const auto& t : terms) {
      double a = t.coef;
      if (first) {
        if (a < 0) os << "- ";
        first = false;
      } else {
        os << (a < 0 ? " - " : " + ");
      }
      double mag = std::fabs(a);
      if (mag != 1.0) os << mag << ' ';
      os << ilp.vars[t.var].name;
    }
  };
  os << "\\ minimum-weight nontrivial span member\n";
  os << "Minimize\n obj: ";
  put_terms(ilp.objective);
  os << "\nSubject To\n";
  for (const auto& c : ilp.constraints) {
    os << ' ' << c.name << ": ";
    put_terms(c.terms);
    os << (c.sense == '=' ? " = " : (c.sense == '>' ? " >= " : " <= ")) << c.rhs << "\n";
  }
  os << "Bounds\n";
  for (const auto& v : ilp.vars)
    if (v.integer) os << ' ' << v.lo << " <= " << v.name << " <= " << v.hi << "\n";
  os << "Binary\n";
  for (const auto& v : ilp.vars)
    if (v.binary) os << ' ' << v.name << "\n";
  os << "General\n";
  for (const auto& v : ilp.vars)
    if (v.integer) os << ' ' << v.name << "\n";
  os << "End\n";
  return os.str();
}

DistanceResult min_weight_nongauge(const std::vector<PauliString>& stabs,
                                   const std::vector<PauliString>& logicals,
                                   const DistanceBudget& budget) {
  return drive(stabs, logicals, budget, /*with_incumbents=*/true, budget.w_max);
}

DistanceResult brute_force_distance(const std::vector<PauliString>& stabs,
                                    const std::vector<PauliString>& logicals,
                                    uint32_t w_max, const DistanceBudget& budget) {
  return drive(stabs, logicals, budget, /*with_incumbents=*/false, w_max);
}

// ---------------------------------------------------------------------------
// Branch and bound over per-qubit Pauli assignments (the in-house solver for
// the integer program): iterative deepening on the weight cap, unit parity
// checks applied as soon as a check's support is fully decided.

DistanceResult min_weight_bnb(const std::vector<PauliString>& stabs,
                              const std::vector<PauliString>& logicals,
                              const DistanceBudget& budget) {
  Clock clock(budget.wall_seconds);
  Problem pr = build_problem(stabs, logicals);
  const size_t n = pr.n;
  const size_t wc = (pr.checks.size() + 63) / 64, wd = (pr.duals.size() + 63) / 64;
  const size_t stride = wc + wd;

  // Variant order X, Y, Z: branching non-identity first makes the first
  // solution at a given cap the one with the lexicographically smallest
  // support.
  auto pbit = [](const PauliString& g, size_t pos, int v) {
    bool px = v == 0 || v == 1;  // X or Y
    bool pz = v == 1 || v == 2;  // Y or Z
    return (px && g.z.get(pos)) ^ (pz && g.x.get(pos));
  };
  std::vector<uint64_t> atom(n * 3 * stride, 0);
  for (size_t pos = 0; pos < n; ++pos)
    for (int v = 0; v < 3; ++v) {
      uint64_t* a = &atom[(pos * 3 + v) * stride];
      for (size_t i = 0; i < pr.checks.size(); ++i)
        if (pbit(pr.checks[i], pos, v)) a[i >> 6] ^= 1ull << (i & 63);
      for (size_t i = 0; i < pr.duals.size(); ++i)
        if (pbit(pr.duals[i], pos, v)) a[wc + (i >> 6)] ^= 1ull << (i & 63);
    }

  // deadline[pos]: checks whose support ends at pos (parity must be even
  // once pos is decided).  dreach[pos]: dual bits still touchable at >= pos.
  std::vector<std::vector<uint32_t>> deadline(n);
  auto op_support_max = [&](const PauliString& g) {
    int64_t last = -1;
    for (size_t i = 0; i < n; ++i)
      if (g.x.get(i) || g.z.get(i)) last = int64_t(i);
    return last;
  };
  for (size_t i = 0; i < pr.checks.size(); ++i) {
    int64_t last = op_support_max(pr.checks[i]);
    if (last >= 0) deadline[size_t(last)].push_back(uint32_t(i));
  }
  std::vector<std::vector<uint64_t>> dreach(n + 1, std::vector<uint64_t>(wd, 0));
  for (size_t pos = n; pos-- > 0;) {
    dreach[pos] = dreach[pos + 1];
    for (int v = 0; v < 3; ++v) {
      const uint64_t* a = &atom[(pos * 3 + v) * stride];
      for (size_t k = 0; k < wd; ++k) dreach[pos][k] |= a[wc + k];
    }
  }

  DistanceResult res;
  std::vector<uint64_t> acc(stride, 0);
  std::vector<uint8_t> assign(n, 0);  // 0 = I, else variant + 1
  uint64_t nodes = 0;
  bool timed_out = false;

  std::function<bool(size_t, uint32_t, uint32_t)> rec = [&](size_t pos, uint32_t wt,
                                                            uint32_t cap) -> bool {
    if ((++nodes & 4095) == 0 && clock.expired()) {
      timed_out = true;
      return false;
    }
    if (pos == n) {
      for (size_t k = 0; k < wd; ++k)
        if (acc[wc + k]) return true;
      return false;
    }
    bool dual_dead = true;
    for (size_t k = 0; k < wd && dual_dead; ++k)
      if (acc[wc + k] | dreach[pos][k]) dual_dead = false;
    if (dual_dead) return false;

    auto try_branch = [&](int v) -> bool {
      const uint64_t* a = v < 0 ? nullptr : &atom[(pos * 3 + size_t(v)) * stride];
      if (a)
        for (size_t k = 0; k < stride; ++k) acc[k] ^= a[k];
      bool ok = true;
      for (uint32_t ci : deadline[pos])
        if ((acc[ci >> 6] >> (ci & 63)) & 1) {
          ok = false;
          break;
        }
      if (ok) {
        assign[pos] = uint8_t(v + 1);
        if (rec(pos + 1, wt + (v >= 0 ? 1 : 0), cap)) return true;
        if (timed_out) {
          if (a)
            for (size_t k = 0; k < stride; ++k) acc[k] ^= a[k];
          return false;
        }
      }
      if (a)
        for (size_t k = 0; k < stride; ++k) acc[k] ^= a[k];
      return false;
    };
    if (wt < cap)
      for (int v = 0; v < 3; ++v)
        if (try_branch(v)) return true;
    if (timed_out) return false;
    return try_branch(-1);
  };

  const uint32_t cap_end = std::min<uint32_t>(budget.w_max, uint32_t(n));
  for (uint32_t cap = 1; cap <= cap_end; ++cap) {
    if (clock.expired()) timed_out = true;
    if (timed_out) {
      res.lower = cap;
      res.status = DistanceResult::Status::kTimeout;
      res.wall_seconds = clock.elapsed();
      return res;
    }
    std::fill(acc.begin(), acc.end(), 0);
    if (rec(0, 0, cap)) {
      PauliString cert(n);
      for (size_t pos = 0; pos < n; ++pos) {
        int v = int(assign[pos]) - 1;
        if (v < 0) continue;
        if (v == 0 || v == 1) cert.x.set(pos, true);
        if (v == 1 || v == 2) cert.z.set(pos, true);
      }
      if (!member_nontrivial(pr, cert))
        throw std::runtime_error("distance: internal certificate verification failed");
      res.lower = res.upper = cap;
      res.certificate = cert;
      res.status = DistanceResult::Status::kExact;
      res.wall_seconds = clock.elapsed();
      return res;
    }
    if (timed_out) {
      res.lower = cap;
      res.status = DistanceResult::Status::kTimeout;
      res.wall_seconds = clock.elapsed();
      return res;
    }
  }
  res.lower = cap_end + 1;
  res.status = DistanceResult::Status::kBounds;
  res.wall_seconds = clock.elapsed();
  return res;
}

DistanceResult embedded_distance(const std::vector<EffectiveCode>& steps,
                                 const DistanceBudget& budget) {
  if (steps.empty()) throw std::invalid_argument("embedded_distance: no steps");
  Clock clock(budget.wall_seconds);
  DistanceResult agg;
  agg.lower = kInfWeight;
  bool any_timeout = false;
  for (size_t i = 0; i < steps.size(); ++i) {
    const EffectiveCode& step = steps[i];
    if (step.pairs.empty())
      throw std::invalid_argument("embedded_distance: step with no logical qubits");
    std::vector<PauliString> logicals;
    logicals.reserve(2 * step.pairs.size());
    for (const auto& pr : step.pairs) {
      logicals.push_back(pr.x_like);
      logicals.push_back(pr.z_like);
    }
    DistanceBudget b2 = budget;
    b2.wall_seconds = budget.wall_seconds - clock.elapsed();
    if (b2.wall_seconds <= 0) {
      any_timeout = true;
      agg.lower = std::min<uint32_t>(agg.lower, 1);
      break;
    }
    DistanceResult r = min_weight_nongauge(step.stabs, logicals, b2);
    agg.lower = std::min(agg.lower, r.lower);
    if (r.upper < agg.upper) {
      agg.upper = r.upper;
      agg.certificate = r.certificate;
      agg.step_index = int64_t(i);
    }
    any_timeout = any_timeout || r.status == DistanceResult::Status::kTimeout;
  }
  if (agg.lower == agg.upper)
    agg.status = DistanceResult::Status::kExact;
  else
    agg.status = any_timeout ? DistanceResult::Status::kTimeout
                             : DistanceResult::Status::kBounds;
  agg.wall_seconds = clock.elapsed();
  return agg;
}

// ---------------------------------------------------------------------------
// Circuit-level search over mechanism subsets.

namespace {

std::vector<uint32_t> sym_diff(const std::vector<uint32_t>& a,
                               const std::vector<uint32_t>& b) {
  std::vector<uint32_t> out;
  out.reserve(a.size() + b.size());
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                std::back_inserter(out));
  return out;
}

uint64_t fnv_u32(const std::vector<uint32_t>& v) {
  uint64_t h = 1469598103934665603ull;
  for (uint32_t x : v) {
    h ^= x;
    h *= 1099511628211ull;
    h ^= h >> 29;
  }
  return h;
}

}  // namespace

DistanceResult circuit_distance(const DetectorErrorModel& dem,
                                const DistanceBudget& budget) {
  if (dem.n_observables == 0)
    throw std::invalid_argument("circuit_distance: model has no observables");
  Clock clock(budget.wall_seconds);
  DistanceResult res;

  struct Mech {
    std::vector<uint32_t> det;
    std::vector<uint64_t> obs;
    uint32_t id = 0;  // index into dem.mechanisms
  };
  const size_t wo = (dem.n_observables + 63) / 64;
  auto obs_any = [&](const std::vector<uint64_t>& o) {
    for (uint64_t w : o)
      if (w) return true;
    return false;
  };

  // Weight 1 and preprocessing in one pass: mechanisms with no detectors
  // either are single-mechanism logicals or can never join a minimal set.
  std::vector<Mech> ms;
  std::optional<uint32_t> single;
  for (size_t i = 0; i < dem.mechanisms.size(); ++i) {
    const auto& m = dem.mechanisms[i];
    std::vector<uint64_t> obs(wo, 0);
    for (uint32_t o : m.observables) obs[o >> 6] ^= 1ull << (o & 63);
    if (m.detectors.empty()) {
      if (obs_any(obs) && !single) single = uint32_t(i);
      continue;
    }
    ms.push_back({m.detectors, std::move(obs), uint32_t(i)});
  }
  if (single) {
    res.lower = res.upper = 1;
    res.fault_set = {*single};
    res.status = DistanceResult::Status::kExact;
    res.wall_seconds = clock.elapsed();
    return res;
  }

  std::vector<std::vector<uint32_t>> inc(dem.n_detectors);
  for (size_t i = 0; i < ms.size(); ++i)
    for (uint32_t d : ms[i].det) inc[d].push_back(uint32_t(i));
  std::vector<std::pair<uint64_t, uint32_t>> table(ms.size());
  for (size_t i = 0; i < ms.size(); ++i) table[i] = {fnv_u32(ms[i].det), uint32_t(i)};
  std::sort(table.begin(), table.end());

  uint64_t nodes = 0;
  bool timed_out = false, capped = false;
  std::set<std::vector<uint32_t>> seen;
  std::optional<std::vector<uint32_t>> best;  // sorted ms indices

  std::vector<uint32_t> cur;
  std::vector<uint64_t> obsacc(wo);
  std::function<void(const std::vector<uint32_t>&, uint32_t)> rec =
      [&](const std::vector<uint32_t>& residual, uint32_t w) {
        if (timed_out || capped) return;
        if ((++nodes & 1023) == 0) {
          if (clock.expired()) timed_out = true;
          if (nodes > budget.mem_entries) capped = true;
          if (timed_out || capped) return;
        }
        if (cur.size() == size_t(w) - 1) {
          // The final mechanism is determined by the residual symptom.
          uint64_t key = fnv_u32(residual);
          auto it = std::lower_bound(table.begin(), table.end(),
                                     std::make_pair(key, uint32_t(0)));
          for (; it != table.end() && it->first == key; ++it) {
            uint32_t c = it->second;
            if (ms[c].det != residual) continue;
            if (std::find(cur.begin(), cur.end(), c) != cur.end()) continue;
            bool flips = false;
            for (size_t k = 0; k < wo; ++k)
              if (obsacc[k] ^ ms[c].obs[k]) {
                flips = true;
                break;
              }
            if (!flips) continue;
            std::vector<uint32_t> found = cur;
            found.push_back(c);
            std::sort(found.begin(), found.end());
            if (seen.insert(found).second) {
              std::vector<uint32_t> ids;
              for (uint32_t j : found) ids.push_back(ms[j].id);
              if (!best || ids < *best) best = std::move(ids);
            }
          }
          return;
        }
        if (residual.empty()) return;  // a proper subset already cancels
        uint32_t d0 = residual[0];
        for (uint32_t m : inc[d0]) {
          if (std::find(cur.begin(), cur.end(), m) != cur.end()) continue;
          cur.push_back(m);
          for (size_t k = 0; k < wo; ++k) obsacc[k] ^= ms[m].obs[k];
          rec(sym_diff(residual, ms[m].det), w);
          for (size_t k = 0; k < wo; ++k) obsacc[k] ^= ms[m].obs[k];
          cur.pop_back();
          if (timed_out || capped) return;
        }
      };

  const uint32_t w_end = std::min<uint64_t>(budget.w_max, ms.size());
  for (uint32_t w = 2; w <= w_end; ++w) {
    if (clock.expired()) timed_out = true;
    if (timed_out || capped) break;
    best.reset();
    seen.clear();
    for (size_t a = 0; a < ms.size() && !timed_out && !capped; ++a) {
      cur.assign(1, uint32_t(a));
      std::fill(obsacc.begin(), obsacc.end(), 0);
      for (size_t k = 0; k < wo; ++k) obsacc[k] ^= ms[a].obs[k];
      rec(ms[a].det, w);
    }
    if (timed_out || capped) {
      res.lower = w;
      res.status = timed_out ? DistanceResult::Status::kTimeout
                             : DistanceResult::Status::kBounds;
      res.wall_seconds = clock.elapsed();
      return res;
    }
    if (best) {
      res.lower = res.upper = w;
      res.fault_set = *best;
      res.status = DistanceResult::Status::kExact;
      res.wall_seconds = clock.elapsed();
      return res;
    }
  }
  res.lower = w_end + 1;
  res.status = DistanceResult::Status::kBounds;
  res.wall_seconds = clock.elapsed();
  return res;
}

}  // namespace stairway
