#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "distance.hpp"
#include "rng.hpp"

using namespace stairway;

namespace {

PauliString ps(const std::string& s) {
  PauliString p(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == 'X' || s[i] == 'Y') p.x.set(i, true);
    if (s[i] == 'Z' || s[i] == 'Y') p.z.set(i, true);
  }
  return p;
}

// Symplectic single-qubit/two-qubit conjugations for building random codes.
void conj_h(PauliString& p, size_t q) {
  bool x = p.x.get(q), z = p.z.get(q);
  p.x.set(q, z);
  p.z.set(q, x);
}
void conj_s(PauliString& p, size_t q) {
  if (p.x.get(q)) p.z.flip(q);
}
void conj_cx(PauliString& p, size_t c, size_t t) {
  if (p.x.get(c)) p.x.flip(t);
  if (p.z.get(t)) p.z.flip(c);
}

struct RandCode {
  std::vector<PauliString> stabs, logicals;
};

// Random Clifford image of the trivial code (single-qubit Z stabilizers on
// the last n-k qubits, bare X/Z logicals on the first k).
RandCode random_code(size_t n, size_t k, Rng& rng) {
  RandCode c;
  for (size_t i = k; i < n; ++i) {
    PauliString s(n);
    s.z.set(i, true);
    c.stabs.push_back(s);
  }
  for (size_t i = 0; i < k; ++i) {
    PauliString x(n), z(n);
    x.x.set(i, true);
    z.z.set(i, true);
    c.logicals.push_back(x);
    c.logicals.push_back(z);
  }
  auto all = [&](auto&& f) {
    for (auto& p : c.stabs) f(p);
    for (auto& p : c.logicals) f(p);
  };
  size_t gates = 3 * n * n;
  for (size_t t = 0; t < gates; ++t) {
    switch (rng.below(3)) {
      case 0: {
        size_t q = rng.below(n);
        all([&](PauliString& p) { conj_h(p, q); });
        break;
      }
      case 1: {
        size_t q = rng.below(n);
        all([&](PauliString& p) { conj_s(p, q); });
        break;
      }
      default: {
        size_t a = rng.below(n), b = rng.below(n);
        if (a == b) b = (b + 1) % n;
        all([&](PauliString& p) { conj_cx(p, a, b); });
        break;
      }
    }
  }
  return c;
}

// Oracle: scan every nonidentity Pauli pattern.
uint32_t exhaustive_distance(const RandCode& c) {
  size_t n = c.stabs.empty() ? c.logicals[0].width() : c.stabs[0].width();
  uint32_t best = kInfWeight;
  for (uint64_t bits = 1; bits < (1ull << (2 * n)); ++bits) {
    PauliString p(n);
    for (size_t i = 0; i < n; ++i) {
      if ((bits >> (2 * i)) & 1) p.x.set(i, true);
      if ((bits >> (2 * i + 1)) & 1) p.z.set(i, true);
    }
    if (!verify_logical(c.stabs, c.logicals, p)) continue;
    best = std::min<uint32_t>(best, uint32_t(p.weight()));
  }
  return best;
}

DetectorErrorModel random_dem(size_t n_det, size_t n_obs, size_t n_mech, Rng& rng) {
  DetectorErrorModel dem;
  dem.n_detectors = n_det;
  dem.n_observables = n_obs;
  for (size_t i = 0; i < n_mech; ++i) {
    DemMechanism m;
    m.p = 1e-3;
    size_t deg = 1 + rng.below(3);
    std::set<uint32_t> ds;
    for (size_t j = 0; j < deg; ++j) ds.insert(uint32_t(rng.below(n_det)));
    m.detectors.assign(ds.begin(), ds.end());
    for (size_t o = 0; o < n_obs; ++o)
      if (rng.below(100) < 25) m.observables.push_back(uint32_t(o));
    dem.mechanisms.push_back(std::move(m));
  }
  return dem;
}

// Oracle: all mechanism subsets up to w_max (detector/observable masks fit
// in one word for the sizes used here).
uint32_t exhaustive_circuit_distance(const DetectorErrorModel& dem, uint32_t w_max) {
  size_t m = dem.mechanisms.size();
  std::vector<uint64_t> det(m, 0), obs(m, 0);
  for (size_t i = 0; i < m; ++i) {
    for (uint32_t d : dem.mechanisms[i].detectors) det[i] |= 1ull << d;
    for (uint32_t o : dem.mechanisms[i].observables) obs[i] |= 1ull << o;
  }
  uint32_t best = kInfWeight;
  std::vector<size_t> idx;
  std::function<void(size_t, uint64_t, uint64_t)> rec = [&](size_t from, uint64_t d,
                                                            uint64_t o) {
    if (idx.size() >= 1 && d == 0 && o != 0)
      best = std::min<uint32_t>(best, uint32_t(idx.size()));
    if (idx.size() == w_max) return;
    for (size_t i = from; i < m; ++i) {
      idx.push_back(i);
      rec(i + 1, d ^ det[i], o ^ obs[i]);
      idx.pop_back();
    }
  };
  rec(0, 0, 0);
  return best;
}

}  // namespace

TEST_CASE("repetition code: class-restricted search gives the classical distance") {
  std::vector<PauliString> stabs = {ps("ZZI"), ps("IZZ")};
  std::vector<PauliString> xbar = {ps("XXX")};

  auto r = min_weight_nongauge(stabs, xbar);
  CHECK(r.status == DistanceResult::Status::kExact);
  CHECK(r.lower == 3);
  CHECK(r.upper == 3);
  CHECK(r.certificate.weight() == 3);
  CHECK(verify_logical(stabs, xbar, r.certificate));

  CHECK(min_weight_bnb(stabs, xbar).upper == 3);
  CHECK(brute_force_distance(stabs, xbar, 5).upper == 3);
}

TEST_CASE("repetition code: full logical set exposes the weight-1 logical") {
  std::vector<PauliString> stabs = {ps("ZZI"), ps("IZZ")};
  std::vector<PauliString> logicals = {ps("XXX"), ps("ZII")};

  auto r = min_weight_nongauge(stabs, logicals);
  CHECK(r.status == DistanceResult::Status::kExact);
  CHECK(r.upper == 1);
  // Lexicographic tie-break: Z0, not Z1 or Z2.
  CHECK(pauli_text(r.certificate) == "Z0");
  CHECK(pauli_text(min_weight_bnb(stabs, logicals).certificate) == "Z0");
}

TEST_CASE("[[4,2,2]] and Steane: known distances via all engines") {
  std::vector<PauliString> s422 = {ps("XXXX"), ps("ZZZZ")};
  std::vector<PauliString> l422 = {ps("XXII"), ps("ZIZI"), ps("XIXI"), ps("ZZII")};
  CHECK(min_weight_nongauge(s422, l422).upper == 2);
  CHECK(min_weight_bnb(s422, l422).upper == 2);
  CHECK(brute_force_distance(s422, l422, 4).upper == 2);

  std::vector<PauliString> steane = {ps("XIXIXIX"), ps("IXXIIXX"), ps("IIIXXXX"),
                                     ps("ZIZIZIZ"), ps("IZZIIZZ"), ps("IIIZZZZ")};
  std::vector<PauliString> lsteane = {ps("XXXXXXX"), ps("ZZZZZZZ")};
  auto r = min_weight_nongauge(steane, lsteane);
  CHECK(r.status == DistanceResult::Status::kExact);
  CHECK(r.upper == 3);
  CHECK(verify_logical(steane, lsteane, r.certificate));
  CHECK(min_weight_bnb(steane, lsteane).upper == 3);
}

TEST_CASE("[[5,1,3]] perfect code exercises the general (non-CSS) path") {
  std::vector<PauliString> stabs = {ps("XZZXI"), ps("IXZZX"), ps("XIXZZ"), ps("ZXIXZ")};
  std::vector<PauliString> logicals = {ps("XXXXX"), ps("ZZZZZ")};
  auto r = min_weight_nongauge(stabs, logicals);
  CHECK(r.status == DistanceResult::Status::kExact);
  CHECK(r.lower == 3);
  CHECK(r.upper == 3);
  CHECK(verify_logical(stabs, logicals, r.certificate));
  CHECK(min_weight_bnb(stabs, logicals).upper == 3);
  CHECK(brute_force_distance(stabs, logicals, 5).upper == 3);
}

TEST_CASE("random 8-qubit codes agree with the exhaustive Pauli scan") {
  Rng rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    RandCode c = random_code(8, 1 + rng.below(2), rng);
    uint32_t oracle = exhaustive_distance(c);
    REQUIRE(oracle != kInfWeight);
    auto a = min_weight_nongauge(c.stabs, c.logicals);
    auto b = min_weight_bnb(c.stabs, c.logicals);
    auto f = brute_force_distance(c.stabs, c.logicals, 8);
    CAPTURE(trial);
    CHECK(a.upper == oracle);
    CHECK(a.status == DistanceResult::Status::kExact);
    CHECK(b.upper == oracle);
    CHECK(f.upper == oracle);
  }
}

TEST_CASE("branch-and-bound and meet-in-the-middle agree on 100 random instances") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    size_t n = 6 + rng.below(9);  // 6..14
    size_t k = 1 + rng.below(3);
    RandCode c = random_code(n, k, rng);
    auto a = min_weight_bnb(c.stabs, c.logicals);
    auto b = brute_force_distance(c.stabs, c.logicals, uint32_t(n));
    CAPTURE(trial);
    CAPTURE(n);
    REQUIRE(a.status == DistanceResult::Status::kExact);
    REQUIRE(b.status == DistanceResult::Status::kExact);
    CHECK(a.upper == b.upper);
    CHECK(verify_logical(c.stabs, c.logicals, a.certificate));
    CHECK(verify_logical(c.stabs, c.logicals, b.certificate));
  }
}

TEST_CASE("w_max below the distance reports a clean lower bound") {
  std::vector<PauliString> steane = {ps("XIXIXIX"), ps("IXXIIXX"), ps("IIIXXXX"),
                                     ps("ZIZIZIZ"), ps("IZZIIZZ"), ps("IIIZZZZ")};
  std::vector<PauliString> lsteane = {ps("XXXXXXX"), ps("ZZZZZZZ")};
  auto r = brute_force_distance(steane, lsteane, 2);
  CHECK(r.status == DistanceResult::Status::kBounds);
  CHECK(r.lower == 3);
  CHECK(r.upper == kInfWeight);

  // Bounds are monotone in the budget.
  uint32_t prev_lower = 0;
  for (uint32_t cap : {1u, 2u, 3u, 4u}) {
    auto b = brute_force_distance(steane, lsteane, cap);
    CHECK(b.lower >= prev_lower);
    prev_lower = b.lower;
  }
  CHECK(prev_lower == 3);  // exact found at cap >= 3 keeps lower == 3
}

TEST_CASE("degenerate inputs throw") {
  std::vector<PauliString> stabs = {ps("ZZ")};
  CHECK_THROWS_AS(min_weight_nongauge(stabs, {}), std::invalid_argument);
  // A "logical" inside the stabilizer span is rejected.
  std::vector<PauliString> bad = {ps("ZZ")};
  CHECK_THROWS_AS(min_weight_nongauge(stabs, bad), std::invalid_argument);
  CHECK_THROWS_AS(embedded_distance({}, {}), std::invalid_argument);
  EffectiveCode empty_step;
  empty_step.n = 2;
  empty_step.stabs = stabs;
  CHECK_THROWS_AS(embedded_distance({empty_step}, {}), std::invalid_argument);
}

TEST_CASE("embedded distance is the minimum over the per-step codes") {
  EffectiveCode a;  // [[4,2,2]]
  a.n = 4;
  a.k = 2;
  a.stabs = {ps("XXXX"), ps("ZZZZ")};
  a.pairs = {{ps("XXII"), ps("ZIZI")}, {ps("XIXI"), ps("ZZII")}};

  EffectiveCode b;  // repetition with a bare weight-1 logical
  b.n = 4;
  b.k = 1;
  b.stabs = {ps("ZZII"), ps("IZZI"), ps("IIZZ")};
  b.pairs = {{ps("XXXX"), ps("ZIII")}};

  auto r = embedded_distance({a, b}, {});
  CHECK(r.status == DistanceResult::Status::kExact);
  CHECK(r.upper == 1);
  CHECK(r.step_index == 1);

  auto ra = embedded_distance({a}, {});
  CHECK(ra.upper == 2);
  CHECK(ra.step_index == 0);
}

TEST_CASE("ILP export: shape and a hand-checked feasible point") {
  std::vector<PauliString> stabs = {ps("ZZI"), ps("IZZ")};
  std::vector<PauliString> logicals = {ps("XXX"), ps("ZII")};
  IlpInstance ilp = make_ilp(stabs, logicals);

  const size_t n = 3, ns = 2, nl = 2;
  CHECK(ilp.vars.size() == ns + nl + 3 * n + 2 * n);
  // 2n parity rows + 3n support-OR rows + cardinality.
  CHECK(ilp.constraints.size() == 2 * n + 3 * n + 1);

  // beta = (1, 0): l = XXX.  Coordinates x0..x2 = 1, z = 0, slacks 0.
  std::vector<double> val(ilp.vars.size(), 0.0);
  auto at = [&](const std::string& name) -> double& {
    for (size_t i = 0; i < ilp.vars.size(); ++i)
      if (ilp.vars[i].name == name) return val[i];
    throw std::runtime_error("no var " + name);
  };
  at("b0") = 1;
  at("x0") = at("x1") = at("x2") = 1;
  at("s0") = at("s1") = at("s2") = 1;
  for (const auto& c : ilp.constraints) {
    double lhs = 0;
    for (const auto& t : c.terms) lhs += t.coef * val[t.var];
    CAPTURE(c.name);
    if (c.sense == '=') CHECK(lhs == doctest::Approx(c.rhs));
    if (c.sense == '>') CHECK(lhs >= c.rhs - 1e-9);
    if (c.sense == '<') CHECK(lhs <= c.rhs + 1e-9);
  }

  std::string lp = lp_text(ilp);
  CHECK(lp.find("Minimize") != std::string::npos);
  CHECK(lp.find("card:") != std::string::npos);
  CHECK(lp.find("General") != std::string::npos);
  CHECK(lp.find("End") != std::string::npos);
}

TEST_CASE("circuit distance: single mechanism touching only the observable") {
  DetectorErrorModel dem;
  dem.n_detectors = 2;
  dem.n_observables = 1;
  dem.mechanisms.push_back({1e-3, {0}, {}});
  dem.mechanisms.push_back({1e-3, {}, {0}});
  dem.mechanisms.push_back({1e-3, {0, 1}, {0}});
  auto r = circuit_distance(dem, {});
  CHECK(r.status == DistanceResult::Status::kExact);
  CHECK(r.upper == 1);
  CHECK(r.fault_set == std::vector<uint32_t>{1});
}

TEST_CASE("circuit distance: pairs and triples with known structure") {
  // d0 -- m0 -- d1 -- m1 -- d2, plus m2 hitting d0 and the observable,
  // m3 hitting d2 alone: {m2, m0, m1, m3} cancels everything, flips L0.
  DetectorErrorModel dem;
  dem.n_detectors = 3;
  dem.n_observables = 1;
  dem.mechanisms.push_back({1e-3, {0, 1}, {}});
  dem.mechanisms.push_back({1e-3, {1, 2}, {}});
  dem.mechanisms.push_back({1e-3, {0}, {0}});
  dem.mechanisms.push_back({1e-3, {2}, {}});
  auto r = circuit_distance(dem, {});
  CHECK(r.status == DistanceResult::Status::kExact);
  CHECK(r.upper == 4);
  CHECK(r.fault_set == std::vector<uint32_t>{0, 1, 2, 3});

  DetectorErrorModel none;
  none.n_detectors = 1;
  none.n_observables = 0;
  CHECK_THROWS_AS(circuit_distance(none, {}), std::invalid_argument);
}

TEST_CASE("circuit distance matches exhaustive subset search on random models") {
  Rng rng(404);
  int checked = 0;
  for (int trial = 0; trial < 25; ++trial) {
    DetectorErrorModel dem = random_dem(8 + rng.below(5), 2, 30, rng);
    uint32_t oracle = exhaustive_circuit_distance(dem, 4);
    DistanceBudget b;
    b.w_max = 4;
    auto r = circuit_distance(dem, b);
    CAPTURE(trial);
    if (oracle == kInfWeight) {
      CHECK(r.lower == 5);
      CHECK(r.status == DistanceResult::Status::kBounds);
    } else {
      CHECK(r.status == DistanceResult::Status::kExact);
      CHECK(r.upper == oracle);
      ++checked;
      // Re-verify the reported fault set independently.
      std::set<uint32_t> dets;
      uint64_t obs = 0;
      for (uint32_t i : r.fault_set) {
        for (uint32_t d : dem.mechanisms[i].detectors) {
          if (dets.count(d))
            dets.erase(d);
          else
            dets.insert(d);
        }
        for (uint32_t o : dem.mechanisms[i].observables) obs ^= 1ull << o;
      }
      CHECK(dets.empty());
      CHECK(obs != 0);
    }
  }
  CHECK(checked >= 10);  // most random models have a small undetected set
}

TEST_CASE("distance report JSON round structure") {
  DistanceResult r;
  r.lower = 3;
  r.upper = 4;
  r.certificate = ps("XXIIX");
  r.status = DistanceResult::Status::kBounds;
  r.wall_seconds = 0.5;
  std::string j = distance_report_json(r);
  CHECK(j.find("\"lower\": 3") != std::string::npos);
  CHECK(j.find("\"upper\": 4") != std::string::npos);
  CHECK(j.find("\"status\": \"bounds\"") != std::string::npos);
  CHECK(j.find("X0 X1 X4") != std::string::npos);

  DistanceResult open;
  open.lower = 5;
  std::string j2 = distance_report_json(open);
  CHECK(j2.find("\"upper\": null") != std::string::npos);
}
