#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "rng.hpp"
#include "stabsim.hpp"
#include "support/statevec.hpp"

using namespace stairway;

namespace {

BitVec bits(size_t width, std::initializer_list<uint32_t> qs) {
  BitVec v(width);
  for (uint32_t q : qs) v.set(q, true);
  return v;
}

PauliString xs(size_t width, std::initializer_list<uint32_t> qs) {
  PauliString p(width);
  for (uint32_t q : qs) p.x.set(q, true);
  return p;
}

PauliString zs(size_t width, std::initializer_list<uint32_t> qs) {
  PauliString p(width);
  for (uint32_t q : qs) p.z.set(q, true);
  return p;
}

// Is p (pure X- or pure Z-type) in the span of the same-sector ISG rows?
bool in_isg_span(const std::vector<PauliString>& isg, const PauliString& p) {
  bool x_type = p.x.any();
  BitVec v = x_type ? p.x : p.z;
  std::vector<BitVec> rows;
  for (const PauliString& s : isg) {
    const BitVec& part = x_type ? s.x : s.z;
    if ((x_type ? s.z : s.x).any()) continue;
    if (part.any()) rows.push_back(part);
  }
  // Plain elimination.
  std::vector<BitVec> basis;
  auto add = [&](BitVec w) {
    for (const BitVec& b : basis)
      if (w.any() && b.first_set() == w.first_set()) w.xor_in(b);
    // not fully reduced; loop until stable
    bool changed = true;
    while (changed && w.any()) {
      changed = false;
      for (const BitVec& b : basis)
        if (w.get(b.first_set())) { w.xor_in(b); changed = true; }
    }
    if (w.any()) basis.push_back(std::move(w));
  };
  for (BitVec& r : rows) add(std::move(r));
  BitVec w = v;
  bool changed = true;
  while (changed && w.any()) {
    changed = false;
    for (const BitVec& b : basis)
      if (w.get(b.first_set())) { w.xor_in(b); changed = true; }
  }
  return !w.any();
}

Circuit random_css_circuit(uint32_t n, size_t len, Rng& rng, bool with_init) {
  Circuit c(n);
  if (with_init) {
    std::vector<uint32_t> all;
    for (uint32_t q = 0; q < n; ++q) all.push_back(q);
    c.reset_z(all);
  }
  for (size_t i = 0; i < len; ++i) {
    switch (rng.below(6)) {
      case 0: {
        if (n < 2) break;
        uint32_t a = uint32_t(rng.below(n)), b = uint32_t(rng.below(n));
        if (a != b) c.cx(a, b);
        break;
      }
      case 1:
        c.reset_z({uint32_t(rng.below(n))});
        break;
      case 2:
        c.reset_x({uint32_t(rng.below(n))});
        break;
      case 3:
        c.measure_z({uint32_t(rng.below(n))});
        break;
      case 4:
        c.measure_x({uint32_t(rng.below(n))});
        break;
      default: {
        size_t sz = 1 + rng.below(std::min<size_t>(3, n));
        std::set<uint32_t> qs;
        while (qs.size() < sz) qs.insert(uint32_t(rng.below(n)));
        Pauli p = rng.bit() ? Pauli::X : Pauli::Z;
        std::vector<std::pair<uint32_t, Pauli>> factors;
        for (uint32_t q : qs) factors.push_back({q, p});
        c.mpp(factors);
        break;
      }
    }
  }
  return c;
}

// Replays c on the dense oracle, forcing the stabilizer engine's outcomes,
// and checks every probability: ~1 for deterministic records, ~1/2 for
// random ones.
void cross_check(const Circuit& c, const SimResult& r, svtest::StateVec sv) {
  size_t rec = 0;
  for (const Instruction& ins : c.instructions()) {
    using K = Instruction::Kind;
    switch (ins.kind) {
      case K::Mpp: {
        BitVec sup(sv.qubits());
        for (uint32_t q : ins.qubits) sup.set(q, true);
        bool x_type = ins.paulis[0] == Pauli::X;
        double p = sv.measure_forced(sup, x_type, r.outcomes[rec] != 0);
        if (r.deterministic[rec])
          CHECK(p == doctest::Approx(1.0));
        else
          CHECK(p == doctest::Approx(0.5));
        ++rec;
        break;
      }
      case K::MeasureZ:
      case K::MeasureX:
        for (uint32_t q : ins.qubits) {
          BitVec sup(sv.qubits());
          sup.set(q, true);
          double p = sv.measure_forced(sup, ins.kind == K::MeasureX,
                                       r.outcomes[rec] != 0);
          if (r.deterministic[rec])
            CHECK(p == doctest::Approx(1.0));
          else
            CHECK(p == doctest::Approx(0.5));
          ++rec;
        }
        break;
      case K::ResetZ:
      case K::ResetX:
        for (uint32_t q : ins.qubits) sv.reset(q, ins.kind == K::ResetX);
        break;
      case K::Cx:
        for (size_t i = 0; i + 1 < ins.qubits.size(); i += 2)
          sv.apply_cx(ins.qubits[i], ins.qubits[i + 1]);
        break;
      default:
        break;
    }
  }
  CHECK(rec == r.outcomes.size());
}

}  // namespace

TEST_CASE("fresh ZZ check is deterministically zero") {
  Circuit c(2);
  c.reset_z({0, 1});
  c.mpp({{0, Pauli::Z}, {1, Pauli::Z}});
  SimResult r = simulate_circuit(c, OutcomePolicy{});
  REQUIRE(r.outcomes.size() == 1);
  CHECK(r.outcomes[0] == 0);
  CHECK(r.deterministic[0] == 1);
}

TEST_CASE("repeating a product measurement is deterministic and consistent") {
  for (uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    Circuit c(3);
    c.mpp({{0, Pauli::X}, {1, Pauli::X}, {2, Pauli::X}});
    c.mpp({{0, Pauli::X}, {1, Pauli::X}, {2, Pauli::X}});
    OutcomePolicy pol;
    pol.seed = seed;
    SimResult r = simulate_circuit(c, pol);
    REQUIRE(r.outcomes.size() == 2);
    CHECK(r.deterministic[0] == 0);  // fresh from the mixed state
    CHECK(r.deterministic[1] == 1);
    CHECK(r.outcomes[0] == r.outcomes[1]);
  }
}

TEST_CASE("forced outcomes are honored and contradictions rejected") {
  Circuit c(1);
  c.reset_z({0});
  c.measure_z({0});

  OutcomePolicy ok;
  ok.kind = OutcomePolicy::Kind::Forced;
  ok.forced = {0};
  SimResult r = simulate_circuit(c, ok);
  CHECK(r.outcomes[0] == 0);

  OutcomePolicy bad;
  bad.kind = OutcomePolicy::Kind::Forced;
  bad.forced = {1};
  CHECK_THROWS(simulate_circuit(c, bad));

  // Random records simply consume the forced bit.
  Circuit c2(1);
  c2.measure_z({0});
  OutcomePolicy pick;
  pick.kind = OutcomePolicy::Kind::Forced;
  pick.forced = {1};
  SimResult r2 = simulate_circuit(c2, pick);
  CHECK(r2.outcomes[0] == 1);
  CHECK(r2.deterministic[0] == 0);

  OutcomePolicy thin;
  thin.kind = OutcomePolicy::Kind::Forced;
  CHECK_THROWS(simulate_circuit(c2, thin));
}

TEST_CASE("tag tracking turns deterministic outcomes into record relations") {
  Circuit c(2);
  c.measure_z({0});
  c.measure_z({1});
  c.mpp({{0, Pauli::Z}, {1, Pauli::Z}});
  SimResult r = simulate_circuit(c, OutcomePolicy{}, /*track_tags=*/true);
  REQUIRE(r.relations.size() == 1);
  CHECK(r.relations[0].record == 2);
  CHECK(r.relations[0].priors == std::vector<uint32_t>{0, 1});

  // A reset in between severs the relation.
  Circuit c2(2);
  c2.measure_z({0});
  c2.reset_z({0});
  c2.measure_z({0});
  SimResult r2 = simulate_circuit(c2, OutcomePolicy{}, true);
  REQUIRE(r2.relations.size() == 1);
  CHECK(r2.relations[0].record == 1);
  CHECK(r2.relations[0].priors.empty());
}

TEST_CASE("identity circuit leaves one bare logical pair") {
  Circuit c(1);
  BellExtract be = bell_extract(c);
  CHECK(be.n == 1);
  CHECK(be.k == 1);
  CHECK(be.isg.empty());
  REQUIRE(be.pairs.size() == 1);
  CHECK(be.pairs[0].x_like == xs(1, {0}));
  CHECK(be.pairs[0].z_like == zs(1, {0}));
}

TEST_CASE("repetition-code checks pin down the expected group") {
  Circuit c(3);
  c.mpp({{0, Pauli::Z}, {1, Pauli::Z}});
  c.mpp({{1, Pauli::Z}, {2, Pauli::Z}});
  BellExtract be = bell_extract(c);
  CHECK(be.n == 3);
  CHECK(be.k == 1);
  REQUIRE(be.isg.size() == 2);
  for (const PauliString& s : be.isg) {
    CHECK(!s.x.any());  // both stabilizers are Z-type
    CHECK(!s.sign);
  }
  CHECK(in_isg_span(be.isg, zs(3, {0, 1})));
  CHECK(in_isg_span(be.isg, zs(3, {1, 2})));
  CHECK(in_isg_span(be.isg, zs(3, {0, 2})));
  CHECK_FALSE(in_isg_span(be.isg, zs(3, {0})));

  REQUIRE(be.pairs.size() == 1);
  const LogicalPair& lp = be.pairs[0];
  CHECK(!lp.x_like.z.any());
  CHECK(!lp.z_like.x.any());
  CHECK_FALSE(lp.x_like.commutes(lp.z_like));
  for (const PauliString& s : be.isg) {
    CHECK(lp.x_like.commutes(s));
    CHECK(lp.z_like.commutes(s));
  }
  // The Z-like logical is not itself a stabilizer.
  CHECK_FALSE(in_isg_span(be.isg, lp.z_like));
  // X-like logical must touch all three qubits up to stabilizers; in the
  // repetition code the only X-type logical is X0 X1 X2 exactly.
  CHECK(lp.x_like == xs(3, {0, 1, 2}));
}

TEST_CASE("bell extraction yields a canonical symplectic frame") {
  Rng rng(0x9b1);
  for (int trial = 0; trial < 30; ++trial) {
    uint32_t n = 2 + uint32_t(rng.below(4));
    Circuit c = random_css_circuit(n, 18, rng, false);
    BellExtract be = bell_extract(c);
    CHECK(be.isg.size() + be.k == be.n);
    CHECK(be.pairs.size() == be.k);
    for (const PauliString& s : be.isg) {
      CHECK(!s.sign);
      for (const PauliString& t : be.isg) CHECK(s.commutes(t));
      for (const LogicalPair& lp : be.pairs) {
        CHECK(lp.x_like.commutes(s));
        CHECK(lp.z_like.commutes(s));
      }
    }
    for (size_t i = 0; i < be.k; ++i)
      for (size_t j = 0; j < be.k; ++j) {
        CHECK(be.pairs[i].x_like.commutes(be.pairs[j].x_like));
        CHECK(be.pairs[i].z_like.commutes(be.pairs[j].z_like));
        CHECK(be.pairs[i].x_like.commutes(be.pairs[j].z_like) == (i != j));
      }
  }
}

TEST_CASE("engine agrees with the dense oracle from a pure start") {
  Rng rng(0x51ab);
  for (int trial = 0; trial < 60; ++trial) {
    uint32_t n = 1 + uint32_t(rng.below(5));
    Circuit c = random_css_circuit(n, 24, rng, true);
    OutcomePolicy pol;
    pol.seed = rng.u64();
    SimResult r = simulate_circuit(c, pol);
    cross_check(c, r, svtest::StateVec(n));
  }
}

TEST_CASE("engine agrees with the dense oracle from the mixed state") {
  Rng rng(0xfeed);
  for (int trial = 0; trial < 40; ++trial) {
    uint32_t n = 1 + uint32_t(rng.below(4));
    Circuit c = random_css_circuit(n, 20, rng, false);
    OutcomePolicy pol;
    pol.seed = rng.u64();
    SimResult r = simulate_circuit(c, pol);
    // The oracle purifies the mixed state with a reference register the
    // circuit never touches.
    cross_check(c, r, svtest::StateVec::purified(n));
  }
}

TEST_CASE("recorded outcomes replay exactly under a forced policy") {
  Rng rng(0x777);
  for (int trial = 0; trial < 20; ++trial) {
    uint32_t n = 2 + uint32_t(rng.below(4));
    Circuit c = random_css_circuit(n, 25, rng, false);
    OutcomePolicy pol;
    pol.seed = rng.u64();
    SimResult r = simulate_circuit(c, pol);
    OutcomePolicy replay;
    replay.kind = OutcomePolicy::Kind::Forced;
    replay.forced = r.outcomes;
    SimResult r2 = simulate_circuit(c, replay);
    CHECK(r2.outcomes == r.outcomes);
    CHECK(r2.deterministic == r.deterministic);
  }
}

TEST_CASE("structural invariants survive random evolution") {
  Rng rng(0xace);
  for (int trial = 0; trial < 20; ++trial) {
    uint32_t n = 2 + uint32_t(rng.below(5));
    StabSim sim = StabSim::mixed_state(n, false, 64);
    OutcomePolicy pol;
    pol.seed = rng.u64();
    sim.set_policy(pol);
    for (int step = 0; step < 40; ++step) {
      switch (rng.below(4)) {
        case 0: {
          uint32_t a = uint32_t(rng.below(n)), b = uint32_t(rng.below(n));
          if (a != b) sim.apply_cx(a, b);
          break;
        }
        case 1:
          sim.reset(uint32_t(rng.below(n)), rng.bit());
          break;
        default: {
          size_t sz = 1 + rng.below(2);
          std::set<uint32_t> qs;
          while (qs.size() < sz) qs.insert(uint32_t(rng.below(n)));
          BitVec sup(n);
          for (uint32_t q : qs) sup.set(q, true);
          sim.measure(sup, rng.bit());
          break;
        }
      }
      sim.check_invariants();
    }
  }
}

TEST_CASE("folding a measured pair removes one qubit and keeps k") {
  // State stabilized by <Z0 Z1>, logical X = X0 X1, logical Z = Z0.
  std::vector<PauliString> isg = {zs(2, {0, 1})};
  std::vector<LogicalPair> logs = {{xs(2, {0, 1}), zs(2, {0})}};
  EffectiveCode ec = renormalize_embedded(isg, logs, {{0, 1, false}});
  CHECK(ec.n == 1);
  CHECK(ec.k == 1);
  CHECK(ec.stabs.empty());
  CHECK(ec.kept == std::vector<uint32_t>{0});
  REQUIRE(ec.pairs.size() == 1);
  CHECK(ec.pairs[0].x_like == xs(1, {0}));
  CHECK(ec.pairs[0].z_like == zs(1, {0}));
}

TEST_CASE("chained pairs fold sequentially with conjugation") {
  // Repetition code <Z0Z1, Z1Z2>; fold ZZ(1,0) then ZZ(1,2): both targets
  // (0 and 2) are fixed, qubit 1 survives carrying the logical pair.
  std::vector<PauliString> isg = {zs(3, {0, 1}), zs(3, {1, 2})};
  std::vector<LogicalPair> logs = {{xs(3, {0, 1, 2}), zs(3, {0})}};
  EffectiveCode ec =
      renormalize_embedded(isg, logs, {{1, 0, false}, {1, 2, false}});
  CHECK(ec.n == 1);
  CHECK(ec.k == 1);
  CHECK(ec.stabs.empty());
  CHECK(ec.kept == std::vector<uint32_t>{1});
  CHECK(ec.pairs[0].x_like == xs(1, {0}));
  CHECK(ec.pairs[0].z_like == zs(1, {0}));
}

TEST_CASE("partial fold keeps the quotient stabilizer") {
  std::vector<PauliString> isg = {zs(3, {0, 1}), zs(3, {1, 2})};
  std::vector<LogicalPair> logs = {{xs(3, {0, 1, 2}), zs(3, {0})}};
  EffectiveCode ec = renormalize_embedded(isg, logs, {{0, 1, false}});
  CHECK(ec.n == 2);
  CHECK(ec.k == 1);
  REQUIRE(ec.stabs.size() == 1);
  CHECK(ec.kept == std::vector<uint32_t>{0, 2});
  // Z1 Z2 modulo the fixed Z1 becomes Z on original qubit 2 times Z0's
  // conjugate; concretely the surviving stabilizer is Z0 Z2 -> columns 0,1.
  CHECK(ec.stabs[0] == zs(2, {0, 1}));
  for (const LogicalPair& lp : ec.pairs) {
    CHECK(lp.x_like.commutes(ec.stabs[0]));
    CHECK(lp.z_like.commutes(ec.stabs[0]));
    CHECK_FALSE(lp.x_like.commutes(lp.z_like));
  }
}

TEST_CASE("invalid folds are rejected") {
  std::vector<PauliString> isg = {zs(3, {0, 1}), zs(3, {1, 2})};
  std::vector<LogicalPair> logs = {{xs(3, {0, 1, 2}), zs(3, {0})}};
  // XX(0,1) is not a stabilizer here.
  CHECK_THROWS(renormalize_embedded(isg, logs, {{0, 1, true}}));
  // Second pair touches the qubit fixed by the first fold.
  CHECK_THROWS(renormalize_embedded(isg, logs, {{0, 1, false}, {1, 2, false}}));
  // Z0 Z2 is in the group, so folding it is legal even though it was never a
  // generator.
  EffectiveCode ec = renormalize_embedded(isg, logs, {{0, 2, false}});
  CHECK(ec.n == 2);
  CHECK(ec.k == 1);
}

TEST_CASE("mixed-sector products are rejected") {
  Circuit c(2);
  c.mpp({{0, Pauli::X}, {1, Pauli::Z}});
  CHECK_THROWS(simulate_circuit(c, OutcomePolicy{}));
  Circuit c2(2);
  c2.mpp({{0, Pauli::Y}, {1, Pauli::Y}});
  CHECK_THROWS(simulate_circuit(c2, OutcomePolicy{}));
}
