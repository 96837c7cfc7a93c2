#include "schedule.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

namespace stairway {

bool WorldlineTemplate::bijective() const {
  for (const auto& side : out) {
    uint32_t seen = 0;
    for (uint8_t p : side) {
      if (p >= kPorts) return false;
      seen |= 1u << p;
    }
    if (seen != 0xffu) return false;
  }
  return true;
}

namespace {

struct State {
  uint8_t kind;  // 0 = Z, 1 = X
  uint8_t port;
};

struct Move {
  State next;
  int8_t axis;  // displacement axis j0..j6, or -1 for none
};

// One time step of a worldline.  Spatial exits keep the half-cell kind and
// move one cell along their axis; Tau exits flip the kind, advancing along
// j0 on the X -> Z crossing.
Move advance(const WorldlineTemplate& wl, State s) {
  uint8_t o = wl.out[s.kind][s.port];
  if (o == kTauL || o == kTauR)
    return {{static_cast<uint8_t>(1 - s.kind), o},
            s.kind == 1 ? int8_t{0} : int8_t{-1}};
  return {{s.kind, o}, static_cast<int8_t>(o - kJ1 + 1)};
}

size_t state_index(uint8_t kind, uint8_t port) { return kind * kPorts + port; }

}  // namespace

TraceReport trace_worldlines(const WorldlineTemplate& wl) {
  if (!wl.bijective())
    throw std::invalid_argument("worldline template is not a port bijection");
  TraceReport rep;
  rep.displacement.assign(7, 0);
  std::array<bool, 2 * kPorts> used{};
  bool first = true;
  size_t longest = 0;
  for (uint8_t kind = 0; kind < 2; ++kind)
    for (uint8_t port = 0; port < kPorts; ++port) {
      if (used[state_index(kind, port)]) continue;
      IVec disp(7, 0);
      size_t len = 0;
      State cur{kind, port};
      do {
        used[state_index(cur.kind, cur.port)] = true;
        Move m = advance(wl, cur);
        if (m.axis >= 0) disp[static_cast<size_t>(m.axis)] += 1;
        cur = m.next;
        ++len;
      } while (cur.kind != kind || cur.port != port);
      ++rep.classes;
      longest = std::max(longest, len);
      if (first) {
        rep.displacement = disp;
        first = false;
      } else if (disp != rep.displacement) {
        rep.uniform = false;
      }
    }
  rep.period_steps = longest;
  rep.period_sub_steps = kSubSteps * longest;
  return rep;
}

Schedule::Schedule(const StairwayLattice& lat, const WorldlineTemplate& wl,
                   const DecompositionTemplate& dec, int64_t t_min,
                   int64_t t_max) {
  if (lat.dim() != 7)
    throw std::invalid_argument(
        "weight-8 templates require a 7-dimensional lattice");
  if (!wl.bijective())
    throw std::invalid_argument("worldline template is not a port bijection");
  for (const auto& side : dec.ops)
    for (const TemplateOp& op : side)
      if (op.sub_step >= kSubSteps || op.port_a >= kPorts ||
          op.port_b >= kPorts || op.port_a == op.port_b)
        throw std::invalid_argument("malformed decomposition template");
  LatticeReport lrep = validate_lattice(lat);
  if (!lrep.ok) throw std::invalid_argument(lrep.message);
  if (t_max < t_min) throw std::invalid_argument("t_max < t_min");

  t_min_ = t_min;
  t_max_ = t_max;
  CosetGeometry geo(lat);
  cosets_ = geo.cosets_per_time();
  n_ = 2 * kPorts * cosets_;
  size_t nsteps = static_cast<size_t>(t_max - t_min);
  ticks_.assign(kSubSteps * nsteps, {});

  auto slot = [this](uint8_t kind, size_t coset, uint8_t port) {
    return (kind * cosets_ + coset) * kPorts + port;
  };

  std::vector<uint32_t> occ(n_);
  std::iota(occ.begin(), occ.end(), 0u);
  occupancy_.reserve(nsteps + 1);
  occupancy_.push_back(occ);

  for (size_t step = 0; step < nsteps; ++step) {
    int64_t time = t_min + static_cast<int64_t>(step);
    for (uint8_t kind = 0; kind < 2; ++kind)
      for (size_t c = 0; c < cosets_; ++c)
        for (const TemplateOp& op : dec.ops[kind]) {
          uint32_t qa = occ[slot(kind, c, op.port_a)];
          uint32_t qb = occ[slot(kind, c, op.port_b)];
          ticks_[kSubSteps * step + op.sub_step].push_back(
              {std::min(qa, qb), std::max(qa, qb), op.xx});
        }

    std::vector<uint32_t> next(n_, UINT32_MAX);
    for (uint8_t kind = 0; kind < 2; ++kind)
      for (size_t c = 0; c < cosets_; ++c) {
        IVec u = geo.rep_at(kind == 0 ? time : time - 1, c);
        for (uint8_t port = 0; port < kPorts; ++port) {
          uint8_t o = wl.out[kind][port];
          size_t to;
          if (o == kTauL || o == kTauR) {
            if (kind == 0) {
              to = slot(1, c, o);
            } else {
              IVec v = u;
              v[0] += 1;
              to = slot(0, geo.index_of(v), o);
            }
          } else {
            IVec v = u;
            v[o - kJ1 + 1] += 1;
            to = slot(kind, geo.index_of(v), o);
          }
          if (next[to] != UINT32_MAX)
            throw std::logic_error("worldline transition is not injective");
          next[to] = occ[slot(kind, c, port)];
        }
      }
    occ = std::move(next);
    occupancy_.push_back(occ);
  }

  for (auto& tk : ticks_) {
    std::sort(tk.begin(), tk.end(), [](const auto& a, const auto& b) {
      return std::tie(a.q1, a.q2) < std::tie(b.q1, b.q2);
    });
    std::set<uint32_t> seen;
    for (const auto& m : tk)
      if (!seen.insert(m.q1).second || !seen.insert(m.q2).second)
        throw std::invalid_argument(
            "decomposition template measures a qubit twice in one sub-step");
  }
}

std::vector<uint32_t> Schedule::interaction_set(uint32_t q) const {
  if (q >= n_) throw std::invalid_argument("unknown qubit id");
  if (steps() < kPeriodSteps)
    throw std::invalid_argument("schedule window shorter than one period");
  std::set<uint32_t> partners;
  for (size_t i = 0; i < kSubSteps * kPeriodSteps; ++i)
    for (const auto& m : ticks_[i]) {
      if (m.q1 == q) partners.insert(m.q2);
      if (m.q2 == q) partners.insert(m.q1);
    }
  return {partners.begin(), partners.end()};
}

uint32_t Schedule::occupant(size_t step, int kind, size_t coset,
                            uint8_t port) const {
  return occupancy_.at(step).at((static_cast<size_t>(kind) * cosets_ + coset) *
                                    kPorts +
                                port);
}

Schedule build_schedule(const StairwayLattice& lat, const WorldlineTemplate& wl,
                        const DecompositionTemplate& dec, int64_t t_min,
                        int64_t t_max) {
  return Schedule(lat, wl, dec, t_min, t_max);
}

Circuit emit_skeleton(const Schedule& s, const Experiment& e) {
  if (s.steps() != e.rounds * kPeriodSteps)
    throw std::invalid_argument(
        "schedule window must span exactly `rounds` periods");
  uint32_t n = static_cast<uint32_t>(s.qubit_count());
  Circuit c(n);
  std::vector<uint32_t> all(n);
  std::iota(all.begin(), all.end(), 0u);
  if (e.x_basis)
    c.reset_x(all);
  else
    c.reset_z(all);
  c.tick();
  for (size_t i = 0; i < s.ticks(); ++i) {
    for (const auto& m : s.tick(i)) {
      Pauli basis = m.xx ? Pauli::X : Pauli::Z;
      c.mpp({{m.q1, basis}, {m.q2, basis}});
    }
    c.tick();
  }
  if (e.x_basis)
    c.measure_x(all);
  else
    c.measure_z(all);
  return c;
}

}  // namespace stairway
