#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "circuit.hpp"
#include "lattice.hpp"

namespace stairway {

// In/out ports of a half-cell.  TauL/TauR are the two data-qubit
// continuations between the Z and X halves of a unit cell; J1..J6 are the
// six spatial directions.  A qubit leaving through port Jk enters the
// neighbouring half-cell of the same kind at in-port Jk one time step
// later; a qubit leaving through a Tau port enters the other kind (Z -> X
// stays in the same unit cell, X -> Z advances one cell along axis 0).
enum Port : uint8_t {
  kTauL = 0,
  kTauR = 1,
  kJ1 = 2,
  kJ2 = 3,
  kJ3 = 4,
  kJ4 = 5,
  kJ5 = 6,
  kJ6 = 7,
};

constexpr size_t kPorts = 8;
constexpr size_t kSubSteps = 3;   // pairwise-measurement layers per time step
constexpr size_t kPeriodSteps = 8;

// out[kind][p]: the port through which a qubit entering half-cell kind
// (0 = Z, 1 = X) at port p leaves one time step later.
struct WorldlineTemplate {
  std::array<std::array<uint8_t, kPorts>, 2> out{};

  bool bijective() const;
};

// One pairwise measurement inside a half-cell.  Ports name the two qubits by
// their entry direction; xx selects the measured basis (XX vs ZZ).
struct TemplateOp {
  uint8_t sub_step = 0;  // 0..kSubSteps-1
  uint8_t port_a = 0;
  uint8_t port_b = 0;
  bool xx = false;
};

// Eight pairwise measurements per half-cell kind: a ring of four across the
// check spider (one of them redundant, yielding a weight-4 detector) and a
// chain of two across each data spider.
struct DecompositionTemplate {
  std::array<std::array<TemplateOp, 8>, 2> ops{};
};

// Frozen constants derived offline (tools/derive_templates.cpp).
const WorldlineTemplate& shipped_worldlines();
const DecompositionTemplate& shipped_decomposition();

struct TraceReport {
  size_t period_steps = 0;      // time steps until every trajectory closes
  size_t period_sub_steps = 0;  // kSubSteps * period_steps
  IVec displacement;            // per-cycle displacement, axes j0..j6
  size_t classes = 0;           // distinct trajectory classes
  bool uniform = true;          // all classes share one displacement
};

// Follows every (kind, port) state through the template until all close.
// Throws if per-cycle displacements disagree between trajectory classes.
TraceReport trace_worldlines(const WorldlineTemplate& wl);

struct ScheduledMeasurement {
  uint32_t q1 = 0;
  uint32_t q2 = 0;
  bool xx = false;
};

// Pairwise-measurement schedule over a window of time steps, with static
// register ids.  Ids are worldline-stable across the whole window: the
// register assigned to a qubit at the window start follows it through every
// half-cell it visits.  Rebuilding a window shifted by one period yields the
// same schedule up to one fixed qubit relabeling.
class Schedule {
 public:
  Schedule(const StairwayLattice& lat, const WorldlineTemplate& wl,
           const DecompositionTemplate& dec, int64_t t_min, int64_t t_max);

  size_t qubit_count() const { return n_; }
  size_t cosets() const { return cosets_; }
  int64_t t_min() const { return t_min_; }
  int64_t t_max() const { return t_max_; }
  size_t steps() const { return static_cast<size_t>(t_max_ - t_min_); }
  size_t ticks() const { return kSubSteps * steps(); }
  const std::vector<ScheduledMeasurement>& tick(size_t i) const {
    return ticks_.at(i);
  }

  // Distinct partners measured together with q anywhere in the window.
  std::vector<uint32_t> interaction_set(uint32_t q) const;

  // Register occupying (kind, coset, port) at the start of time step `step`
  // (counted from t_min).  step == steps() gives the final assignment.
  uint32_t occupant(size_t step, int kind, size_t coset, uint8_t port) const;

 private:
  size_t n_ = 0;
  size_t cosets_ = 0;
  int64_t t_min_ = 0;
  int64_t t_max_ = 0;
  std::vector<std::vector<ScheduledMeasurement>> ticks_;
  std::vector<std::vector<uint32_t>> occupancy_;  // [step][state index]
};

Schedule build_schedule(const StairwayLattice& lat, const WorldlineTemplate& wl,
                        const DecompositionTemplate& dec, int64_t t_min,
                        int64_t t_max);

enum class BoundaryPolicy { NoisyTransversal, NoiselessBoundary };

struct Experiment {
  size_t rounds = 0;
  bool x_basis = false;  // memory basis; Z is the default
  BoundaryPolicy policy = BoundaryPolicy::NoisyTransversal;
};

// Memory-experiment skeleton: transversal reset, rounds * kPeriodSteps time
// steps of pairwise measurements, transversal readout.  The schedule window
// must span exactly rounds periods.  Detector/observable annotation is a
// separate pass (detectors.hpp).
Circuit emit_skeleton(const Schedule& s, const Experiment& e);

}  // namespace stairway
