#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dem.hpp"
#include "stabsim.hpp"

namespace stairway {

inline constexpr uint32_t kInfWeight = std::numeric_limits<uint32_t>::max();

// Limits for the distance engines.  Wall time is checked cooperatively;
// w_max caps the proven lower bound; mem_entries caps the size of one
// meet-in-the-middle level (past it the engine degrades to bounds instead
// of allocating without limit).  seed/restarts drive the randomized
// incumbent search, which only ever tightens the upper bound.
struct DistanceBudget {
  double wall_seconds = std::numeric_limits<double>::infinity();
  uint32_t w_max = kInfWeight;
  uint64_t mem_entries = 15'000'000;
  uint64_t seed = 1;
  uint32_t restarts = 200;
};

struct DistanceResult {
  enum class Status : uint8_t { kExact, kBounds, kTimeout };

  uint32_t lower = 1;             // proven: no nontrivial operator below this
  uint32_t upper = kInfWeight;    // weight of the best verified certificate
  PauliString certificate;        // achieves upper; width 0 when absent
  std::vector<uint32_t> fault_set;  // mechanism indices (circuit search)
  int64_t step_index = -1;        // which per-step code the certificate is from
  Status status = Status::kBounds;
  double wall_seconds = 0;
};

std::string status_name(DistanceResult::Status s);
std::string distance_report_json(const DistanceResult& r);

// "X0 Y3 Z7" (empty string for the identity).
std::string pauli_text(const PauliString& p);

// 0-1 integer program for the minimum-weight span member with at least one
// logical coefficient set: l = sum_j alpha_j S_j + sum_q beta_q L_q (mod 2),
// sum_q beta_q >= 1, minimizing the number of supported qubits.  Mod-2 sums
// are linearized per symplectic coordinate with integer slacks (-2 t_c); the
// per-qubit support indicator dominates the coordinate bits.
struct IlpInstance {
  struct Term {
    double coef = 0;
    uint32_t var = 0;
  };
  struct Constraint {
    std::string name;
    std::vector<Term> terms;
    char sense = '=';  // '=', '>' (meaning >=), '<' (meaning <=)
    double rhs = 0;
  };
  struct Var {
    std::string name;
    bool binary = true;
    bool integer = false;  // general integer when true (slacks)
    double lo = 0, hi = 1;
  };

  std::vector<Var> vars;
  std::vector<Term> objective;  // minimized
  std::vector<Constraint> constraints;

  uint32_t add_var(std::string name, bool binary, bool integer, double lo, double hi);
};

IlpInstance make_ilp(const std::vector<PauliString>& stabs,
                     const std::vector<PauliString>& logicals);
std::string lp_text(const IlpInstance& ilp);

// True when cand commutes with every stabilizer and anticommutes with at
// least one of the listed logicals.
bool verify_logical(const std::vector<PauliString>& stabs,
                    const std::vector<PauliString>& logicals,
                    const PauliString& cand);

// Minimum weight over span(stabs, logicals) with a nonzero logical part.
// Passing every logical generator gives the code distance; passing a subset
// restricts the search to those classes.  Meet-in-the-middle rounds prove
// the lower bound; a seeded local search supplies incumbents for the upper.
DistanceResult min_weight_nongauge(const std::vector<PauliString>& stabs,
                                   const std::vector<PauliString>& logicals,
                                   const DistanceBudget& budget = {});

// Same minimum, solved by depth-first branch and bound over per-qubit Pauli
// assignments with parity propagation (the in-house solver for the integer
// program above).  Intended for small instances and cross-checking.
DistanceResult min_weight_bnb(const std::vector<PauliString>& stabs,
                              const std::vector<PauliString>& logicals,
                              const DistanceBudget& budget = {});

// Exhaustive meet-in-the-middle oracle: exact minimum if it is <= w_max,
// otherwise lower = w_max + 1 with status kBounds (or kTimeout when the
// budget ran out first).
DistanceResult brute_force_distance(const std::vector<PauliString>& stabs,
                                    const std::vector<PauliString>& logicals,
                                    uint32_t w_max,
                                    const DistanceBudget& budget = {});

// Minimum over the per-step codes of one period (both bases): each step
// contributes min_weight_nongauge over its stabilizers and logical pairs.
DistanceResult embedded_distance(const std::vector<EffectiveCode>& steps,
                                 const DistanceBudget& budget = {});

// Minimum-cardinality mechanism subset with empty detector symptom and
// nonempty observable symptom.  Rounds ascend in cardinality; round w
// enumerates candidate sets by repeatedly branching on the mechanisms
// incident to the lowest unresolved detector and closing with a hash lookup
// of the final symptom, which is exhaustive for that cardinality.
DistanceResult circuit_distance(const DetectorErrorModel& dem,
                                const DistanceBudget& budget = {});

}  // namespace stairway
