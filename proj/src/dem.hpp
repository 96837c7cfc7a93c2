#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "circuit.hpp"
#include "stabsim.hpp"

namespace stairway {

// One independent error mechanism: with probability p, flip the listed
// detectors and observables.
struct DemMechanism {
  double p = 0;
  std::vector<uint32_t> detectors;    // ascending
  std::vector<uint32_t> observables;  // ascending

  bool operator==(const DemMechanism&) const = default;
};

struct DetectorErrorModel {
  size_t n_detectors = 0;
  size_t n_observables = 0;
  std::vector<DemMechanism> mechanisms;
};

// A Pauli error injected right after instruction `instr` executes, plus
// outright flips of already-produced records (absolute indices).
struct Fault {
  size_t instr = 0;
  PauliString error;  // width = circuit qubit count; may be identity
  std::vector<uint32_t> record_flips;
};

struct FaultEffect {
  PauliString residual;                 // frame at end of circuit
  std::vector<uint32_t> flipped_records;  // ascending
};

// Heisenberg frame walk over the rest of the circuit: a measurement whose
// operator anticommutes with the frame flips its record; resets erase the
// frame on the reset qubit.
FaultEffect propagate_fault(const Circuit& c, const Fault& fault);

// EM3: with probability p a pairwise measurement suffers one of the 32
// combinations {two-qubit Pauli} x {outcome flip, none}, uniformly.  The
// trivial identity/no-flip combination is dropped (it has no effect), so one
// measurement yields 31 atoms of probability p/32 each.  The variant that
// excludes the trivial combination at draw time (p/31 each) sits behind the
// convention flag.  Because the flip bit ranges over both values, applying
// the Pauli before or after the measurement yields the same 32 symptom sets;
// we propagate from after.
enum class Em3Convention : uint8_t { kUniform32, kExcludedTrivial31 };

struct Em3Atom {
  size_t instr = 0;        // the MPP the atom is attached to
  uint8_t pauli_a = 0;     // 0=I 1=X 2=Y 3=Z on the lower-id qubit
  uint8_t pauli_b = 0;
  bool flip = false;
  double p = 0;
  std::vector<uint32_t> detectors;
  std::vector<uint32_t> observables;
};

// The 31 atoms of one pairwise MPP, symptoms resolved against c's DETECTOR /
// OBSERVABLE declarations.  instr must index a 2-qubit Mpp.
std::vector<Em3Atom> em3_atoms(const Circuit& c, size_t instr, double p,
                               Em3Convention conv = Em3Convention::kUniform32);

// DEM over every pairwise MPP of c; mechanisms with identical symptom sets
// are merged via p <- p1(1-p2) + p2(1-p1).  Requires >= 1 OBSERVABLE.
DetectorErrorModel build_dem(const Circuit& c, double p,
                             Em3Convention conv = Em3Convention::kUniform32);

// Text form: header line, then `error(<p>) D<i> ... L<j> ...` one mechanism
// per line; probabilities carry 17 significant digits.  Detectors that no
// mechanism touches are declared explicitly so counts round-trip.
std::string dem_to_text(const DetectorErrorModel& dem);
DetectorErrorModel dem_from_text(std::string_view text);
DetectorErrorModel load_dem(const std::string& path);
void save_dem(const DetectorErrorModel& dem, const std::string& path);

}  // namespace stairway
