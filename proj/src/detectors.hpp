#pragma once

#include <cstdint>
#include <vector>

#include "circuit.hpp"

namespace stairway {

// A parity of measurement records that is deterministic at zero noise.
struct Detector {
  std::vector<uint32_t> records;  // ascending, no duplicates

  bool operator==(const Detector&) const = default;
};

// Basis of the deterministic-parity space of c's outcomes.  Each random
// outcome is tracked as a fresh symbolic bit; a measurement whose outcome is
// an affine combination of earlier bits yields one detector: that record
// together with the earlier records whose parity reproduces it.  Every
// deterministic measurement contributes exactly one basis element (its own
// record is the newest member, so the set is independent).
std::vector<Detector> discover_detectors(const Circuit& c);

// Rewrites c with DETECTOR instructions appended for the given parities
// (offsets computed against the final record count).  Existing DETECTOR
// instructions are kept; duplicates are not checked.
Circuit annotate_detectors(const Circuit& c, const std::vector<Detector>& dets);

// Weight histogram: weight -> number of detectors with that many records.
std::vector<std::pair<size_t, size_t>> detector_weight_histogram(
    const std::vector<Detector>& dets);

}  // namespace stairway
