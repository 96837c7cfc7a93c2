#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "dem.hpp"
#include "gf2.hpp"
#include "sampling.hpp"

namespace stairway {

struct DecoderConfig {
  uint32_t beam_width = 0;  // frontier cap; 0 = unbounded (exact search)
  uint32_t weight_cap = 0;  // max mechanisms per syndrome component; 0 = unbounded
};

struct Decoded {
  BitVec observables;                // predicted flips, width n_observables
  std::vector<uint32_t> mechanisms;  // hypothesis, ascending mechanism ids
  double cost = 0;                   // sum of -log(p/(1-p)) over the hypothesis
  bool failed = false;               // no hypothesis within the budget
};

// Most-likely-error search.  Under independent mechanisms with p < 1/2, the
// most likely fault set matching a syndrome minimizes the sum of
// -log(p/(1-p)); the search is a Dijkstra walk over residual syndromes where
// every expansion chooses a mechanism incident to the lowest-index unresolved
// detector.  Any subset can be built in that order (some unused member must
// touch that detector, by parity), so with an unbounded frontier the first
// settled empty residual is the global optimum.  Independent syndrome
// components (detectors connected through shared mechanisms) decode
// separately.  A nonzero beam width caps the frontier, trading optimality for
// time; the returned hypothesis is re-verified against the syndrome either
// way.
class Decoder {
 public:
  // Throws std::invalid_argument if any mechanism probability is outside
  // [0, 1/2); zero-probability mechanisms are unusable and ignored.
  explicit Decoder(const DetectorErrorModel& dem, DecoderConfig config = {});
  ~Decoder();
  Decoder(Decoder&&) noexcept;

  Decoded decode(const BitVec& syndrome) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Decoded decode_shot(const DetectorErrorModel& dem, const BitVec& syndrome,
                    const DecoderConfig& config = {});

std::vector<Decoded> decode_batch(const DetectorErrorModel& dem, const ShotBatch& batch,
                                  const DecoderConfig& config = {});

// Any-flip mismatch per shot; failed decodes count as logical errors.
Stats logical_error_rate(const ShotBatch& batch, const std::vector<Decoded>& decoded);

}  // namespace stairway
