#include "detectors.hpp"

#include <algorithm>
#include <map>

#include "stabsim.hpp"

namespace stairway {

std::vector<Detector> discover_detectors(const Circuit& c) {
  OutcomePolicy policy;
  policy.kind = OutcomePolicy::Kind::Random;
  policy.seed = 0;  // outcomes are symbolic under tag tracking; seed unused
  SimResult res = simulate_circuit(c, policy, /*track_tags=*/true);

  std::vector<Detector> out;
  out.reserve(res.relations.size());
  for (const DetRelation& rel : res.relations) {
    Detector d;
    d.records = rel.priors;
    d.records.push_back(rel.record);
    std::sort(d.records.begin(), d.records.end());
    out.push_back(std::move(d));
  }
  return out;
}

Circuit annotate_detectors(const Circuit& c, const std::vector<Detector>& dets) {
  Circuit out = c;
  int64_t total = static_cast<int64_t>(c.count_records());
  for (const Detector& d : dets) {
    std::vector<int64_t> offsets;
    offsets.reserve(d.records.size());
    for (uint32_t r : d.records) offsets.push_back(static_cast<int64_t>(r) - total);
    out.detector(std::move(offsets));
  }
  return out;
}

std::vector<std::pair<size_t, size_t>> detector_weight_histogram(
    const std::vector<Detector>& dets) {
  std::map<size_t, size_t> h;
  for (const Detector& d : dets) ++h[d.records.size()];
  return {h.begin(), h.end()};
}

}  // namespace stairway
