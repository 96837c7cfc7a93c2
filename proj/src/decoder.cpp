#include "decoder.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace stairway {

namespace {

std::vector<uint32_t> sym_diff(const std::vector<uint32_t>& a,
                               const std::vector<uint32_t>& b) {
  std::vector<uint32_t> out;
  out.reserve(a.size() + b.size());
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                std::back_inserter(out));
  return out;
}

}  // namespace

struct Decoder::Impl {
  size_t n_det = 0, n_obs = 0;
  DecoderConfig config;
  std::vector<std::vector<uint32_t>> dets;  // per mechanism, ascending
  std::vector<std::vector<uint32_t>> obs;
  std::vector<double> weight;
  std::vector<std::vector<uint32_t>> incidence;  // detector -> mechanism ids
  std::vector<uint32_t> comp;                    // detector -> component id

  uint32_t find(std::vector<uint32_t>& parent, uint32_t x) const {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
};

Decoder::Decoder(const DetectorErrorModel& dem, DecoderConfig config)
    : impl_(std::make_unique<Impl>()) {
  impl_->n_det = dem.n_detectors;
  impl_->n_obs = dem.n_observables;
  impl_->config = config;
  impl_->incidence.resize(dem.n_detectors);

  std::vector<uint32_t> parent(dem.n_detectors);
  for (uint32_t d = 0; d < dem.n_detectors; ++d) parent[d] = d;

  for (size_t i = 0; i < dem.mechanisms.size(); ++i) {
    const DemMechanism& m = dem.mechanisms[i];
    if (!(m.p >= 0.0 && m.p < 0.5))
      throw std::invalid_argument(
          "decoder: mechanism probability outside [0, 1/2)");
    impl_->dets.push_back(m.detectors);
    impl_->obs.push_back(m.observables);
    impl_->weight.push_back(m.p > 0 ? -std::log(m.p / (1.0 - m.p)) : 0.0);
    if (m.p <= 0.0 || m.detectors.empty()) continue;  // unusable in a hypothesis
    for (uint32_t d : m.detectors) {
      impl_->incidence[d].push_back(uint32_t(i));
      uint32_t ra = impl_->find(parent, m.detectors[0]);
      uint32_t rb = impl_->find(parent, d);
      if (ra != rb) parent[rb] = ra;
    }
  }
  impl_->comp.resize(dem.n_detectors);
  for (uint32_t d = 0; d < dem.n_detectors; ++d)
    impl_->comp[d] = impl_->find(parent, d);
}

Decoder::~Decoder() = default;
Decoder::Decoder(Decoder&&) noexcept = default;

Decoded Decoder::decode(const BitVec& syndrome) const {
  const Impl& im = *impl_;
  if (syndrome.size() != im.n_det)
    throw std::invalid_argument("decoder: syndrome width mismatch");

  Decoded out;
  out.observables = BitVec(im.n_obs);

  // Split the fired detectors by component; each group decodes independently.
  std::map<uint32_t, std::vector<uint32_t>> groups;
  for (size_t d : syndrome.indices()) groups[im.comp[d]].push_back(uint32_t(d));

  struct Node {
    double cost = 0;
    uint64_t seq = 0;  // deterministic FIFO tie-break among equal costs
    std::vector<uint32_t> residual;
    std::vector<uint32_t> mechs;
  };
  struct NodeLess {
    bool operator()(const Node& a, const Node& b) const {
      return a.cost < b.cost || (a.cost == b.cost && a.seq < b.seq);
    }
  };

  for (auto& [comp_id, residual0] : groups) {
    std::multiset<Node, NodeLess> frontier;
    std::map<std::vector<uint32_t>, double> closed;
    uint64_t seq = 0;
    frontier.insert({0.0, seq++, residual0, {}});
    bool solved = false;

    while (!frontier.empty()) {
      Node cur = *frontier.begin();
      frontier.erase(frontier.begin());
      auto it = closed.find(cur.residual);
      if (it != closed.end() && it->second <= cur.cost) continue;
      closed[cur.residual] = cur.cost;

      if (cur.residual.empty()) {
        out.mechanisms.insert(out.mechanisms.end(), cur.mechs.begin(),
                              cur.mechs.end());
        out.cost += cur.cost;
        solved = true;
        break;
      }
      if (im.config.weight_cap && cur.mechs.size() >= im.config.weight_cap) continue;

      uint32_t d = cur.residual.front();
      for (uint32_t mi : im.incidence[d]) {
        if (std::find(cur.mechs.begin(), cur.mechs.end(), mi) != cur.mechs.end())
          continue;  // re-firing a mechanism never helps
        Node next;
        next.cost = cur.cost + im.weight[mi];
        next.seq = seq++;
        next.residual = sym_diff(cur.residual, im.dets[mi]);
        auto cit = closed.find(next.residual);
        if (cit != closed.end() && cit->second <= next.cost) continue;
        next.mechs = cur.mechs;
        next.mechs.push_back(mi);
        frontier.insert(std::move(next));
        if (im.config.beam_width && frontier.size() > im.config.beam_width)
          frontier.erase(std::prev(frontier.end()));
      }
    }
    if (!solved) {
      out.failed = true;
      out.mechanisms.clear();
      out.cost = 0;
      return out;
    }
  }

  std::sort(out.mechanisms.begin(), out.mechanisms.end());
  // Re-verify: the hypothesis must reproduce the syndrome exactly.
  std::vector<uint32_t> acc;
  for (uint32_t mi : out.mechanisms) {
    acc = sym_diff(acc, im.dets[mi]);
    for (uint32_t o : im.obs[mi]) out.observables.flip(o);
  }
  if (acc != syndrome.indices())
    throw std::runtime_error(
        "decoder: internal: hypothesis does not reproduce the syndrome");
  return out;
}

Decoded decode_shot(const DetectorErrorModel& dem, const BitVec& syndrome,
                    const DecoderConfig& config) {
  return Decoder(dem, config).decode(syndrome);
}

std::vector<Decoded> decode_batch(const DetectorErrorModel& dem, const ShotBatch& batch,
                                  const DecoderConfig& config) {
  Decoder dec(dem, config);
  std::vector<Decoded> out;
  out.reserve(batch.shots);
  for (uint64_t s = 0; s < batch.shots; ++s) out.push_back(dec.decode(batch.events[s]));
  return out;
}

Stats logical_error_rate(const ShotBatch& batch, const std::vector<Decoded>& decoded) {
  std::vector<BitVec> preds;
  std::vector<uint8_t> failed;
  preds.reserve(decoded.size());
  failed.reserve(decoded.size());
  for (const Decoded& d : decoded) {
    preds.push_back(d.observables);
    failed.push_back(d.failed);
  }
  return logical_error_rate(batch, preds, failed);
}

}  // namespace stairway
