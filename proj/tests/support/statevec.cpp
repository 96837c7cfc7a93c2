#include "statevec.hpp"

#include <cmath>
#include <stdexcept>

namespace svtest {

namespace {
constexpr double kEps = 1e-9;
}

StateVec::StateVec(size_t n_qubits) : n_(n_qubits) {
  if (n_ > 20) throw std::runtime_error("state vector too large");
  a_.assign(size_t{1} << n_, {0.0, 0.0});
  a_[0] = 1.0;
}

StateVec StateVec::purified(size_t n) {
  StateVec s;
  s.n_ = 2 * n;
  if (s.n_ > 20) throw std::runtime_error("state vector too large");
  s.a_.assign(size_t{1} << s.n_, {0.0, 0.0});
  double amp = 1.0 / std::sqrt(double(size_t{1} << n));
  for (uint64_t b = 0; b < (uint64_t{1} << n); ++b) s.a_[b | (b << n)] = amp;
  return s;
}

uint64_t StateVec::mask_of(const stairway::BitVec& support) const {
  uint64_t m = 0;
  for (uint32_t q : support.indices()) {
    if (q >= n_) throw std::runtime_error("support outside the register");
    m |= uint64_t{1} << q;
  }
  return m;
}

void StateVec::apply_cx(size_t control, size_t target) {
  uint64_t cm = uint64_t{1} << control, tm = uint64_t{1} << target;
  for (uint64_t b = 0; b < a_.size(); ++b)
    if ((b & cm) && !(b & tm)) std::swap(a_[b], a_[b | tm]);
}

double StateVec::measure_forced(const stairway::BitVec& support, bool x_type,
                                bool outcome) {
  uint64_t mask = mask_of(support);
  double s = outcome ? -1.0 : 1.0;
  std::vector<std::complex<double>> proj(a_.size());
  if (x_type) {
    for (uint64_t b = 0; b < a_.size(); ++b)
      proj[b] = 0.5 * (a_[b] + s * a_[b ^ mask]);
  } else {
    for (uint64_t b = 0; b < a_.size(); ++b) {
      double ph = (__builtin_popcountll(b & mask) & 1) ? -1.0 : 1.0;
      proj[b] = 0.5 * (a_[b] + s * ph * a_[b]);
    }
  }
  double prob = 0.0;
  for (const auto& c : proj) prob += std::norm(c);
  if (prob > kEps) {
    double inv = 1.0 / std::sqrt(prob);
    for (auto& c : proj) c *= inv;
    a_ = std::move(proj);
  }
  return prob;
}

void StateVec::reset(size_t q, bool x_basis) {
  stairway::BitVec sup(n_);
  sup.set(q, true);
  double p0 = measure_forced(sup, x_basis, false);
  if (p0 > kEps) return;
  double p1 = measure_forced(sup, x_basis, true);
  if (p1 < kEps) throw std::runtime_error("reset of a null state");
  // Certain - outcome: flip it back with the anticommuting single Pauli.
  uint64_t qm = uint64_t{1} << q;
  if (x_basis) {
    // X-basis reset landed in |->: apply Z_q.
    for (uint64_t b = 0; b < a_.size(); ++b)
      if (b & qm) a_[b] = -a_[b];
  } else {
    // Z-basis reset landed in |1>: apply X_q.
    for (uint64_t b = 0; b < a_.size(); ++b)
      if (!(b & qm)) std::swap(a_[b], a_[b | qm]);
  }
}

}  // namespace svtest
