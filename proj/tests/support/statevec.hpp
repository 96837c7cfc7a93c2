#pragma once

#include <complex>
#include <vector>

#include "gf2.hpp"

// Dense state-vector oracle for cross-checking the stabilizer engine on a
// handful of qubits.  Measurements are forced: the caller supplies the
// outcome and gets back its pre-projection probability.

namespace svtest {

class StateVec {
 public:
  explicit StateVec(size_t n_qubits);   // |0...0>
  // 2n qubits holding sum_b |b>_sys |b>_ref / sqrt(2^n); the system register
  // occupies qubits [0, n).  Tracing out the reference gives the fully mixed
  // state, matching a simulator started with no stabilizers.
  static StateVec purified(size_t n);

  size_t qubits() const { return n_; }

  void apply_cx(size_t control, size_t target);
  // Projects onto the `outcome` eigenspace of the X-type (or Z-type) product
  // over `support` and renormalizes; returns the probability of that
  // outcome.  When the probability is ~0 the state is left untouched.
  double measure_forced(const stairway::BitVec& support, bool x_type, bool outcome);
  // Forces the + eigenstate of Z_q (or X_q), applying the anticommuting
  // correction when the - outcome was certain.
  void reset(size_t q, bool x_basis);

 private:
  StateVec() = default;
  uint64_t mask_of(const stairway::BitVec& support) const;

  size_t n_ = 0;
  std::vector<std::complex<double>> a_;
};

}  // namespace svtest
