#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "circuit.hpp"
#include "gf2.hpp"

namespace stairway {

// General Pauli operator; sign true means an overall -1.
struct PauliString {
  BitVec x, z;
  bool sign = false;

  PauliString() = default;
  PauliString(size_t width) : x(width), z(width) {}

  size_t width() const { return x.size(); }
  bool commutes(const PauliString& o) const {
    return (x.dot(o.z) ^ z.dot(o.x)) == 0;
  }
  size_t weight() const;
  bool identity() const { return !x.any() && !z.any(); }
  bool operator==(const PauliString&) const = default;
};

// A deterministic outcome relation: parity of record `record` equals the
// parity of the listed prior records (noiselessly zero in combination).
struct DetRelation {
  uint32_t record = 0;
  std::vector<uint32_t> priors;
};

struct OutcomePolicy {
  enum class Kind { Random, Forced } kind = Kind::Random;
  uint64_t seed = 0;
  std::vector<uint8_t> forced;  // indexed by record; checked on deterministic
};

// CSS stabilizer engine.  Generators are kept in two sectors (pure X-type
// and pure Z-type rows); every supported operation preserves that split.
// Each sector is held in strict reduced row-echelon form: rows carry a
// distinct leading column and every other row of the sector is zero there,
// which makes membership tests and outcome extraction a single sweep.
//
// Signs are affine: actual sign = base sign XOR parity of the tagged
// records.  With tag tracking on, random outcomes stay symbolic and every
// deterministic measurement emits a DetRelation; with it off, outcomes are
// concrete bits drawn per the policy.
class StabSim {
 public:
  struct Row {
    BitVec support;
    bool sign = false;
    BitVec tag;
    size_t leading = 0;
  };

  StabSim(size_t width, bool track_tags, size_t record_capacity);
  // Fully mixed state: no generators at all.
  static StabSim mixed_state(size_t width, bool track_tags, size_t record_capacity);
  // n EPR pairs: system qubit q entangled with reference column n + q.
  static StabSim bell_state(size_t n, bool track_tags, size_t record_capacity);

  void set_policy(OutcomePolicy policy);

  struct MeasureOut {
    uint32_t record = 0;
    bool outcome = false;
    bool deterministic = false;
  };
  // x_type true: measure X⊗...⊗X on the support; false: Z-type.
  MeasureOut measure(const BitVec& support, bool x_type);
  void reset(uint32_t q, bool x_basis);
  void apply_cx(uint32_t control, uint32_t target);
  // Pauli error channel: flips the sign of every generator it anticommutes
  // with.  The error's own sign is irrelevant.
  void apply_pauli(const PauliString& p);

  size_t width() const { return width_; }
  const std::vector<Row>& x_rows() const { return xs_.rows; }
  const std::vector<Row>& z_rows() const { return zs_.rows; }
  const std::vector<uint8_t>& outcomes() const { return outcomes_; }
  const std::vector<uint8_t>& deterministic_flags() const { return det_; }
  const std::vector<DetRelation>& relations() const { return relations_; }

  // Structural self-check: echelon invariants plus pairwise commutation.
  // O(rows^2), intended for tests and small widths.
  void check_invariants() const;

 private:
  struct Sector {
    std::vector<Row> rows;
    std::vector<int32_t> of_col;  // leading column -> row index, -1 if none

    void detach(size_t idx);      // swap-erase keeping of_col consistent
  };

  Sector& sector(bool x_type) { return x_type ? xs_ : zs_; }

  // Reduce (support, sign, tag) against the sector; returns false if it
  // vanished (i.e. the operator is in the sector's row space), in which case
  // sign/tag hold the membership expression.
  bool reduce(const Sector& s, BitVec& support, bool& sign, BitVec& tag) const;
  void insert(Sector& s, BitVec support, bool sign, BitVec tag);

  bool draw_outcome();

  size_t width_;
  bool tags_;
  size_t record_cap_;
  Sector xs_, zs_;
  std::vector<uint8_t> outcomes_;
  std::vector<uint8_t> det_;
  std::vector<DetRelation> relations_;
  OutcomePolicy policy_;
  uint64_t rng_state_ = 0;
};

struct SimResult {
  std::vector<uint8_t> outcomes;
  std::vector<uint8_t> deterministic;
  std::vector<DetRelation> relations;
};

// Runs c from the fully mixed state.  MPPs must be pure X-type or pure
// Z-type (the engine is CSS-native); Y factors are rejected.
SimResult simulate_circuit(const Circuit& c, const OutcomePolicy& policy,
                           bool track_tags = false);

struct LogicalPair {
  PauliString x_like, z_like;  // width n, anticommuting on the system
};

struct BellExtract {
  size_t n = 0;
  size_t k = 0;
  std::vector<PauliString> isg;     // stabilizers of the instantaneous state
  std::vector<LogicalPair> pairs;   // canonical symplectic logical pairs
};

// Runs c (which acts on system qubits only) on n EPR pairs and splits the
// final group: elements trivial on the reference are the ISG; the rest
// carry the preserved logical algebra.  Signs are normalized to +.
BellExtract bell_extract(const Circuit& c);

// Heisenberg-picture CX action on an operator: X on the control spreads to
// the target, Z on the target spreads to the control.
void conjugate_cx(PauliString& p, uint32_t control, uint32_t target);

// Pairwise measurement consumed by the embedded-code reduction.
struct MeasuredPair {
  uint32_t q1 = 0, q2 = 0;
  bool x_type = false;  // true: XX, false: ZZ
};

struct EffectiveCode {
  size_t n = 0, k = 0;
  std::vector<PauliString> stabs;
  std::vector<LogicalPair> pairs;
  std::vector<uint32_t> kept;  // effective column -> original qubit id
};

// Folds each just-measured pair into one effective qubit: conjugate by the
// CNOT that turns the pair operator into a single-qubit stabilizer, then
// drop the fixed qubit.  Throws if a pair operator is not in the ISG.
EffectiveCode renormalize_embedded(const std::vector<PauliString>& isg,
                                   const std::vector<LogicalPair>& logicals,
                                   const std::vector<MeasuredPair>& pairs);

}  // namespace stairway
