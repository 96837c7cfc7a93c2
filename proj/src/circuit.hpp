#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stairway {

enum class Pauli : uint8_t { X, Y, Z };

char pauli_char(Pauli p);

// One circuit instruction. Fields beyond `kind` are populated per kind:
//   Mpp:        qubits + paulis (parallel arrays); produces 1 record
//   MeasureZ/X: qubits; produces 1 record per qubit
//   ResetZ/X:   qubits
//   Cx:         qubits = {control, target, control, target, ...}
//   Tick:       nothing
//   Detector:   recs = negative record offsets (rec[-k])
//   Observable: recs + logical index
struct Instruction {
  enum class Kind : uint8_t {
    Mpp,
    ResetZ,
    ResetX,
    MeasureZ,
    MeasureX,
    Cx,
    Tick,
    Detector,
    Observable,
  };

  Kind kind = Kind::Tick;
  std::vector<uint32_t> qubits;
  std::vector<Pauli> paulis;
  std::vector<int64_t> recs;
  uint32_t index = 0;

  bool operator==(const Instruction&) const = default;

  size_t record_count() const {
    if (kind == Kind::Mpp) return 1;
    if (kind == Kind::MeasureZ || kind == Kind::MeasureX) return qubits.size();
    return 0;
  }
};

// Measurement-based circuit. The text form round-trips bit-exactly:
// parse(serialize(c)) == c, and serialize(parse(t)) == t for canonical t.
class Circuit {
 public:
  Circuit() = default;
  explicit Circuit(uint32_t n_qubits) : n_(n_qubits) {}

  uint32_t num_qubits() const { return n_; }
  void set_num_qubits(uint32_t n) { n_ = n; }
  const std::vector<Instruction>& instructions() const { return ops_; }

  // Factors are sorted by qubit id before storing, so builder output is
  // canonical regardless of caller order. Duplicate qubits are rejected.
  void mpp(std::vector<std::pair<uint32_t, Pauli>> factors);
  void reset_z(std::vector<uint32_t> qs);
  void reset_x(std::vector<uint32_t> qs);
  void measure_z(std::vector<uint32_t> qs);
  void measure_x(std::vector<uint32_t> qs);
  void cx(uint32_t control, uint32_t target);
  void tick();
  // Offsets are rec[-k] style: strictly negative, within the record count
  // accumulated so far.
  void detector(std::vector<int64_t> rec_offsets);
  void observable(uint32_t index, std::vector<int64_t> rec_offsets);

  void append(Instruction ins);

  size_t count_records() const;
  size_t count_detectors() const;
  // One more than the largest OBSERVABLE index, 0 if there are none.
  size_t count_observables() const;

  bool operator==(const Circuit&) const = default;

  std::string to_text() const;
  static Circuit from_text(std::string_view text);
  static Circuit read_file(const std::string& path);
  void write_file(const std::string& path) const;

 private:
  uint32_t n_ = 0;
  std::vector<Instruction> ops_;
};

// DETECTOR / OBSERVABLE references resolved against the running record
// counter into absolute record indices (ascending per entry).
struct ResolvedRefs {
  std::vector<std::vector<uint32_t>> detectors;
  std::vector<std::vector<uint32_t>> observables;
};

ResolvedRefs resolve_refs(const Circuit& c);

}  // namespace stairway
