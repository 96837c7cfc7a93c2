#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace stairway {

using IVec = std::vector<int64_t>;
using IMat = std::vector<IVec>;

// Exact integer determinant (Bareiss).  Square input required.
int64_t int_det(IMat m);
// Rank over the rationals (fraction-free elimination).
size_t int_rank(IMat m);

// Space-time lattice of a stairway code: a time covector t on Z^{D+1} and a
// rank-D periodicity matrix whose rows are identified to zero (periodic
// boundary conditions).  Every periodicity row must be orthogonal to t, so
// time descends to the coset space.
struct StairwayLattice {
  IVec t;            // length D+1, index 0 = original circuit time axis
  IMat periodicity;  // D rows x (D+1) columns
  int64_t t_min = 0;
  int64_t t_max = 0;

  size_t dim() const { return t.size(); }      // D+1
  size_t d() const { return periodicity.size(); }

  bool operator==(const StairwayLattice&) const = default;
};

IVec default_time_covector(size_t dim);  // (2,1,...,1)

struct LatticeReport {
  bool ok = true;
  std::string message;  // empty when ok; names the failing row otherwise
};

LatticeReport validate_lattice(const StairwayLattice& lat);

enum class CellKind : uint8_t { Z, X };

// One check spider and the window of 8 qubit worldlines it touches.  coords
// is the canonical coset representative; a Z cell at u happens at time u.t,
// the X cell at u one step later.
struct HalfCell {
  IVec coords;
  CellKind kind = CellKind::Z;
  int64_t time = 0;
  size_t coset_index = 0;  // position within its time slice, in [0, cosets_per_time)

  bool operator==(const HalfCell&) const = default;
};

// Canonical coset arithmetic for Z^{D+1} modulo the periodicity rows.
//
// Construction: a unimodular U with t.U = (1,0,...,0) splits any point as
// u = U.(T, c) where T = t.u and c are coordinates in a basis of ker t.
// The periodicity rows, expressed in c-coordinates, are brought to a
// lower-triangular Hermite normal form H; reducing c into the box
// 0 <= c_i < H_ii picks one representative per coset per time slice.
class CosetGeometry {
 public:
  explicit CosetGeometry(const StairwayLattice& lat);

  size_t cosets_per_time() const { return cosets_; }
  int64_t time_of(const IVec& u) const;
  // Canonical representative of u's coset (same time as u).  Idempotent.
  IVec canonical(const IVec& u) const;
  // Mixed-radix position of u's coset within its time slice.
  size_t index_of(const IVec& u) const;
  IVec rep_at(int64_t time, size_t index) const;

 private:
  size_t n_;     // D+1
  IVec t_;
  IMat u_cols_;  // n x n, u_cols_[i][j] = U_{ij}; columns 1.. span ker t
  IMat v_rows_;  // U^{-1}
  IMat h_;       // D x D lower-triangular HNF of the periodicity in c-coords
  size_t cosets_ = 1;

  IVec coords_of(const IVec& u) const;   // (T, c) of length n
  IVec reduce_box(IVec c) const;         // c modulo rowspace(h_), canonical box
};

// One HalfCell per coset per integer time in [t_min, t_max], both kinds,
// ordered by (time, kind Z before X, coset index).  Empty if t_min > t_max.
std::vector<HalfCell> enumerate_half_cells(const StairwayLattice& lat,
                                           int64_t t_min, int64_t t_max);

// n = w * (number of half-cells sharing one time step), by direct coset
// counting.  (The closed form w*det/|t| printed alongside the construction
// does not reproduce the published qubit numbers; counting does.)
size_t qubit_count(const StairwayLattice& lat, size_t w);

// Candidate generator family: two axial rows of spans d1, d2 plus one row
// per remaining spatial direction carrying -1 there and free entries a_{i,j}
// in the two axial directions.  The leading component is forced by t.p = 0,
// which requires a_{i,1} + a_{i,2} odd.
struct SearchTemplate {
  int64_t d1 = 0, d2 = 0;             // even, positive
  std::array<std::array<int64_t, 2>, 4> a{};  // 0 <= a[i][j] < d_{j+1}

  bool parity_ok() const;
};

StairwayLattice lattice_from_template(const SearchTemplate& st);

struct CandidateRanges {
  int64_t d1_min = 2, d1_max = 2;
  int64_t d2_min = 2, d2_max = 2;
};

// Streams every template instance in range that passes the parity filter
// (and therefore validate_lattice).  Sink returns false to stop early.
// Returns the number of candidates emitted.
size_t enumerate_candidates(
    const CandidateRanges& ranges,
    const std::function<bool(const StairwayLattice&, const SearchTemplate&)>& sink);

// JSON config: {"time_covector":[...], "periodicity":[[...],...],
//               "t_min":int, "t_max":int}; "format" optional on input.
StairwayLattice lattice_from_json_text(const std::string& text);
std::string lattice_to_json_text(const StairwayLattice& lat);
StairwayLattice load_lattice(const std::string& path);
void save_lattice(const StairwayLattice& lat, const std::string& path);

}  // namespace stairway
