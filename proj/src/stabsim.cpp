#include "stabsim.hpp"

#include <algorithm>
#include <stdexcept>

#include "rng.hpp"

namespace stairway {

namespace {

size_t next_set(const BitVec& v, size_t from) {
  const auto& w = v.words();
  if (from >= v.size()) return v.size();
  size_t k = from >> 6;
  uint64_t cur = w[k] & (~0ull << (from & 63));
  while (true) {
    if (cur) return k * 64 + static_cast<size_t>(__builtin_ctzll(cur));
    if (++k >= w.size()) return v.size();
    cur = w[k];
  }
}

}  // namespace

size_t PauliString::weight() const {
  const auto& xw = x.words();
  const auto& zw = z.words();
  size_t c = 0;
  for (size_t k = 0; k < xw.size(); ++k)
    c += static_cast<size_t>(__builtin_popcountll(xw[k] | zw[k]));
  return c;
}

void StabSim::Sector::detach(size_t idx) {
  of_col[rows[idx].leading] = -1;
  if (idx + 1 != rows.size()) {
    rows[idx] = std::move(rows.back());
    of_col[rows[idx].leading] = static_cast<int32_t>(idx);
  }
  rows.pop_back();
}

StabSim::StabSim(size_t width, bool track_tags, size_t record_capacity)
    : width_(width), tags_(track_tags), record_cap_(record_capacity) {
  xs_.of_col.assign(width_, -1);
  zs_.of_col.assign(width_, -1);
}

StabSim StabSim::mixed_state(size_t width, bool track_tags, size_t record_capacity) {
  return StabSim(width, track_tags, record_capacity);
}

StabSim StabSim::bell_state(size_t n, bool track_tags, size_t record_capacity) {
  StabSim s(2 * n, track_tags, record_capacity);
  for (size_t q = 0; q < n; ++q) {
    BitVec sup(2 * n);
    sup.set(q, true);
    sup.set(n + q, true);
    BitVec tag(track_tags ? record_capacity : 0);
    s.insert(s.xs_, sup, false, tag);
    s.insert(s.zs_, std::move(sup), false, std::move(tag));
  }
  return s;
}

void StabSim::set_policy(OutcomePolicy policy) {
  policy_ = std::move(policy);
  rng_state_ = mix64(policy_.seed ^ 0x9e3779b97f4a7c15ull);
}

bool StabSim::draw_outcome() {
  size_t rec = outcomes_.size();
  if (policy_.kind == OutcomePolicy::Kind::Forced) {
    if (rec >= policy_.forced.size())
      throw std::runtime_error("forced outcome list shorter than record count");
    return policy_.forced[rec] != 0;
  }
  rng_state_ = mix64(rng_state_);
  return (rng_state_ >> 63) != 0;
}

bool StabSim::reduce(const Sector& s, BitVec& support, bool& sign, BitVec& tag) const {
  size_t pos = 0;
  while (true) {
    size_t p = next_set(support, pos);
    if (p >= width_) break;
    int32_t r = s.of_col[p];
    if (r >= 0) {
      const Row& row = s.rows[static_cast<size_t>(r)];
      support.xor_in(row.support);  // clears bit p; touches only columns > p
      sign ^= row.sign;
      if (tags_) tag.xor_in(row.tag);
    }
    pos = p + 1;
  }
  return support.any();
}

void StabSim::insert(Sector& s, BitVec support, bool sign, BitVec tag) {
  size_t lead = support.first_set();
  if (lead >= width_) throw std::runtime_error("inserting an empty generator");
  if (s.of_col[lead] != -1) throw std::runtime_error("pivot column already taken");
  // Clear this column from the rest of the sector so the new leading column
  // stays exclusive.
  for (Row& r : s.rows) {
    if (r.support.get(lead)) {
      r.support.xor_in(support);
      r.sign ^= sign;
      if (tags_) r.tag.xor_in(tag);
    }
  }
  s.rows.push_back({std::move(support), sign, std::move(tag), lead});
  s.of_col[lead] = static_cast<int32_t>(s.rows.size() - 1);
}

StabSim::MeasureOut StabSim::measure(const BitVec& sup, bool x_type) {
  if (sup.size() != width_) throw std::runtime_error("measurement width mismatch");
  if (!sup.any()) throw std::runtime_error("measurement of the identity");
  uint32_t rec = static_cast<uint32_t>(outcomes_.size());
  if (tags_ && rec >= record_cap_)
    throw std::runtime_error("record capacity exceeded");

  Sector& own = sector(x_type);
  Sector& other = sector(!x_type);

  std::vector<size_t> anti;
  for (size_t i = 0; i < other.rows.size(); ++i)
    if (other.rows[i].support.dot(sup)) anti.push_back(i);

  MeasureOut out;
  out.record = rec;
  BitVec tg(tags_ ? record_cap_ : 0);

  if (!anti.empty()) {
    // Random outcome.  The pivot is the anticommuter with the largest
    // leading column: summing it into the others and then removing it keeps
    // the sector in strict echelon form.
    size_t piv = anti[0];
    for (size_t i : anti)
      if (other.rows[i].leading > other.rows[piv].leading) piv = i;
    Row pivot = other.rows[piv];
    for (size_t i : anti) {
      if (i == piv) continue;
      Row& r = other.rows[i];
      r.support.xor_in(pivot.support);
      r.sign ^= pivot.sign;
      if (tags_) r.tag.xor_in(pivot.tag);
    }
    other.detach(piv);

    bool bit = false;
    if (tags_)
      tg.set(rec, true);
    else
      bit = draw_outcome();
    BitVec red = sup;
    bool sgn = bit;
    if (!reduce(own, red, sgn, tg))
      throw std::runtime_error("internal: anticommuting operator in own span");
    insert(own, std::move(red), sgn, std::move(tg));
    out.outcome = bit;
    out.deterministic = false;
  } else {
    BitVec red = sup;
    bool sgn = false;
    if (!reduce(own, red, sgn, tg)) {
      // Deterministic: outcome is the accumulated sign expression.
      out.outcome = sgn;
      out.deterministic = true;
      if (tags_) {
        relations_.push_back({rec, tg.indices()});
        // Eliminate the oldest prior record from every row tag using the
        // relation just recorded: parity({priors, rec}) = sgn, so folding
        // that set into a row's tag (and sgn into its constant sign) leaves
        // the row's actual sign unchanged.  Substituting everywhere keeps
        // tags expressed in the newest records, so a re-measured operator
        // relates to its most recent occurrence instead of staying anchored
        // to the first one.
        size_t oldest = tg.first_set();
        if (oldest < record_cap_) {
          BitVec delta = tg;
          delta.set(rec, true);
          for (Sector* sec : {&xs_, &zs_})
            for (Row& r : sec->rows)
              if (r.tag.get(oldest)) {
                r.tag.xor_in(delta);
                r.sign ^= sgn;
              }
        }
      }
      if (!tags_ && policy_.kind == OutcomePolicy::Kind::Forced &&
          rec < policy_.forced.size() &&
          policy_.forced[rec] != static_cast<uint8_t>(sgn))
        throw std::runtime_error("forced outcome contradicts a deterministic measurement");
    } else {
      // Commutes with the whole group but is not in it: fresh random bit,
      // and the (reduced) operator joins the group.
      bool bit = false;
      if (tags_)
        tg.set(rec, true);
      else
        bit = draw_outcome();
      sgn ^= bit;
      insert(own, std::move(red), sgn, std::move(tg));
      out.outcome = bit;
      out.deterministic = false;
    }
  }
  outcomes_.push_back(out.outcome);
  det_.push_back(out.deterministic);
  return out;
}

void StabSim::reset(uint32_t q, bool x_basis) {
  if (q >= width_) throw std::runtime_error("reset target out of range");
  Sector& own = sector(x_basis);
  Sector& other = sector(!x_basis);

  BitVec sup(width_);
  sup.set(q, true);
  BitVec tg(tags_ ? record_cap_ : 0);

  std::vector<size_t> anti;
  for (size_t i = 0; i < other.rows.size(); ++i)
    if (other.rows[i].support.get(q)) anti.push_back(i);

  if (!anti.empty()) {
    size_t piv = anti[0];
    for (size_t i : anti)
      if (other.rows[i].leading > other.rows[piv].leading) piv = i;
    Row pivot = other.rows[piv];
    for (size_t i : anti) {
      if (i == piv) continue;
      Row& r = other.rows[i];
      r.support.xor_in(pivot.support);
      r.sign ^= pivot.sign;
      if (tags_) r.tag.xor_in(pivot.tag);
    }
    other.detach(piv);
    bool sgn = false;
    if (!reduce(own, sup, sgn, tg))
      throw std::runtime_error("internal: anticommuting reset operator in own span");
    insert(own, std::move(sup), sgn, std::move(tg));
    return;
  }

  bool sgn = false;
  if (reduce(own, sup, sgn, tg)) {
    insert(own, std::move(sup), sgn, std::move(tg));
  } else if (sgn || (tags_ && tg.any())) {
    // Deterministically -1 (or outcome-dependent): forcing + applies the
    // anticommuting single-qubit Pauli conditioned on that expression, which
    // flips the sign of every own-sector row containing q.
    for (Row& r : own.rows) {
      if (r.support.get(q)) {
        r.sign ^= sgn;
        if (tags_) r.tag.xor_in(tg);
      }
    }
  }
}

void StabSim::apply_cx(uint32_t control, uint32_t target) {
  if (control == target || control >= width_ || target >= width_)
    throw std::runtime_error("bad CX targets");
  auto update = [&](Sector& s, uint32_t test_bit, uint32_t flip_bit) {
    std::vector<Row> moved;
    for (size_t i = 0; i < s.rows.size();) {
      if (s.rows[i].support.get(test_bit)) {
        moved.push_back(std::move(s.rows[i]));
        s.detach(i);
      } else {
        ++i;
      }
    }
    for (Row& r : moved) {
      r.support.flip(flip_bit);
      BitVec sup = std::move(r.support);
      bool sgn = r.sign;
      BitVec tg = std::move(r.tag);
      if (!reduce(s, sup, sgn, tg))
        throw std::runtime_error("internal: CX made a generator dependent");
      insert(s, std::move(sup), sgn, std::move(tg));
    }
  };
  update(xs_, control, target);
  update(zs_, target, control);
}

void StabSim::apply_pauli(const PauliString& p) {
  if (p.width() != width_) throw std::runtime_error("pauli width mismatch");
  for (Row& r : xs_.rows) r.sign ^= r.support.dot(p.z);
  for (Row& r : zs_.rows) r.sign ^= r.support.dot(p.x);
}

void StabSim::check_invariants() const {
  auto check_sector = [&](const Sector& s, const char* name) {
    for (size_t i = 0; i < s.rows.size(); ++i) {
      const Row& r = s.rows[i];
      if (r.support.first_set() != r.leading)
        throw std::runtime_error(std::string(name) + ": leading column stale");
      if (s.of_col[r.leading] != static_cast<int32_t>(i))
        throw std::runtime_error(std::string(name) + ": pivot map stale");
      for (size_t j = 0; j < s.rows.size(); ++j)
        if (j != i && s.rows[j].support.get(r.leading))
          throw std::runtime_error(std::string(name) + ": column not exclusive");
    }
  };
  check_sector(xs_, "x sector");
  check_sector(zs_, "z sector");
  for (const Row& x : xs_.rows)
    for (const Row& z : zs_.rows)
      if (x.support.dot(z.support))
        throw std::runtime_error("generators do not commute");
}

namespace {

// Shared instruction walk; measurement support vectors are built at the
// simulator width (the bell register is wider than the circuit).
void run_circuit(StabSim& sim, const Circuit& c) {
  using K = Instruction::Kind;
  for (const Instruction& ins : c.instructions()) {
    switch (ins.kind) {
      case K::Mpp: {
        bool has_x = false, has_z = false;
        BitVec sup(sim.width());
        for (size_t i = 0; i < ins.qubits.size(); ++i) {
          if (ins.paulis[i] == Pauli::X) has_x = true;
          else if (ins.paulis[i] == Pauli::Z) has_z = true;
          else throw std::runtime_error("Y factors are outside the CSS engine");
          sup.set(ins.qubits[i], true);
        }
        if (has_x && has_z)
          throw std::runtime_error("mixed X/Z products are outside the CSS engine");
        sim.measure(sup, has_x);
        break;
      }
      case K::MeasureZ:
      case K::MeasureX:
        for (uint32_t q : ins.qubits) {
          BitVec sup(sim.width());
          sup.set(q, true);
          sim.measure(sup, ins.kind == K::MeasureX);
        }
        break;
      case K::ResetZ:
      case K::ResetX:
        for (uint32_t q : ins.qubits) sim.reset(q, ins.kind == K::ResetX);
        break;
      case K::Cx:
        for (size_t i = 0; i + 1 < ins.qubits.size(); i += 2)
          sim.apply_cx(ins.qubits[i], ins.qubits[i + 1]);
        break;
      case K::Tick:
      case K::Detector:
      case K::Observable:
        break;
    }
  }
}

BitVec slice(const BitVec& v, size_t from, size_t len) {
  BitVec out(len);
  for (size_t i = 0; i < len; ++i)
    if (v.get(from + i)) out.set(i, true);
  return out;
}

}  // namespace

SimResult simulate_circuit(const Circuit& c, const OutcomePolicy& policy,
                           bool track_tags) {
  StabSim sim = StabSim::mixed_state(c.num_qubits(), track_tags, c.count_records());
  sim.set_policy(policy);
  run_circuit(sim, c);
  return {sim.outcomes(), sim.deterministic_flags(), sim.relations()};
}

BellExtract bell_extract(const Circuit& c) {
  size_t n = c.num_qubits();
  StabSim sim = StabSim::bell_state(n, false, c.count_records());
  OutcomePolicy policy;
  policy.seed = 0x5747;
  sim.set_policy(policy);
  run_circuit(sim, c);

  std::vector<size_t> ref_first;
  for (size_t j = 0; j < n; ++j) ref_first.push_back(n + j);

  BellExtract out;
  out.n = n;

  // Per sector: with reference columns eliminated first, rows whose pivot
  // lands on the system carry no reference support at all — they are the
  // reference-free subgroup, i.e. the ISG.  The logical classes are the
  // system parts of the remaining rows taken modulo that subgroup.
  struct SectorSplit {
    std::vector<BitVec> isg;         // system supports, echelonized
    std::vector<BitVec> candidates;  // logical class representatives
  };
  auto split = [&](const std::vector<StabSim::Row>& rows) {
    BitMatrix m(rows.size(), 2 * n);
    for (size_t i = 0; i < rows.size(); ++i) m.set_row(i, rows[i].support);
    RrefResult rr = rref_rank(m, ref_first);

    SectorSplit sp;
    std::vector<int32_t> of_col(n, -1);
    for (size_t i = 0; i < rr.rank; ++i) {
      if (rr.pivots[i] >= n) continue;
      BitVec row = rr.reduced.row(i);
      if (slice(row, n, n).any())
        throw std::runtime_error("internal: system-pivot row touches the reference");
      BitVec sys = slice(row, 0, n);
      of_col[sys.first_set()] = static_cast<int32_t>(sp.isg.size());
      sp.isg.push_back(std::move(sys));
    }
    // Rows in echelon order have distinct leading system columns, so the
    // ISG list above is already a valid echelon for reduction.
    auto mod_isg = [&](BitVec v) {
      while (v.any()) {
        int32_t r = of_col[v.first_set()];
        if (r < 0) break;
        v.xor_in(sp.isg[static_cast<size_t>(r)]);
      }
      return v;
    };
    std::vector<int32_t> cand_col(n, -1);
    for (size_t i = 0; i < rr.rank; ++i) {
      if (rr.pivots[i] < n) continue;
      BitVec v = mod_isg(slice(rr.reduced.row(i), 0, n));
      // Reduce against candidates found so far; interleave ISG reduction
      // since candidate sums may re-enter pivot columns.
      while (v.any()) {
        int32_t r = cand_col[v.first_set()];
        if (r < 0) break;
        v.xor_in(sp.candidates[static_cast<size_t>(r)]);
        v = mod_isg(std::move(v));
      }
      if (!v.any()) continue;
      cand_col[v.first_set()] = static_cast<int32_t>(sp.candidates.size());
      sp.candidates.push_back(std::move(v));
    }
    return sp;
  };

  SectorSplit sx = split(sim.x_rows());
  SectorSplit sz = split(sim.z_rows());

  for (const BitVec& v : sx.isg) {
    PauliString p(n);
    p.x = v;
    out.isg.push_back(std::move(p));
  }
  for (const BitVec& v : sz.isg) {
    PauliString p(n);
    p.z = v;
    out.isg.push_back(std::move(p));
  }

  size_t k = n - sx.isg.size() - sz.isg.size();
  out.k = k;
  if (sx.candidates.size() != k || sz.candidates.size() != k)
    throw std::runtime_error("internal: logical pair count mismatch");
  if (k == 0) return out;

  // Canonical pairing: invert the anticommutation matrix between the X-like
  // and Z-like candidates and recombine the Z side so pair i anticommutes
  // exactly with pair i.
  BitMatrix pmat(k, k);
  for (size_t i = 0; i < k; ++i)
    for (size_t j = 0; j < k; ++j)
      if (sx.candidates[i].dot(sz.candidates[j])) pmat.set(i, j, true);
  // Invert via [P | I] elimination.
  BitMatrix aug(k, 2 * k);
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = 0; j < k; ++j)
      if (pmat.get(i, j)) aug.set(i, j, true);
    aug.set(i, k + i, true);
  }
  RrefResult ar = rref_rank(aug);
  if (ar.rank < k || ar.pivots[k - 1] >= k)
    throw std::runtime_error("internal: logical pairing is degenerate");
  BitMatrix inv(k, k);
  for (size_t i = 0; i < k; ++i)
    for (size_t j = 0; j < k; ++j)
      if (ar.reduced.get(i, k + j)) inv.set(i, j, true);

  for (size_t i = 0; i < k; ++i) {
    LogicalPair pair;
    pair.x_like = PauliString(n);
    pair.x_like.x = sx.candidates[i];
    pair.z_like = PauliString(n);
    // z'_i = sum_j inv[j][i] * z_j  so that <x_i, z'_j> = delta_ij.
    for (size_t j = 0; j < k; ++j)
      if (inv.get(j, i)) pair.z_like.z.xor_in(sz.candidates[j]);
    out.pairs.push_back(std::move(pair));
  }
  return out;
}

void conjugate_cx(PauliString& p, uint32_t control, uint32_t target) {
  if (p.x.get(control)) p.x.flip(target);
  if (p.z.get(target)) p.z.flip(control);
}

namespace {

// Echelon basis of the x- (or z-) supports of pure-sector Pauli strings,
// for membership tests during the embedded reduction.
struct SupportSpan {
  std::vector<BitVec> rows;  // echelonized
  std::vector<int32_t> of_col;

  explicit SupportSpan(size_t width) : of_col(width, -1) {}
  void add(BitVec v) {
    while (v.any()) {
      size_t lead = v.first_set();
      int32_t r = of_col[lead];
      if (r < 0) {
        of_col[lead] = static_cast<int32_t>(rows.size());
        rows.push_back(std::move(v));
        return;
      }
      v.xor_in(rows[static_cast<size_t>(r)]);
    }
  }
  bool contains(BitVec v) const {
    while (v.any()) {
      int32_t r = of_col[v.first_set()];
      if (r < 0) return false;
      v.xor_in(rows[static_cast<size_t>(r)]);
    }
    return true;
  }
};

}  // namespace

EffectiveCode renormalize_embedded(const std::vector<PauliString>& isg,
                                   const std::vector<LogicalPair>& logicals,
                                   const std::vector<MeasuredPair>& pairs) {
  if (isg.empty()) throw std::runtime_error("empty stabilizer set");
  size_t n = isg[0].width();

  std::vector<PauliString> stabs = isg;
  std::vector<LogicalPair> logs = logicals;
  std::vector<uint8_t> removed(n, 0);

  for (const MeasuredPair& mp : pairs) {
    if (mp.q1 >= n || mp.q2 >= n || mp.q1 == mp.q2)
      throw std::runtime_error("bad measured pair");
    if (removed[mp.q1] || removed[mp.q2])
      throw std::runtime_error("measured pair touches an already-fixed qubit");
    // The pair operator must be a current stabilizer.
    SupportSpan span(n);
    for (const PauliString& s : stabs) {
      const BitVec& part = mp.x_type ? s.x : s.z;
      if (part.any()) span.add(part);
    }
    BitVec op(n);
    op.set(mp.q1, true);
    op.set(mp.q2, true);
    if (!span.contains(op))
      throw std::runtime_error("measured pair is not in the stabilizer group");

    for (PauliString& s : stabs) conjugate_cx(s, mp.q1, mp.q2);
    for (LogicalPair& lp : logs) {
      conjugate_cx(lp.x_like, mp.q1, mp.q2);
      conjugate_cx(lp.z_like, mp.q1, mp.q2);
    }
    // XX collapses onto the control, ZZ onto the target.
    removed[mp.x_type ? mp.q1 : mp.q2] = 1;
  }

  EffectiveCode out;
  std::vector<int32_t> new_col(n, -1);
  for (size_t q = 0; q < n; ++q) {
    if (!removed[q]) {
      new_col[q] = static_cast<int32_t>(out.kept.size());
      out.kept.push_back(static_cast<uint32_t>(q));
    }
  }
  size_t m = out.kept.size();

  auto project = [&](const PauliString& p) {
    // Components on fixed qubits are equivalent to identity modulo the
    // single-qubit stabilizers left by the fold; the opposite component
    // would anticommute with them and cannot appear.
    PauliString q(m);
    for (size_t c = 0; c < m; ++c) {
      if (p.x.get(out.kept[c])) q.x.set(c, true);
      if (p.z.get(out.kept[c])) q.z.set(c, true);
    }
    return q;
  };
  // Commutation with the single-qubit stabilizers guarantees the dropped
  // components are only of the fixed type; verify.
  for (const MeasuredPair& mp : pairs) {
    uint32_t q = mp.x_type ? mp.q1 : mp.q2;
    for (const PauliString& s : stabs)
      if ((mp.x_type ? s.z : s.x).get(q))
        throw std::runtime_error("internal: element anticommutes with a fixed qubit");
    for (const LogicalPair& lp : logs)
      if ((mp.x_type ? lp.x_like.z : lp.x_like.x).get(q) ||
          (mp.x_type ? lp.z_like.z : lp.z_like.x).get(q))
        throw std::runtime_error("internal: logical anticommutes with a fixed qubit");
  }

  // Re-reduce the projected stabilizers to an independent basis.
  BitMatrix mat(stabs.size(), 2 * m);
  size_t nrows = 0;
  for (const PauliString& s : stabs) {
    PauliString q = project(s);
    if (q.identity()) continue;
    BitVec row(2 * m);
    for (size_t c = 0; c < m; ++c) {
      if (q.x.get(c)) row.set(c, true);
      if (q.z.get(c)) row.set(m + c, true);
    }
    mat.set_row(nrows++, row);
  }
  BitMatrix trimmed(nrows, 2 * m);
  for (size_t i = 0; i < nrows; ++i) trimmed.set_row(i, mat.row(i));
  RrefResult rr = rref_rank(trimmed);
  for (size_t i = 0; i < rr.rank; ++i) {
    BitVec row = rr.reduced.row(i);
    PauliString s(m);
    for (size_t c = 0; c < m; ++c) {
      if (row.get(c)) s.x.set(c, true);
      if (row.get(m + c)) s.z.set(c, true);
    }
    out.stabs.push_back(std::move(s));
  }

  for (const LogicalPair& lp : logs)
    out.pairs.push_back({project(lp.x_like), project(lp.z_like)});

  out.n = m;
  out.k = logs.size();
  if (out.stabs.size() + out.k != out.n)
    throw std::runtime_error("internal: effective stabilizer count inconsistent");
  return out;
}

}  // namespace stairway
