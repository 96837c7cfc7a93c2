#include "dem.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "version.hpp"

namespace stairway {

namespace {

// Records produced by instructions strictly before index `instr`.
size_t records_before(const Circuit& c, size_t instr) {
  size_t n = 0;
  for (size_t i = 0; i < instr; ++i) n += c.instructions()[i].record_count();
  return n;
}

}  // namespace

FaultEffect propagate_fault(const Circuit& c, const Fault& fault) {
  const auto& ops = c.instructions();
  if (fault.instr >= ops.size()) throw std::invalid_argument("fault: bad instruction index");
  const size_t n = c.num_qubits();

  PauliString frame = fault.error.width() ? fault.error : PauliString(n);
  if (frame.width() != n) throw std::invalid_argument("fault: pauli width mismatch");

  std::set<uint32_t> flips(fault.record_flips.begin(), fault.record_flips.end());
  size_t rec = records_before(c, fault.instr) + ops[fault.instr].record_count();

  for (size_t i = fault.instr + 1; i < ops.size(); ++i) {
    const Instruction& ins = ops[i];
    switch (ins.kind) {
      case Instruction::Kind::Mpp: {
        bool anti = false;
        for (size_t j = 0; j < ins.qubits.size(); ++j) {
          uint32_t q = ins.qubits[j];
          // Symplectic product of the frame with this tensor factor.
          bool fx = frame.x.get(q), fz = frame.z.get(q);
          switch (ins.paulis[j]) {
            case Pauli::X: anti ^= fz; break;
            case Pauli::Y: anti ^= fx ^ fz; break;
            case Pauli::Z: anti ^= fx; break;
          }
        }
        if (anti) flips.insert(static_cast<uint32_t>(rec));
        ++rec;
        break;
      }
      case Instruction::Kind::MeasureZ:
        for (uint32_t q : ins.qubits) {
          if (frame.x.get(q)) flips.insert(static_cast<uint32_t>(rec));
          ++rec;
        }
        break;
      case Instruction::Kind::MeasureX:
        for (uint32_t q : ins.qubits) {
          if (frame.z.get(q)) flips.insert(static_cast<uint32_t>(rec));
          ++rec;
        }
        break;
      case Instruction::Kind::ResetZ:
      case Instruction::Kind::ResetX:
        for (uint32_t q : ins.qubits) {
          frame.x.set(q, false);
          frame.z.set(q, false);
        }
        break;
      case Instruction::Kind::Cx:
        for (size_t j = 0; j + 1 < ins.qubits.size(); j += 2)
          conjugate_cx(frame, ins.qubits[j], ins.qubits[j + 1]);
        break;
      case Instruction::Kind::Tick:
      case Instruction::Kind::Detector:
      case Instruction::Kind::Observable:
        break;
    }
  }
  FaultEffect out;
  out.residual = std::move(frame);
  out.flipped_records.assign(flips.begin(), flips.end());
  return out;
}

namespace {

// Symptom of a set of flipped records against resolved DETECTOR/OBSERVABLE
// parities: indices whose record sets meet the flips an odd number of times.
struct SymptomIndex {
  // record -> detector / observable indices containing it
  std::vector<std::vector<uint32_t>> det_of_rec, obs_of_rec;
  size_t n_det = 0, n_obs = 0;

  SymptomIndex(const Circuit& c) {
    ResolvedRefs refs = resolve_refs(c);
    n_det = refs.detectors.size();
    n_obs = refs.observables.size();
    det_of_rec.resize(c.count_records());
    obs_of_rec.resize(c.count_records());
    for (uint32_t d = 0; d < refs.detectors.size(); ++d)
      for (uint32_t r : refs.detectors[d]) det_of_rec[r].push_back(d);
    for (uint32_t o = 0; o < refs.observables.size(); ++o)
      for (uint32_t r : refs.observables[o]) obs_of_rec[r].push_back(o);
  }

  void fill(const std::vector<uint32_t>& flipped_records,
            std::vector<uint32_t>& dets, std::vector<uint32_t>& obs) const {
    std::map<uint32_t, int> dc, oc;
    for (uint32_t r : flipped_records) {
      for (uint32_t d : det_of_rec[r]) ++dc[d];
      for (uint32_t o : obs_of_rec[r]) ++oc[o];
    }
    for (auto& [d, cnt] : dc)
      if (cnt & 1) dets.push_back(d);
    for (auto& [o, cnt] : oc)
      if (cnt & 1) obs.push_back(o);
  }
};

std::vector<uint32_t> xor_sorted(const std::vector<uint32_t>& a,
                                 const std::vector<uint32_t>& b) {
  std::vector<uint32_t> out;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                std::back_inserter(out));
  return out;
}

}  // namespace

std::vector<Em3Atom> em3_atoms(const Circuit& c, size_t instr, double p,
                               Em3Convention conv) {
  const Instruction& ins = c.instructions().at(instr);
  if (ins.kind != Instruction::Kind::Mpp || ins.qubits.size() != 2)
    throw std::invalid_argument("em3_atoms: not a pairwise measurement");
  const uint32_t qa = ins.qubits[0], qb = ins.qubits[1];
  const size_t n = c.num_qubits();
  SymptomIndex idx(c);

  // Basis symptoms: X/Z on each qubit (applied after the MPP) and the record
  // flip; every combination is a XOR of these five.
  auto pauli_symptom = [&](uint32_t q, bool x_part, bool z_part) {
    Fault f;
    f.instr = instr;
    f.error = PauliString(n);
    f.error.x.set(q, x_part);
    f.error.z.set(q, z_part);
    FaultEffect eff = propagate_fault(c, f);
    std::vector<uint32_t> d, o;
    idx.fill(eff.flipped_records, d, o);
    return std::pair{d, o};
  };
  auto [dxa, oxa] = pauli_symptom(qa, true, false);
  auto [dza, oza] = pauli_symptom(qa, false, true);
  auto [dxb, oxb] = pauli_symptom(qb, true, false);
  auto [dzb, ozb] = pauli_symptom(qb, false, true);
  uint32_t own = static_cast<uint32_t>(records_before(c, instr));
  std::vector<uint32_t> dfl, ofl;
  idx.fill({own}, dfl, ofl);

  const double atom_p = conv == Em3Convention::kUniform32 ? p / 32 : p / 31;
  std::vector<Em3Atom> out;
  out.reserve(31);
  for (uint8_t pa = 0; pa < 4; ++pa)
    for (uint8_t pb = 0; pb < 4; ++pb)
      for (int fl = 0; fl < 2; ++fl) {
        if (pa == 0 && pb == 0 && fl == 0) continue;
        Em3Atom a;
        a.instr = instr;
        a.pauli_a = pa;
        a.pauli_b = pb;
        a.flip = fl;
        a.p = atom_p;
        // Pauli code -> (x,z): X=(1,0), Y=(1,1), Z=(0,1).
        if (pa == 1 || pa == 2) {
          a.detectors = xor_sorted(a.detectors, dxa);
          a.observables = xor_sorted(a.observables, oxa);
        }
        if (pa == 2 || pa == 3) {
          a.detectors = xor_sorted(a.detectors, dza);
          a.observables = xor_sorted(a.observables, oza);
        }
        if (pb == 1 || pb == 2) {
          a.detectors = xor_sorted(a.detectors, dxb);
          a.observables = xor_sorted(a.observables, oxb);
        }
        if (pb == 2 || pb == 3) {
          a.detectors = xor_sorted(a.detectors, dzb);
          a.observables = xor_sorted(a.observables, ozb);
        }
        if (fl) {
          a.detectors = xor_sorted(a.detectors, dfl);
          a.observables = xor_sorted(a.observables, ofl);
        }
        out.push_back(std::move(a));
      }
  return out;
}

DetectorErrorModel build_dem(const Circuit& c, double p, Em3Convention conv) {
  if (c.count_observables() == 0)
    throw std::invalid_argument("build_dem: circuit declares no observables");
  DetectorErrorModel dem;
  dem.n_detectors = c.count_detectors();
  dem.n_observables = c.count_observables();

  std::map<std::pair<std::vector<uint32_t>, std::vector<uint32_t>>, double> acc;
  const auto& ops = c.instructions();
  for (size_t i = 0; i < ops.size(); ++i) {
    if (ops[i].kind != Instruction::Kind::Mpp || ops[i].qubits.size() != 2)
      continue;
    for (Em3Atom& a : em3_atoms(c, i, p, conv)) {
      double& q = acc[{std::move(a.detectors), std::move(a.observables)}];
      q = q * (1 - a.p) + a.p * (1 - q);
    }
  }
  for (auto& [key, prob] : acc) {
    DemMechanism m;
    m.p = prob;
    m.detectors = key.first;
    m.observables = key.second;
    dem.mechanisms.push_back(std::move(m));
  }
  return dem;
}

std::string dem_to_text(const DetectorErrorModel& dem) {
  std::string out = kDemFormat;
  out += '\n';
  // Declare detectors untouched by any mechanism so counts survive parsing.
  std::vector<bool> touched(dem.n_detectors, false);
  for (const auto& m : dem.mechanisms)
    for (uint32_t d : m.detectors) touched[d] = true;
  for (size_t d = 0; d < dem.n_detectors; ++d)
    if (!touched[d]) out += "detector D" + std::to_string(d) + "\n";
  if (dem.n_observables) {
    out += "observables " + std::to_string(dem.n_observables) + "\n";
  }
  char buf[64];
  for (const auto& m : dem.mechanisms) {
    std::snprintf(buf, sizeof buf, "error(%.17g)", m.p);
    out += buf;
    for (uint32_t d : m.detectors) out += " D" + std::to_string(d);
    for (uint32_t o : m.observables) out += " L" + std::to_string(o);
    out += '\n';
  }
  return out;
}

DetectorErrorModel dem_from_text(std::string_view text) {
  DetectorErrorModel dem;
  int64_t max_det = -1, max_obs = -1;
  size_t pos = 0, line_no = 0;
  auto fail = [&](const std::string& why) {
    throw std::runtime_error("dem line " + std::to_string(line_no) + ": " + why);
  };
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string line(text.substr(
        pos, eol == std::string_view::npos ? text.size() - pos : eol - pos));
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;
    if (tok[0] == '#') {
      if (line.find("stairway-dem") != std::string::npos &&
          line.find("stairway-dem v1") == std::string::npos)
        fail("unsupported dem format version");
      continue;
    }
    if (tok == "detector") {
      std::string d;
      if (!(ss >> d) || d.size() < 2 || d[0] != 'D') fail("bad detector declaration");
      max_det = std::max<int64_t>(max_det, std::stoll(d.substr(1)));
      continue;
    }
    if (tok == "observables") {
      int64_t n;
      if (!(ss >> n) || n < 0) fail("bad observables count");
      max_obs = std::max(max_obs, n - 1);
      continue;
    }
    if (tok.rfind("error(", 0) != 0 || tok.back() != ')')
      fail("expected error(<p>)");
    DemMechanism m;
    try {
      m.p = std::stod(tok.substr(6, tok.size() - 7));
    } catch (const std::exception&) {
      fail("bad probability");
    }
    if (!(m.p > 0 && m.p < 1)) fail("probability out of (0,1)");
    std::string t;
    while (ss >> t) {
      if (t.size() < 2 || (t[0] != 'D' && t[0] != 'L')) fail("bad symptom token");
      int64_t v = std::stoll(t.substr(1));
      if (t[0] == 'D') {
        m.detectors.push_back(static_cast<uint32_t>(v));
        max_det = std::max(max_det, v);
      } else {
        m.observables.push_back(static_cast<uint32_t>(v));
        max_obs = std::max(max_obs, v);
      }
    }
    std::sort(m.detectors.begin(), m.detectors.end());
    std::sort(m.observables.begin(), m.observables.end());
    dem.mechanisms.push_back(std::move(m));
  }
  dem.n_detectors = static_cast<size_t>(max_det + 1);
  dem.n_observables = static_cast<size_t>(max_obs + 1);
  return dem;
}

DetectorErrorModel load_dem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return dem_from_text(ss.str());
}

void save_dem(const DetectorErrorModel& dem, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << dem_to_text(dem);
}

}  // namespace stairway
