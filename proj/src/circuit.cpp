#include "circuit.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "version.hpp"

namespace stairway {

namespace {

[[noreturn]] void fail(size_t line_no, const std::string& what) {
  throw std::runtime_error("circuit parse error at line " +
                           std::to_string(line_no) + ": " + what);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

uint64_t parse_uint(std::string_view tok, size_t line_no) {
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    fail(line_no, "expected unsigned integer, got '" + std::string(tok) + "'");
  return v;
}

// rec[-k] with k >= 1.
int64_t parse_rec(std::string_view tok, size_t line_no) {
  if (tok.size() < 7 || tok.substr(0, 5) != "rec[-" || tok.back() != ']')
    fail(line_no, "expected rec[-k], got '" + std::string(tok) + "'");
  uint64_t k = parse_uint(tok.substr(5, tok.size() - 6), line_no);
  if (k == 0) fail(line_no, "rec[-0] is not a valid record reference");
  return -static_cast<int64_t>(k);
}

Pauli parse_pauli(char c, size_t line_no) {
  switch (c) {
    case 'X': return Pauli::X;
    case 'Y': return Pauli::Y;
    case 'Z': return Pauli::Z;
    default: fail(line_no, std::string("unknown Pauli letter '") + c + "'");
  }
}

}  // namespace

char pauli_char(Pauli p) {
  switch (p) {
    case Pauli::X: return 'X';
    case Pauli::Y: return 'Y';
    case Pauli::Z: return 'Z';
  }
  return '?';
}

void Circuit::append(Instruction ins) {
  using K = Instruction::Kind;
  if (n_ > 0 && ins.kind != K::Detector && ins.kind != K::Observable) {
    for (uint32_t q : ins.qubits)
      if (q >= n_)
        throw std::runtime_error("qubit " + std::to_string(q) +
                                 " out of range (QUBITS " + std::to_string(n_) +
                                 ")");
  }
  if (ins.kind == K::Detector || ins.kind == K::Observable) {
    int64_t have = static_cast<int64_t>(count_records());
    for (int64_t r : ins.recs)
      if (r >= 0 || -r > have)
        throw std::runtime_error("record offset " + std::to_string(r) +
                                 " out of range (have " + std::to_string(have) +
                                 " records)");
  }
  ops_.push_back(std::move(ins));
}

void Circuit::mpp(std::vector<std::pair<uint32_t, Pauli>> factors) {
  if (factors.empty()) throw std::runtime_error("MPP needs at least 1 factor");
  std::sort(factors.begin(), factors.end());
  for (size_t i = 1; i < factors.size(); ++i)
    if (factors[i].first == factors[i - 1].first)
      throw std::runtime_error("MPP repeats qubit " +
                               std::to_string(factors[i].first));
  Instruction ins;
  ins.kind = Instruction::Kind::Mpp;
  for (auto& [q, p] : factors) {
    ins.qubits.push_back(q);
    ins.paulis.push_back(p);
  }
  append(std::move(ins));
}

void Circuit::reset_z(std::vector<uint32_t> qs) {
  append({Instruction::Kind::ResetZ, std::move(qs), {}, {}, 0});
}
void Circuit::reset_x(std::vector<uint32_t> qs) {
  append({Instruction::Kind::ResetX, std::move(qs), {}, {}, 0});
}
void Circuit::measure_z(std::vector<uint32_t> qs) {
  append({Instruction::Kind::MeasureZ, std::move(qs), {}, {}, 0});
}
void Circuit::measure_x(std::vector<uint32_t> qs) {
  append({Instruction::Kind::MeasureX, std::move(qs), {}, {}, 0});
}
void Circuit::cx(uint32_t control, uint32_t target) {
  if (control == target) throw std::runtime_error("CX control == target");
  append({Instruction::Kind::Cx, {control, target}, {}, {}, 0});
}
void Circuit::tick() { append({Instruction::Kind::Tick, {}, {}, {}, 0}); }
void Circuit::detector(std::vector<int64_t> rec_offsets) {
  append({Instruction::Kind::Detector, {}, {}, std::move(rec_offsets), 0});
}
void Circuit::observable(uint32_t index, std::vector<int64_t> rec_offsets) {
  append({Instruction::Kind::Observable, {}, {}, std::move(rec_offsets), index});
}

size_t Circuit::count_records() const {
  size_t n = 0;
  for (const auto& ins : ops_) n += ins.record_count();
  return n;
}

size_t Circuit::count_detectors() const {
  size_t n = 0;
  for (const auto& ins : ops_)
    if (ins.kind == Instruction::Kind::Detector) ++n;
  return n;
}

size_t Circuit::count_observables() const {
  size_t n = 0;
  for (const auto& ins : ops_)
    if (ins.kind == Instruction::Kind::Observable)
      n = std::max(n, static_cast<size_t>(ins.index) + 1);
  return n;
}

std::string Circuit::to_text() const {
  std::ostringstream out;
  out << kCircuitFormat << "\n";
  out << "QUBITS " << n_ << "\n";
  using K = Instruction::Kind;
  for (const auto& ins : ops_) {
    switch (ins.kind) {
      case K::Mpp: {
        out << "MPP ";
        for (size_t i = 0; i < ins.qubits.size(); ++i) {
          if (i) out << '*';
          out << pauli_char(ins.paulis[i]) << ins.qubits[i];
        }
        break;
      }
      case K::ResetZ:
      case K::ResetX:
      case K::MeasureZ:
      case K::MeasureX:
      case K::Cx: {
        static const char* names[] = {"", "R", "RX", "M", "MX", "CX"};
        out << names[static_cast<int>(ins.kind)];
        for (uint32_t q : ins.qubits) out << ' ' << q;
        break;
      }
      case K::Tick:
        out << "TICK";
        break;
      case K::Detector:
      case K::Observable: {
        if (ins.kind == K::Detector)
          out << "DETECTOR";
        else
          out << "OBSERVABLE(" << ins.index << ")";
        for (int64_t r : ins.recs) out << " rec[" << r << "]";
        break;
      }
    }
    out << "\n";
  }
  return out.str();
}

Circuit Circuit::from_text(std::string_view text) {
  Circuit c;
  bool saw_qubits = false;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks[0][0] == '#') {
      // Comment. A format header is validated if present.
      if (toks.size() >= 2 && toks[1] == "stairway-circuit" &&
          line.find(kCircuitFormat + 2) == std::string_view::npos)
        fail(line_no, "unsupported circuit format version");
      continue;
    }

    std::string_view op = toks[0];
    try {
      if (op == "QUBITS") {
        if (toks.size() != 2) fail(line_no, "QUBITS takes one argument");
        if (saw_qubits) fail(line_no, "duplicate QUBITS line");
        c.n_ = static_cast<uint32_t>(parse_uint(toks[1], line_no));
        saw_qubits = true;
      } else if (op == "MPP") {
        if (toks.size() != 2) fail(line_no, "MPP takes one product");
        Instruction ins;
        ins.kind = Instruction::Kind::Mpp;
        std::string_view prod = toks[1];
        size_t i = 0;
        while (i < prod.size()) {
          size_t j = prod.find('*', i);
          std::string_view f =
              prod.substr(i, j == std::string_view::npos ? prod.size() - i
                                                         : j - i);
          if (f.size() < 2) fail(line_no, "bad MPP factor");
          ins.paulis.push_back(parse_pauli(f[0], line_no));
          ins.qubits.push_back(
              static_cast<uint32_t>(parse_uint(f.substr(1), line_no)));
          i = j == std::string_view::npos ? prod.size() : j + 1;
        }
        for (size_t a = 0; a < ins.qubits.size(); ++a)
          for (size_t b = a + 1; b < ins.qubits.size(); ++b)
            if (ins.qubits[a] == ins.qubits[b])
              fail(line_no, "MPP repeats qubit");
        c.append(std::move(ins));
      } else if (op == "R" || op == "RX" || op == "M" || op == "MX" ||
                 op == "CX") {
        Instruction ins;
        ins.kind = op == "R"    ? Instruction::Kind::ResetZ
                   : op == "RX" ? Instruction::Kind::ResetX
                   : op == "M"  ? Instruction::Kind::MeasureZ
                   : op == "MX" ? Instruction::Kind::MeasureX
                                : Instruction::Kind::Cx;
        for (size_t i = 1; i < toks.size(); ++i)
          ins.qubits.push_back(
              static_cast<uint32_t>(parse_uint(toks[i], line_no)));
        if (ins.qubits.empty()) fail(line_no, "instruction needs targets");
        if (ins.kind == Instruction::Kind::Cx && ins.qubits.size() % 2 != 0)
          fail(line_no, "CX takes control/target pairs");
        c.append(std::move(ins));
      } else if (op == "TICK") {
        if (toks.size() != 1) fail(line_no, "TICK takes no arguments");
        c.tick();
      } else if (op == "DETECTOR" || op == "OBSERVABLE" ||
                 op.substr(0, 11) == "OBSERVABLE(") {
        Instruction ins;
        if (op == "DETECTOR") {
          ins.kind = Instruction::Kind::Detector;
        } else {
          if (op.size() < 13 || op.substr(0, 11) != "OBSERVABLE(" ||
              op.back() != ')')
            fail(line_no, "expected OBSERVABLE(k)");
          ins.kind = Instruction::Kind::Observable;
          ins.index = static_cast<uint32_t>(
              parse_uint(op.substr(11, op.size() - 12), line_no));
        }
        for (size_t i = 1; i < toks.size(); ++i)
          ins.recs.push_back(parse_rec(toks[i], line_no));
        c.append(std::move(ins));
      } else {
        fail(line_no, "unknown instruction '" + std::string(op) + "'");
      }
    } catch (const std::runtime_error& e) {
      // append() throws without line info; rewrap uniformly.
      std::string msg = e.what();
      if (msg.find("parse error") == std::string::npos) fail(line_no, msg);
      throw;
    }
  }
  return c;
}

Circuit Circuit::read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open circuit file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return from_text(buf.str());
}

void Circuit::write_file(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write circuit file: " + path);
  f << to_text();
}

ResolvedRefs resolve_refs(const Circuit& c) {
  ResolvedRefs out;
  out.observables.resize(c.count_observables());
  size_t records = 0;
  for (const auto& ins : c.instructions()) {
    if (ins.kind == Instruction::Kind::Detector ||
        ins.kind == Instruction::Kind::Observable) {
      std::vector<uint32_t> abs;
      abs.reserve(ins.recs.size());
      for (int64_t r : ins.recs)
        abs.push_back(static_cast<uint32_t>(static_cast<int64_t>(records) + r));
      std::sort(abs.begin(), abs.end());
      if (ins.kind == Instruction::Kind::Detector) {
        out.detectors.push_back(std::move(abs));
      } else {
        auto& tgt = out.observables[ins.index];
        tgt.insert(tgt.end(), abs.begin(), abs.end());
        std::sort(tgt.begin(), tgt.end());
      }
    }
    records += ins.record_count();
  }
  return out;
}

}  // namespace stairway
