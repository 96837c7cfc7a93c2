#include "group2block.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace stairway {

size_t AbelianGroupSpec::order() const {
  size_t n = 1;
  for (uint32_t d : factors) {
    if (d == 0) throw std::runtime_error("group factor of order 0");
    n *= d;
  }
  return n;
}

std::vector<int64_t> AbelianGroupSpec::normalize(
    const std::vector<int64_t>& a) const {
  if (a.size() != factors.size())
    throw std::runtime_error("group element has wrong number of exponents");
  std::vector<int64_t> out(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    int64_t d = factors[i];
    out[i] = ((a[i] % d) + d) % d;
  }
  return out;
}

size_t AbelianGroupSpec::index_of(const std::vector<int64_t>& elem) const {
  std::vector<int64_t> e = normalize(elem);
  size_t idx = 0;
  for (size_t i = factors.size(); i-- > 0;)
    idx = idx * factors[i] + static_cast<size_t>(e[i]);
  return idx;
}

std::vector<int64_t> AbelianGroupSpec::element_at(size_t idx) const {
  std::vector<int64_t> e(factors.size());
  for (size_t i = 0; i < factors.size(); ++i) {
    e[i] = static_cast<int64_t>(idx % factors[i]);
    idx /= factors[i];
  }
  if (idx != 0) throw std::runtime_error("element index out of range");
  return e;
}

std::vector<int64_t> AbelianGroupSpec::add(const std::vector<int64_t>& a,
                                           const std::vector<int64_t>& b) const {
  if (a.size() != b.size() || a.size() != factors.size())
    throw std::runtime_error("group element size mismatch");
  std::vector<int64_t> out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return normalize(out);
}

std::vector<int64_t> AbelianGroupSpec::neg(const std::vector<int64_t>& a) const {
  std::vector<int64_t> out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = -a[i];
  return normalize(out);
}

BitMatrix group_perm_matrix(const AbelianGroupSpec& g,
                            const std::vector<int64_t>& elem) {
  size_t n = g.order();
  BitMatrix p(n, n);
  for (size_t h = 0; h < n; ++h)
    p.set(g.index_of(g.add(elem, g.element_at(h))), h, true);
  return p;
}

TwoBlockCode build_2bga(const AbelianGroupSpec& g,
                        const std::vector<std::vector<int64_t>>& a_terms,
                        const std::vector<std::vector<int64_t>>& b_terms) {
  size_t n = g.order();
  TwoBlockCode code;
  code.group = g;
  code.a = BitMatrix(n, n);
  code.b = BitMatrix(n, n);
  auto accumulate = [&](BitMatrix& m, const std::vector<std::vector<int64_t>>& terms,
                        const char* name) {
    for (const auto& t : terms) {
      BitMatrix p = group_perm_matrix(g, t);
      for (size_t r = 0; r < n; ++r) {
        BitVec v = m.row(r);
        v.xor_in(p.row(r));
        m.set_row(r, v);
      }
    }
    // Over GF(2) a repeated term silently vanishes; treat that as a typo.
    for (size_t r = 0; r < n; ++r)
      if (m.row_weight(r) != terms.size())
        throw std::runtime_error(std::string("duplicate term in block ") + name);
  };
  accumulate(code.a, a_terms, "a");
  accumulate(code.b, b_terms, "b");

  code.hx = BitMatrix(n, 2 * n);
  code.hz = BitMatrix(n, 2 * n);
  BitMatrix at = code.a.transposed();
  BitMatrix bt = code.b.transposed();
  for (size_t r = 0; r < n; ++r) {
    for (size_t c = 0; c < n; ++c) {
      if (code.a.get(r, c)) code.hx.set(r, c, true);
      if (code.b.get(r, c)) code.hx.set(r, n + c, true);
      if (bt.get(r, c)) code.hz.set(r, c, true);
      if (at.get(r, c)) code.hz.set(r, n + c, true);
    }
  }
  code_params_nk(code.hx, code.hz);  // asserts orthogonality
  return code;
}

CodeParams code_params_nk(const BitMatrix& hx, const BitMatrix& hz) {
  if (hx.cols() != hz.cols())
    throw std::runtime_error("hx/hz column count mismatch");
  // CSS condition: every X row commutes with every Z row.
  for (size_t r = 0; r < hx.rows(); ++r) {
    BitVec x = hx.row(r);
    for (size_t s = 0; s < hz.rows(); ++s)
      if (x.dot(hz.row(s)))
        throw std::runtime_error("hx and hz are not orthogonal");
  }
  size_t n = hx.cols();
  size_t k = n - rref_rank(hx).rank - rref_rank(hz).rank;
  return {n, k};
}

TwoBlockSpec twoblock_spec_from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  TwoBlockSpec spec;
  spec.group.factors = j.at("factors").get<std::vector<uint32_t>>();
  spec.a_terms = j.at("a").get<std::vector<std::vector<int64_t>>>();
  spec.b_terms = j.at("b").get<std::vector<std::vector<int64_t>>>();
  return spec;
}

TwoBlockSpec load_twoblock_spec(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open code file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return twoblock_spec_from_json_text(buf.str());
}

std::string twoblock_spec_to_json_text(const TwoBlockSpec& spec) {
  nlohmann::ordered_json j;
  j["format"] = "stairway-code v1";
  j["factors"] = spec.group.factors;
  j["a"] = spec.a_terms;
  j["b"] = spec.b_terms;
  return j.dump(2) + "\n";
}

}  // namespace stairway
