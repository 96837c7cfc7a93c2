#include "lattice.hpp"

#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace stairway {

namespace {

int64_t floor_div(int64_t a, int64_t b) {
  // b > 0 everywhere this is used
  int64_t q = a / b;
  if (a % b != 0 && a < 0) --q;
  return q;
}

IMat identity_mat(size_t n) {
  IMat m(n, IVec(n, 0));
  for (size_t i = 0; i < n; ++i) m[i][i] = 1;
  return m;
}

IVec mat_vec(const IMat& m, const IVec& v) {
  IVec out(m.size(), 0);
  for (size_t r = 0; r < m.size(); ++r)
    for (size_t c = 0; c < v.size(); ++c) out[r] += m[r][c] * v[c];
  return out;
}

}  // namespace

int64_t int_det(IMat m) {
  size_t n = m.size();
  if (n == 0) return 1;
  for (const auto& row : m)
    if (row.size() != n) throw std::runtime_error("int_det: matrix not square");
  int64_t sign = 1, prev = 1;
  for (size_t k = 0; k + 1 < n; ++k) {
    if (m[k][k] == 0) {
      size_t p = k + 1;
      while (p < n && m[p][k] == 0) ++p;
      if (p == n) return 0;
      std::swap(m[p], m[k]);
      sign = -sign;
    }
    for (size_t i = k + 1; i < n; ++i)
      for (size_t j = k + 1; j < n; ++j)
        m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
    prev = m[k][k];
  }
  return sign * m[n - 1][n - 1];
}

size_t int_rank(IMat m) {
  if (m.empty()) return 0;
  size_t rows = m.size(), cols = m[0].size(), r = 0;
  for (size_t c = 0; c < cols && r < rows; ++c) {
    size_t p = r;
    while (p < rows && m[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(m[p], m[r]);
    for (size_t i = r + 1; i < rows; ++i) {
      if (m[i][c] == 0) continue;
      int64_t g = std::gcd(m[i][c], m[r][c]);
      int64_t fi = m[r][c] / g, fr = m[i][c] / g;
      for (size_t j = 0; j < cols; ++j) m[i][j] = m[i][j] * fi - m[r][j] * fr;
    }
    ++r;
  }
  return r;
}

IVec default_time_covector(size_t dim) {
  IVec t(dim, 1);
  if (dim > 0) t[0] = 2;
  return t;
}

LatticeReport validate_lattice(const StairwayLattice& lat) {
  size_t dim = lat.dim();
  if (dim == 0) return {false, "empty time covector"};
  if (lat.periodicity.size() + 1 != dim)
    return {false, "periodicity must have dim-1 rows"};
  int64_t g = 0;
  for (int64_t v : lat.t) {
    if (v <= 0) return {false, "time covector entries must be positive"};
    g = std::gcd(g, v);
  }
  if (g != 1) return {false, "time covector entries must have gcd 1"};
  for (size_t i = 0; i < lat.periodicity.size(); ++i) {
    const IVec& p = lat.periodicity[i];
    if (p.size() != dim)
      return {false, "periodicity row " + std::to_string(i) + " has wrong length"};
    int64_t dot = 0;
    for (size_t j = 0; j < dim; ++j) dot += p[j] * lat.t[j];
    if (dot != 0)
      return {false, "periodicity row " + std::to_string(i) +
                         " not orthogonal to time covector (dot = " +
                         std::to_string(dot) + ")"};
  }
  size_t r = int_rank(lat.periodicity);
  if (r != lat.periodicity.size())
    return {false, "periodicity rows are dependent (rank " + std::to_string(r) +
                       " < " + std::to_string(lat.periodicity.size()) + ")"};
  return {};
}

CosetGeometry::CosetGeometry(const StairwayLattice& lat) {
  LatticeReport rep = validate_lattice(lat);
  if (!rep.ok) throw std::runtime_error("invalid lattice: " + rep.message);
  n_ = lat.dim();
  t_ = lat.t;

  // Unimodular column reduction: after this, t.U = (1, 0, ..., 0) and
  // v_rows_ = U^{-1}.  Columns 1..n-1 of U form a basis of ker t.
  u_cols_ = identity_mat(n_);
  v_rows_ = identity_mat(n_);
  IVec w = t_;  // invariant: w[j] = t . column_j(U)
  auto col_submul = [&](size_t j, size_t jp, int64_t q) {
    for (size_t r = 0; r < n_; ++r) u_cols_[r][j] -= q * u_cols_[r][jp];
    for (size_t c = 0; c < n_; ++c) v_rows_[jp][c] += q * v_rows_[j][c];
  };
  while (true) {
    size_t jmin = n_;
    for (size_t j = 0; j < n_; ++j)
      if (w[j] != 0 && (jmin == n_ || std::llabs(w[j]) < std::llabs(w[jmin])))
        jmin = j;
    bool done = true;
    for (size_t j = 0; j < n_; ++j) {
      if (j == jmin || w[j] == 0) continue;
      int64_t q = w[j] / w[jmin];
      w[j] -= q * w[jmin];
      col_submul(j, jmin, q);
      if (w[j] != 0) done = false;
    }
    if (done) {
      // gcd of t is 1, so the survivor is +-1
      if (w[jmin] < 0) {
        for (size_t r = 0; r < n_; ++r) u_cols_[r][jmin] = -u_cols_[r][jmin];
        for (size_t c = 0; c < n_; ++c) v_rows_[jmin][c] = -v_rows_[jmin][c];
      }
      if (jmin != 0) {
        for (size_t r = 0; r < n_; ++r) std::swap(u_cols_[r][0], u_cols_[r][jmin]);
        std::swap(v_rows_[0], v_rows_[jmin]);
      }
      break;
    }
  }

  // Periodicity rows in kernel coordinates; bring to lower-triangular HNF.
  size_t d = n_ - 1;
  IMat m(d, IVec(d, 0));
  for (size_t i = 0; i < d; ++i) {
    IVec c = coords_of(lat.periodicity[i]);
    if (c[0] != 0) throw std::runtime_error("periodicity row escaped the time=0 slice");
    for (size_t j = 0; j < d; ++j) m[i][j] = c[1 + j];
  }
  auto row_submul = [&](size_t r, size_t rp, int64_t q) {
    for (size_t j = 0; j < d; ++j) m[r][j] -= q * m[rp][j];
  };
  for (size_t col = d; col-- > 0;) {
    while (true) {
      size_t best = SIZE_MAX;
      for (size_t r = 0; r <= col; ++r)
        if (m[r][col] != 0 &&
            (best == SIZE_MAX || std::llabs(m[r][col]) < std::llabs(m[best][col])))
          best = r;
      if (best == SIZE_MAX)
        throw std::runtime_error("periodicity rows are not independent");
      bool settled = true;
      for (size_t r = 0; r <= col; ++r) {
        if (r == best || m[r][col] == 0) continue;
        row_submul(r, best, m[r][col] / m[best][col]);
        if (m[r][col] != 0) settled = false;
      }
      if (settled) {
        std::swap(m[best], m[col]);
        if (m[col][col] < 0)
          for (size_t j = 0; j < d; ++j) m[col][j] = -m[col][j];
        break;
      }
    }
  }
  for (size_t i = 1; i < d; ++i)
    for (size_t j = i; j-- > 0;) {
      int64_t q = floor_div(m[i][j], m[j][j]);
      if (q != 0) row_submul(i, j, q);
    }
  h_ = std::move(m);
  cosets_ = 1;
  for (size_t i = 0; i < d; ++i) cosets_ *= static_cast<size_t>(h_[i][i]);
}

IVec CosetGeometry::coords_of(const IVec& u) const {
  if (u.size() != n_) throw std::runtime_error("point has wrong dimension");
  return mat_vec(v_rows_, u);
}

int64_t CosetGeometry::time_of(const IVec& u) const {
  int64_t s = 0;
  for (size_t j = 0; j < n_; ++j) s += t_[j] * u[j];
  return s;
}

IVec CosetGeometry::reduce_box(IVec c) const {
  size_t d = n_ - 1;
  for (size_t i = d; i-- > 0;) {
    int64_t q = floor_div(c[i], h_[i][i]);
    if (q != 0)
      for (size_t j = 0; j <= i; ++j) c[j] -= q * h_[i][j];
  }
  return c;
}

IVec CosetGeometry::canonical(const IVec& u) const {
  IVec tc = coords_of(u);
  IVec c(tc.begin() + 1, tc.end());
  c = reduce_box(std::move(c));
  IVec full(n_);
  full[0] = tc[0];
  for (size_t i = 1; i < n_; ++i) full[i] = c[i - 1];
  IVec out(n_, 0);
  for (size_t r = 0; r < n_; ++r)
    for (size_t j = 0; j < n_; ++j) out[r] += u_cols_[r][j] * full[j];
  return out;
}

size_t CosetGeometry::index_of(const IVec& u) const {
  IVec tc = coords_of(u);
  IVec c(tc.begin() + 1, tc.end());
  c = reduce_box(std::move(c));
  size_t idx = 0, stride = 1;
  for (size_t i = 0; i < n_ - 1; ++i) {
    idx += static_cast<size_t>(c[i]) * stride;
    stride *= static_cast<size_t>(h_[i][i]);
  }
  return idx;
}

IVec CosetGeometry::rep_at(int64_t time, size_t index) const {
  if (index >= cosets_) throw std::runtime_error("coset index out of range");
  IVec full(n_);
  full[0] = time;
  for (size_t i = 0; i < n_ - 1; ++i) {
    size_t d = static_cast<size_t>(h_[i][i]);
    full[1 + i] = static_cast<int64_t>(index % d);
    index /= d;
  }
  IVec out(n_, 0);
  for (size_t r = 0; r < n_; ++r)
    for (size_t j = 0; j < n_; ++j) out[r] += u_cols_[r][j] * full[j];
  return out;
}

std::vector<HalfCell> enumerate_half_cells(const StairwayLattice& lat,
                                           int64_t t_min, int64_t t_max) {
  std::vector<HalfCell> out;
  if (t_min > t_max) return out;
  CosetGeometry geo(lat);
  for (int64_t time = t_min; time <= t_max; ++time) {
    for (size_t i = 0; i < geo.cosets_per_time(); ++i)
      out.push_back({geo.rep_at(time, i), CellKind::Z, time, i});
    // X checks at u fire one step after the Z check of the same cell.
    for (size_t i = 0; i < geo.cosets_per_time(); ++i)
      out.push_back({geo.rep_at(time - 1, i), CellKind::X, time, i});
  }
  return out;
}

size_t qubit_count(const StairwayLattice& lat, size_t w) {
  CosetGeometry geo(lat);
  return w * 2 * geo.cosets_per_time();
}

bool SearchTemplate::parity_ok() const {
  if (d1 <= 0 || d2 <= 0 || d1 % 2 != 0 || d2 % 2 != 0) return false;
  for (const auto& row : a) {
    if (row[0] < 0 || row[0] >= d1 || row[1] < 0 || row[1] >= d2) return false;
    if ((row[0] + row[1]) % 2 == 0) return false;
  }
  return true;
}

StairwayLattice lattice_from_template(const SearchTemplate& st) {
  if (!st.parity_ok())
    throw std::runtime_error("search template violates parity/range conditions");
  StairwayLattice lat;
  lat.t = default_time_covector(7);
  lat.periodicity.assign(6, IVec(7, 0));
  lat.periodicity[0][0] = -st.d1 / 2;
  lat.periodicity[0][1] = st.d1;
  lat.periodicity[1][0] = -st.d2 / 2;
  lat.periodicity[1][2] = st.d2;
  for (size_t i = 0; i < 4; ++i) {
    IVec& row = lat.periodicity[2 + i];
    row[0] = (1 - st.a[i][0] - st.a[i][1]) / 2;
    row[1] = st.a[i][0];
    row[2] = st.a[i][1];
    row[3 + i] = -1;
  }
  lat.t_min = 0;
  lat.t_max = 7;
  return lat;
}

size_t enumerate_candidates(
    const CandidateRanges& ranges,
    const std::function<bool(const StairwayLattice&, const SearchTemplate&)>& sink) {
  size_t emitted = 0;
  for (int64_t d1 = ranges.d1_min; d1 <= ranges.d1_max; ++d1) {
    if (d1 <= 0 || d1 % 2 != 0) continue;
    for (int64_t d2 = ranges.d2_min; d2 <= ranges.d2_max; ++d2) {
      if (d2 <= 0 || d2 % 2 != 0) continue;
      // Per-row admissible (a1, a2) pairs: odd sum forces an integer leading
      // component.
      std::vector<std::array<int64_t, 2>> pairs;
      for (int64_t a1 = 0; a1 < d1; ++a1)
        for (int64_t a2 = 0; a2 < d2; ++a2)
          if ((a1 + a2) % 2 == 1) pairs.push_back({a1, a2});
      std::array<size_t, 4> pick{0, 0, 0, 0};
      while (true) {
        SearchTemplate st;
        st.d1 = d1;
        st.d2 = d2;
        for (size_t i = 0; i < 4; ++i) st.a[i] = pairs[pick[i]];
        ++emitted;
        if (!sink(lattice_from_template(st), st)) return emitted;
        size_t i = 0;
        while (i < 4 && ++pick[i] == pairs.size()) pick[i++] = 0;
        if (i == 4) break;
      }
    }
  }
  return emitted;
}

StairwayLattice lattice_from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  StairwayLattice lat;
  lat.t = j.at("time_covector").get<IVec>();
  lat.periodicity = j.at("periodicity").get<IMat>();
  lat.t_min = j.value("t_min", 0);
  lat.t_max = j.value("t_max", 7);
  return lat;
}

std::string lattice_to_json_text(const StairwayLattice& lat) {
  nlohmann::ordered_json j;
  j["format"] = "stairway-lattice v1";
  j["time_covector"] = lat.t;
  j["periodicity"] = lat.periodicity;
  j["t_min"] = lat.t_min;
  j["t_max"] = lat.t_max;
  return j.dump(2) + "\n";
}

StairwayLattice load_lattice(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open lattice file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return lattice_from_json_text(buf.str());
}

void save_lattice(const StairwayLattice& lat, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write lattice file: " + path);
  f << lattice_to_json_text(lat);
}

}  // namespace stairway
