#include "sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

#include "rng.hpp"

namespace stairway {

namespace {

// X/Z supports of one measured operator, per record it produces.
struct MeasSupports {
  std::vector<uint32_t> xsup, zsup;
};

void frame_mul(BitVec& fx, BitVec& fz, uint32_t q, uint64_t pauli) {
  if (pauli == 1 || pauli == 2) fx.flip(q);
  if (pauli == 3 || pauli == 2) fz.flip(q);
}

}  // namespace

ShotBatch sample_memory(const Circuit& c, const NoiseModel& noise, uint64_t shots,
                        uint64_t master_seed, uint64_t first_shot) {
  if (!(noise.p >= 0.0 && noise.p < 1.0))
    throw std::invalid_argument("sample_memory: p outside [0, 1)");

  const auto& instrs = c.instructions();
  ResolvedRefs refs = resolve_refs(c);
  const size_t n_records = c.count_records();

  // One MeasSupports per Mpp instruction position (empty otherwise).
  std::vector<MeasSupports> mpp_sup(instrs.size());
  for (size_t i = 0; i < instrs.size(); ++i) {
    const Instruction& ins = instrs[i];
    if (ins.kind != Instruction::Kind::Mpp) continue;
    for (size_t j = 0; j < ins.qubits.size(); ++j) {
      if (ins.paulis[j] != Pauli::Z) mpp_sup[i].xsup.push_back(ins.qubits[j]);
      if (ins.paulis[j] != Pauli::X) mpp_sup[i].zsup.push_back(ins.qubits[j]);
    }
  }

  ShotBatch batch;
  batch.shots = shots;
  batch.n_detectors = refs.detectors.size();
  batch.n_observables = c.count_observables();
  batch.master_seed = master_seed;
  batch.events.reserve(shots);
  batch.flips.reserve(shots);

  BitVec fx(c.num_qubits()), fz(c.num_qubits());
  std::vector<uint8_t> rec_flip(n_records);

  for (uint64_t s = 0; s < shots; ++s) {
    Rng rng = Rng::for_shot(master_seed, first_shot + s);
    fx.clear();
    fz.clear();
    std::fill(rec_flip.begin(), rec_flip.end(), 0);
    size_t rec = 0;

    for (size_t i = 0; i < instrs.size(); ++i) {
      const Instruction& ins = instrs[i];
      switch (ins.kind) {
        case Instruction::Kind::Mpp: {
          bool flip = false;
          for (uint32_t q : mpp_sup[i].zsup) flip ^= fx.get(q);
          for (uint32_t q : mpp_sup[i].xsup) flip ^= fz.get(q);
          if (ins.qubits.size() == 2) {
            if (rng.uniform() < noise.p) {
              uint64_t combo = noise.convention == Em3Convention::kUniform32
                                   ? rng.below(32)
                                   : 1 + rng.below(31);
              flip ^= (combo >> 4) & 1;
              // Back-action lands after the record is formed.
              frame_mul(fx, fz, ins.qubits[0], combo & 3);
              frame_mul(fx, fz, ins.qubits[1], (combo >> 2) & 3);
            }
          }
          rec_flip[rec++] = flip;
          break;
        }
        case Instruction::Kind::MeasureZ:
          for (uint32_t q : ins.qubits) rec_flip[rec++] = fx.get(q);
          break;
        case Instruction::Kind::MeasureX:
          for (uint32_t q : ins.qubits) rec_flip[rec++] = fz.get(q);
          break;
        case Instruction::Kind::ResetZ:
        case Instruction::Kind::ResetX:
          for (uint32_t q : ins.qubits) {
            fx.set(q, false);
            fz.set(q, false);
          }
          break;
        case Instruction::Kind::Cx:
          for (size_t j = 0; j + 1 < ins.qubits.size(); j += 2) {
            uint32_t ctl = ins.qubits[j], tgt = ins.qubits[j + 1];
            if (fx.get(ctl)) fx.flip(tgt);
            if (fz.get(tgt)) fz.flip(ctl);
          }
          break;
        default:
          break;  // Tick / Detector / Observable
      }
    }

    BitVec ev(batch.n_detectors);
    for (size_t d = 0; d < refs.detectors.size(); ++d) {
      bool e = false;
      for (uint32_t r : refs.detectors[d]) e ^= rec_flip[r];
      ev.set(d, e);
    }
    BitVec fl(batch.n_observables);
    for (size_t o = 0; o < refs.observables.size(); ++o) {
      bool e = false;
      for (uint32_t r : refs.observables[o]) e ^= rec_flip[r];
      fl.set(o, e);
    }
    batch.events.push_back(std::move(ev));
    batch.flips.push_back(std::move(fl));
  }
  return batch;
}

ShotBatch sample_dem(const DetectorErrorModel& dem, uint64_t shots,
                     uint64_t master_seed, uint64_t first_shot) {
  ShotBatch batch;
  batch.shots = shots;
  batch.n_detectors = dem.n_detectors;
  batch.n_observables = dem.n_observables;
  batch.master_seed = master_seed;
  batch.events.reserve(shots);
  batch.flips.reserve(shots);
  for (uint64_t s = 0; s < shots; ++s) {
    Rng rng = Rng::for_shot(master_seed, first_shot + s);
    BitVec ev(dem.n_detectors), fl(dem.n_observables);
    for (const DemMechanism& m : dem.mechanisms) {
      if (rng.uniform() < m.p) {
        for (uint32_t d : m.detectors) ev.flip(d);
        for (uint32_t o : m.observables) fl.flip(o);
      }
    }
    batch.events.push_back(std::move(ev));
    batch.flips.push_back(std::move(fl));
  }
  return batch;
}

std::vector<double> dem_detector_marginals(const DetectorErrorModel& dem) {
  std::vector<double> prod(dem.n_detectors, 1.0);
  for (const DemMechanism& m : dem.mechanisms)
    for (uint32_t d : m.detectors) prod[d] *= 1.0 - 2.0 * m.p;
  for (double& v : prod) v = (1.0 - v) / 2.0;
  return prod;
}

std::vector<double> dem_observable_marginals(const DetectorErrorModel& dem) {
  std::vector<double> prod(dem.n_observables, 1.0);
  for (const DemMechanism& m : dem.mechanisms)
    for (uint32_t o : m.observables) prod[o] *= 1.0 - 2.0 * m.p;
  for (double& v : prod) v = (1.0 - v) / 2.0;
  return prod;
}

namespace {

double log_beta_fn(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Continued fraction for the regularized incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  double qab = a + b, qap = a + 1, qam = a - 1;
  double c = 1, d = 1 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1 / d;
  double h = d;
  for (int m = 1; m <= 400; ++m) {
    double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 3e-15) break;
  }
  return h;
}

double inc_beta(double a, double b, double x) {
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  double bt = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta_fn(a, b));
  if (x < (a + 1) / (a + b + 2)) return bt * beta_cf(a, b, x) / a;
  return 1 - bt * beta_cf(b, a, 1 - x) / b;
}

double inv_inc_beta(double a, double b, double target) {
  double lo = 0, hi = 1;
  for (int it = 0; it < 120; ++it) {
    double mid = 0.5 * (lo + hi);
    (inc_beta(a, b, mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::pair<double, double> clopper_pearson(uint64_t k, uint64_t n, double alpha) {
  if (n == 0) throw std::invalid_argument("clopper_pearson: zero trials");
  if (k > n) throw std::invalid_argument("clopper_pearson: k > n");
  double lo = (k == 0) ? 0.0 : inv_inc_beta(double(k), double(n - k + 1), alpha / 2);
  double hi =
      (k == n) ? 1.0 : inv_inc_beta(double(k + 1), double(n - k), 1 - alpha / 2);
  return {lo, hi};
}

Stats logical_error_rate(const ShotBatch& batch, const std::vector<BitVec>& predictions,
                         const std::vector<uint8_t>& failed) {
  if (batch.shots == 0) throw std::invalid_argument("logical_error_rate: zero shots");
  if (predictions.size() != batch.shots)
    throw std::invalid_argument("logical_error_rate: predictions not aligned");
  if (!failed.empty() && failed.size() != batch.shots)
    throw std::invalid_argument("logical_error_rate: failure flags not aligned");

  const size_t v = batch.n_observables;
  std::vector<uint64_t> per_obs(v, 0);
  uint64_t errors = 0;
  for (uint64_t s = 0; s < batch.shots; ++s) {
    if (!failed.empty() && failed[s]) {
      ++errors;
      for (size_t o = 0; o < v; ++o) ++per_obs[o];
      continue;
    }
    bool any = false;
    for (size_t o = 0; o < v; ++o) {
      if (batch.flips[s].get(o) != predictions[s].get(o)) {
        ++per_obs[o];
        any = true;
      }
    }
    errors += any;
  }

  Stats st;
  st.shots = batch.shots;
  st.errors = errors;
  st.p_l = double(errors) / double(batch.shots);
  auto [lo, hi] = clopper_pearson(errors, batch.shots, 0.01);
  st.ci_low = lo;
  st.ci_high = hi;
  st.v = v;
  st.per_observable.resize(v);
  for (size_t o = 0; o < v; ++o)
    st.per_observable[o] = double(per_obs[o]) / double(batch.shots);
  return st;
}

double renormalize_rounds(double e_shot, uint32_t v, uint32_t n_sample,
                          uint32_t n_target) {
  if (!(e_shot >= 0.0 && e_shot < 1.0) || v < 1 || n_sample < 1 || n_target < 1)
    throw std::invalid_argument("renormalize_rounds: argument out of range");
  double base = 2.0 * std::pow(1.0 - e_shot, 1.0 / double(v)) - 1.0;
  if (base <= 0.0)
    throw std::domain_error(
        "renormalize_rounds: shot error rate too large for the "
        "independent-flip model");
  double one_minus_2eps = std::pow(base, 1.0 / double(n_sample));
  return 1.0 -
         std::pow((1.0 + std::pow(one_minus_2eps, double(n_target))) / 2.0, double(v));
}

FitResult fit_ansatz(const std::vector<std::pair<double, double>>& points,
                     uint32_t d_prime, ExponentPolicy policy, int n_coeffs) {
  if (n_coeffs < 1 || n_coeffs > 3)
    throw std::invalid_argument("fit_ansatz: n_coeffs must be 1, 2 or 3");
  const uint32_t e = policy == ExponentPolicy::kLiteral ? d_prime : (d_prime + 1) / 2;

  std::vector<double> ps, ys;
  for (const auto& [p, pl] : points) {
    if (!(p > 0.0) || !(pl > 0.0)) continue;  // log-undefined points dropped
    ps.push_back(p);
    ys.push_back(std::log(pl) - double(e) * std::log(p) + std::log(2.0));
  }
  if (int(ps.size()) < n_coeffs)
    throw std::invalid_argument("fit_ansatz: need at least n_coeffs usable points");

  // Center and scale p before forming normal equations; the raw powers
  // {1, p, p^2} at p ~ 1e-3 are catastrophically ill-conditioned.
  double mu = 0;
  for (double p : ps) mu += p;
  mu /= double(ps.size());
  double s = 0;
  for (double p : ps) s = std::max(s, std::fabs(p - mu));
  if (s == 0) s = 1;

  double m[3][3] = {};
  double rhs[3] = {};
  for (size_t i = 0; i < ps.size(); ++i) {
    double u = (ps[i] - mu) / s;
    double row[3] = {1.0, u, u * u};
    for (int a = 0; a < n_coeffs; ++a) {
      rhs[a] += row[a] * ys[i];
      for (int b = 0; b < n_coeffs; ++b) m[a][b] += row[a] * row[b];
    }
  }

  // Gaussian elimination with partial pivoting on the (tiny) normal matrix.
  int perm[3] = {0, 1, 2};
  for (int col = 0; col < n_coeffs; ++col) {
    int best = col;
    for (int r = col + 1; r < n_coeffs; ++r)
      if (std::fabs(m[perm[r]][col]) > std::fabs(m[perm[best]][col])) best = r;
    std::swap(perm[col], perm[best]);
    double piv = m[perm[col]][col];
    if (std::fabs(piv) < 1e-12 * double(ps.size()))
      throw std::runtime_error("fit_ansatz: degenerate design matrix");
    for (int r = col + 1; r < n_coeffs; ++r) {
      double f = m[perm[r]][col] / piv;
      for (int cc = col; cc < n_coeffs; ++cc) m[perm[r]][cc] -= f * m[perm[col]][cc];
      rhs[perm[r]] -= f * rhs[perm[col]];
    }
  }
  double a[3] = {};
  for (int col = n_coeffs - 1; col >= 0; --col) {
    double acc = rhs[perm[col]];
    for (int cc = col + 1; cc < n_coeffs; ++cc) acc -= m[perm[col]][cc] * a[cc];
    a[col] = acc / m[perm[col]][col];
  }

  FitResult fit;
  fit.exponent = e;
  fit.policy = policy;
  // Expand c0' + c1' u + c2' u^2 with u = (p - mu)/s back into powers of p.
  fit.c2 = a[2] / (s * s);
  fit.c1 = a[1] / s - 2.0 * a[2] * mu / (s * s);
  fit.c0 = a[0] - a[1] * mu / s + a[2] * mu * mu / (s * s);
  double res = 0;
  for (size_t i = 0; i < ps.size(); ++i) {
    double pred = fit.c0 + fit.c1 * ps[i] + fit.c2 * ps[i] * ps[i];
    res += (ys[i] - pred) * (ys[i] - pred);
  }
  fit.residual_norm = std::sqrt(res);
  fit.p_min = *std::min_element(ps.begin(), ps.end());
  fit.p_max = *std::max_element(ps.begin(), ps.end());
  return fit;
}

std::vector<std::pair<double, double>> filter_below_pseudothreshold(
    const std::vector<std::pair<double, double>>& points, double k) {
  std::vector<std::pair<double, double>> out;
  for (const auto& pt : points)
    if (pt.second < k * pt.first) out.push_back(pt);
  return out;
}

double fit_p_l(const FitResult& fit, double p) {
  return std::pow(p, double(fit.exponent)) / 2.0 *
         std::exp(fit.c0 + fit.c1 * p + fit.c2 * p * p);
}

FiguresOfMerit derive_figures_of_merit(const FitResult& fit, size_t k, size_t n,
                                       uint32_t d) {
  if (n == 0) throw std::invalid_argument("derive_figures_of_merit: n = 0");
  FiguresOfMerit fom;
  fom.bpt = double(k) * double(d) * double(d) / double(n);
  if (fit.p_max > fit.p_min) {
    auto g = [&](double p) { return fit_p_l(fit, p) - double(k) * p; };
    // Coarse scan for the lowest bracket, then bisection.
    constexpr int kSteps = 256;
    double prev_p = fit.p_min, prev_g = g(prev_p);
    for (int i = 1; i <= kSteps; ++i) {
      double p = fit.p_min + (fit.p_max - fit.p_min) * double(i) / kSteps;
      double gv = g(p);
      if ((prev_g <= 0) != (gv <= 0)) {
        double lo = prev_p, hi = p;
        for (int it = 0; it < 200; ++it) {
          double mid = 0.5 * (lo + hi);
          if ((g(lo) <= 0) == (g(mid) <= 0))
            lo = mid;
          else
            hi = mid;
        }
        fom.pseudo_threshold = 0.5 * (lo + hi);
        break;
      }
      prev_p = p;
      prev_g = gv;
    }
  }
  return fom;
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::string out = "code_id,p,rounds,shots,errors,decoder,beam_width,seed,wall_seconds\n";
  char buf[256];
  for (const ResultRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.p);
    out += r.code_id;
    out += ',';
    out += buf;
    std::snprintf(buf, sizeof buf, ",%u,%llu,%llu,", r.rounds,
                  (unsigned long long)r.shots, (unsigned long long)r.errors);
    out += buf;
    out += r.decoder;
    std::snprintf(buf, sizeof buf, ",%u,%llu,%.9g", r.beam_width,
                  (unsigned long long)r.seed, r.wall_seconds);
    out += buf;
    out += '\n';
  }
  return out;
}

std::string fit_report_json(const FitResult& fit, const FiguresOfMerit& fom) {
  nlohmann::ordered_json j;
  j["c0"] = fit.c0;
  j["c1"] = fit.c1;
  j["c2"] = fit.c2;
  j["exponent"] = fit.exponent;
  j["exponent_policy"] =
      fit.policy == ExponentPolicy::kLiteral ? "literal" : "ceil-half";
  if (fom.pseudo_threshold)
    j["pseudo_threshold"] = *fom.pseudo_threshold;
  else
    j["pseudo_threshold"] = nullptr;
  j["bpt"] = fom.bpt;
  return j.dump(2);
}

}  // namespace stairway
