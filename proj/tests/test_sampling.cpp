#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dem.hpp"
#include "rng.hpp"
#include "sampling.hpp"
#include "stabsim.hpp"

using namespace stairway;

namespace {

// Z-basis repetition memory: rounds of ZZ pairs, consecutive-round detectors,
// data readout folded into final detectors, logical Z0 as the observable.
Circuit z_repetition(int rounds) {
  Circuit c(3);
  c.reset_z({0, 1, 2});
  for (int r = 0; r < rounds; ++r) {
    c.mpp({{0, Pauli::Z}, {1, Pauli::Z}});
    c.mpp({{1, Pauli::Z}, {2, Pauli::Z}});
    if (r > 0) {
      c.detector({-2, -4});
      c.detector({-1, -3});
    }
    c.tick();
  }
  c.measure_z({0, 1, 2});
  c.detector({-3, -2, -5});
  c.detector({-2, -1, -4});
  c.observable(0, {-3});
  return c;
}

Circuit x_repetition(int rounds) {
  Circuit c(3);
  c.reset_x({0, 1, 2});
  for (int r = 0; r < rounds; ++r) {
    c.mpp({{0, Pauli::X}, {1, Pauli::X}});
    c.mpp({{1, Pauli::X}, {2, Pauli::X}});
    if (r > 0) {
      c.detector({-2, -4});
      c.detector({-1, -3});
    }
    c.tick();
  }
  c.measure_x({0, 1, 2});
  c.detector({-3, -2, -5});
  c.detector({-2, -1, -4});
  c.observable(0, {-3});
  return c;
}

// Z-repetition plus an ancilla swept through CX so errors cross qubits.
Circuit cx_circuit(int rounds) {
  Circuit c(4);
  c.reset_z({0, 1, 2, 3});
  for (int r = 0; r < rounds; ++r) {
    c.cx(0, 3);
    c.mpp({{0, Pauli::Z}, {1, Pauli::Z}});
    c.mpp({{1, Pauli::Z}, {2, Pauli::Z}});
    c.cx(0, 3);
    if (r > 0) {
      c.detector({-2, -4});
      c.detector({-1, -3});
    }
    c.tick();
  }
  c.measure_z({0, 1, 2, 3});
  c.detector({-4, -3, -6});
  c.detector({-3, -2, -5});
  c.detector({-1});  // ancilla returns to |0> noiselessly
  c.observable(0, {-4});
  return c;
}

// Raw records here are genuinely random (X0X1 on |00>), but the declared
// parities are still deterministic.
Circuit bell_circuit() {
  Circuit c(2);
  c.reset_z({0, 1});
  c.mpp({{0, Pauli::X}, {1, Pauli::X}});
  c.mpp({{0, Pauli::X}, {1, Pauli::X}});
  c.detector({-1, -2});
  c.mpp({{0, Pauli::Z}, {1, Pauli::Z}});
  c.detector({-1});
  c.mpp({{0, Pauli::X}, {1, Pauli::X}});
  c.detector({-1, -3});  // the X parity repeats; -2 is the Z record
  c.observable(0, {-2});
  return c;
}

// Stabilizer-simulation oracle for one shot: run the circuit in the full
// stabilizer engine with fresh outcome randomness, mirroring the sampler's
// documented error-draw protocol, and report detector/observable parities
// relative to the supplied noiseless reference parities.
struct OracleOut {
  std::vector<uint8_t> det, obs;
};

OracleOut stab_oracle_shot(const Circuit& c, const NoiseModel& nm, uint64_t master,
                           uint64_t shot, uint64_t outcome_seed,
                           const std::vector<uint8_t>* ref_det,
                           const std::vector<uint8_t>* ref_obs) {
  const size_t n = c.num_qubits();
  StabSim sim = StabSim::mixed_state(n, false, c.count_records());
  OutcomePolicy pol;
  pol.kind = OutcomePolicy::Kind::Random;
  pol.seed = outcome_seed;
  sim.set_policy(pol);

  Rng rng = Rng::for_shot(master, shot);
  std::vector<uint8_t> rec;

  for (const Instruction& ins : c.instructions()) {
    switch (ins.kind) {
      case Instruction::Kind::Mpp: {
        BitVec sup(n);
        bool x_type = ins.paulis[0] == Pauli::X;
        for (uint32_t q : ins.qubits) sup.set(q, true);
        bool bit = sim.measure(sup, x_type).outcome;
        if (ins.qubits.size() == 2 && rng.uniform() < nm.p) {
          uint64_t combo = nm.convention == Em3Convention::kUniform32
                               ? rng.below(32)
                               : 1 + rng.below(31);
          bit ^= (combo >> 4) & 1;
          PauliString err(n);
          auto put = [&](uint32_t q, uint64_t pl) {
            if (pl == 1 || pl == 2) err.x.set(q, true);
            if (pl == 3 || pl == 2) err.z.set(q, true);
          };
          put(ins.qubits[0], combo & 3);
          put(ins.qubits[1], (combo >> 2) & 3);
          sim.apply_pauli(err);
        }
        rec.push_back(bit);
        break;
      }
      case Instruction::Kind::MeasureZ:
      case Instruction::Kind::MeasureX: {
        bool x_type = ins.kind == Instruction::Kind::MeasureX;
        for (uint32_t q : ins.qubits) {
          BitVec sup(n);
          sup.set(q, true);
          rec.push_back(sim.measure(sup, x_type).outcome);
        }
        break;
      }
      case Instruction::Kind::ResetZ:
      case Instruction::Kind::ResetX:
        for (uint32_t q : ins.qubits)
          sim.reset(q, ins.kind == Instruction::Kind::ResetX);
        break;
      case Instruction::Kind::Cx:
        for (size_t j = 0; j + 1 < ins.qubits.size(); j += 2)
          sim.apply_cx(ins.qubits[j], ins.qubits[j + 1]);
        break;
      default:
        break;
    }
  }

  ResolvedRefs refs = resolve_refs(c);
  OracleOut out;
  for (size_t d = 0; d < refs.detectors.size(); ++d) {
    uint8_t par = 0;
    for (uint32_t r : refs.detectors[d]) par ^= rec[r];
    out.det.push_back(ref_det ? par ^ (*ref_det)[d] : par);
  }
  for (size_t o = 0; o < refs.observables.size(); ++o) {
    uint8_t par = 0;
    for (uint32_t r : refs.observables[o]) par ^= rec[r];
    out.obs.push_back(ref_obs ? par ^ (*ref_obs)[o] : par);
  }
  return out;
}

void check_sampler_against_stabsim(const Circuit& c, const NoiseModel& nm,
                                   uint64_t master, int shots) {
  NoiseModel quiet = nm;
  quiet.p = 0;
  OracleOut ref1 = stab_oracle_shot(c, quiet, 1, 0, 111, nullptr, nullptr);
  OracleOut ref2 = stab_oracle_shot(c, quiet, 1, 0, 999, nullptr, nullptr);
  REQUIRE(ref1.det == ref2.det);  // declared parities really are deterministic
  REQUIRE(ref1.obs == ref2.obs);

  ShotBatch batch = sample_memory(c, nm, shots, master);
  for (int s = 0; s < shots; ++s) {
    OracleOut noisy =
        stab_oracle_shot(c, nm, master, s, 5000 + s, &ref1.det, &ref1.obs);
    CAPTURE(s);
    for (size_t d = 0; d < batch.n_detectors; ++d) {
      CAPTURE(d);
      REQUIRE(batch.events[s].get(d) == bool(noisy.det[d]));
    }
    for (size_t o = 0; o < batch.n_observables; ++o)
      REQUIRE(batch.flips[s].get(o) == bool(noisy.obs[o]));
  }
}

}  // namespace

TEST_CASE("p = 0 reproduces the noiseless circuit: no events, no flips") {
  for (const Circuit& c :
       {z_repetition(3), x_repetition(3), cx_circuit(2), bell_circuit()}) {
    ShotBatch b = sample_memory(c, {0.0, Em3Convention::kUniform32}, 50, 7);
    for (uint64_t s = 0; s < b.shots; ++s) {
      CHECK(!b.events[s].any());
      CHECK(!b.flips[s].any());
    }
  }
}

TEST_CASE("record flip marginal: p/2 uniform-32, 16p/31 excluded-trivial") {
  Circuit c(2);
  c.reset_z({0, 1});
  c.mpp({{0, Pauli::Z}, {1, Pauli::Z}});
  c.observable(0, {-1});

  const uint64_t shots = 100000;
  const double p = 0.3;
  for (auto [conv, expect] :
       {std::pair{Em3Convention::kUniform32, p / 2},
        std::pair{Em3Convention::kExcludedTrivial31, 16.0 * p / 31}}) {
    ShotBatch b = sample_memory(c, {p, conv}, shots, 42);
    uint64_t flips = 0;
    for (uint64_t s = 0; s < shots; ++s) flips += b.flips[s].get(0);
    double rate = double(flips) / double(shots);
    double sigma = std::sqrt(expect * (1 - expect) / double(shots));
    CHECK(std::fabs(rate - expect) < 3 * sigma);
  }
}

TEST_CASE("contiguous shot splits reassemble bit-exactly") {
  Circuit c = z_repetition(3);
  NoiseModel nm{0.2, Em3Convention::kUniform32};
  ShotBatch whole = sample_memory(c, nm, 200, 31337);
  ShotBatch head = sample_memory(c, nm, 120, 31337, 0);
  ShotBatch tail = sample_memory(c, nm, 80, 31337, 120);
  for (int s = 0; s < 200; ++s) {
    const BitVec& ev = s < 120 ? head.events[s] : tail.events[s - 120];
    const BitVec& fl = s < 120 ? head.flips[s] : tail.flips[s - 120];
    REQUIRE(whole.events[s] == ev);
    REQUIRE(whole.flips[s] == fl);
  }
  ShotBatch again = sample_memory(c, nm, 200, 31337);
  for (int s = 0; s < 200; ++s) REQUIRE(whole.events[s] == again.events[s]);
}

TEST_CASE("frame sampler agrees with stabilizer simulation, shot by shot") {
  check_sampler_against_stabsim(z_repetition(3), {0.25, Em3Convention::kUniform32},
                                901, 150);
  check_sampler_against_stabsim(x_repetition(3), {0.25, Em3Convention::kUniform32},
                                902, 150);
  check_sampler_against_stabsim(cx_circuit(2), {0.25, Em3Convention::kUniform32}, 903,
                                150);
  check_sampler_against_stabsim(bell_circuit(), {0.3, Em3Convention::kUniform32}, 904,
                                200);
  check_sampler_against_stabsim(z_repetition(2),
                                {0.3, Em3Convention::kExcludedTrivial31}, 905, 150);
}

TEST_CASE("detection-event marginals match the analytic rates from the DEM") {
  Circuit c = z_repetition(2);
  const double p = 2e-3;
  DetectorErrorModel dem = build_dem(c, p);
  std::vector<double> analytic = dem_detector_marginals(dem);
  std::vector<double> analytic_obs = dem_observable_marginals(dem);

  const uint64_t shots = 400000;

  // The DEM sampler is the independent-mechanism model itself: exact match.
  ShotBatch dem_batch = sample_dem(dem, shots, 606);
  // The circuit sampler differs from independence only at O(p^2).
  ShotBatch circ_batch = sample_memory(c, {p, Em3Convention::kUniform32}, shots, 607);

  for (const ShotBatch& b : {dem_batch, circ_batch}) {
    for (size_t d = 0; d < b.n_detectors; ++d) {
      uint64_t hits = 0;
      for (uint64_t s = 0; s < shots; ++s) hits += b.events[s].get(d);
      double rate = double(hits) / double(shots);
      double sigma = std::sqrt(analytic[d] * (1 - analytic[d]) / double(shots));
      CAPTURE(d);
      CHECK(std::fabs(rate - analytic[d]) < 3 * sigma + 2 * p * p);
    }
    uint64_t hits = 0;
    for (uint64_t s = 0; s < shots; ++s) hits += b.flips[s].get(0);
    double rate = double(hits) / double(shots);
    double sigma =
        std::sqrt(analytic_obs[0] * (1 - analytic_obs[0]) / double(shots));
    CHECK(std::fabs(rate - analytic_obs[0]) < 3 * sigma + 2 * p * p);
  }
}

TEST_CASE("Clopper-Pearson anchors and coverage") {
  // k = 0 and k = n have closed forms.
  auto [lo0, hi0] = clopper_pearson(0, 100);
  CHECK(lo0 == 0.0);
  CHECK(hi0 == doctest::Approx(1 - std::pow(0.005, 1.0 / 100)).epsilon(1e-9));
  auto [lon, hin] = clopper_pearson(100, 100);
  CHECK(hin == 1.0);
  CHECK(lon == doctest::Approx(std::pow(0.005, 1.0 / 100)).epsilon(1e-9));
  // k = 1 lower and k = n-1 upper also reduce to powers.
  auto [lo1, hi1] = clopper_pearson(1, 1000);
  CHECK(lo1 == doctest::Approx(1 - std::pow(0.995, 1.0 / 1000)).epsilon(1e-9));
  auto [lo9, hi9] = clopper_pearson(999, 1000);
  CHECK(hi9 == doctest::Approx(std::pow(0.995, 1.0 / 1000)).epsilon(1e-9));
  CHECK(hi1 > lo1);
  CHECK(lo9 < hi9);

  // Interval always contains the point estimate.
  for (uint64_t k : {0ull, 3ull, 17ull, 50ull, 100ull}) {
    auto [lo, hi] = clopper_pearson(k, 100);
    double hat = double(k) / 100;
    CHECK(lo <= hat + 1e-12);
    CHECK(hi >= hat - 1e-12);
  }

  // Exact-binomial intervals are conservative: empirical coverage >= 99%.
  Rng rng(2718);
  const double p_true = 0.07;
  const int n = 400, reps = 2000;
  int covered = 0;
  for (int r = 0; r < reps; ++r) {
    uint64_t k = 0;
    for (int i = 0; i < n; ++i) k += rng.uniform() < p_true;
    auto [lo, hi] = clopper_pearson(k, n);
    covered += (lo <= p_true && p_true <= hi);
  }
  CHECK(double(covered) / reps >= 0.99);
  CHECK_THROWS_AS(clopper_pearson(1, 0), std::invalid_argument);
}

TEST_CASE("logical error rate counts any-flip mismatches and failures") {
  ShotBatch b;
  b.shots = 10;
  b.n_detectors = 0;
  b.n_observables = 2;
  for (int s = 0; s < 10; ++s) {
    b.events.emplace_back(0);
    BitVec f(2);
    if (s < 5) f.set(0, true);
    b.flips.push_back(f);
  }
  std::vector<BitVec> zero(10, BitVec(2));

  Stats st = logical_error_rate(b, zero);
  CHECK(st.p_l == doctest::Approx(0.5));
  CHECK(st.errors == 5);
  CHECK(st.ci_low < 0.5);
  CHECK(st.ci_high > 0.5);
  CHECK(st.per_observable[0] == doctest::Approx(0.5));
  CHECK(st.per_observable[1] == 0.0);
  CHECK(st.v == 2);

  // Perfect predictions: one-sided interval from zero.
  Stats ok = logical_error_rate(b, {b.flips.begin(), b.flips.end()});
  CHECK(ok.p_l == 0.0);
  CHECK(ok.ci_low == 0.0);
  CHECK(ok.ci_high > 0.0);

  // A failed decode is an error even when the prediction would match.
  std::vector<uint8_t> failed(10, 0);
  failed[7] = 1;
  Stats withfail = logical_error_rate(b, {b.flips.begin(), b.flips.end()}, failed);
  CHECK(withfail.errors == 1);

  CHECK_THROWS_AS(logical_error_rate(ShotBatch{}, {}), std::invalid_argument);
  CHECK_THROWS_AS(logical_error_rate(b, {zero.begin(), zero.begin() + 3}),
                  std::invalid_argument);
}

TEST_CASE("round renormalization: identities, round trip, domain error") {
  CHECK(renormalize_rounds(0.0, 14, 6, 20) == 0.0);
  for (double e : {1e-5, 1e-3, 0.05, 0.3}) {
    CHECK(renormalize_rounds(e, 14, 6, 6) == doctest::Approx(e).epsilon(1e-13));
    for (uint32_t v : {1u, 14u}) {
      double fwd = renormalize_rounds(e, v, 6, 20);
      double back = renormalize_rounds(fwd, v, 20, 6);
      CHECK(std::fabs(back - e) < 1e-12);
    }
  }
  CHECK_THROWS_AS(renormalize_rounds(0.999, 1, 6, 20), std::domain_error);
  CHECK_THROWS_AS(renormalize_rounds(-0.1, 1, 6, 20), std::invalid_argument);
  CHECK_THROWS_AS(renormalize_rounds(0.1, 0, 6, 20), std::invalid_argument);
}

TEST_CASE("round renormalization matches an iid flip simulation at 3 sigma") {
  const double eps = 0.01;
  const uint32_t v = 14, n_sample = 6, n_target = 20;
  const uint64_t trials = 1000000;

  auto simulate = [&](uint32_t rounds, uint64_t seed) {
    Rng rng(seed);
    uint64_t bad = 0;
    for (uint64_t t = 0; t < trials; ++t) {
      bool any = false;
      for (uint32_t ob = 0; ob < v; ++ob) {
        int flips = 0;
        for (uint32_t r = 0; r < rounds; ++r) flips += rng.uniform() < eps;
        any |= (flips & 1);
      }
      bad += any;
    }
    return double(bad) / double(trials);
  };

  double e6 = simulate(n_sample, 12001);
  double e20 = simulate(n_target, 12002);
  double predicted = renormalize_rounds(e6, v, n_sample, n_target);

  double s6 = std::sqrt(e6 * (1 - e6) / double(trials));
  double s20 = std::sqrt(e20 * (1 - e20) / double(trials));
  double h = 1e-6;
  double deriv = (renormalize_rounds(e6 + h, v, n_sample, n_target) -
                  renormalize_rounds(e6 - h, v, n_sample, n_target)) /
                 (2 * h);
  double sigma = std::sqrt(deriv * deriv * s6 * s6 + s20 * s20);
  CHECK(std::fabs(predicted - e20) < 3 * sigma);
}

TEST_CASE("ansatz fit recovers synthetic coefficients to 1e-6") {
  const double c0 = -2.5, c1 = 37.0, c2 = -4100.0;
  for (auto [policy, dprime, e] :
       {std::tuple{ExponentPolicy::kCeilHalf, 4u, 2u},
        std::tuple{ExponentPolicy::kLiteral, 4u, 4u}}) {
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 8; ++i) {
      double p = 1e-3 * std::pow(10.0, i / 7.0);
      double pl = std::pow(p, double(e)) / 2 * std::exp(c0 + c1 * p + c2 * p * p);
      pts.push_back({p, pl});
    }
    FitResult fit = fit_ansatz(pts, dprime, policy);
    CHECK(fit.exponent == e);
    CHECK(std::fabs(fit.c0 - c0) < 1e-6 * std::max(1.0, std::fabs(c0)));
    CHECK(std::fabs(fit.c1 - c1) < 1e-6 * std::max(1.0, std::fabs(c1)));
    CHECK(std::fabs(fit.c2 - c2) < 1e-6 * std::max(1.0, std::fabs(c2)));
    CHECK(fit.residual_norm < 1e-9);
    CHECK(fit.p_min == doctest::Approx(1e-3));
    for (const auto& [p, pl] : pts)
      CHECK(fit_p_l(fit, p) == doctest::Approx(pl).epsilon(1e-9));
  }
}

TEST_CASE("one-point fit with forced c1 = c2 = 0 has the closed form") {
  double p = 1e-3, pl = 3e-6;
  FitResult fit = fit_ansatz({{p, pl}}, 3, ExponentPolicy::kCeilHalf, 1);
  CHECK(fit.exponent == 2);  // ceil(3/2)
  double expect = std::log(pl) - 2 * std::log(p) + std::log(2.0);
  CHECK(fit.c0 == doctest::Approx(expect).epsilon(1e-12));
  CHECK(fit.c1 == 0.0);
  CHECK(fit.c2 == 0.0);
}

TEST_CASE("fit rejects degenerate inputs") {
  std::vector<std::pair<double, double>> same = {{1e-3, 1e-6}, {1e-3, 2e-6}, {1e-3, 3e-6}};
  CHECK_THROWS_AS(fit_ansatz(same, 4), std::runtime_error);
  std::vector<std::pair<double, double>> dead = {{1e-3, 0.0}, {2e-3, 0.0}, {3e-3, 0.0}};
  CHECK_THROWS_AS(fit_ansatz(dead, 4), std::invalid_argument);
  CHECK_THROWS_AS(fit_ansatz({}, 4), std::invalid_argument);

  std::vector<std::pair<double, double>> pts = {
      {1e-3, 5e-6}, {2e-3, 1e-4}, {5e-3, 1e-1}, {1e-2, 0.3}};
  auto kept = filter_below_pseudothreshold(pts, 16.0);
  CHECK(kept.size() == 2);  // the last two sit above k p
}

TEST_CASE("figures of merit: bpt values and pseudo-threshold bisection") {
  FitResult fit;
  fit.exponent = 2;
  fit.policy = ExponentPolicy::kCeilHalf;
  fit.c0 = std::log(2.0 * 16 / 0.01);  // crossing with k p at p = 0.01 exactly
  fit.c1 = 0;
  fit.c2 = 0;
  fit.p_min = 1e-3;
  fit.p_max = 0.1;

  FiguresOfMerit fom = derive_figures_of_merit(fit, 16, 192, 4);
  CHECK(fom.bpt == doctest::Approx(16.0 * 16 / 192));
  REQUIRE(fom.pseudo_threshold.has_value());
  CHECK(*fom.pseudo_threshold == doctest::Approx(0.01).epsilon(1e-9));

  FiguresOfMerit big = derive_figures_of_merit(fit, 14, 576, 20);
  CHECK(big.bpt == doctest::Approx(14.0 * 400 / 576));

  // p_L = 0.6 p stays below k p everywhere: no crossing.
  FitResult lin;
  lin.exponent = 1;
  lin.c0 = std::log(1.2);
  lin.p_min = 1e-3;
  lin.p_max = 0.1;
  FiguresOfMerit none = derive_figures_of_merit(lin, 16, 192, 4);
  CHECK(!none.pseudo_threshold.has_value());
}

TEST_CASE("results CSV and fit report formats") {
  ResultRow row{"stairway-192", 1e-3, 4, 10000, 41, "beam", 0, 99, 12.5};
  std::string csv = results_csv({row});
  CHECK(csv.find("code_id,p,rounds,shots,errors,decoder,beam_width,seed,wall_seconds\n") == 0);
  CHECK(csv.find("stairway-192,0.001") != std::string::npos);
  CHECK(csv.find(",4,10000,41,beam,0,99,12.5") != std::string::npos);

  FitResult fit;
  fit.c0 = 1.5;
  fit.exponent = 2;
  FiguresOfMerit fom;
  fom.bpt = 1.25;
  std::string j = fit_report_json(fit, fom);
  CHECK(j.find("\"exponent\": 2") != std::string::npos);
  CHECK(j.find("\"exponent_policy\": \"ceil-half\"") != std::string::npos);
  CHECK(j.find("\"pseudo_threshold\": null") != std::string::npos);
  CHECK(j.find("\"bpt\": 1.25") != std::string::npos);
}
