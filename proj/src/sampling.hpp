#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "circuit.hpp"
#include "dem.hpp"
#include "gf2.hpp"

namespace stairway {

// Entangling-measurement noise: each pairwise MPP independently suffers, with
// probability p, one of the 32 {two-qubit Pauli} x {record flip, none}
// combinations.  Transversal readout and resets are noiseless.
struct NoiseModel {
  double p = 0;  // in [0, 1)
  Em3Convention convention = Em3Convention::kUniform32;
};

// Detection events and observable flips only; raw measurement records are
// deliberately absent.  Events are parities relative to the noiseless
// reference, so they are a function of the error draws alone and need no
// outcome randomness.
struct ShotBatch {
  uint64_t shots = 0;
  size_t n_detectors = 0;
  size_t n_observables = 0;
  uint64_t master_seed = 0;
  std::vector<BitVec> events;  // one BitVec of width n_detectors per shot
  std::vector<BitVec> flips;   // one BitVec of width n_observables per shot
};

// Pauli-frame sampler.  Per-shot randomness is Rng::for_shot(master_seed,
// first_shot + i), so any contiguous split of the shot range reproduces the
// same bitstreams.  Draw protocol per shot, fixed by tests: walk instructions
// in program order; at every 2-qubit MPP draw one uniform() and fire iff it
// is < p; on fire draw combo = below(32) (kUniform32) or 1 + below(31)
// (kExcludedTrivial31), where combo & 3 is the Pauli on the lower qubit id,
// (combo >> 2) & 3 the Pauli on the higher (0=I 1=X 2=Y 3=Z), and combo >> 4
// the record flip.  The record flip lands on the MPP's own record; the Pauli
// multiplies into the frame after the record is formed.
ShotBatch sample_memory(const Circuit& c, const NoiseModel& noise, uint64_t shots,
                        uint64_t master_seed, uint64_t first_shot = 0);

// Independent-mechanism sampler over a detector error model: per shot, each
// mechanism fires iff uniform() < p, in mechanism order.
ShotBatch sample_dem(const DetectorErrorModel& dem, uint64_t shots,
                     uint64_t master_seed, uint64_t first_shot = 0);

// Exact per-detector firing probability under independent mechanisms:
// (1 - prod(1 - 2 p_i)) / 2 over the mechanisms touching each detector.
std::vector<double> dem_detector_marginals(const DetectorErrorModel& dem);
std::vector<double> dem_observable_marginals(const DetectorErrorModel& dem);

// Exact binomial (Clopper-Pearson) interval; returns {lower, upper} for k
// successes out of n at the given two-sided miss probability alpha.
std::pair<double, double> clopper_pearson(uint64_t k, uint64_t n, double alpha = 0.01);

struct Stats {
  double p_l = 0;
  double ci_low = 0, ci_high = 1;  // Clopper-Pearson at 99%
  uint64_t shots = 0;
  uint64_t errors = 0;
  size_t v = 0;                        // observable count
  std::vector<double> per_observable;  // per-observable mismatch rates
  // Round-renormalization bookkeeping, filled by callers that use it.
  uint32_t n_sample = 0, n_target = 0;
  double epsilon = 0;
};

// A shot counts as a logical error when its prediction is absent (failed) or
// differs from the actual flips in any observable.  Failed shots also count
// against every per-observable rate (conservative).
Stats logical_error_rate(const ShotBatch& batch, const std::vector<BitVec>& predictions,
                         const std::vector<uint8_t>& failed = {});

// Converts a whole-shot error rate measured over n_sample rounds into the
// rate expected over n_target rounds, assuming v observables flipping
// independently at a fixed per-round rate:
//   (1 - 2e) = (2 (1 - E_shot)^(1/v) - 1)^(1/n_sample)
//   E_target = 1 - ((1 + (1 - 2e)^n_target) / 2)^v
// Throws std::domain_error when the inner root argument is <= 0 (E_shot too
// large for the model).
double renormalize_rounds(double e_shot, uint32_t v, uint32_t n_sample,
                          uint32_t n_target);

// How the p-exponent of the ansatz is chosen from the claimed circuit
// distance d': the default takes the weight of the minimal uncorrectable
// fault, ceil(d'/2); the literal reading uses d' itself.
enum class ExponentPolicy : uint8_t { kCeilHalf, kLiteral };

struct FitResult {
  double c0 = 0, c1 = 0, c2 = 0;
  uint32_t exponent = 0;
  ExponentPolicy policy = ExponentPolicy::kCeilHalf;
  double residual_norm = 0;
  double p_min = 0, p_max = 0;  // fit domain
};

// Least squares for p_L = p^e / 2 * exp(c0 + c1 p + c2 p^2): linear in
// (c0, c1, c2) on y = log p_L - e log p + log 2.  n_coeffs in {1, 2, 3}
// fixes the trailing coefficients to zero (n_coeffs = 1 fits c0 alone).
// Requires at least n_coeffs points with p > 0 and p_L > 0; throws
// std::invalid_argument otherwise and std::runtime_error on a degenerate
// design matrix (e.g. repeated p values).
FitResult fit_ansatz(const std::vector<std::pair<double, double>>& points,
                     uint32_t d_prime, ExponentPolicy policy = ExponentPolicy::kCeilHalf,
                     int n_coeffs = 3);

// The fit's own inclusion rule: keep only points with p_L < k p.
std::vector<std::pair<double, double>> filter_below_pseudothreshold(
    const std::vector<std::pair<double, double>>& points, double k);

double fit_p_l(const FitResult& fit, double p);

struct FiguresOfMerit {
  std::optional<double> pseudo_threshold;  // absent when p_L(p) = k p has no
                                           // crossing in the fit domain
  double bpt = 0;                          // k d^2 / n
};

FiguresOfMerit derive_figures_of_merit(const FitResult& fit, size_t k, size_t n,
                                       uint32_t d);

struct ResultRow {
  std::string code_id;
  double p = 0;
  uint32_t rounds = 0;
  uint64_t shots = 0;
  uint64_t errors = 0;
  std::string decoder;
  uint32_t beam_width = 0;
  uint64_t seed = 0;
  double wall_seconds = 0;
};

std::string results_csv(const std::vector<ResultRow>& rows);

std::string fit_report_json(const FitResult& fit, const FiguresOfMerit& fom);

}  // namespace stairway
