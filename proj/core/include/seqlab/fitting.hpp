#pragma once

#include "seqlab/concept.hpp"
#include "seqlab/inversion.hpp"
#include "seqlab/numerics.hpp"
#include "seqlab/rnn.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace seqlab {

struct FitHConfig {
  std::size_t n_mc = 20000;
  std::size_t K = 8;          ///< total degree of the Hermite product basis
  double ridge = 1e-8;
  std::size_t grid = 64;      ///< fitting grid on [-0.95 r_x, 0.95 r_x]
  std::size_t check_grid = 129;
};

/// H(alpha, b0) = sum_{a+b <= K} c_ab He_a(alpha) He_b(b0) / sqrt(a! b!),
/// fitted so that E[1[alpha u + beta sqrt(r_x^2 - u^2) + b0 >= 0] H(alpha, b0)]
/// tracks phi(k0 u) for |u| < r_x, with alpha, beta, b0 ~ N(0, 1).
struct IndicatorFit {
  std::size_t K = 0;
  std::vector<std::pair<int, int>> basis;  ///< (a, b) per coefficient
  Vec coeffs;
  double k0 = 0.0;
  double r_x = 0.0;
  double sup_error = 0.0;     ///< exact expectation vs phi on a finer grid
  double train_rmse = 0.0;
  double lipschitz_alpha = 0.0;  ///< max |dH/dalpha| by finite differences on [-3, 3]^2
  double condition = 0.0;        ///< of the regularized normal equations

  [[nodiscard]] double operator()(double alpha, double b0) const;
};

/// The beta integral is done in closed form,
///   E_beta 1[alpha u + beta s + b0 >= 0] = Phi_N((alpha u + b0) / s),
/// so only (alpha, b0) are sampled. Throws std::runtime_error when the
/// normal equations stay ill-conditioned after the ridge term.
IndicatorFit fit_h(const std::function<double(double)>& phi, double k0, double r_x,
                   const FitHConfig& cfg, RngStream rng);

/// Monte Carlo estimate of E[1[...] H] at u with n fresh samples.
double indicator_expectation(const IndicatorFit& fit, double u, std::size_t n, RngStream rng);

/// The same expectation computed without sampling (closed form in alpha and
/// beta, quadrature in b0).
double indicator_expectation_exact(const IndicatorFit& fit, double u);

struct TargetParams {
  std::size_t m = 0;
  std::size_t d = 0;
  /// W* is the zero matrix; kept implicit.
  Mat Astar;                    ///< m x d, only the last column nonzero
  std::vector<double> thetas;   ///< sqrt(m/2) / ||Wbar w||, one per neuron
  std::vector<double> k0s;      ///< ||Wbar w|| / eps_x
  std::vector<double> decoded_norms;  ///< ||Wbar w||
};

/// k0 and r_x each neuron's H must be fitted for.
struct HRequest {
  double k0 = 0.0;
  double r_x = 0.0;
};

std::vector<HRequest> h_requests(const Decoder& decoder, const ConceptFunction& target_fn);

/// a*_r = (d_out / m) sum_s sum_r' B[s, r] b_{r',s} H_{r',s}(theta <w_r, Wbar w_{r',s}>, sqrt(m/2) A[r, d-1]),
/// placed in column d-1 of A*. `fits` holds one fit per concept neuron.
TargetParams build_target_params(const RnnParams& params, const Decoder& decoder,
                                 const ConceptFunction& target_fn,
                                 const std::vector<IndicatorFit>& fits);

struct ExistenceStats {
  double mean_abs_err = 0.0;
  double correlation = 0.0;
  std::vector<double> pseudo;   ///< output 0 per sequence
  std::vector<double> target;
};

/// Pseudo-network with offsets (0, A*) against the concept on each sequence.
ExistenceStats existence_residual(const RnnParams& params, const TargetParams& target,
                                  const ConceptFunction& target_fn,
                                  const std::vector<TrueSequence>& seqs, double eps_x);

struct ExistenceConfig {
  std::size_t m = 2048;
  std::size_t L = 4;
  std::size_t d = 4;
  double eps_x = 0.05;
  std::size_t p = 1;
  std::size_t d_out = 1;
  std::size_t n_seqs = 64;
  std::string phi = "monomial:1";  ///< taylor_preset name
  WeightStorage storage = WeightStorage::dense;
  FitHConfig fit;
};

struct ExistenceRun {
  ExistenceStats stats;
  double astar_fro = 0.0;
  double theta_scaled_min = 0.0;  ///< min over neurons of sqrt(2/m) theta
  double theta_scaled_max = 0.0;
  double worst_fit_error = 0.0;
};

/// One seed: random network, a concept with p neurons of activation cfg.phi
/// (b = 1 when p = 1), decoder of h(L-1), fitted H, A*, and the residual.
ExistenceRun run_existence(const ExistenceConfig& cfg, std::uint64_t seed);

}  // namespace seqlab
