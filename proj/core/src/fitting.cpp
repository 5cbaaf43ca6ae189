#include "seqlab/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace seqlab {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Normalized probabilists' Hermite values He_n(x) / sqrt(n!), n = 0..K.
void hermite_row(double x, std::size_t K, std::vector<double>& out) {
  out.assign(K + 1, 0.0);
  out[0] = 1.0;
  if (K == 0) return;
  out[1] = x;
  for (std::size_t n = 1; n < K; ++n) {
    // He_{n+1} = x He_n - n He_{n-1}, rescaled by sqrt((n+1)!).
    const double dn = static_cast<double>(n);
    out[n + 1] = (x * out[n] - std::sqrt(dn) * out[n - 1]) / std::sqrt(dn + 1.0);
  }
}

std::vector<std::pair<int, int>> make_basis(std::size_t K) {
  std::vector<std::pair<int, int>> basis;
  for (std::size_t t = 0; t <= K; ++t) {
    for (std::size_t a = 0; a <= t; ++a) basis.emplace_back(static_cast<int>(a), static_cast<int>(t - a));
  }
  return basis;
}

// Psi[n, i] = basis_i(alpha_n, b0_n).
Mat basis_matrix(const Vec& alpha, const Vec& b0, const std::vector<std::pair<int, int>>& basis,
                 std::size_t K) {
  Mat psi(alpha.size(), static_cast<Eigen::Index>(basis.size()));
  std::vector<double> ha, hb;
  for (Eigen::Index n = 0; n < alpha.size(); ++n) {
    hermite_row(alpha[n], K, ha);
    hermite_row(b0[n], K, hb);
    for (std::size_t i = 0; i < basis.size(); ++i) {
      psi(n, static_cast<Eigen::Index>(i)) = ha[basis[i].first] * hb[basis[i].second];
    }
  }
  return psi;
}

// P[j, n] = E_beta 1[alpha_n u_j + beta s_j + b0_n >= 0].
Mat indicator_matrix(const std::vector<double>& us, double r_x, const Vec& alpha, const Vec& b0) {
  Mat P(static_cast<Eigen::Index>(us.size()), alpha.size());
  for (std::size_t j = 0; j < us.size(); ++j) {
    const double s = std::sqrt(r_x * r_x - us[j] * us[j]);
    for (Eigen::Index n = 0; n < alpha.size(); ++n) {
      P(static_cast<Eigen::Index>(j), n) = normal_cdf((alpha[n] * us[j] + b0[n]) / s);
    }
  }
  return P;
}

std::vector<double> grid(double r_x, std::size_t n) {
  std::vector<double> us(n);
  const double lo = -0.95 * r_x;
  for (std::size_t j = 0; j < n; ++j) {
    us[j] = n == 1 ? 0.0 : lo + 1.9 * r_x * static_cast<double>(j) / static_cast<double>(n - 1);
  }
  return us;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

double IndicatorFit::operator()(double alpha, double b0) const {
  std::vector<double> ha, hb;
  hermite_row(alpha, K, ha);
  hermite_row(b0, K, hb);
  double acc = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    acc += coeffs[static_cast<Eigen::Index>(i)] * ha[basis[i].first] * hb[basis[i].second];
  }
  return acc;
}

IndicatorFit fit_h(const std::function<double(double)>& phi, double k0, double r_x,
                   const FitHConfig& cfg, RngStream rng) {
  if (!(r_x > 0.0)) throw std::invalid_argument("fit_h: r_x must be positive");
  if (cfg.n_mc < 10000) throw std::invalid_argument("fit_h: n_mc must be at least 10^4");
  if (cfg.grid < 2 || cfg.check_grid < 2) throw std::invalid_argument("fit_h: grids need at least 2 points");
  if (!(cfg.ridge >= 0.0)) throw std::invalid_argument("fit_h: ridge must be >= 0");

  IndicatorFit fit;
  fit.K = cfg.K;
  fit.k0 = k0;
  fit.r_x = r_x;
  fit.basis = make_basis(cfg.K);
  const auto nb = static_cast<Eigen::Index>(fit.basis.size());

  RngStream train_rng = rng.split("train");
  const Vec alpha = gaussian_vector(train_rng, cfg.n_mc, 1.0);
  const Vec b0 = gaussian_vector(train_rng, cfg.n_mc, 1.0);
  const std::vector<double> us = grid(r_x, cfg.grid);
  const Mat G = indicator_matrix(us, r_x, alpha, b0) * basis_matrix(alpha, b0, fit.basis, cfg.K) /
                static_cast<double>(cfg.n_mc);
  Vec y(static_cast<Eigen::Index>(us.size()));
  for (std::size_t j = 0; j < us.size(); ++j) y[static_cast<Eigen::Index>(j)] = phi(k0 * us[j]);

  const Mat normal = G.transpose() * G + cfg.ridge * Mat::Identity(nb, nb);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(normal);
  const auto& sv = svd.singularValues();
  fit.condition = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : std::numeric_limits<double>::infinity();
  if (!std::isfinite(fit.condition) || fit.condition > 1e15) {
    throw std::runtime_error("fit_h: normal equations are ill-conditioned (condition " +
                             std::to_string(fit.condition) + "); increase ridge");
  }
  fit.coeffs = normal.ldlt().solve(G.transpose() * y);
  fit.train_rmse = std::sqrt((G * fit.coeffs - y).squaredNorm() / static_cast<double>(us.size()));

  for (double u : grid(r_x, cfg.check_grid)) {
    fit.sup_error = std::max(fit.sup_error, std::abs(indicator_expectation_exact(fit, u) - phi(k0 * u)));
  }

  constexpr int kSteps = 60;
  const double step = 6.0 / kSteps;
  for (int i = 0; i <= kSteps; ++i) {
    const double b = -3.0 + step * i;
    double prev = fit(-3.0, b);
    for (int k = 1; k <= kSteps; ++k) {
      const double cur = fit(-3.0 + step * k, b);
      fit.lipschitz_alpha = std::max(fit.lipschitz_alpha, std::abs(cur - prev) / step);
      prev = cur;
    }
  }
  return fit;
}

double indicator_expectation_exact(const IndicatorFit& fit, double u) {
  const double r = fit.r_x;
  if (!(std::abs(u) < r)) throw std::invalid_argument("indicator_expectation_exact: need |u| < r_x");
  // With Z = (alpha u + beta s) / r_x ~ N(0, 1), E[He_a(alpha) | Z] = (u / r_x)^a He_a(Z) and
  // E[1[Z >= -b0 / r_x] He_a(Z)] = phi(b0 / r_x) He_(a-1)(-b0 / r_x) for a >= 1, so only
  // the b0 integral is left. It is done by the trapezoid rule on [-12, 12].
  constexpr int kNodes = 4801;
  constexpr double kLo = -12.0, kHi = 12.0;
  const double step = (kHi - kLo) / (kNodes - 1);
  const double rho = u / r;
  const auto K = fit.K;
  std::vector<double> hb, ha;
  // m[a][b] = E_b0[He_b(b0)/sqrt(b!) * Psi_a(b0)] / sqrt(a!)
  std::vector<std::vector<double>> m(K + 1, std::vector<double>(K + 1, 0.0));
  for (int k = 0; k < kNodes; ++k) {
    const double b = kLo + step * k;
    const double w = (k == 0 || k == kNodes - 1 ? 0.5 : 1.0) * step * std::exp(-0.5 * b * b) / std::sqrt(2.0 * std::numbers::pi);
    hermite_row(b, K, hb);
    hermite_row(-b / r, K, ha);
    const double t = b / r;
    const double dens = std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
    for (std::size_t a = 0; a <= K; ++a) {
      // He_(a-1)(x) / sqrt(a!) = ha[a-1] / sqrt(a)
      const double psi = a == 0 ? normal_cdf(t) : dens * ha[a - 1] / std::sqrt(static_cast<double>(a));
      for (std::size_t j = 0; j + a <= K; ++j) m[a][j] += w * hb[j] * psi;
    }
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < fit.basis.size(); ++i) {
    const auto [a, bb] = fit.basis[i];
    acc += fit.coeffs[static_cast<Eigen::Index>(i)] * std::pow(rho, a) * m[a][bb];
  }
  return acc;
}

double indicator_expectation(const IndicatorFit& fit, double u, std::size_t n, RngStream rng) {
  if (!(std::abs(u) < fit.r_x)) throw std::invalid_argument("indicator_expectation: need |u| < r_x");
  const Vec alpha = gaussian_vector(rng, n, 1.0);
  const Vec beta = gaussian_vector(rng, n, 1.0);
  const Vec b0 = gaussian_vector(rng, n, 1.0);
  const double s = std::sqrt(fit.r_x * fit.r_x - u * u);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    if (alpha[k] * u + beta[k] * s + b0[k] >= 0.0) acc += fit(alpha[k], b0[k]);
  }
  return acc / static_cast<double>(n);
}

std::vector<HRequest> h_requests(const Decoder& decoder, const ConceptFunction& target_fn) {
  if (decoder.variant != DecoderVariant::true_seq) {
    throw std::invalid_argument("h_requests: needs a true_seq decoder");
  }
  if (decoder.output_size() != target_fn.input_size) {
    throw std::invalid_argument("h_requests: decoder and concept geometries differ");
  }
  const double r_x = std::sqrt(2.0 + static_cast<double>(decoder.L - 2) * decoder.eps_x * decoder.eps_x);
  std::vector<HRequest> out;
  for (const auto& n : target_fn.neurons) {
    const double norm = (decoder.matrix * n.w).norm();
    out.push_back({norm / decoder.eps_x, r_x});
  }
  return out;
}

TargetParams build_target_params(const RnnParams& params, const Decoder& decoder,
                                 const ConceptFunction& target_fn,
                                 const std::vector<IndicatorFit>& fits) {
  if (decoder.variant != DecoderVariant::true_seq) {
    throw std::invalid_argument("build_target_params: needs a true_seq decoder");
  }
  if (decoder.output_size() != target_fn.input_size || decoder.d != params.d ||
      static_cast<std::size_t>(decoder.matrix.rows()) != params.m) {
    throw std::invalid_argument("build_target_params: geometry mismatch");
  }
  if (target_fn.d_out != params.d_out) throw std::invalid_argument("build_target_params: d_out mismatch");
  if (fits.size() != target_fn.p()) {
    throw std::invalid_argument("build_target_params: need one H fit per concept neuron (" +
                                std::to_string(target_fn.p()) + "), got " + std::to_string(fits.size()));
  }
  const auto m = static_cast<Eigen::Index>(params.m);
  const double md = static_cast<double>(params.m);
  TargetParams tp;
  tp.m = params.m;
  tp.d = params.d;
  tp.Astar = Mat::Zero(m, static_cast<Eigen::Index>(params.d));
  const Vec bias_arg = std::sqrt(md / 2.0) * params.A.col(static_cast<Eigen::Index>(params.d - 1));

  // All projections <w_r, Wbar w_r's> in one product with W.
  Mat V(m, static_cast<Eigen::Index>(target_fn.p()));
  for (std::size_t k = 0; k < target_fn.p(); ++k) {
    V.col(static_cast<Eigen::Index>(k)) = decoder.matrix * target_fn.neurons[k].w;
  }
  const Mat proj = params.W.multiply(V);

  Vec astar = Vec::Zero(m);
  for (std::size_t k = 0; k < target_fn.p(); ++k) {
    const auto& neuron = target_fn.neurons[k];
    const double norm = V.col(static_cast<Eigen::Index>(k)).norm();
    if (norm == 0.0) throw std::runtime_error("build_target_params: decoder annihilates a concept direction");
    const double theta = std::sqrt(md / 2.0) / norm;
    tp.thetas.push_back(theta);
    tp.decoded_norms.push_back(norm);
    tp.k0s.push_back(norm / decoder.eps_x);
    const auto s = static_cast<Eigen::Index>(neuron.output);
    for (Eigen::Index r = 0; r < m; ++r) {
      const double h = fits[k](theta * proj(r, static_cast<Eigen::Index>(k)), bias_arg[r]);
      astar[r] += params.B(s, r) * neuron.b * h;
    }
  }
  tp.Astar.col(static_cast<Eigen::Index>(params.d - 1)) =
      (static_cast<double>(params.d_out) / md) * astar;
  return tp;
}

ExistenceStats existence_residual(const RnnParams& params, const TargetParams& target,
                                  const ConceptFunction& target_fn,
                                  const std::vector<TrueSequence>& seqs, double eps_x) {
  if (seqs.empty()) throw std::invalid_argument("existence_residual: no sequences");
  const std::size_t L = seqs.front().L;
  const auto n = static_cast<Eigen::Index>(seqs.size());
  std::vector<Mat> inputs(L, Mat(static_cast<Eigen::Index>(params.d), n));
  ExistenceStats stats;
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& seq = seqs[static_cast<std::size_t>(k)];
    if (seq.L != L) throw std::invalid_argument("existence_residual: sequences differ in length");
    const NormalizedSequence x = normalize(seq, eps_x);
    for (std::size_t l = 0; l < L; ++l) inputs[l].col(k) = x.tokens.row(static_cast<Eigen::Index>(l)).transpose();
    stats.target.push_back(eval_concept(target_fn, seq)[0]);
  }
  const Mat out = pseudo_forward_batch(params, inputs, WeightOffsets{std::nullopt, target.Astar});
  for (Eigen::Index k = 0; k < n; ++k) {
    stats.pseudo.push_back(out(0, k));
    stats.mean_abs_err += std::abs(out(0, k) - stats.target[static_cast<std::size_t>(k)]);
  }
  stats.mean_abs_err /= static_cast<double>(n);
  stats.correlation = pearson(stats.pseudo, stats.target);
  return stats;
}

ExistenceRun run_existence(const ExistenceConfig& cfg, std::uint64_t seed) {
  const RngStream root(seed);
  const RnnParams params = init_params(root.split("rnn"), cfg.m, cfg.d, cfg.d_out,
                                       BVariance::one_over_dout, cfg.storage);
  const TaylorSeries phi = taylor_preset(cfg.phi);
  RngStream concept_rng = root.split("concept");
  ConceptFunction target_fn = random_concept(concept_rng, cfg.L, cfg.d, cfg.d_out, cfg.p, phi);
  if (cfg.p == 1) {
    for (auto& n : target_fn.neurons) n.b = 1.0;
  }
  const Decoder dec = build_decoder(params, cfg.L, cfg.eps_x, DecoderVariant::true_seq,
                                    DecodeSource::penultimate_state);

  ExistenceRun run;
  std::vector<IndicatorFit> fits;
  const auto requests = h_requests(dec, target_fn);
  for (std::size_t k = 0; k < requests.size(); ++k) {
    const auto& neuron = target_fn.neurons[k];
    fits.push_back(fit_h(neuron.phi, requests[k].k0, requests[k].r_x, cfg.fit,
                         root.split("fit").split(k)));
    run.worst_fit_error = std::max(run.worst_fit_error, fits.back().sup_error);
  }
  const TargetParams target = build_target_params(params, dec, target_fn, fits);

  RngStream seq_rng = root.split("sequences");
  std::vector<TrueSequence> seqs;
  for (std::size_t k = 0; k < cfg.n_seqs; ++k) seqs.push_back(sample_true_sequence(seq_rng, cfg.L, cfg.d));
  run.stats = existence_residual(params, target, target_fn, seqs, cfg.eps_x);
  run.astar_fro = target.Astar.norm();
  const double scale = std::sqrt(2.0 / static_cast<double>(cfg.m));
  run.theta_scaled_min = std::numeric_limits<double>::infinity();
  for (double t : target.thetas) {
    run.theta_scaled_min = std::min(run.theta_scaled_min, scale * t);
    run.theta_scaled_max = std::max(run.theta_scaled_max, scale * t);
  }
  return run;
}

}  // namespace seqlab
