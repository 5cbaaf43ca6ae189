#include "seqlab/rnn.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace seqlab {

namespace {

void check_tokens(const RnnParams& params, const Mat& tokens) {
  if (static_cast<std::size_t>(tokens.cols()) != params.d) {
    throw std::invalid_argument("token dimension " + std::to_string(tokens.cols()) +
                                " does not match RNN input dimension " +
                                std::to_string(params.d));
  }
  if (tokens.rows() == 0) throw std::invalid_argument("empty token sequence");
}

Vec relu(const Vec& g) { return g.cwiseMax(0.0); }

void check_offsets(const RnnParams& params, const WeightOffsets& offsets) {
  if (offsets.W && (static_cast<std::size_t>(offsets.W->rows()) != params.m ||
                    static_cast<std::size_t>(offsets.W->cols()) != params.m)) {
    throw std::invalid_argument("W offset must be m x m");
  }
  if (static_cast<std::size_t>(offsets.A.rows()) != params.m ||
      static_cast<std::size_t>(offsets.A.cols()) != params.d) {
    throw std::invalid_argument("A offset must be m x d");
  }
}

}  // namespace

BVariance parse_b_variance(std::string_view name) {
  if (name == "one_over_dout") return BVariance::one_over_dout;
  if (name == "two_over_dout") return BVariance::two_over_dout;
  throw std::invalid_argument("unknown B variance mode '" + std::string(name) + "'");
}

RnnParams init_params(const RngStream& rng, std::size_t m, std::size_t d, std::size_t d_out,
                      BVariance b_mode, WeightStorage storage) {
  if (m == 0 || d == 0 || d_out == 0) {
    throw std::invalid_argument("init_params: m, d and d_out must be positive");
  }
  const double w_std = std::sqrt(2.0 / static_cast<double>(m));
  const double b_var = (b_mode == BVariance::one_over_dout ? 1.0 : 2.0) / static_cast<double>(d_out);

  RnnParams p;
  p.m = m;
  p.d = d;
  p.d_out = d_out;
  p.b_mode = b_mode;
  WeightMatrix::Streamed w_source{rng.split("W"), m, m, w_std};
  if (storage == WeightStorage::dense) {
    p.W = WeightMatrix(gaussian_matrix_by_rows(w_source.base, m, m, w_std));
  } else {
    p.W = WeightMatrix(std::move(w_source));
  }
  RngStream a_rng = rng.split("A");
  p.A = gaussian_matrix(a_rng, m, d, w_std);
  RngStream b_rng = rng.split("B");
  p.B = gaussian_matrix(b_rng, d_out, m, std::sqrt(b_var));
  return p;
}

SignMask::SignMask(const Vec& preactivation)
    : words_((static_cast<std::size_t>(preactivation.size()) + 63) / 64, 0),
      size_(static_cast<std::size_t>(preactivation.size())) {
  for (std::size_t r = 0; r < size_; ++r) {
    if (preactivation[static_cast<Eigen::Index>(r)] >= 0.0) words_[r >> 6] |= std::uint64_t{1} << (r & 63);
  }
}

std::size_t SignMask::count() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::size_t SignMask::distance(const SignMask& other) const {
  if (other.size_ != size_) throw std::invalid_argument("SignMask::distance: size mismatch");
  std::size_t n = 0;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    n += static_cast<std::size_t>(std::popcount(words_[i] ^ other.words_[i]));
  }
  return n;
}

Vec SignMask::apply(const Vec& v) const {
  if (static_cast<std::size_t>(v.size()) != size_) throw std::invalid_argument("SignMask::apply: size mismatch");
  Vec out = v;
  for (std::size_t r = 0; r < size_; ++r) {
    if (!(*this)[r]) out[static_cast<Eigen::Index>(r)] = 0.0;
  }
  return out;
}

void SignMask::apply_rows(Eigen::Ref<Mat> m) const {
  if (static_cast<std::size_t>(m.rows()) != size_) throw std::invalid_argument("SignMask::apply_rows: size mismatch");
  for (std::size_t r = 0; r < size_; ++r) {
    if (!(*this)[r]) m.row(static_cast<Eigen::Index>(r)).setZero();
  }
}

Vec SignMask::as_vector() const {
  Vec out(size_);
  for (std::size_t r = 0; r < size_; ++r) out[static_cast<Eigen::Index>(r)] = (*this)[r] ? 1.0 : 0.0;
  return out;
}

ForwardTrace forward(const RnnParams& params, const Mat& tokens) {
  check_tokens(params, tokens);
  const auto L = static_cast<std::size_t>(tokens.rows());
  ForwardTrace trace;
  trace.h.reserve(L + 1);
  trace.g.reserve(L);
  trace.D.reserve(L);
  trace.h.push_back(Vec::Zero(params.m));
  for (std::size_t l = 0; l < L; ++l) {
    Vec g = params.A * tokens.row(l).transpose();
    if (l > 0) g += params.W.multiply(trace.h.back());
    trace.D.emplace_back(g);
    trace.h.push_back(relu(g));
    trace.g.push_back(std::move(g));
  }
  return trace;
}

ForwardTrace forward(const RnnParams& params, const NormalizedSequence& seq) {
  if (seq.d != params.d) throw std::invalid_argument("forward: sequence d does not match RNN d");
  return forward(params, seq.tokens);
}

Vec rnn_output(const RnnParams& params, const Mat& tokens) {
  const ForwardTrace trace = forward(params, tokens);
  return params.B * trace.h.back();
}

std::vector<Mat> hidden_states_batch(const RnnParams& params, std::span<const Mat> inputs,
                                     std::span<const std::size_t> record_steps) {
  if (inputs.empty()) throw std::invalid_argument("hidden_states_batch: no time steps");
  const Eigen::Index n = inputs.front().cols();
  for (const auto& x : inputs) {
    if (static_cast<std::size_t>(x.rows()) != params.d || x.cols() != n) {
      throw std::invalid_argument("hidden_states_batch: every step must be d x N");
    }
  }
  for (auto s : record_steps) {
    if (s > inputs.size()) throw std::invalid_argument("hidden_states_batch: step out of range");
  }
  std::vector<Mat> recorded(record_steps.size());
  Mat h = Mat::Zero(params.m, n);
  auto record = [&](std::size_t step) {
    for (std::size_t k = 0; k < record_steps.size(); ++k) {
      if (record_steps[k] == step) recorded[k] = h;
    }
  };
  record(0);
  for (std::size_t l = 0; l < inputs.size(); ++l) {
    Mat g = params.A * inputs[l];
    if (l > 0) g += params.W.multiply(h);
    h = g.cwiseMax(0.0);
    record(l + 1);
  }
  return recorded;
}

Mat back_matrix(const RnnParams& params, const ForwardTrace& trace, std::size_t i, std::size_t j) {
  if (i < 1 || i > j || j > trace.L()) {
    throw std::invalid_argument("back_matrix: need 1 <= i <= j <= L");
  }
  // Row form: R <- (R D(k)) W for k = j, ..., i+1.
  Mat rt = params.B.transpose();  // m x d_out
  for (std::size_t k = j; k > i; --k) {
    trace.D[k - 1].apply_rows(rt);
    rt = params.W.multiply_transpose(rt);
  }
  return rt.transpose();
}

Vec pseudo_forward(const RnnParams& params, const ForwardTrace& trace,
                   const WeightOffsets& offsets, const Mat& tokens) {
  check_tokens(params, tokens);
  check_offsets(params, offsets);
  if (static_cast<std::size_t>(tokens.rows()) != trace.L()) {
    throw std::invalid_argument("pseudo_forward: trace and tokens differ in length");
  }
  Vec s = Vec::Zero(params.m);
  for (std::size_t l = 0; l < trace.L(); ++l) {
    Vec z = offsets.A * tokens.row(l).transpose();
    if (offsets.W) z += (*offsets.W) * trace.h[l];
    if (l > 0) z += params.W.multiply(s);
    s = trace.D[l].apply(z);
  }
  return params.B * s;
}

Mat pseudo_forward_batch(const RnnParams& params, std::span<const Mat> inputs,
                         const WeightOffsets& offsets) {
  check_offsets(params, offsets);
  if (inputs.empty()) throw std::invalid_argument("pseudo_forward_batch: no time steps");
  const Eigen::Index n = inputs.front().cols();
  for (const auto& x : inputs) {
    if (static_cast<std::size_t>(x.rows()) != params.d || x.cols() != n) {
      throw std::invalid_argument("pseudo_forward_batch: every step must be d x N");
    }
  }
  const auto m = static_cast<Eigen::Index>(params.m);
  Mat h = Mat::Zero(m, n);
  Mat s = Mat::Zero(m, n);
  for (std::size_t l = 0; l < inputs.size(); ++l) {
    Mat g = params.A * inputs[l];
    Mat z = offsets.A * inputs[l];
    if (offsets.W) z += (*offsets.W) * h;
    if (l > 0) {
      Mat stacked(m, 2 * n);
      stacked << h, s;
      const Mat product = params.W.multiply(stacked);
      g += product.leftCols(n);
      z += product.rightCols(n);
    }
    for (Eigen::Index r = 0; r < m; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) {
        const bool on = g(r, c) >= 0.0;
        h(r, c) = on ? g(r, c) : 0.0;
        s(r, c) = on ? z(r, c) : 0.0;
      }
    }
  }
  return params.B * s;
}

double coupling_residual(const RnnParams& params, const Mat& tokens,
                         const WeightOffsets& offsets, double t) {
  check_offsets(params, offsets);
  if (t == 0.0) return 0.0;
  const ForwardTrace trace = forward(params, tokens);
  const Vec base = params.B * trace.h.back();
  const Vec first_order = pseudo_forward(params, trace, offsets, tokens);

  RnnParams moved;
  moved.m = params.m;
  moved.d = params.d;
  moved.d_out = params.d_out;
  moved.b_mode = params.b_mode;
  Mat w = params.W.dense();
  if (offsets.W) w += t * (*offsets.W);
  moved.W = WeightMatrix(std::move(w));
  moved.A = params.A + t * offsets.A;
  moved.B = params.B;
  const Vec shifted = rnn_output(moved, tokens);
  return (shifted - base - t * first_order).norm() / (t * first_order.norm() + 1e-12);
}

WeightOffsets random_offsets(RngStream& rng, std::size_t m, std::size_t d, double delta) {
  const double md = static_cast<double>(m);
  WeightOffsets out;
  // A Gaussian m x n matrix with entry std s has operator norm about
  // s (sqrt(m) + sqrt(n)).
  out.W = gaussian_matrix(rng, m, m, delta / (2.0 * md));
  out.A = gaussian_matrix(rng, m, d, delta / (std::sqrt(md) * (std::sqrt(md) + std::sqrt(static_cast<double>(d)))));
  return out;
}

double hidden_norm_target(std::size_t l, double eps_x) {
  return std::sqrt(2.0 + (static_cast<double>(l) - 2.0) * eps_x * eps_x);
}

NormDiagnostics norm_diagnostics(const RnnParams& params, const NormalizedSequence& seq) {
  const ForwardTrace trace = forward(params, seq);
  const ForwardTrace base = forward(params, base_sequence(seq.L, seq.d, seq.eps_x));
  NormDiagnostics out;
  out.base_bound = std::sqrt(static_cast<double>(seq.L)) * seq.eps_x;
  for (std::size_t l = 1; l <= seq.L; ++l) {
    const double norm = trace.h[l].norm();
    const double target = hidden_norm_target(l, seq.eps_x);
    out.norms.push_back(norm);
    out.targets.push_back(target);
    out.residuals.push_back(std::abs(norm - target));
    out.base_distance.push_back((trace.h[l] - base.h[l]).norm());
  }
  return out;
}

DiagnosticBounds diagnostic_bounds(std::size_t L, std::size_t d_out, std::size_t m) {
  return {100.0 * static_cast<double>(L * d_out) * std::log(static_cast<double>(m)), std::nullopt};
}

DiagnosticBounds diagnostic_bounds(std::size_t L, std::size_t d_out, std::size_t m,
                                   std::size_t p, double c_eps, double eps) {
  DiagnosticBounds b = diagnostic_bounds(L, d_out, m);
  b.varrho = 100.0 * static_cast<double>(L * d_out * p) * c_eps * std::log(static_cast<double>(m)) / eps;
  return b;
}

}  // namespace seqlab
