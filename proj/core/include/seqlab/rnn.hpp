#pragma once

#include "seqlab/numerics.hpp"
#include "seqlab/sequences.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace seqlab {

enum class BVariance { one_over_dout, two_over_dout };
enum class WeightStorage { dense, streamed };

BVariance parse_b_variance(std::string_view name);

/// Random-initialization ReLU RNN: h(l) = relu(A x(l) + W h(l-1)), y = B h(L).
struct RnnParams {
  std::size_t m = 0;
  std::size_t d = 0;
  std::size_t d_out = 0;
  WeightMatrix W;  ///< m x m
  Mat A;           ///< m x d
  Mat B;           ///< d_out x m
  BVariance b_mode = BVariance::one_over_dout;
};

/// W, A ~ N(0, 2/m); B ~ N(0, 1/d_out) or N(0, 2/d_out). W rows come from
/// rng.split("W").split(r), so dense and streamed storage hold the same matrix.
RnnParams init_params(const RngStream& rng, std::size_t m, std::size_t d, std::size_t d_out,
                      BVariance b_mode = BVariance::one_over_dout,
                      WeightStorage storage = WeightStorage::dense);

/// Bit-packed diagonal of a sign matrix: bit r is 1 iff the preactivation is >= 0.
class SignMask {
 public:
  SignMask() = default;
  explicit SignMask(const Vec& preactivation);

  [[nodiscard]] std::size_t size() const noexcept { return size_; }
  [[nodiscard]] bool operator[](std::size_t r) const noexcept {
    return (words_[r >> 6] >> (r & 63)) & 1U;
  }
  [[nodiscard]] std::size_t count() const noexcept;
  /// Hamming distance to another mask of the same size.
  [[nodiscard]] std::size_t distance(const SignMask& other) const;

  [[nodiscard]] Vec apply(const Vec& v) const;
  void apply_rows(Eigen::Ref<Mat> m) const;
  [[nodiscard]] Vec as_vector() const;

 private:
  std::vector<std::uint64_t> words_;
  std::size_t size_ = 0;
};

struct ForwardTrace {
  std::vector<Vec> h;          ///< h[0] = 0, ..., h[L]
  std::vector<Vec> g;          ///< g[l-1] = A x(l) + W h(l-1)
  std::vector<SignMask> D;     ///< D[l-1] masks g[l-1]

  [[nodiscard]] std::size_t L() const noexcept { return g.size(); }
};

/// tokens is L x d, one token per row.
ForwardTrace forward(const RnnParams& params, const Mat& tokens);
ForwardTrace forward(const RnnParams& params, const NormalizedSequence& seq);

/// B h(L).
Vec rnn_output(const RnnParams& params, const Mat& tokens);

/// Hidden states of N sequences in lockstep. inputs[l] is d x N and holds
/// token l+1 of every sequence; returns h(step) (m x N) for each requested
/// step, in the order given. One product with W per time step.
std::vector<Mat> hidden_states_batch(const RnnParams& params, std::span<const Mat> inputs,
                                     std::span<const std::size_t> record_steps);

/// Back_{i->j} = B D(j) W ... D(i+1) W, with Back_{i->i} = B. 1 <= i <= j <= L.
Mat back_matrix(const RnnParams& params, const ForwardTrace& trace, std::size_t i,
                std::size_t j);

/// Offsets (W', A') added to the initialization.
struct WeightOffsets {
  std::optional<Mat> W;  ///< m x m; nullopt stands for the zero matrix
  Mat A;                 ///< m x d
};

/// First-order term sum_i Back_{i->L} D(i) (W' h(i-1) + A' x(i)), evaluated by
/// forward tangent propagation s(l) = D(l) (W s(l-1) + W' h(l-1) + A' x(l)).
Vec pseudo_forward(const RnnParams& params, const ForwardTrace& trace,
                   const WeightOffsets& offsets, const Mat& tokens);

/// Pseudo-network outputs (d_out x N) for a batch; same layout as
/// hidden_states_batch. One product with W per time step.
Mat pseudo_forward_batch(const RnnParams& params, std::span<const Mat> inputs,
                         const WeightOffsets& offsets);

/// ||F(W + tW', A + tA') - F(W, A) - t * pseudo|| / (t ||pseudo|| + 1e-12).
/// Requires dense W.
double coupling_residual(const RnnParams& params, const Mat& tokens,
                         const WeightOffsets& offsets, double t);

/// Gaussian offsets whose operator norms are about delta / sqrt(m).
WeightOffsets random_offsets(RngStream& rng, std::size_t m, std::size_t d, double delta);

struct NormDiagnostics {
  std::vector<double> norms;           ///< ||h(l)||, l = 1..L
  std::vector<double> targets;         ///< sqrt(2 + (l - 2) eps_x^2)
  std::vector<double> residuals;       ///< |norms - targets|
  std::vector<double> base_distance;   ///< ||h(l) - h_(0)(l)||
  double base_bound = 0.0;             ///< sqrt(L) eps_x
};

NormDiagnostics norm_diagnostics(const RnnParams& params, const NormalizedSequence& seq);

/// sqrt(2 + (l - 2) eps_x^2).
double hidden_norm_target(std::size_t l, double eps_x);

struct DiagnosticBounds {
  double rho = 0.0;                 ///< 100 L d_out log m
  std::optional<double> varrho;     ///< 100 L d_out p C_eps log m / eps
};

DiagnosticBounds diagnostic_bounds(std::size_t L, std::size_t d_out, std::size_t m);
DiagnosticBounds diagnostic_bounds(std::size_t L, std::size_t d_out, std::size_t m,
                                   std::size_t p, double c_eps, double eps);

}  // namespace seqlab
