#pragma once

#include "seqlab/languages.hpp"
#include "seqlab/numerics.hpp"
#include "seqlab/rnn.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace seqlab {

enum class Activation { relu, tanh };
enum class LossKind { logistic, l2 };
enum class OptimizerKind { sgd, rmsprop };
/// one_hot_bias: '0' -> (1, 0, 1), '1' -> (0, 1, 1). zero_one: scalar 0/1.
enum class TokenEncoding { one_hot_bias, zero_one };

Activation parse_activation(std::string_view name);
OptimizerKind parse_optimizer(std::string_view name);
LossKind parse_loss(std::string_view name);
std::string to_string(Activation a);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::rmsprop;
  double lr = 1e-2;
  double momentum = 0.0;  ///< sgd: v <- mu v + g, theta <- theta - lr v
  double alpha = 0.99;    ///< rmsprop: s <- alpha s + (1 - alpha) g^2
  double eps = 1e-8;      ///< rmsprop: theta <- theta - lr g / sqrt(s + eps)
};

struct TrainConfig {
  OptimizerConfig optimizer;
  std::size_t batch = 32;
  std::size_t epochs = 100;
  double lambda_scale = 1.0;
  LossKind loss = LossKind::logistic;
  Activation activation = Activation::tanh;
  bool train_readout = true;
  std::uint64_t seed = 0;
  /// Multiplies the init standard deviation of W, A and B.
  double init_scale = 1.0;
  TokenEncoding encoding = TokenEncoding::one_hot_bias;

  /// Throws std::invalid_argument on an invalid setting.
  void validate() const;
};

/// Trainable offsets (W', A', B'); the network runs with W + W', A + A', B + B'.
struct Offsets {
  Mat W;
  Mat A;
  Mat B;

  static Offsets zeros(const RnnParams& params);
};

struct Gradients {
  Mat W;
  Mat A;
  std::optional<Mat> B;  ///< present when train_readout
  double loss = 0.0;
  Vec output;            ///< lambda (B + B') h(L)
};

/// Exact reverse-mode gradient of G(lambda F(x; W + W', A + A', B + B'), y)
/// with respect to the offsets. tokens is L x d; target has d_out entries
/// (a 0/1 label for the logistic loss). ReLU uses subgradient 0 at 0.
Gradients rnn_gradients(const RnnParams& params, const Offsets& offsets, const Mat& tokens,
                        const Vec& target, const TrainConfig& cfg);

/// Loss only (for finite-difference checks).
double rnn_loss(const RnnParams& params, const Offsets& offsets, const Mat& tokens,
                const Vec& target, const TrainConfig& cfg);

/// One slot of optimizer state per parameter; starts at zero.
struct OptimizerState {
  Mat W;
  Mat A;
  Mat B;

  static OptimizerState zeros(const RnnParams& params);
};

/// In-place update of one parameter and its slot.
void optimizer_step(Mat& param, const Mat& grad, Mat& slot, const OptimizerConfig& cfg);
void optimizer_step(Offsets& offsets, const Gradients& grads, OptimizerState& state,
                    const OptimizerConfig& cfg);

Mat encode_tokens(std::string_view bits, TokenEncoding encoding);
std::size_t token_dimension(TokenEncoding encoding);

struct EpochStats {
  double train_loss = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  double w_disp = 0.0;  ///< ||W_t - W_0||_F / sqrt(m)
  double a_disp = 0.0;  ///< ||A_t - A_0||_F
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  double final_test_acc = 0.0;
  double wall_seconds = 0.0;
};

/// Mini-batch training of a binary classifier with d_out = 1: accept iff
/// sigmoid(output) > 0.5 after the last symbol. Throws std::runtime_error
/// naming the last finite epoch if the loss stops being finite.
TrainReport train_classifier(const LabeledDataset& data, std::size_t m, const TrainConfig& cfg);

}  // namespace seqlab
