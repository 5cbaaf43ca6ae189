#include "seqlab/training.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace seqlab {

namespace {

using ColMat = Eigen::MatrixXd;

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double loss_and_slope(const Vec& z, const Vec& target, LossKind kind, Vec& dz) {
  if (kind == LossKind::logistic) {
    if (z.size() != 1) throw std::invalid_argument("logistic loss needs d_out = 1");
    dz.resize(1);
    dz[0] = sigmoid(z[0]) - target[0];
    return softplus(z[0]) - target[0] * z[0];
  }
  dz = z - target;
  return 0.5 * dz.squaredNorm();
}

// Forward and backward pass on effective weights. Gradients are added to
// gW, gA and (if non-null) gB. Returns the loss and leaves the output in z.
double accumulate(const Mat& We, const Mat& Ae, const Mat& Be, const Mat& tokens, const Vec& target,
                  const TrainConfig& cfg, Mat& gW, Mat& gA, Mat* gB, Vec& z, ColMat& H, ColMat& G) {
  const Eigen::Index T = tokens.rows();
  const Eigen::Index m = We.rows();
  if (tokens.cols() != Ae.cols()) throw std::invalid_argument("rnn_gradients: token dimension mismatch");
  if (T == 0) throw std::invalid_argument("rnn_gradients: empty sequence");
  H.resize(m, T + 1);
  G.resize(m, T);
  H.col(0).setZero();
  const bool relu = cfg.activation == Activation::relu;
  for (Eigen::Index l = 0; l < T; ++l) {
    G.col(l).noalias() = Ae * tokens.row(l).transpose();
    if (l > 0) G.col(l).noalias() += We * H.col(l);
    if (relu) H.col(l + 1) = G.col(l).cwiseMax(0.0);
    else H.col(l + 1) = G.col(l).array().tanh().matrix();
  }
  z = cfg.lambda_scale * (Be * H.col(T));
  Vec dz;
  const double loss = loss_and_slope(z, target, cfg.loss, dz);
  if (!std::isfinite(loss)) throw std::domain_error("rnn_gradients: non-finite loss");
  if (gB) gB->noalias() += cfg.lambda_scale * dz * H.col(T).transpose();
  Vec dh = cfg.lambda_scale * (Be.transpose() * dz);
  Vec dg(m);
  for (Eigen::Index l = T - 1; l >= 0; --l) {
    if (relu) {
      for (Eigen::Index r = 0; r < m; ++r) dg[r] = G(r, l) > 0.0 ? dh[r] : 0.0;
    } else {
      dg = dh.array() * (1.0 - H.col(l + 1).array().square());
    }
    if (l > 0) gW.noalias() += dg * H.col(l).transpose();
    gA.noalias() += dg * tokens.row(l);
    if (l > 0) dh.noalias() = We.transpose() * dg;
  }
  return loss;
}

}  // namespace

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "rmsprop") return OptimizerKind::rmsprop;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "'");
}

LossKind parse_loss(std::string_view name) {
  if (name == "logistic") return LossKind::logistic;
  if (name == "l2") return LossKind::l2;
  throw std::invalid_argument("unknown loss '" + std::string(name) + "'");
}

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

void TrainConfig::validate() const {
  if (!(optimizer.lr > 0.0)) throw std::invalid_argument("TrainConfig: lr must be positive");
  if (batch < 1) throw std::invalid_argument("TrainConfig: batch must be >= 1");
  if (!(optimizer.alpha > 0.0 && optimizer.alpha < 1.0)) {
    throw std::invalid_argument("TrainConfig: rmsprop alpha must lie in (0, 1)");
  }
  if (!(optimizer.momentum >= 0.0 && optimizer.momentum < 1.0)) {
    throw std::invalid_argument("TrainConfig: momentum must lie in [0, 1)");
  }
  if (!(optimizer.eps > 0.0)) throw std::invalid_argument("TrainConfig: eps must be positive");
  if (!(init_scale > 0.0)) throw std::invalid_argument("TrainConfig: init_scale must be positive");
}

Offsets Offsets::zeros(const RnnParams& params) {
  const auto m = static_cast<Eigen::Index>(params.m);
  return {Mat::Zero(m, m), Mat::Zero(m, static_cast<Eigen::Index>(params.d)),
          Mat::Zero(static_cast<Eigen::Index>(params.d_out), m)};
}

OptimizerState OptimizerState::zeros(const RnnParams& params) {
  const Offsets z = Offsets::zeros(params);
  return {z.W, z.A, z.B};
}

Gradients rnn_gradients(const RnnParams& params, const Offsets& offsets, const Mat& tokens,
                        const Vec& target, const TrainConfig& cfg) {
  const Mat We = params.W.dense() + offsets.W;
  const Mat Ae = params.A + offsets.A;
  const Mat Be = params.B + offsets.B;
  if (target.size() != Be.rows()) throw std::invalid_argument("rnn_gradients: target size must be d_out");
  Gradients g;
  g.W = Mat::Zero(We.rows(), We.cols());
  g.A = Mat::Zero(Ae.rows(), Ae.cols());
  if (cfg.train_readout) g.B = Mat::Zero(Be.rows(), Be.cols());
  ColMat H, G;
  g.loss = accumulate(We, Ae, Be, tokens, target, cfg, g.W, g.A, g.B ? &*g.B : nullptr, g.output, H, G);
  return g;
}

double rnn_loss(const RnnParams& params, const Offsets& offsets, const Mat& tokens,
                const Vec& target, const TrainConfig& cfg) {
  TrainConfig quiet = cfg;
  quiet.train_readout = false;
  return rnn_gradients(params, offsets, tokens, target, quiet).loss;
}

void optimizer_step(Mat& param, const Mat& grad, Mat& slot, const OptimizerConfig& cfg) {
  if (grad.rows() != param.rows() || grad.cols() != param.cols() || slot.rows() != param.rows() ||
      slot.cols() != param.cols()) {
    throw std::invalid_argument("optimizer_step: shape mismatch");
  }
  if (cfg.kind == OptimizerKind::sgd) {
    slot = cfg.momentum * slot + grad;
    param -= cfg.lr * slot;
  } else {
    slot = cfg.alpha * slot + (1.0 - cfg.alpha) * grad.cwiseAbs2();
    param.array() -= cfg.lr * grad.array() / (slot.array() + cfg.eps).sqrt();
  }
}

void optimizer_step(Offsets& offsets, const Gradients& grads, OptimizerState& state,
                    const OptimizerConfig& cfg) {
  optimizer_step(offsets.W, grads.W, state.W, cfg);
  optimizer_step(offsets.A, grads.A, state.A, cfg);
  if (grads.B) optimizer_step(offsets.B, *grads.B, state.B, cfg);
}

std::size_t token_dimension(TokenEncoding encoding) {
  return encoding == TokenEncoding::one_hot_bias ? 3 : 1;
}

Mat encode_tokens(std::string_view bits, TokenEncoding encoding) {
  if (bits.empty()) throw std::invalid_argument("encode_tokens: empty string");
  const auto d = static_cast<Eigen::Index>(token_dimension(encoding));
  Mat out = Mat::Zero(static_cast<Eigen::Index>(bits.size()), d);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (bits[i] != '0' && bits[i] != '1') throw std::invalid_argument("encode_tokens: non-binary symbol");
    const int s = bits[i] == '1' ? 1 : 0;
    if (encoding == TokenEncoding::one_hot_bias) {
      out(r, s) = 1.0;
      out(r, 2) = 1.0;
    } else {
      out(r, 0) = s;
    }
  }
  return out;
}

TrainReport train_classifier(const LabeledDataset& data, std::size_t m, const TrainConfig& cfg) {
  cfg.validate();
  if (data.train.empty() || data.test.empty()) throw std::invalid_argument("train_classifier: empty split");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t d = token_dimension(cfg.encoding);
  const RngStream root(cfg.seed);
  RnnParams params = init_params(root.split("rnn"), m, d, 1);
  Mat W0 = params.W.dense() * cfg.init_scale;
  Mat A0 = params.A * cfg.init_scale;
  Mat We = W0, Ae = A0, Be = params.B * cfg.init_scale;

  auto encode_split = [&](const std::vector<LabeledExample>& ex) {
    std::vector<Mat> out;
    out.reserve(ex.size());
    for (const auto& e : ex) out.push_back(encode_tokens(e.bits, cfg.encoding));
    return out;
  };
  const std::vector<Mat> train_x = encode_split(data.train);
  const std::vector<Mat> test_x = encode_split(data.test);

  OptimizerState state{Mat::Zero(We.rows(), We.cols()), Mat::Zero(Ae.rows(), Ae.cols()),
                       Mat::Zero(Be.rows(), Be.cols())};
  Mat gW(We.rows(), We.cols()), gA(Ae.rows(), Ae.cols()), gB(Be.rows(), Be.cols());
  ColMat H, G;
  Vec z, target(1);
  RngStream shuffle_rng = root.split("shuffle");
  std::vector<std::size_t> order(train_x.size());
  std::iota(order.begin(), order.end(), 0);

  auto predict = [&](const Mat& tokens) {
    Vec h = Vec::Zero(We.rows());
    for (Eigen::Index l = 0; l < tokens.rows(); ++l) {
      Vec g = Ae * tokens.row(l).transpose() + We * h;
      h = cfg.activation == Activation::relu ? Vec(g.cwiseMax(0.0)) : Vec(g.array().tanh().matrix());
    }
    return cfg.lambda_scale * (Be * h)[0];
  };

  TrainReport report;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += cfg.batch) {
      const std::size_t nb = std::min(cfg.batch, order.size() - b0);
      gW.setZero();
      gA.setZero();
      gB.setZero();
      for (std::size_t k = 0; k < nb; ++k) {
        const std::size_t idx = order[b0 + k];
        target[0] = data.train[idx].label;
        double loss = 0.0;
        try {
          loss = accumulate(We, Ae, Be, train_x[idx], target, cfg, gW, gA,
                            cfg.train_readout ? &gB : nullptr, z, H, G);
        } catch (const std::domain_error&) {
          throw std::runtime_error("train_classifier: loss diverged in epoch " + std::to_string(epoch + 1) +
                                   "; last finite epoch " + std::to_string(epoch));
        }
        loss_sum += loss;
        correct += static_cast<std::size_t>((z[0] > 0.0) == (data.train[idx].label == 1));
      }
      const double inv = 1.0 / static_cast<double>(nb);
      gW *= inv;
      gA *= inv;
      gB *= inv;
      optimizer_step(We, gW, state.W, cfg.optimizer);
      optimizer_step(Ae, gA, state.A, cfg.optimizer);
      if (cfg.train_readout) optimizer_step(Be, gB, state.B, cfg.optimizer);
    }
    EpochStats st;
    st.train_loss = loss_sum / static_cast<double>(order.size());
    if (!std::isfinite(st.train_loss) || !We.allFinite()) {
      throw std::runtime_error("train_classifier: loss diverged in epoch " + std::to_string(epoch + 1) +
                               "; last finite epoch " + std::to_string(epoch));
    }
    st.train_acc = static_cast<double>(correct) / static_cast<double>(order.size());
    std::size_t test_correct = 0;
    for (std::size_t i = 0; i < test_x.size(); ++i) {
      test_correct += static_cast<std::size_t>((predict(test_x[i]) > 0.0) == (data.test[i].label == 1));
    }
    st.test_acc = static_cast<double>(test_correct) / static_cast<double>(test_x.size());
    st.w_disp = (We - W0).norm() / std::sqrt(static_cast<double>(m));
    st.a_disp = (Ae - A0).norm();
    report.epochs.push_back(st);
  }
  report.final_test_acc = report.epochs.empty() ? 0.0 : report.epochs.back().test_acc;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace seqlab
