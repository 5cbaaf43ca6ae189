#include "seqlab/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace seqlab {

double single_layer_invert(const Mat& T, const Vec& v, const Vec& x, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("single_layer_invert: beta must be positive");
  if (T.cols() != v.size() || T.cols() != x.size()) {
    throw std::invalid_argument("single_layer_invert: T must be m x d with d = |v| = |x|");
  }
  const double m = static_cast<double>(T.rows());
  const Vec tv = T * v;
  const Vec tx = (T * x).cwiseMax(0.0);
  return 2.0 / (m * beta * beta) * tv.dot(tx);
}

DecoderVariant parse_decoder_variant(std::string_view name) {
  if (name == "full") return DecoderVariant::full;
  if (name == "true_seq") return DecoderVariant::true_seq;
  throw std::invalid_argument("unknown decoder variant '" + std::string(name) + "'");
}

std::string to_string(DecoderVariant v) { return v == DecoderVariant::full ? "full" : "true_seq"; }

std::string to_string(DecoderProvenance p) {
  return p == DecoderProvenance::analytic ? "analytic" : "fitted";
}

Decoder build_decoder(const RnnParams& params, std::size_t L, double eps_x,
                      DecoderVariant variant, DecodeSource source) {
  if (L < 1) throw std::invalid_argument("build_decoder: L must be >= 1");
  if (variant == DecoderVariant::true_seq) {
    if (L < 3) throw std::invalid_argument("build_decoder: true_seq variant needs L >= 3");
    if (params.d < 2) throw std::invalid_argument("build_decoder: true_seq variant needs d >= 2");
  }
  if (variant == DecoderVariant::full && source != DecodeSource::final_state) {
    throw std::invalid_argument("build_decoder: full variant decodes h(L) only");
  }
  const NormalizedSequence base = base_sequence(L, params.d, eps_x);
  const ForwardTrace trace = forward(params, base);

  const std::size_t last = source == DecodeSource::final_state ? L : L - 1;
  const auto d = static_cast<Eigen::Index>(params.d);
  Mat wbar = params.A;
  trace.D[0].apply_rows(wbar);
  for (std::size_t l = 2; l <= last; ++l) {
    Mat next(wbar.rows(), wbar.cols() + d);
    next.leftCols(wbar.cols()) = params.W.multiply(wbar);
    next.rightCols(d) = params.A;
    trace.D[l - 1].apply_rows(next);
    wbar = std::move(next);
  }

  Decoder dec;
  dec.variant = variant;
  dec.provenance = DecoderProvenance::analytic;
  dec.source = source;
  dec.eps_x = eps_x;
  dec.L = L;
  dec.d = params.d;
  if (variant == DecoderVariant::full) {
    dec.matrix = std::move(wbar);
    return dec;
  }
  // Blocks k = 2..L-1, first d-1 columns of each.
  const Eigen::Index inner = d - 1;
  dec.matrix.resize(wbar.rows(), static_cast<Eigen::Index>(L - 2) * inner);
  for (std::size_t k = 2; k + 1 <= L; ++k) {
    dec.matrix.middleCols(static_cast<Eigen::Index>(k - 2) * inner, inner) =
        wbar.middleCols(static_cast<Eigen::Index>(k - 1) * d, inner);
  }
  return dec;
}

Vec decode(const Decoder& dec, const Vec& h) {
  if (h.size() != dec.matrix.rows()) throw std::invalid_argument("decode: hidden size mismatch");
  return dec.matrix.transpose() * h;
}

Vec decode_target(const Decoder& dec, const NormalizedSequence& seq) {
  if (seq.L != dec.L || seq.d != dec.d) throw std::invalid_argument("decode_target: geometry mismatch");
  if (dec.variant == DecoderVariant::full) return seq.flattened();
  const std::size_t inner = dec.d - 1;
  Vec out(static_cast<Eigen::Index>((dec.L - 2) * inner));
  for (std::size_t k = 1; k + 1 < dec.L; ++k) {
    out.segment(static_cast<Eigen::Index>((k - 1) * inner), static_cast<Eigen::Index>(inner)) =
        seq.tokens.row(static_cast<Eigen::Index>(k)).head(static_cast<Eigen::Index>(inner)).transpose();
  }
  return out;
}

Vec decoder_input(const Decoder& dec, const ForwardTrace& trace) {
  if (trace.L() != dec.L) throw std::invalid_argument("decoder_input: trace length mismatch");
  return dec.source == DecodeSource::final_state ? trace.h[dec.L] : trace.h[dec.L - 1];
}

DecoderData make_decoder_data(const RnnParams& params, const Decoder& shape,
                              const std::vector<NormalizedSequence>& seqs) {
  if (seqs.empty()) throw std::invalid_argument("make_decoder_data: no sequences");
  DecoderData data;
  data.hidden.resize(static_cast<Eigen::Index>(seqs.size()), static_cast<Eigen::Index>(params.m));
  Decoder probe = shape;
  for (std::size_t n = 0; n < seqs.size(); ++n) {
    const ForwardTrace trace = forward(params, seqs[n]);
    const Vec target = decode_target(probe, seqs[n]);
    if (n == 0) data.targets.resize(static_cast<Eigen::Index>(seqs.size()), target.size());
    data.hidden.row(static_cast<Eigen::Index>(n)) = decoder_input(probe, trace).transpose();
    data.targets.row(static_cast<Eigen::Index>(n)) = target.transpose();
  }
  return data;
}

namespace {

double mean_squared_loss(const Mat& hidden, const Mat& targets, const Mat& wbar) {
  const Mat residual = hidden * wbar - targets;
  return residual.squaredNorm() / static_cast<double>(hidden.rows());
}

bool run_sgd(const DecoderData& data, const DecoderFitConfig& cfg, double lr, RngStream rng,
             Mat& wbar, std::vector<double>& losses) {
  const auto n = static_cast<std::size_t>(data.hidden.rows());
  wbar = Mat::Zero(data.hidden.cols(), data.targets.cols());
  Mat velocity = Mat::Zero(wbar.rows(), wbar.cols());
  losses.clear();
  const double start = mean_squared_loss(data.hidden, data.targets, wbar);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Mat hb, tb;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t b0 = 0; b0 < n; b0 += cfg.batch) {
      const std::size_t nb = std::min(cfg.batch, n - b0);
      hb.resize(static_cast<Eigen::Index>(nb), data.hidden.cols());
      tb.resize(static_cast<Eigen::Index>(nb), data.targets.cols());
      for (std::size_t i = 0; i < nb; ++i) {
        hb.row(static_cast<Eigen::Index>(i)) = data.hidden.row(static_cast<Eigen::Index>(order[b0 + i]));
        tb.row(static_cast<Eigen::Index>(i)) = data.targets.row(static_cast<Eigen::Index>(order[b0 + i]));
      }
      const Mat residual = hb * wbar - tb;
      const Mat grad = (2.0 / static_cast<double>(nb)) * (hb.transpose() * residual);
      velocity = cfg.momentum * velocity + grad;
      wbar -= lr * velocity;
    }
    const double loss = mean_squared_loss(data.hidden, data.targets, wbar);
    losses.push_back(loss);
    if (!std::isfinite(loss) || loss > 1e6 * (start + 1.0)) return false;
  }
  return true;
}

}  // namespace

Decoder fit_decoder(const DecoderData& data, const Decoder& shape, const DecoderFitConfig& cfg,
                    RngStream rng, DecoderFitReport* report) {
  if (data.hidden.rows() == 0) throw std::invalid_argument("fit_decoder: empty data");
  if (data.hidden.rows() != data.targets.rows()) {
    throw std::invalid_argument("fit_decoder: hidden and target row counts differ");
  }
  if (!(cfg.lr > 0.0) || cfg.batch == 0) throw std::invalid_argument("fit_decoder: need lr > 0 and batch >= 1");
  Decoder dec = shape;
  dec.provenance = DecoderProvenance::fitted;
  DecoderFitReport local;
  local.lr_used = cfg.lr;
  if (!run_sgd(data, cfg, cfg.lr, rng, dec.matrix, local.epoch_loss)) {
    local.fell_back = true;
    local.lr_used = cfg.fallback_lr;
    if (!run_sgd(data, cfg, cfg.fallback_lr, rng, dec.matrix, local.epoch_loss)) {
      throw std::runtime_error("fit_decoder: diverged at the fallback learning rate");
    }
  }
  if (report) *report = std::move(local);
  return dec;
}

InversionErrors inversion_errors(const Decoder& dec, const DecoderData& test) {
  if (test.hidden.rows() == 0) throw std::invalid_argument("inversion_errors: empty test set");
  if (test.hidden.cols() != dec.matrix.rows() || test.targets.cols() != dec.matrix.cols()) {
    throw std::invalid_argument("inversion_errors: decoder and test data are incompatible");
  }
  const Mat residual = test.hidden * dec.matrix - test.targets;
  InversionErrors out;
  for (Eigen::Index n = 0; n < residual.rows(); ++n) {
    const double tn = test.targets.row(n).norm();
    out.avg_rel_l2 += residual.row(n).norm() / (tn > 0.0 ? tn : 1.0);
    out.avg_linf += residual.row(n).cwiseAbs().maxCoeff();
  }
  out.avg_rel_l2 /= static_cast<double>(residual.rows());
  out.avg_linf /= static_cast<double>(residual.rows());
  return out;
}

std::vector<InversionStudyRow> run_inversion_study(const InversionStudyConfig& cfg,
                                                   std::uint64_t seed) {
  if (cfg.Ls.empty()) throw std::invalid_argument("run_inversion_study: no lengths");
  if (cfg.n_train == 0 || cfg.n_test == 0) throw std::invalid_argument("run_inversion_study: empty split");
  const std::size_t l_max = *std::max_element(cfg.Ls.begin(), cfg.Ls.end());
  if (*std::min_element(cfg.Ls.begin(), cfg.Ls.end()) < 1) {
    throw std::invalid_argument("run_inversion_study: L must be >= 1");
  }
  const RngStream root(seed);
  RnnParams params = init_params(root.split("rnn"), cfg.m, cfg.d, 1);
  if (cfg.raw_unit_variance) {
    const double scale = std::sqrt(static_cast<double>(cfg.m) / 2.0);
    params.W = WeightMatrix(Mat(params.W.dense() * scale));
    params.A *= scale;
  }

  const std::size_t n_total = cfg.n_train + cfg.n_test;
  RngStream data_rng = root.split("inputs");
  std::vector<Mat> inputs;
  for (std::size_t l = 0; l < l_max; ++l) inputs.push_back(gaussian_matrix(data_rng, cfg.d, n_total, 1.0));
  const std::vector<std::size_t> steps(cfg.Ls.begin(), cfg.Ls.end());
  const std::vector<Mat> states = hidden_states_batch(params, inputs, steps);

  std::vector<InversionStudyRow> rows;
  for (std::size_t k = 0; k < cfg.Ls.size(); ++k) {
    const std::size_t L = cfg.Ls[k];
    const auto width = static_cast<Eigen::Index>(L * cfg.d);
    Mat targets(static_cast<Eigen::Index>(n_total), width);
    for (std::size_t l = 0; l < L; ++l) {
      targets.middleCols(static_cast<Eigen::Index>(l * cfg.d), static_cast<Eigen::Index>(cfg.d)) =
          inputs[l].transpose();
    }
    const Mat hidden = states[k].transpose();
    const auto ntr = static_cast<Eigen::Index>(cfg.n_train);
    const auto nte = static_cast<Eigen::Index>(cfg.n_test);
    DecoderData train{hidden.topRows(ntr), targets.topRows(ntr)};
    DecoderData test{hidden.bottomRows(nte), targets.bottomRows(nte)};

    Decoder shape;
    shape.variant = DecoderVariant::full;
    shape.L = L;
    shape.d = cfg.d;
    InversionStudyRow row;
    row.L = L;
    const Decoder dec = fit_decoder(train, shape, cfg.fit, root.split("sgd").split(L), &row.fit);
    row.errors = inversion_errors(dec, test);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace seqlab
