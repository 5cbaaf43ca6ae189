#pragma once

#include "seqlab/numerics.hpp"
#include "seqlab/rnn.hpp"
#include "seqlab/sequences.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace seqlab {

/// f = (2 / (m beta^2)) (T v)^T relu(T x) for T (m x d) with N(0, beta^2)
/// entries; an unbiased estimate of v^T x.
double single_layer_invert(const Mat& T, const Vec& v, const Vec& x, double beta);

enum class DecoderVariant { full, true_seq };
enum class DecoderProvenance { analytic, fitted };
/// Which hidden state the decoder reads: h(L) or h(L-1).
enum class DecodeSource { final_state, penultimate_state };

DecoderVariant parse_decoder_variant(std::string_view name);
std::string to_string(DecoderVariant v);
std::string to_string(DecoderProvenance p);

struct Decoder {
  DecoderVariant variant = DecoderVariant::full;
  DecoderProvenance provenance = DecoderProvenance::analytic;
  DecodeSource source = DecodeSource::final_state;
  double eps_x = 0.0;
  std::size_t L = 0;
  std::size_t d = 0;
  /// m x (L d) for full, m x ((L-2)(d-1)) for true_seq.
  Mat matrix;

  [[nodiscard]] std::size_t output_size() const noexcept {
    return static_cast<std::size_t>(matrix.cols());
  }
};

/// Analytic decoder from the base-sequence masks D0(l):
///   Wbar[1] = D0(1) A,  Wbar[l] = [D0(l) W Wbar[l-1], D0(l) A].
/// full: Wbar[L]. true_seq: the blocks k = 2..L-1 restricted to the first
/// d-1 columns of A, taken from Wbar[L] (final_state) or Wbar[L-1]
/// (penultimate_state). Requires dense or streamed W; cost is one product
/// with W per step.
Decoder build_decoder(const RnnParams& params, std::size_t L, double eps_x,
                      DecoderVariant variant,
                      DecodeSource source = DecodeSource::final_state);

/// matrix^T h.
Vec decode(const Decoder& dec, const Vec& h);

/// What decode() should reproduce: all tokens flattened (full) or
/// eps_x * [xbar(2), ..., xbar(L-1)] (true_seq).
Vec decode_target(const Decoder& dec, const NormalizedSequence& seq);

/// Hidden state a decoder reads for one sequence.
Vec decoder_input(const Decoder& dec, const ForwardTrace& trace);

/// Paired samples for fitting: row n of hidden is a hidden state, row n of
/// targets the flat vector it should decode to.
struct DecoderData {
  Mat hidden;   ///< N x m
  Mat targets;  ///< N x k
};

struct DecoderFitConfig {
  double lr = 0.1;
  double momentum = 0.9;
  std::size_t batch = 128;
  std::size_t epochs = 20;
  /// Restart with this rate if the loss stops being finite or blows up.
  double fallback_lr = 0.01;
};

struct DecoderFitReport {
  std::vector<double> epoch_loss;  ///< mean ||Wbar^T h - x||^2 after each epoch
  double lr_used = 0.0;
  bool fell_back = false;
};

/// SGD with momentum on mean ||matrix^T h - x||^2, starting from zero.
/// `shape` supplies variant, L, d, eps_x and source for the result.
Decoder fit_decoder(const DecoderData& data, const Decoder& shape, const DecoderFitConfig& cfg,
                    RngStream rng, DecoderFitReport* report = nullptr);

/// Builds DecoderData by running the network on each sequence.
DecoderData make_decoder_data(const RnnParams& params, const Decoder& shape,
                              const std::vector<NormalizedSequence>& seqs);

struct InversionErrors {
  double avg_rel_l2 = 0.0;  ///< mean ||Wbar^T h - x|| / ||x||
  double avg_linf = 0.0;    ///< mean ||Wbar^T h - x||_inf
};

InversionErrors inversion_errors(const Decoder& dec, const DecoderData& test);

/// One seed of the learned-inversion study: Gaussian inputs x(i) ~ N(0, I),
/// a decoder fitted for every requested L from a single forward pass of
/// length max(Ls) (h(L) of a sequence is h(L) of its length-L prefix).
struct InversionStudyConfig {
  std::size_t m = 500;
  std::size_t d = 2;
  std::vector<std::size_t> Ls{2, 4, 6};
  std::size_t n_train = 1000;
  std::size_t n_test = 1000;
  DecoderFitConfig fit;
  /// W, A ~ N(0, 1) instead of N(0, 2/m).
  bool raw_unit_variance = false;
};

struct InversionStudyRow {
  std::size_t L = 0;
  InversionErrors errors;
  DecoderFitReport fit;
};

std::vector<InversionStudyRow> run_inversion_study(const InversionStudyConfig& cfg,
                                                   std::uint64_t seed);

}  // namespace seqlab
