#pragma once

#include "seqlab/complexity.hpp"
#include "seqlab/numerics.hpp"
#include "seqlab/sequences.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace seqlab {

/// One term b * phi(<w, x>) of output coordinate `output`.
struct ConceptNeuron {
  std::size_t output = 0;
  Vec w;          ///< unit vector over the flattened input
  double b = 1.0; ///< in [-1, 1]
  std::string phi_name;
  std::function<double(double)> phi;  ///< closed form, phi(0) = 0
  /// Taylor expansion of phi when one is available (needed to fit H).
  std::optional<TaylorSeries> series;
};

/// F_s(x) = sum over neurons with output s of b * phi(<w, x>).
///
/// For true sequences the input is [xbar(2), ..., xbar(L-1)] flattened, of
/// length (L-2)(d-1). Language concepts read a scalar bit encoding instead,
/// with L the string length and d = 1.
struct ConceptFunction {
  std::size_t d_out = 1;
  std::size_t L = 0;
  std::size_t d = 0;
  std::size_t input_size = 0;
  std::vector<ConceptNeuron> neurons;

  [[nodiscard]] std::size_t p() const noexcept { return neurons.size(); }
  /// Throws std::invalid_argument when an invariant fails.
  void validate() const;
};

Vec eval_concept(const ConceptFunction& f, const Vec& flat_input);
Vec eval_concept(const ConceptFunction& f, const TrueSequence& seq);

/// Neuron whose activation is the TaylorSeries itself. Throws if phi(0) != 0.
ConceptNeuron series_neuron(const TaylorSeries& phi, Vec w, double b, std::size_t output = 0);

/// Concept over true sequences of length L, dimension d.
ConceptFunction true_sequence_concept(std::size_t L, std::size_t d, std::size_t d_out,
                                      std::vector<ConceptNeuron> neurons);

/// p neurons with w uniform on the unit sphere, b uniform on [-1, 1], all
/// using phi.
ConceptFunction random_concept(RngStream& rng, std::size_t L, std::size_t d, std::size_t d_out,
                               std::size_t p, const TaylorSeries& phi);

/// A concept recognizing a language on length-L strings.
struct LanguageConcept {
  std::string language;
  ConceptFunction f;
  BitScheme encoding;
  double offset = 0.0;     ///< added to F before the threshold test
  double threshold = 0.0;
  bool strict = true;      ///< accept iff score > threshold; otherwise score >= threshold
  double substring_c = 0.0;

  [[nodiscard]] double score(std::string_view bits) const;
  [[nodiscard]] bool accepts(std::string_view bits) const;
};

/// "dl1", "parity" or "substring:PATTERN". c <= 0 selects 2 ln max(L, 2)
/// for substring concepts.
LanguageConcept build_language_concept(std::string_view language, std::size_t L, double c = 0.0);

/// Strings of length 1..max_len where the concept and the language
/// recognizer disagree (concept rebuilt for each length).
std::vector<std::string> concept_oracle_mismatches(std::string_view language, std::size_t max_len);

/// Sum of per-position tables; classifies by score > threshold.
struct AdditiveModel {
  std::size_t L = 0;
  std::vector<double> alpha0;
  std::vector<double> alpha1;
  double threshold = 0.0;
};

double additive_eval(const AdditiveModel& model, std::string_view bits);
bool additive_classify(const AdditiveModel& model, std::string_view bits);

/// Why no additive model fits the four strings 0^q ab 0^(L-q-2) exactly
/// (score 1 on 10 and 01, score 0 on 00 and 11).
struct Dl1Certificate {
  std::size_t q = 0;
  std::size_t L = 0;
  std::array<std::string, 4> strings;   ///< 10, 01, 00, 11 blocks
  std::array<int, 4> targets{1, 1, 0, 0};
  std::array<int, 4> multipliers{1, 1, -1, -1};
  /// Multiplier-weighted sum of constraint rows over the 2L unknowns
  /// alpha_i(0), alpha_i(1); all zero for a valid certificate.
  std::vector<long long> combined_lhs;
  /// Multiplier-weighted sum of targets (2 for a valid certificate).
  long long residual = 0;
  /// Exact rational rank test: rank[A | y] > rank[A].
  bool infeasible = false;
  /// With constraint k dropped, the other three are exactly solvable; the
  /// witness (alpha0, alpha1) is checked after solving.
  std::array<bool, 4> drop_one_feasible{};
  std::array<AdditiveModel, 4> drop_one_witness{};
};

Dl1Certificate dl1_block_infeasible(std::size_t q, std::size_t L);

/// Uniform distribution on the multiset S = union over q of the four block
/// strings; the minimum error of any additive threshold classifier,
/// computed exactly over all linearly separable labelings. 2 <= L <= 12.
struct AdditiveMinError {
  double min_error = 0.0;
  std::size_t labelings_checked = 0;
  /// Distinct strings of S and a labeling reaching the minimum (1 = accept).
  std::vector<std::string> strings;
  std::vector<int> best_labels;
};

AdditiveMinError additive_min_error(std::size_t L);

}  // namespace seqlab
