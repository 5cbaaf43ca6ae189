#pragma once

#include "seqlab/numerics.hpp"

#include <cstddef>
#include <string>
#include <string_view>

namespace seqlab {

/// Middle tokens of a sequence before normalization: L-2 unit vectors in
/// R^{d-1}, each with last coordinate exactly 1/2.
struct TrueSequence {
  std::size_t L = 0;  ///< length of the normalized sequence this produces
  std::size_t d = 0;
  Mat tokens;         ///< (L-2) x (d-1)

  /// Tokens concatenated in order; length (L-2)(d-1).
  [[nodiscard]] Vec flattened() const;
};

/// L tokens in R^d: start marker e_d, scaled middle tokens (eps_x * xbar, 0),
/// end marker e_d.
struct NormalizedSequence {
  std::size_t L = 0;
  std::size_t d = 0;
  double eps_x = 0.0;
  Mat tokens;  ///< L x d

  [[nodiscard]] Vec flattened() const;
};

/// Throws std::invalid_argument unless 0 < eps_x < 1/L.
void check_eps_x(double eps_x, std::size_t L);

/// Middle tokens uniform on the radius-sqrt(3)/2 sphere in the first d-2
/// coordinates, last coordinate 1/2. Requires L >= 3 and d >= 3.
TrueSequence sample_true_sequence(RngStream& rng, std::size_t L, std::size_t d);

NormalizedSequence normalize(const TrueSequence& seq, double eps_x);

/// The fixed reference sequence: e_d, (0, eps_x), ..., (0, eps_x), e_d.
NormalizedSequence base_sequence(std::size_t L, std::size_t d, double eps_x);

enum class BitEncoding { zero_one, pm_one, true_seq };

struct BitScheme {
  BitEncoding encoding = BitEncoding::zero_one;
  std::size_t d = 3;     ///< true_seq only
  double eps_x = 0.0;    ///< true_seq only; carried for the caller's normalize()
};

/// "zero_one", "pm_one" or "true_seq". Throws on anything else.
BitEncoding parse_bit_encoding(std::string_view name);
std::string to_string(BitEncoding encoding);

/// Scalar encodings: a |bits| x 1 token matrix. Throws for true_seq, empty
/// input or a symbol other than '0'/'1'.
Mat encode_bits(std::string_view bits, const BitScheme& scheme);

/// One middle token per bit: first coordinate +sqrt(3)/2 for '1' and
/// -sqrt(3)/2 for '0', zeros, last coordinate 1/2. L = |bits| + 2.
TrueSequence encode_bits_as_true_sequence(std::string_view bits, std::size_t d);

/// "L,d,eps_x,t_11,...,t_Ld" with round-trip precision.
std::string to_csv_row(const NormalizedSequence& seq);
NormalizedSequence parse_csv_row(std::string_view row);

}  // namespace seqlab
