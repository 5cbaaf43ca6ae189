#include "seqlab/sequences.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

namespace seqlab {

namespace {

const double kSphereRadius = std::sqrt(3.0) / 2.0;

void check_bits(std::string_view bits) {
  if (bits.empty()) throw std::invalid_argument("encode_bits: empty bit string");
  for (char c : bits) {
    if (c != '0' && c != '1') {
      throw std::invalid_argument(std::string("encode_bits: non-binary symbol '") + c + "'");
    }
  }
}

Vec flatten_rows(const Mat& m) {
  Vec out(m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i) out[i] = m.data()[i];
  return out;
}

}  // namespace

Vec TrueSequence::flattened() const { return flatten_rows(tokens); }
Vec NormalizedSequence::flattened() const { return flatten_rows(tokens); }

void check_eps_x(double eps_x, std::size_t L) {
  if (L == 0) throw std::invalid_argument("sequence length must be positive");
  if (!(eps_x > 0.0) || !(eps_x < 1.0 / static_cast<double>(L))) {
    throw std::invalid_argument("eps_x must lie in (0, 1/L)");
  }
}

TrueSequence sample_true_sequence(RngStream& rng, std::size_t L, std::size_t d) {
  if (d < 3) throw std::invalid_argument("sample_true_sequence: d must be >= 3");
  if (L < 3) throw std::invalid_argument("sample_true_sequence: L must be >= 3");
  TrueSequence seq{L, d, Mat::Zero(L - 2, d - 1)};
  for (std::size_t t = 0; t < L - 2; ++t) {
    Vec g(d - 2);
    double norm = 0.0;
    while (norm == 0.0) {
      for (std::size_t k = 0; k < d - 2; ++k) g[k] = rng.normal();
      norm = g.norm();
    }
    for (std::size_t k = 0; k < d - 2; ++k) seq.tokens(t, k) = kSphereRadius * g[k] / norm;
    seq.tokens(t, d - 2) = 0.5;
  }
  return seq;
}

NormalizedSequence normalize(const TrueSequence& seq, double eps_x) {
  check_eps_x(eps_x, seq.L);
  if (seq.L < 2 || static_cast<std::size_t>(seq.tokens.rows()) != seq.L - 2 ||
      static_cast<std::size_t>(seq.tokens.cols()) + 1 != seq.d) {
    throw std::invalid_argument("normalize: malformed true sequence");
  }
  NormalizedSequence out{seq.L, seq.d, eps_x, Mat::Zero(seq.L, seq.d)};
  out.tokens(0, seq.d - 1) = 1.0;
  for (std::size_t l = 1; l + 1 < seq.L; ++l) {
    out.tokens.row(l).head(seq.d - 1) = eps_x * seq.tokens.row(l - 1);
  }
  out.tokens(seq.L - 1, seq.d - 1) = 1.0;
  return out;
}

NormalizedSequence base_sequence(std::size_t L, std::size_t d, double eps_x) {
  check_eps_x(eps_x, L);
  if (d == 0) throw std::invalid_argument("base_sequence: d must be positive");
  NormalizedSequence out{L, d, eps_x, Mat::Zero(L, d)};
  for (std::size_t l = 0; l < L; ++l) {
    const bool marker = (l == 0 || l + 1 == L);
    out.tokens(l, d - 1) = marker ? 1.0 : eps_x;
  }
  return out;
}

BitEncoding parse_bit_encoding(std::string_view name) {
  if (name == "zero_one") return BitEncoding::zero_one;
  if (name == "pm_one") return BitEncoding::pm_one;
  if (name == "true_seq") return BitEncoding::true_seq;
  throw std::invalid_argument("unknown bit encoding '" + std::string(name) + "'");
}

std::string to_string(BitEncoding encoding) {
  switch (encoding) {
    case BitEncoding::zero_one: return "zero_one";
    case BitEncoding::pm_one: return "pm_one";
    case BitEncoding::true_seq: return "true_seq";
  }
  return "?";
}

Mat encode_bits(std::string_view bits, const BitScheme& scheme) {
  check_bits(bits);
  Mat out(bits.size(), 1);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const bool one = bits[i] == '1';
    switch (scheme.encoding) {
      case BitEncoding::zero_one: out(i, 0) = one ? 1.0 : 0.0; break;
      case BitEncoding::pm_one: out(i, 0) = one ? 1.0 : -1.0; break;
      case BitEncoding::true_seq:
        throw std::invalid_argument("encode_bits: use encode_bits_as_true_sequence for true_seq");
    }
  }
  return out;
}

TrueSequence encode_bits_as_true_sequence(std::string_view bits, std::size_t d) {
  check_bits(bits);
  if (d < 3) throw std::invalid_argument("encode_bits_as_true_sequence: d must be >= 3");
  const std::size_t n = bits.size();
  TrueSequence seq{n + 2, d, Mat::Zero(n, d - 1)};
  for (std::size_t i = 0; i < n; ++i) {
    seq.tokens(i, 0) = bits[i] == '1' ? kSphereRadius : -kSphereRadius;
    seq.tokens(i, d - 2) = 0.5;
  }
  return seq;
}

std::string to_csv_row(const NormalizedSequence& seq) {
  std::string out = std::to_string(seq.L) + "," + std::to_string(seq.d);
  char buf[32];
  std::snprintf(buf, sizeof buf, ",%.17g", seq.eps_x);
  out += buf;
  for (Eigen::Index i = 0; i < seq.tokens.size(); ++i) {
    std::snprintf(buf, sizeof buf, ",%.17g", seq.tokens.data()[i]);
    out += buf;
  }
  return out;
}

NormalizedSequence parse_csv_row(std::string_view row) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (start <= row.size()) {
    const std::size_t comma = row.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? row.size() : comma;
    fields.push_back(row.substr(start, end - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (fields.size() < 3) throw std::invalid_argument("parse_csv_row: too few fields");
  auto to_size = [](std::string_view s) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
      throw std::invalid_argument("parse_csv_row: bad integer field");
    }
    return v;
  };
  auto to_double = [](std::string_view s) {
    const std::string tmp(s);
    std::size_t used = 0;
    const double v = std::stod(tmp, &used);
    if (used != tmp.size()) throw std::invalid_argument("parse_csv_row: bad real field");
    return v;
  };
  NormalizedSequence seq;
  seq.L = to_size(fields[0]);
  seq.d = to_size(fields[1]);
  seq.eps_x = to_double(fields[2]);
  if (fields.size() != 3 + seq.L * seq.d) {
    throw std::invalid_argument("parse_csv_row: expected L*d token entries");
  }
  seq.tokens.resize(seq.L, seq.d);
  for (std::size_t i = 0; i < seq.L * seq.d; ++i) seq.tokens.data()[i] = to_double(fields[3 + i]);
  return seq;
}

}  // namespace seqlab
