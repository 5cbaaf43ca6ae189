#include "seqlab/concept.hpp"

#include "seqlab/languages.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace seqlab {

namespace {

using Rational = boost::multiprecision::cpp_rational;

constexpr double kSubstringTolerance = 1e-9;

// Row-reduces M in place; returns the rank. Works on the first `cols` columns.
std::size_t row_reduce(std::vector<std::vector<Rational>>& M, std::size_t cols) {
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < M.size(); ++c) {
    std::size_t pivot = rank;
    while (pivot < M.size() && M[pivot][c] == 0) ++pivot;
    if (pivot == M.size()) continue;
    std::swap(M[pivot], M[rank]);
    const Rational inv = 1 / M[rank][c];
    for (auto& v : M[rank]) v *= inv;
    for (std::size_t r = 0; r < M.size(); ++r) {
      if (r == rank || M[r][c] == 0) continue;
      const Rational f = M[r][c];
      for (std::size_t k = 0; k < M[r].size(); ++k) M[r][k] -= f * M[rank][k];
    }
    ++rank;
  }
  return rank;
}

// Phase-I simplex with Bland's rule: is {z : G z >= 1} nonempty (z free)?
// Exact arithmetic, so the answer has no tolerance.
bool strictly_separable(const std::vector<std::vector<int>>& G) {
  const std::size_t rows = G.size();
  if (rows == 0) return true;
  const std::size_t n = G[0].size();
  // Columns: u (n), v (n), surplus (rows), artificial (rows), rhs.
  const std::size_t cols = 2 * n + 2 * rows;
  std::vector<std::vector<Rational>> T(rows, std::vector<Rational>(cols + 1));
  std::vector<std::size_t> basis(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < n; ++j) {
      T[r][j] = G[r][j];
      T[r][n + j] = -G[r][j];
    }
    T[r][2 * n + r] = -1;
    T[r][2 * n + rows + r] = 1;
    T[r][cols] = 1;
    basis[r] = 2 * n + rows + r;
  }
  // Reduced costs of minimizing the sum of artificials.
  std::vector<Rational> cost(cols + 1);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k <= cols; ++k) cost[k] -= T[r][k];
  }
  for (std::size_t r = 0; r < rows; ++r) cost[2 * n + rows + r] = 0;

  for (;;) {
    std::size_t enter = cols;
    for (std::size_t k = 0; k < cols; ++k) {
      if (cost[k] < 0) {
        enter = k;
        break;
      }
    }
    if (enter == cols) break;
    std::size_t leave = rows;
    Rational best_ratio;
    for (std::size_t r = 0; r < rows; ++r) {
      if (T[r][enter] <= 0) continue;
      const Rational ratio = T[r][cols] / T[r][enter];
      if (leave == rows || ratio < best_ratio || (ratio == best_ratio && basis[r] < basis[leave])) {
        leave = r;
        best_ratio = ratio;
      }
    }
    if (leave == rows) break;  // unbounded direction; cannot happen in phase I
    const Rational piv = T[leave][enter];
    for (auto& v : T[leave]) v /= piv;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == leave || T[r][enter] == 0) continue;
      const Rational f = T[r][enter];
      for (std::size_t k = 0; k <= cols; ++k) T[r][k] -= f * T[leave][k];
    }
    if (cost[enter] != 0) {
      const Rational f = cost[enter];
      for (std::size_t k = 0; k <= cols; ++k) cost[k] -= f * T[leave][k];
    }
    basis[leave] = enter;
  }
  // Optimal value is -cost[rhs].
  return cost[cols] == 0;
}

std::string block_string(std::size_t q, std::size_t L, char a, char b) {
  std::string s(L, '0');
  s[q] = a;
  s[q + 1] = b;
  return s;
}

// Constraint row over (alpha_1(0), alpha_1(1), ..., alpha_L(0), alpha_L(1)).
std::vector<int> indicator_row(std::string_view bits) {
  std::vector<int> row(2 * bits.size(), 0);
  for (std::size_t i = 0; i < bits.size(); ++i) row[2 * i + (bits[i] == '1' ? 1 : 0)] = 1;
  return row;
}

}  // namespace

void ConceptFunction::validate() const {
  for (const auto& n : neurons) {
    if (static_cast<std::size_t>(n.w.size()) != input_size) {
      throw std::invalid_argument("concept: weight length does not match the input size");
    }
    if (std::abs(n.w.norm() - 1.0) > 1e-10) throw std::invalid_argument("concept: weight vectors must have unit norm");
    if (!(std::abs(n.b) <= 1.0)) throw std::invalid_argument("concept: |b| must be at most 1");
    if (n.output >= d_out) throw std::invalid_argument("concept: neuron output index out of range");
    if (!n.phi) throw std::invalid_argument("concept: missing activation");
    if (std::abs(n.phi(0.0)) > 1e-12) throw std::invalid_argument("concept: activation must vanish at 0");
  }
}

Vec eval_concept(const ConceptFunction& f, const Vec& flat_input) {
  if (static_cast<std::size_t>(flat_input.size()) != f.input_size) {
    throw std::invalid_argument("eval_concept: input size " + std::to_string(flat_input.size()) +
                                " does not match concept input size " + std::to_string(f.input_size));
  }
  Vec out = Vec::Zero(static_cast<Eigen::Index>(f.d_out));
  for (const auto& n : f.neurons) out[static_cast<Eigen::Index>(n.output)] += n.b * n.phi(n.w.dot(flat_input));
  return out;
}

Vec eval_concept(const ConceptFunction& f, const TrueSequence& seq) {
  if (seq.L != f.L || seq.d != f.d) throw std::invalid_argument("eval_concept: sequence geometry mismatch");
  return eval_concept(f, seq.flattened());
}

ConceptNeuron series_neuron(const TaylorSeries& phi, Vec w, double b, std::size_t output) {
  if (!phi.coeffs.empty() && phi.coeffs[0] != 0.0) {
    throw std::invalid_argument("series_neuron: activation must vanish at 0");
  }
  ConceptNeuron n;
  n.output = output;
  n.w = std::move(w);
  n.b = b;
  n.phi_name = phi.name;
  n.phi = [phi](double z) { return phi(z); };
  n.series = phi;
  return n;
}

ConceptFunction true_sequence_concept(std::size_t L, std::size_t d, std::size_t d_out,
                                      std::vector<ConceptNeuron> neurons) {
  if (L < 3 || d < 3) throw std::invalid_argument("true_sequence_concept: need L >= 3 and d >= 3");
  ConceptFunction f;
  f.L = L;
  f.d = d;
  f.d_out = d_out;
  f.input_size = (L - 2) * (d - 1);
  f.neurons = std::move(neurons);
  f.validate();
  return f;
}

ConceptFunction random_concept(RngStream& rng, std::size_t L, std::size_t d, std::size_t d_out,
                               std::size_t p, const TaylorSeries& phi) {
  if (L < 3 || d < 3) throw std::invalid_argument("random_concept: need L >= 3 and d >= 3");
  const std::size_t n = (L - 2) * (d - 1);
  std::vector<ConceptNeuron> neurons;
  for (std::size_t s = 0; s < d_out; ++s) {
    for (std::size_t r = 0; r < p; ++r) {
      Vec w = gaussian_vector(rng, n, 1.0);
      w /= w.norm();
      const double b = 2.0 * rng.uniform() - 1.0;
      neurons.push_back(series_neuron(phi, std::move(w), b, s));
    }
  }
  return true_sequence_concept(L, d, d_out, std::move(neurons));
}

double LanguageConcept::score(std::string_view bits) const {
  const Mat tokens = encode_bits(bits, encoding);
  if (static_cast<std::size_t>(tokens.rows()) != f.L) {
    throw std::invalid_argument("LanguageConcept: string length differs from the concept's L");
  }
  const Vec x = tokens.col(0);
  return eval_concept(f, x)[0] + offset;
}

bool LanguageConcept::accepts(std::string_view bits) const {
  const double s = score(bits);
  return strict ? s > threshold : s >= threshold - kSubstringTolerance;
}

LanguageConcept build_language_concept(std::string_view language, std::size_t L, double c) {
  if (L < 1) throw std::invalid_argument("build_language_concept: L must be >= 1");
  const double sqrt_l = std::sqrt(static_cast<double>(L));
  LanguageConcept lc;
  lc.language = std::string(language);
  lc.f.L = L;
  lc.f.d = 1;
  lc.f.d_out = 1;
  lc.f.input_size = L;
  const Vec uniform = Vec::Constant(static_cast<Eigen::Index>(L), 1.0 / sqrt_l);

  if (language == "dl1") {
    // <w, x> = k / sqrt(L); phi gives 2k - k^2, positive-minus-3/4 iff k = 1.
    TaylorSeries phi{"2z-z^2 (scaled)", {0.0, 2.0 * sqrt_l, -static_cast<double>(L)}, {}};
    lc.f.neurons.push_back(series_neuron(phi, uniform, 1.0));
    lc.encoding = BitScheme{BitEncoding::zero_one};
    lc.offset = -0.75;
    lc.threshold = 0.0;
    lc.strict = true;
  } else if (language == "parity") {
    // cos(pi (k - 1)) + 1 = 1 - cos(pi k); score - 1 > 0 iff k is odd.
    ConceptNeuron n;
    n.w = uniform;
    n.b = 1.0;
    n.phi_name = "cos(pi(z-1))+1 (scaled)";
    n.phi = [sqrt_l](double z) { return 1.0 - std::cos(std::numbers::pi * sqrt_l * z); };
    lc.f.neurons.push_back(std::move(n));
    lc.encoding = BitScheme{BitEncoding::zero_one};
    lc.offset = -1.0;
    lc.threshold = 0.0;
    lc.strict = true;
  } else if (language.starts_with("substring:")) {
    const std::string pattern(language.substr(10));
    if (pattern.empty()) throw std::invalid_argument("build_language_concept: empty pattern");
    for (char ch : pattern) {
      if (ch != '0' && ch != '1') throw std::invalid_argument("build_language_concept: pattern must be binary");
    }
    const std::size_t k = pattern.size();
    if (k > L) throw std::invalid_argument("build_language_concept: pattern longer than L");
    const double sqrt_k = std::sqrt(static_cast<double>(k));
    const double cc = c > 0.0 ? c : 2.0 * std::log(static_cast<double>(std::max<std::size_t>(L, 2)));
    const double floor_term = std::exp(-cc * static_cast<double>(k));
    for (std::size_t i = 0; i + k <= L; ++i) {
      ConceptNeuron n;
      n.w = Vec::Zero(static_cast<Eigen::Index>(L));
      for (std::size_t j = 0; j < k; ++j) {
        n.w[static_cast<Eigen::Index>(i + j)] = (pattern[j] == '1' ? 1.0 : -1.0) / sqrt_k;
      }
      n.b = 1.0;
      n.phi_name = "exp(c(sqrt(k) z - k)) - exp(-ck)";
      n.phi = [=](double z) { return std::exp(cc * (sqrt_k * z - static_cast<double>(k))) - floor_term; };
      lc.f.neurons.push_back(std::move(n));
    }
    lc.encoding = BitScheme{BitEncoding::pm_one};
    lc.offset = static_cast<double>(L - k + 1) * floor_term;
    lc.threshold = 1.0;
    lc.strict = false;
    lc.substring_c = cc;
  } else {
    throw std::invalid_argument("build_language_concept: unknown language '" + std::string(language) + "'");
  }
  lc.f.validate();
  return lc;
}

std::vector<std::string> concept_oracle_mismatches(std::string_view language, std::size_t max_len) {
  const LanguageSpec spec = language_spec(language);
  std::size_t min_len = 1;
  if (language.starts_with("substring:")) min_len = language.size() - 10;
  std::vector<std::string> bad;
  for (std::size_t len = min_len; len <= max_len; ++len) {
    const LanguageConcept lc = build_language_concept(language, len);
    std::string bits(len, '0');
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << len); ++code) {
      for (std::size_t i = 0; i < len; ++i) bits[i] = ((code >> (len - 1 - i)) & 1U) ? '1' : '0';
      if (lc.accepts(bits) != membership(spec, bits)) bad.push_back(bits);
    }
  }
  return bad;
}

double additive_eval(const AdditiveModel& model, std::string_view bits) {
  if (bits.size() != model.L || model.alpha0.size() != model.L || model.alpha1.size() != model.L) {
    throw std::invalid_argument("additive_eval: length mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '0') s += model.alpha0[i];
    else if (bits[i] == '1') s += model.alpha1[i];
    else throw std::invalid_argument("additive_eval: non-binary symbol");
  }
  return s;
}

bool additive_classify(const AdditiveModel& model, std::string_view bits) {
  return additive_eval(model, bits) > model.threshold;
}

Dl1Certificate dl1_block_infeasible(std::size_t q, std::size_t L) {
  if (L < 2 || q > L - 2) throw std::invalid_argument("dl1_block_infeasible: need 0 <= q <= L-2");
  Dl1Certificate cert;
  cert.q = q;
  cert.L = L;
  cert.strings = {block_string(q, L, '1', '0'), block_string(q, L, '0', '1'),
                  block_string(q, L, '0', '0'), block_string(q, L, '1', '1')};

  std::vector<std::vector<int>> rows;
  for (const auto& s : cert.strings) rows.push_back(indicator_row(s));
  cert.combined_lhs.assign(2 * L, 0);
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t j = 0; j < 2 * L; ++j) cert.combined_lhs[j] += cert.multipliers[k] * rows[k][j];
    cert.residual += cert.multipliers[k] * cert.targets[k];
  }

  auto augmented = [&](std::size_t skip) {
    std::vector<std::vector<Rational>> M;
    for (std::size_t k = 0; k < 4; ++k) {
      if (k == skip) continue;
      std::vector<Rational> row(2 * L + 1);
      for (std::size_t j = 0; j < 2 * L; ++j) row[j] = rows[k][j];
      row[2 * L] = cert.targets[k];
      M.push_back(std::move(row));
    }
    return M;
  };

  {
    auto M = augmented(4);
    auto A = M;
    const std::size_t rank_a = row_reduce(A, 2 * L);
    const std::size_t rank_ay = row_reduce(M, 2 * L + 1);
    cert.infeasible = rank_ay > rank_a;
  }

  for (std::size_t drop = 0; drop < 4; ++drop) {
    auto M = augmented(drop);
    const std::size_t rank_a = [&] {
      auto A = M;
      return row_reduce(A, 2 * L);
    }();
    const std::size_t rank_ay = row_reduce(M, 2 * L + 1);
    if (rank_ay > rank_a) continue;
    // Reduced row echelon form: pivots get the rhs, free variables are 0.
    std::vector<Rational> z(2 * L, 0);
    for (const auto& row : M) {
      for (std::size_t j = 0; j < 2 * L; ++j) {
        if (row[j] != 0) {
          z[j] = row[2 * L];
          break;
        }
      }
    }
    AdditiveModel model;
    model.L = L;
    for (std::size_t i = 0; i < L; ++i) {
      model.alpha0.push_back(static_cast<double>(z[2 * i]));
      model.alpha1.push_back(static_cast<double>(z[2 * i + 1]));
    }
    model.threshold = 0.5;
    bool ok = true;
    for (std::size_t k = 0; k < 4; ++k) {
      if (k == drop) continue;
      Rational s = 0;
      for (std::size_t j = 0; j < 2 * L; ++j) s += rows[k][j] * z[j];
      ok = ok && s == cert.targets[k];
    }
    cert.drop_one_feasible[drop] = ok;
    cert.drop_one_witness[drop] = std::move(model);
  }
  return cert;
}

AdditiveMinError additive_min_error(std::size_t L) {
  if (L < 2 || L > 12) throw std::invalid_argument("additive_min_error: L must lie in [2, 12]");
  // Distinct strings of the multiset S with their multiplicities and labels.
  std::map<std::string, std::pair<int, int>> weight_label;
  for (std::size_t q = 0; q + 2 <= L; ++q) {
    for (auto [a, b] : {std::pair{'0', '0'}, {'1', '1'}, {'0', '1'}, {'1', '0'}}) {
      const std::string s = block_string(q, L, a, b);
      const int label = (a == '1') != (b == '1') ? 1 : 0;
      weight_label[s].first += 1;
      weight_label[s].second = label;
    }
  }
  struct Item {
    std::string bits;
    int weight;
    int label;
  };
  std::vector<Item> items;
  for (auto& [s, wl] : weight_label) items.push_back({s, wl.first, wl.second});
  // Heaviest strings first so the bound bites early.
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.weight > b.weight; });
  const int total = static_cast<int>(4 * (L - 1));

  // Classifier: accept iff a . x + t > 0, i.e. sign * (a . x + t) >= 1 after scaling.
  auto row_for = [&](const Item& it, int label) {
    std::vector<int> row(L + 1);
    const int sign = label == 1 ? 1 : -1;
    for (std::size_t i = 0; i < L; ++i) row[i] = sign * (it.bits[i] == '1' ? 1 : 0);
    row[L] = sign;
    return row;
  };

  AdditiveMinError result;
  for (const auto& it : items) result.strings.push_back(it.bits);
  int best = total + 1;
  std::vector<int> labels(items.size());
  std::vector<std::vector<int>> rows;

  std::function<void(std::size_t, int)> dfs = [&](std::size_t idx, int err) {
    if (err >= best) return;
    if (idx == items.size()) {
      best = err;
      result.best_labels = labels;
      return;
    }
    for (int choice : {items[idx].label, 1 - items[idx].label}) {
      const int next_err = err + (choice != items[idx].label ? items[idx].weight : 0);
      if (next_err >= best) continue;
      rows.push_back(row_for(items[idx], choice));
      ++result.labelings_checked;
      if (strictly_separable(rows)) {
        labels[idx] = choice;
        dfs(idx + 1, next_err);
      }
      rows.pop_back();
    }
  };
  dfs(0, 0);
  result.min_error = static_cast<double>(best) / static_cast<double>(total);
  return result;
}

}  // namespace seqlab
