#include "seqlab/languages.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

namespace seqlab {

namespace {

void check_binary(std::string_view bits) {
  for (char c : bits) {
    if (c != '0' && c != '1') {
      throw std::invalid_argument(std::string("membership: non-binary symbol '") + c + "'");
    }
  }
}

// Builds a DFA from a transition table; the last state listed is usually dead.
Dfa make_dfa(std::vector<std::array<std::size_t, 2>> next, std::vector<bool> accepting) {
  return Dfa{0, std::move(next), std::move(accepting)};
}

Dfa substring_dfa(std::string_view pattern) {
  // KMP automaton; state k (full match) is absorbing.
  const std::size_t k = pattern.size();
  std::vector<std::size_t> fail(k + 1, 0);
  for (std::size_t i = 1; i < k; ++i) {
    std::size_t j = fail[i];
    while (j > 0 && pattern[i] != pattern[j]) j = fail[j];
    fail[i + 1] = pattern[i] == pattern[j] ? j + 1 : 0;
  }
  Dfa dfa;
  dfa.next.resize(k + 1);
  dfa.accepting.assign(k + 1, false);
  dfa.accepting[k] = true;
  for (std::size_t q = 0; q <= k; ++q) {
    for (int s = 0; s < 2; ++s) {
      const char c = static_cast<char>('0' + s);
      if (q == k) {
        dfa.next[q][s] = k;
        continue;
      }
      std::size_t j = q;
      while (j > 0 && pattern[j] != c) j = fail[j];
      dfa.next[q][s] = pattern[j] == c ? j + 1 : 0;
    }
  }
  return dfa;
}

Dfa dyck_depth_dfa(std::size_t n) {
  // States 0..n are depths, n+1 is dead; accept at depth 0.
  Dfa dfa;
  const std::size_t dead = n + 1;
  dfa.next.resize(n + 2);
  dfa.accepting.assign(n + 2, false);
  dfa.accepting[0] = true;
  for (std::size_t q = 0; q <= n; ++q) {
    dfa.next[q][0] = q < n ? q + 1 : dead;
    dfa.next[q][1] = q > 0 ? q - 1 : dead;
  }
  dfa.next[dead] = {dead, dead};
  return dfa;
}

bool parse_level(std::size_t n, std::string_view bits, std::size_t& pos) {
  // S_n -> (0 S_{n-1} 1)*. A '0' can only open a new group, so one symbol of
  // lookahead decides every step.
  while (n > 0 && pos < bits.size() && bits[pos] == '0') {
    ++pos;
    if (!parse_level(n - 1, bits, pos)) return false;
    if (pos >= bits.size() || bits[pos] != '1') return false;
    ++pos;
  }
  return true;
}

// counts[len][q]: strings of length len leading from q to a state whose
// acceptance equals `want`.
std::vector<std::vector<double>> path_counts(const Dfa& dfa, std::size_t max_len, bool want) {
  std::vector<std::vector<double>> counts(max_len + 1, std::vector<double>(dfa.size(), 0.0));
  for (std::size_t q = 0; q < dfa.size(); ++q) counts[0][q] = dfa.accepting[q] == want ? 1.0 : 0.0;
  for (std::size_t len = 1; len <= max_len; ++len) {
    for (std::size_t q = 0; q < dfa.size(); ++q) {
      counts[len][q] = counts[len - 1][dfa.next[q][0]] + counts[len - 1][dfa.next[q][1]];
    }
  }
  return counts;
}

class ClassSampler {
 public:
  ClassSampler(const Dfa& dfa, std::size_t len_min, std::size_t len_max, bool want)
      : dfa_(dfa), counts_(path_counts(dfa, len_max, want)) {
    for (std::size_t len = len_min; len <= len_max; ++len) {
      const double c = counts_[len][dfa.start];
      if (c > 0.0) {
        lengths_.push_back(len);
        total_ += c;
      }
    }
  }

  [[nodiscard]] double total() const noexcept { return total_; }
  [[nodiscard]] bool empty() const noexcept { return lengths_.empty(); }

  std::string sample(RngStream& rng) const {
    const std::size_t len = lengths_[rng.uniform_index(lengths_.size())];
    return sample_length(rng, len);
  }

  std::string sample_length(RngStream& rng, std::size_t len) const {
    std::string out;
    out.reserve(len);
    std::size_t q = dfa_.start;
    for (std::size_t rem = len; rem > 0; --rem) {
      const double c0 = counts_[rem - 1][dfa_.next[q][0]];
      const double c1 = counts_[rem - 1][dfa_.next[q][1]];
      const int s = rng.uniform() * (c0 + c1) < c0 ? 0 : 1;
      out.push_back(static_cast<char>('0' + s));
      q = dfa_.next[q][s];
    }
    return out;
  }

  std::vector<std::string> enumerate() const {
    std::vector<std::string> out;
    std::string prefix;
    for (std::size_t len : lengths_) walk(dfa_.start, len, prefix, out);
    return out;
  }

 private:
  void walk(std::size_t q, std::size_t rem, std::string& prefix, std::vector<std::string>& out) const {
    if (rem == 0) {
      out.push_back(prefix);
      return;
    }
    for (int s = 0; s < 2; ++s) {
      const std::size_t nq = dfa_.next[q][s];
      if (counts_[rem - 1][nq] == 0.0) continue;
      prefix.push_back(static_cast<char>('0' + s));
      walk(nq, rem - 1, prefix, out);
      prefix.pop_back();
    }
  }

  const Dfa& dfa_;
  std::vector<std::vector<double>> counts_;
  std::vector<std::size_t> lengths_;
  double total_ = 0.0;
};

struct SplitResult {
  std::vector<LabeledExample> examples;
  bool fallback = false;
};

SplitResult sample_split(const LanguageSpec& spec, std::size_t n, std::size_t len_min,
                         std::size_t len_max, RngStream rng) {
  const ClassSampler pos(spec.dfa, len_min, len_max, true);
  const ClassSampler neg(spec.dfa, len_min, len_max, false);
  constexpr double kEnumerateLimit = 1e6;

  std::size_t want_pos = (n + 1) / 2;
  std::size_t want_neg = n - want_pos;
  SplitResult result;
  // Shift the shortfall of a small class onto the other one.
  if (pos.total() < static_cast<double>(want_pos)) {
    want_pos = static_cast<std::size_t>(pos.total());
    want_neg = n - want_pos;
    result.fallback = true;
  }
  if (neg.total() < static_cast<double>(want_neg)) {
    want_neg = static_cast<std::size_t>(neg.total());
    want_pos = n - want_neg;
    result.fallback = true;
  }
  if (pos.total() < static_cast<double>(want_pos) || neg.total() < static_cast<double>(want_neg)) {
    throw std::invalid_argument("generate_dataset: " + spec.name + " has only " +
                                std::to_string(static_cast<long long>(pos.total())) + " members and " +
                                std::to_string(static_cast<long long>(neg.total())) +
                                " non-members in the length range; " + std::to_string(n) + " requested");
  }

  std::unordered_set<std::string> seen;
  auto fill = [&](const ClassSampler& sampler, std::size_t want, int label,
                  const std::function<std::string(RngStream&, std::size_t)>& draw) {
    std::size_t have = 0;
    if (static_cast<double>(want) >= sampler.total()) {
      for (auto& s : sampler.enumerate()) {
        if (seen.insert(s).second) result.examples.push_back({s, label});
      }
      return;
    }
    std::size_t stale = 0;
    for (std::size_t attempt = 0; have < want; ++attempt) {
      std::string s = draw(rng, attempt);
      if (seen.insert(s).second) {
        result.examples.push_back({std::move(s), label});
        ++have;
        stale = 0;
      } else if (++stale > 1000 + 20 * want) {
        if (sampler.total() > kEnumerateLimit) {
          throw std::runtime_error("generate_dataset: sampler stalled for " + spec.name);
        }
        std::vector<std::string> all = sampler.enumerate();
        rng.shuffle(all);
        for (auto& t : all) {
          if (have == want) break;
          if (seen.insert(t).second) {
            result.examples.push_back({std::move(t), label});
            ++have;
          }
        }
        if (have < want) throw std::runtime_error("generate_dataset: class exhausted for " + spec.name);
      }
    }
  };

  fill(pos, want_pos, 1, [&](RngStream& r, std::size_t) { return pos.sample(r); });
  fill(neg, want_neg, 0, [&](RngStream& r, std::size_t attempt) {
    if (attempt % 2 == 1 && !pos.empty()) {
      std::string s = pos.sample(r);
      s[r.uniform_index(s.size())] ^= 1;  // '0' <-> '1'
      if (!spec.dfa.accepts(s)) return s;
    }
    for (int tries = 0; tries < 1000; ++tries) {
      const std::size_t len = len_min + r.uniform_index(len_max - len_min + 1);
      std::string s(len, '0');
      for (auto& c : s) c = r.uniform() < 0.5 ? '0' : '1';
      if (!spec.dfa.accepts(s)) return s;
    }
    return neg.sample(r);
  });
  rng.shuffle(result.examples);
  return result;
}

double balance(const std::vector<LabeledExample>& ex) {
  if (ex.empty()) return 0.0;
  double pos = 0.0;
  for (const auto& e : ex) pos += e.label;
  return pos / static_cast<double>(ex.size());
}

}  // namespace

std::size_t Dfa::run(std::string_view bits) const noexcept {
  std::size_t q = start;
  for (char c : bits) q = next[q][c == '1' ? 1 : 0];
  return q;
}

bool parse_dyck(std::size_t n, std::string_view bits) {
  check_binary(bits);
  std::size_t pos = 0;
  return parse_level(n, bits, pos) && pos == bits.size();
}

std::vector<std::string> language_names() {
  return {"tomita1", "tomita2", "tomita3", "tomita4", "tomita5", "tomita6", "tomita7",
          "parity",  "d2",      "d3",      "d4",      "rep00",   "rep0101", "rep00_11", "dl1"};
}

LanguageSpec language_spec(std::string_view name) {
  LanguageSpec spec;
  spec.name = std::string(name);
  if (name == "tomita1") {
    spec.definition = "1*";
    spec.dfa = make_dfa({{1, 0}, {1, 1}}, {true, false});
  } else if (name == "tomita2") {
    spec.definition = "(10)*";
    spec.dfa = make_dfa({{2, 1}, {0, 2}, {2, 2}}, {true, false, false});
  } else if (name == "tomita3") {
    spec.definition = "an odd number of consecutive 1s is always followed by an even number of 0s";
    // 0: even 1-run or unconstrained 0s, 1: odd 1-run, 2: odd 1-run then odd 0s,
    // 3: odd 1-run then even 0s, 4: dead.
    spec.dfa = make_dfa({{0, 1}, {2, 0}, {3, 4}, {2, 1}, {4, 4}}, {true, true, false, true, false});
  } else if (name == "tomita4") {
    spec.definition = "no three consecutive 0s";
    spec.dfa = make_dfa({{1, 0}, {2, 0}, {3, 0}, {3, 3}}, {true, true, true, false});
  } else if (name == "tomita5") {
    spec.definition = "even number of 0s and even number of 1s";
    // state = 2 * (#0 mod 2) + (#1 mod 2)
    spec.dfa = make_dfa({{2, 1}, {3, 0}, {0, 3}, {1, 2}}, {true, false, false, false});
  } else if (name == "tomita6") {
    spec.definition = "#1 - #0 divisible by 3";
    spec.dfa = make_dfa({{2, 1}, {0, 2}, {1, 0}}, {true, false, false});
  } else if (name == "tomita7") {
    spec.definition = "0*1*0*1*";
    spec.dfa = make_dfa({{0, 1}, {2, 1}, {2, 3}, {4, 3}, {4, 4}}, {true, true, true, true, false});
  } else if (name == "parity") {
    spec.definition = "w_1 + ... + w_n = 1 mod 2";
    spec.dfa = make_dfa({{0, 1}, {1, 0}}, {false, true});
  } else if (name == "rep00") {
    spec.definition = "(00)*";
    spec.dfa = make_dfa({{1, 2}, {0, 2}, {2, 2}}, {true, false, false});
  } else if (name == "rep0101") {
    spec.definition = "(0101)*";
    spec.dfa = make_dfa({{1, 4}, {4, 2}, {3, 4}, {4, 0}, {4, 4}}, {true, false, false, false, false});
  } else if (name == "rep00_11") {
    spec.definition = "(00)*(11)*";
    // 0: even 0s, 1: odd 0s, 2: odd 1s, 3: even (>0) 1s, 4: dead.
    spec.dfa = make_dfa({{1, 2}, {0, 4}, {4, 3}, {4, 2}, {4, 4}}, {true, false, false, true, false});
  } else if (name == "dl1") {
    spec.definition = "0*10*";
    spec.dfa = make_dfa({{0, 1}, {1, 2}, {2, 2}}, {false, true, false});
  } else if (name.starts_with("substring:")) {
    const std::string_view pattern = name.substr(10);
    if (pattern.empty()) throw std::invalid_argument("language_spec: empty substring pattern");
    check_binary(pattern);
    spec.definition = "contains " + std::string(pattern);
    spec.dfa = substring_dfa(pattern);
  } else if (name.size() >= 2 && name[0] == 'd') {
    std::size_t n = 0;
    const auto* first = name.data() + 1;
    auto [p, ec] = std::from_chars(first, name.data() + name.size(), n);
    if (ec != std::errc{} || p != name.data() + name.size() || n == 0 || n > 64) {
      throw std::invalid_argument("language_spec: unknown language '" + std::string(name) + "'");
    }
    spec.definition = "(0 w 1)* with w in D_" + std::to_string(n - 1);
    spec.dfa = dyck_depth_dfa(n);
    spec.dyck_depth = n;
  } else {
    throw std::invalid_argument("language_spec: unknown language '" + std::string(name) + "'");
  }
  return spec;
}

bool membership(const LanguageSpec& spec, std::string_view bits) {
  check_binary(bits);
  if (spec.dyck_depth) return parse_dyck(*spec.dyck_depth, bits);
  return spec.dfa.accepts(bits);
}

LabeledDataset generate_dataset(const LanguageSpec& spec, std::size_t n_train, std::size_t n_test,
                                std::size_t len_min, std::size_t len_max, const RngStream& rng) {
  if (n_train == 0 || n_test == 0) throw std::invalid_argument("generate_dataset: counts must be positive");
  if (len_min > len_max) throw std::invalid_argument("generate_dataset: empty length range");
  if (len_min == 0) throw std::invalid_argument("generate_dataset: empty strings are excluded; len_min must be >= 1");
  LabeledDataset data;
  data.name = spec.name;
  data.seed = rng.root_seed();
  data.len_min = len_min;
  data.len_max = len_max;
  SplitResult train = sample_split(spec, n_train, len_min, len_max, rng.split("train"));
  SplitResult test = sample_split(spec, n_test, len_min, len_max, rng.split("test"));
  data.train = std::move(train.examples);
  data.test = std::move(test.examples);
  data.exhaustive_fallback = train.fallback || test.fallback;
  for (const auto* split : {&data.train, &data.test}) {
    for (const auto& e : *split) {
      if (static_cast<int>(membership(spec, e.bits)) != e.label) {
        throw std::logic_error("generate_dataset: label disagrees with membership for " + e.bits);
      }
    }
  }
  data.train_balance = balance(data.train);
  data.test_balance = balance(data.test);
  return data;
}

void write_dataset(std::ostream& out, const LabeledDataset& data, bool test_split) {
  out << "# name=" << data.name << " seed=" << data.seed << " range=[" << data.len_min << ','
      << data.len_max << "] split=" << (test_split ? "test" : "train") << '\n';
  for (const auto& e : test_split ? data.test : data.train) out << e.bits << ',' << e.label << '\n';
}

LanguageTableRow language_table_row(std::string_view name) {
  static const std::vector<LanguageTableRow> rows{
      {"tomita1", 50, 100, 2, 50},        {"tomita2", 25, 50, 2, 50},
      {"tomita3", 10000, 2000, 2, 50},    {"tomita4", 10000, 2000, 2, 50},
      {"tomita5", 10000, 2000, 2, 50},    {"tomita6", 10000, 2000, 2, 50},
      {"tomita7", 10000, 2000, 2, 50},    {"parity", 10000, 2000, 2, 50},
      {"d2", 10000, 2000, 2, 100},        {"d3", 10000, 2000, 2, 100},
      {"d4", 10000, 2000, 2, 100},        {"rep00", 250, 50, 2, 500},
      {"rep0101", 125, 25, 4, 500},       {"rep00_11", 10000, 2000, 2, 200},
  };
  for (const auto& r : rows) {
    if (r.name == name) return r;
  }
  throw std::invalid_argument("language_table_row: no table row for '" + std::string(name) + "'");
}

}  // namespace seqlab
