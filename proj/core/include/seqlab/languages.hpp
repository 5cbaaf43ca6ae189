#pragma once

#include "seqlab/numerics.hpp"

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace seqlab {

/// Total DFA over {0, 1}.
struct Dfa {
  std::size_t start = 0;
  std::vector<std::array<std::size_t, 2>> next;  ///< next[state][symbol]
  std::vector<bool> accepting;

  [[nodiscard]] std::size_t size() const noexcept { return next.size(); }
  /// Final state after reading bits (which must already be validated).
  [[nodiscard]] std::size_t run(std::string_view bits) const noexcept;
  [[nodiscard]] bool accepts(std::string_view bits) const noexcept {
    return accepting[run(bits)];
  }
};

struct LanguageSpec {
  std::string name;
  std::string definition;
  /// Recognizer for the regular-expression and counting languages. For D_n
  /// this is the depth automaton used only for sampling.
  Dfa dfa;
  /// n for D_n (membership then goes through the recursive-descent parser).
  std::optional<std::size_t> dyck_depth;
};

/// tomita1..tomita7, parity, d2, d3, d4 (or dN), rep00, rep0101, rep00_11,
/// dl1 (exactly one '1') and substring:PATTERN.
LanguageSpec language_spec(std::string_view name);

/// Names accepted by language_spec apart from the dN / substring families.
std::vector<std::string> language_names();

/// Throws std::invalid_argument on a symbol other than '0' or '1'.
bool membership(const LanguageSpec& spec, std::string_view bits);

/// Recursive-descent recognizer for D_n: S_n -> (0 S_{n-1} 1)*, S_0 -> eps.
bool parse_dyck(std::size_t n, std::string_view bits);

struct LabeledExample {
  std::string bits;
  int label = 0;  ///< 1 = member
};

struct LabeledDataset {
  std::string name;
  std::uint64_t seed = 0;
  std::size_t len_min = 0;
  std::size_t len_max = 0;
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> test;
  /// Positive fraction achieved in each split.
  double train_balance = 0.0;
  double test_balance = 0.0;
  /// True when a class ran out of distinct strings and was taken whole.
  bool exhaustive_fallback = false;
};

/// Balanced sample. Lengths are uniform over the lengths in range that have
/// strings of the wanted class; a positive is a uniform accepted string of
/// that length (DFA path counting). Negatives alternate between rejection
/// sampling and single-bit flips of positives. Strings are distinct within a
/// split; train and test are drawn independently. When a class has fewer
/// distinct strings than requested, all of them are used and the other
/// class fills the split.
LabeledDataset generate_dataset(const LanguageSpec& spec, std::size_t n_train, std::size_t n_test,
                                std::size_t len_min, std::size_t len_max, const RngStream& rng);

/// "bits,label" lines after a "# name=... seed=... range=[a,b] split=..." header.
void write_dataset(std::ostream& out, const LabeledDataset& data, bool test_split);

/// Row of the language table: train/test counts and length range.
struct LanguageTableRow {
  std::string name;
  std::size_t n_train;
  std::size_t n_test;
  std::size_t len_min;
  std::size_t len_max;
};

/// Throws for names outside the table.
LanguageTableRow language_table_row(std::string_view name);

}  // namespace seqlab
