#include <seqlab/languages.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace seqlab;

namespace {

std::vector<std::string> all_strings(std::size_t max_len) {
  std::vector<std::string> out{""};
  for (std::size_t len = 1; len <= max_len; ++len) {
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << len); ++code) {
      std::string s(len, '0');
      for (std::size_t i = 0; i < len; ++i) s[i] = ((code >> i) & 1U) ? '1' : '0';
      out.push_back(s);
    }
  }
  return out;
}

std::vector<std::pair<char, std::size_t>> runs(const std::string& s) {
  std::vector<std::pair<char, std::size_t>> r;
  for (char c : s) {
    if (!r.empty() && r.back().first == c) ++r.back().second;
    else r.push_back({c, 1});
  }
  return r;
}

std::size_t count(const std::string& s, char c) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), c)); }

bool is_repeat(const std::string& s, const std::string& unit) {
  if (s.size() % unit.size() != 0) return false;
  for (std::size_t i = 0; i < s.size(); ++i) if (s[i] != unit[i % unit.size()]) return false;
  return true;
}

const std::vector<std::pair<std::string, std::function<bool(const std::string&)>>>& predicates() {
  static const std::vector<std::pair<std::string, std::function<bool(const std::string&)>>> p = {
      {"tomita1", [](const std::string& s) { return count(s, '0') == 0; }},
      {"tomita2", [](const std::string& s) { return is_repeat(s, "10"); }},
      {"tomita3",
       [](const std::string& s) {
         const auto r = runs(s);
         for (std::size_t i = 0; i + 1 < r.size(); ++i) {
           if (r[i].first == '1' && r[i].second % 2 == 1 && r[i + 1].second % 2 == 1) return false;
         }
         return true;
       }},
      {"tomita4", [](const std::string& s) { return s.find("000") == std::string::npos; }},
      {"tomita5", [](const std::string& s) { return count(s, '0') % 2 == 0 && count(s, '1') % 2 == 0; }},
      {"tomita6",
       [](const std::string& s) {
         return (static_cast<long>(count(s, '1')) - static_cast<long>(count(s, '0'))) % 3 == 0;
       }},
      {"tomita7", [](const std::string& s) { return runs(s).size() <= 4 && (s.empty() || s[0] == '0' || runs(s).size() <= 3); }},
      {"parity", [](const std::string& s) { return count(s, '1') % 2 == 1; }},
      {"rep00", [](const std::string& s) { return is_repeat(s, "00"); }},
      {"rep0101", [](const std::string& s) { return is_repeat(s, "0101"); }},
      {"rep00_11",
       [](const std::string& s) {
         const std::size_t z = s.find_first_not_of('0') == std::string::npos ? s.size() : s.find_first_not_of('0');
         return z % 2 == 0 && is_repeat(s.substr(z), "11");
       }},
      {"dl1", [](const std::string& s) { return count(s, '1') == 1; }},
      {"substring:0110", [](const std::string& s) { return s.find("0110") != std::string::npos; }},
  };
  return p;
}

// All strings of D_n up to max_len from S_n -> (0 S_{n-1} 1)*, S_0 -> eps.
std::set<std::string> dyck_strings(std::size_t n, std::size_t max_len) {
  if (n == 0) return {""};
  const std::set<std::string> inner = dyck_strings(n - 1, max_len);
  std::set<std::string> out{""};
  bool grew = true;
  while (grew) {
    grew = false;
    std::set<std::string> next = out;
    for (const auto& a : out) {
      for (const auto& w : inner) {
        const std::string s = a + "0" + w + "1";
        if (s.size() <= max_len && next.insert(s).second) grew = true;
      }
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace

TEST(Membership, Examples) {
  EXPECT_TRUE(membership(language_spec("tomita1"), "111"));
  EXPECT_FALSE(membership(language_spec("tomita1"), "101"));
  EXPECT_TRUE(membership(language_spec("tomita3"), "100"));
  EXPECT_FALSE(membership(language_spec("tomita3"), "10"));
  EXPECT_TRUE(membership(language_spec("tomita4"), "1001"));
  EXPECT_FALSE(membership(language_spec("tomita4"), "10001"));
  EXPECT_TRUE(membership(language_spec("d2"), "0011"));
  EXPECT_FALSE(membership(language_spec("d2"), "000111"));
  EXPECT_FALSE(membership(language_spec("d2"), "10"));
  EXPECT_THROW(membership(language_spec("parity"), "012"), std::invalid_argument);
  EXPECT_THROW(language_spec("tomita8"), std::invalid_argument);
}

TEST(Membership, MatchesPredicatesUpToTwelve) {
  const auto strings = all_strings(12);
  for (const auto& [name, pred] : predicates()) {
    const LanguageSpec spec = language_spec(name);
    int bad = 0;
    for (const auto& s : strings) bad += membership(spec, s) != pred(s);
    EXPECT_EQ(bad, 0) << name;
  }
}

TEST(Membership, DfaAgreesWithMembership) {
  const auto strings = all_strings(10);
  for (const auto& name : language_names()) {
    const LanguageSpec spec = language_spec(name);
    if (spec.dyck_depth) continue;
    for (const auto& s : strings) ASSERT_EQ(spec.dfa.accepts(s), membership(spec, s)) << name << " " << s;
  }
}

TEST(Dyck, ParserMatchesGrammar) {
  const auto strings = all_strings(10);
  for (std::size_t n = 1; n <= 4; ++n) {
    const std::set<std::string> lang = dyck_strings(n, 10);
    for (const auto& s : strings) ASSERT_EQ(parse_dyck(n, s), lang.count(s) == 1) << "D" << n << " " << s;
    const LanguageSpec spec = language_spec("d" + std::to_string(n));
    for (const auto& s : strings) ASSERT_EQ(membership(spec, s), lang.count(s) == 1);
  }
}

TEST(Dataset, LabelsLengthsAndDistinctness) {
  for (const char* name : {"tomita3", "parity", "d2", "tomita6"}) {
    const LanguageSpec spec = language_spec(name);
    const LabeledDataset ds = generate_dataset(spec, 400, 200, 2, 30, RngStream(5));
    ASSERT_EQ(ds.train.size(), 400u) << name;
    ASSERT_EQ(ds.test.size(), 200u) << name;
    for (const auto* split : {&ds.train, &ds.test}) {
      std::set<std::string> seen;
      for (const auto& ex : *split) {
        EXPECT_EQ(ex.label, membership(spec, ex.bits) ? 1 : 0);
        EXPECT_GE(ex.bits.size(), 2u);
        EXPECT_LE(ex.bits.size(), 30u);
        EXPECT_TRUE(seen.insert(ex.bits).second) << name << " duplicate " << ex.bits;
      }
    }
  }
}

TEST(Dataset, Balanced) {
  const LabeledDataset ds = generate_dataset(language_spec("parity"), 10000, 2000, 2, 50, RngStream(1));
  EXPECT_NEAR(ds.train_balance, 0.5, 0.02);
  EXPECT_NEAR(ds.test_balance, 0.5, 0.02);
  const LabeledDataset t4 = generate_dataset(language_spec("tomita4"), 2000, 500, 2, 50, RngStream(1));
  EXPECT_NEAR(t4.train_balance, 0.5, 0.02);
}

TEST(Dataset, Deterministic) {
  const LanguageSpec spec = language_spec("tomita5");
  const LabeledDataset a = generate_dataset(spec, 100, 50, 2, 20, RngStream(9));
  const LabeledDataset b = generate_dataset(spec, 100, 50, 2, 20, RngStream(9));
  const LabeledDataset c = generate_dataset(spec, 100, 50, 2, 20, RngStream(10));
  std::ostringstream sa, sb, sc;
  write_dataset(sa, a, false);
  write_dataset(sb, b, false);
  write_dataset(sc, c, false);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_NE(sa.str(), sc.str());
}

TEST(Dataset, SmallLanguageFallsBack) {
  const LabeledDataset ds = generate_dataset(language_spec("tomita1"), 50, 100, 2, 50, RngStream(2));
  std::size_t pos = 0;
  for (const auto& ex : ds.train) {
    if (ex.label == 1) {
      ++pos;
      EXPECT_EQ(ex.bits.find('0'), std::string::npos);
    }
  }
  EXPECT_GT(pos, 0u);
  EXPECT_EQ(ds.train.size(), 50u);
}

TEST(Table, Rows) {
  const LanguageTableRow r = language_table_row("parity");
  EXPECT_EQ(r.n_train, 10000u);
  EXPECT_EQ(r.n_test, 2000u);
  EXPECT_EQ(r.len_max, 50u);
  EXPECT_THROW(language_table_row("dl1"), std::invalid_argument);
}
