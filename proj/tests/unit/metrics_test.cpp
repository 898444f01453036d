#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "atcn/metrics.hpp"
#include "atcn/random.hpp"

namespace {

const atcn::DiacriticTable& hu() { return atcn::DiacriticTable::forLanguage("hu"); }

// Independent recount: important characters are the Hungarian vowels, words are
// whitespace-separated tokens containing at least one letter of the test alphabet.
const std::u32string kVowels = U"aáeéiíoóöőuúüűAÁEÉIÍOÓÖŐUÚÜŰ";
const std::u32string kLetters = kVowels + U"bcdklmnrstzxBKSZ";
const std::u32string kAlphabet = kLetters + U"  ,.!019-";

struct Naive {
  std::size_t chars = 0, charsOk = 0, imp = 0, impOk = 0, words = 0, wordsOk = 0, seqs = 0, seqsOk = 0;
};

void naiveScore(const std::u32string& ref, const std::u32string& hyp, Naive& n) {
  for (std::size_t i = 0; i < ref.size(); ++i) {
    ++n.chars;
    n.charsOk += ref[i] == hyp[i];
    if (kVowels.find(ref[i]) != std::u32string::npos) {
      ++n.imp;
      n.impOk += ref[i] == hyp[i];
    }
  }
  std::size_t i = 0;
  while (i < ref.size()) {
    if (ref[i] == U' ') {
      ++i;
      continue;
    }
    std::size_t j = i;
    bool alpha = false;
    while (j < ref.size() && ref[j] != U' ') {
      alpha = alpha || kLetters.find(ref[j]) != std::u32string::npos;
      ++j;
    }
    if (alpha) {
      ++n.words;
      n.wordsOk += ref.compare(i, j - i, hyp, i, j - i) == 0;
    }
    i = j;
  }
  ++n.seqs;
  n.seqsOk += ref == hyp;
}

std::u32string randomText(atcn::Rng& rng, std::size_t n) {
  std::u32string s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(kAlphabet[rng.below(kAlphabet.size())]);
  return s;
}

std::u32string perturb(atcn::Rng& rng, std::u32string s, double rate) {
  for (auto& c : s) {
    if (rng.bernoulli(rate)) c = kAlphabet[rng.below(kAlphabet.size())];
  }
  return s;
}

}  // namespace

TEST(Metrics, HandCountedExamples) {
  const auto r = atcn::scorePair(U"kórós", U"koros", hu());
  EXPECT_EQ(r.character.correct, 3u);
  EXPECT_DOUBLE_EQ(r.character.value(), 0.6);
  EXPECT_EQ(r.important.total, 2u);
  EXPECT_DOUBLE_EQ(r.important.value(), 0.0);
  EXPECT_EQ(r.alphaWord.total, 1u);
  EXPECT_EQ(r.alphaWord.correct, 0u);
  EXPECT_EQ(r.sequence.correct, 0u);

  const auto w = atcn::scorePair(U"kék ég 42", U"kek ég 42", hu());
  EXPECT_EQ(w.alphaWord.total, 2u);
  EXPECT_DOUBLE_EQ(w.alphaWord.value(), 0.5);
}

TEST(Metrics, LengthMismatchNamesTheLine) {
  const std::vector<std::u32string> refs{U"ab", U"abc"};
  const std::vector<std::u32string> hyps{U"ab", U"ab"};
  try {
    atcn::scoreSequences(refs, hyps, hu());
    FAIL();
  } catch (const atcn::LengthMismatch& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  EXPECT_THROW(atcn::scoreSequences(refs, std::vector<std::u32string>{U"ab"}, hu()), std::invalid_argument);
}

TEST(Metrics, MatchNaiveRecountOnRandomCases) {
  atcn::Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::u32string> refs, hyps;
    const std::size_t lines = 1 + rng.below(4);
    Naive n;
    for (std::size_t l = 0; l < lines; ++l) {
      refs.push_back(randomText(rng, rng.below(40)));
      hyps.push_back(perturb(rng, refs.back(), rng.uniform() * 0.3));
      naiveScore(refs.back(), hyps.back(), n);
    }
    const auto r = atcn::scoreSequences(refs, hyps, hu());
    ASSERT_EQ(r.character.total, n.chars);
    ASSERT_EQ(r.character.correct, n.charsOk);
    ASSERT_EQ(r.important.total, n.imp);
    ASSERT_EQ(r.important.correct, n.impOk);
    ASSERT_EQ(r.alphaWord.total, n.words);
    ASSERT_EQ(r.alphaWord.correct, n.wordsOk);
    ASSERT_EQ(r.sequence.total, n.seqs);
    ASSERT_EQ(r.sequence.correct, n.seqsOk);
  }
}

TEST(Metrics, JsonHasStableKeys) {
  const auto json = atcn::scorePair(U"kék", U"kek", hu()).toJson();
  for (const char* key : {"character_accuracy", "important_char_accuracy", "alpha_word_accuracy",
                          "sequence_accuracy", "correct", "total", "accuracy"}) {
    EXPECT_NE(json.find(key), std::string::npos) << key;
  }
}

TEST(Confusion, TwoClassToy) {
  std::u32string ref, hyp;
  auto emit = [&](char32_t r, char32_t h, int n) {
    for (int i = 0; i < n; ++i) {
      ref.push_back(r);
      hyp.push_back(h);
    }
  };
  emit(U'a', U'a', 10);
  emit(U'a', U'á', 2);
  emit(U'á', U'a', 1);
  emit(U'á', U'á', 7);
  const auto m = atcn::confusion(std::vector<std::u32string>{ref}, std::vector<std::u32string>{hyp}, hu());
  const std::size_t a = m.index(U'a');
  const std::size_t aa = m.index(U'á');
  EXPECT_DOUBLE_EQ(m.tpr(a), 10.0 / 12.0);
  EXPECT_DOUBLE_EQ(m.ppv(a), 10.0 / 11.0);
  EXPECT_DOUBLE_EQ(m.tpr(aa), 7.0 / 8.0);
  EXPECT_DOUBLE_EQ(m.ppv(aa), 7.0 / 9.0);
  auto f1 = [](double p, double r) { return 2 * p * r / (p + r); };
  const double expected = 12.0 / 20.0 * f1(10.0 / 11.0, 10.0 / 12.0) + 8.0 / 20.0 * f1(7.0 / 9.0, 7.0 / 8.0);
  EXPECT_NEAR(m.weightedF1(), expected, 1e-12);
  EXPECT_NEAR(m.weightedF1(), 0.851151, 1e-6);
  EXPECT_EQ(m.total(), 20u);
  EXPECT_EQ(m.errors(), 3u);
  EXPECT_EQ(m.crossFamilyErrors(), 0u);
  EXPECT_DOUBLE_EQ(m.withinFamilyErrorShare(), 1.0);
}

TEST(Confusion, ClassesAreGroupedByFamily) {
  const auto m = atcn::confusion(std::vector<std::u32string>{}, std::vector<std::u32string>{}, hu());
  EXPECT_EQ(m.classes, U"AÁEÉIÍOÓÖŐUÚÜŰaáeéiíoóöőuúüű");
  EXPECT_EQ(m.families.size(), 10u);
  EXPECT_EQ(m.families[3], U"OÓÖŐ");
  EXPECT_EQ(m.index(U'x'), std::string::npos);
  EXPECT_DOUBLE_EQ(m.withinFamilyErrorShare(), 1.0);
}

TEST(Confusion, CountsMatchRecountAndCrossFamilyErrorsAreListed) {
  atcn::Rng rng(5);
  std::vector<std::u32string> refs, hyps;
  for (int i = 0; i < 200; ++i) {
    refs.push_back(randomText(rng, 30));
    hyps.push_back(perturb(rng, refs.back(), 0.2));
  }
  const auto m = atcn::confusion(refs, hyps, hu());
  std::map<std::pair<char32_t, char32_t>, std::size_t> pairs;
  std::size_t important = 0, errors = 0, cross = 0;
  auto family = [](char32_t c) { return hu().base(c); };
  for (std::size_t l = 0; l < refs.size(); ++l) {
    for (std::size_t t = 0; t < refs[l].size(); ++t) {
      if (kVowels.find(refs[l][t]) == std::u32string::npos) continue;
      ++important;
      const bool inClasses = kVowels.find(hyps[l][t]) != std::u32string::npos;
      ++pairs[{refs[l][t], inClasses ? hyps[l][t] : char32_t{0}}];
      if (refs[l][t] != hyps[l][t]) {
        ++errors;
        cross += family(refs[l][t]) != family(hyps[l][t]);
      }
    }
  }
  EXPECT_EQ(m.total(), important);
  EXPECT_EQ(m.errors(), errors);
  EXPECT_EQ(m.crossFamilyErrors(), cross);
  EXPECT_NEAR(m.withinFamilyErrorShare(), 1.0 - double(cross) / double(errors), 1e-12);
  for (const auto& [p, n] : pairs) {
    const std::size_t j = p.second == 0 ? m.size() : m.index(p.second);
    EXPECT_EQ(m.counts[m.index(p.first)][j], n);
  }
  std::size_t listed = 0;
  for (const auto& [p, n] : m.crossFamily) listed += n;
  EXPECT_EQ(listed, cross);
  const std::string table = m.toTable();
  EXPECT_NE(table.find("TPR"), std::string::npos);
  EXPECT_NE(table.find("PPV"), std::string::npos);
  EXPECT_NE(table.find("other"), std::string::npos);
}

TEST(Ambiguity, HandExamples) {
  const auto a = atcn::analyzeAmbiguity(std::vector<std::u32string>{U"kór kor"}, hu());
  EXPECT_EQ(a.ambiguousWords, 2u);
  EXPECT_EQ(a.ambiguousBases, 1u);
  EXPECT_EQ(a.unambiguousWords, 0u);
  const auto b = atcn::analyzeAmbiguity(std::vector<std::u32string>{U"kék kék"}, hu());
  EXPECT_EQ(b.unambiguousWords, 2u);
  EXPECT_EQ(b.unambiguousBases, 1u);
  EXPECT_EQ(b.ambiguousBases, 0u);
  EXPECT_DOUBLE_EQ(b.wordRatio(), 0.0);
}

TEST(Ambiguity, SyntheticInventory) {
  // Each base gets a known set of forms and a known number of occurrences per form.
  struct Entry {
    std::u32string form;
    std::size_t count;
  };
  const std::vector<std::vector<Entry>> inventory{
      {{U"kór", 3}, {U"kor", 2}},
      {{U"kék", 5}},
      {{U"körös", 1}, {U"kóros", 2}, {U"kőrös", 1}},
      {{U"ház", 4}},
      {{U"tűz", 1}},
      {{U"sör", 2}, {U"sőr", 1}},
  };
  std::vector<std::u32string> words;
  std::size_t ambW = 0, ambB = 0, unW = 0, unB = 0;
  for (const auto& forms : inventory) {
    std::size_t n = 0;
    for (const auto& e : forms) {
      for (std::size_t i = 0; i < e.count; ++i) words.push_back(e.form);
      n += e.count;
    }
    (forms.size() > 1 ? ambW : unW) += n;
    (forms.size() > 1 ? ambB : unB) += 1;
  }
  atcn::Rng rng(8);
  atcn::shuffle(words.begin(), words.end(), rng);
  std::vector<std::u32string> lines;
  for (std::size_t i = 0; i < words.size(); i += 4) {
    std::u32string line;
    for (std::size_t j = i; j < std::min(words.size(), i + 4); ++j) line += words[j] + U", ";
    lines.push_back(line + U"42.");
  }
  const auto s = atcn::analyzeAmbiguity(lines, hu());
  EXPECT_EQ(s.sequences, lines.size());
  EXPECT_EQ(s.words, words.size());
  EXPECT_EQ(s.ambiguousWords, ambW);
  EXPECT_EQ(s.ambiguousBases, ambB);
  EXPECT_EQ(s.unambiguousWords, unW);
  EXPECT_EQ(s.unambiguousBases, unB);
  EXPECT_DOUBLE_EQ(s.wordRatio(), double(unW) / double(ambW));
  EXPECT_DOUBLE_EQ(s.baseRatio(), double(unB) / double(ambB));
}

TEST(SampleErrors, DeterministicSortedSample) {
  atcn::Rng rng(11);
  std::vector<std::u32string> refs, hyps;
  for (int i = 0; i < 50; ++i) {
    refs.push_back(randomText(rng, 100));
    hyps.push_back(perturb(rng, refs.back(), 0.1));
  }
  std::size_t errors = 0;
  for (std::size_t l = 0; l < refs.size(); ++l) {
    for (std::size_t t = 0; t < refs[l].size(); ++t) errors += refs[l][t] != hyps[l][t];
  }
  const auto a = atcn::sampleErrors(refs, hyps, 25, 3);
  EXPECT_EQ(a.totalErrors, errors);
  ASSERT_EQ(a.samples.size(), 25u);
  EXPECT_FALSE(a.exhausted);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const auto& e = a.samples[i];
    EXPECT_NE(e.reference, e.hypothesis);
    EXPECT_EQ(refs[e.line][e.position], e.reference);
    EXPECT_LE(e.refContext.size(), 2 * atcn::kErrorContext + 1);
    EXPECT_NE(e.refContext.find(e.reference), std::u32string::npos);
    seen.insert({e.line, e.position});
    if (i > 0) {
      const auto& p = a.samples[i - 1];
      EXPECT_LT(std::make_pair(p.line, p.position), std::make_pair(e.line, e.position));
    }
  }
  EXPECT_EQ(seen.size(), 25u);
  const auto b = atcn::sampleErrors(refs, hyps, 25, 3);
  for (std::size_t i = 0; i < 25; ++i) EXPECT_EQ(a.samples[i].position, b.samples[i].position);

  const auto all = atcn::sampleErrors(refs, hyps, errors + 10, 3);
  EXPECT_TRUE(all.exhausted);
  EXPECT_EQ(all.samples.size(), errors);
  EXPECT_THROW(atcn::sampleErrors(refs, hyps, 0, 3), std::invalid_argument);
}
