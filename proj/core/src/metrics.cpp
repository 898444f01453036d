#include "atcn/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "atcn/baselines.hpp"
#include "atcn/corpus.hpp"
#include "atcn/random.hpp"
#include "atcn/utf8.hpp"
#include "json.hpp"

namespace atcn {

namespace {

using Json = nlohmann::ordered_json;

Json ratioJson(const Ratio& r) { return Json{{"correct", r.correct}, {"total", r.total}, {"accuracy", r.value()}}; }

void checkCounts(std::size_t refs, std::size_t hyps) {
  if (refs != hyps) {
    throw std::invalid_argument("reference has " + std::to_string(refs) + " lines, hypothesis " +
                                std::to_string(hyps));
  }
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string padLeft(const std::string& s, std::size_t width) {
  const std::size_t len = utf8::length(s);
  return len >= width ? s : std::string(width - len, ' ') + s;
}

}  // namespace

MetricsReport& MetricsReport::operator+=(const MetricsReport& o) {
  character += o.character;
  important += o.important;
  alphaWord += o.alphaWord;
  sequence += o.sequence;
  return *this;
}

std::string MetricsReport::toJson() const {
  Json j;
  j["character_accuracy"] = ratioJson(character);
  j["important_char_accuracy"] = ratioJson(important);
  j["alpha_word_accuracy"] = ratioJson(alphaWord);
  j["sequence_accuracy"] = ratioJson(sequence);
  return j.dump(2);
}

LengthMismatch::LengthMismatch(std::size_t line, std::size_t refLength, std::size_t hypLength)
    : std::invalid_argument("line " + std::to_string(line + 1) + ": reference has " + std::to_string(refLength) +
                            " characters, hypothesis " + std::to_string(hypLength)),
      line_(line) {}

MetricsReport scorePair(std::u32string_view ref, std::u32string_view hyp, const DiacriticTable& table,
                        std::size_t line) {
  if (ref.size() != hyp.size()) throw LengthMismatch(line, ref.size(), hyp.size());
  MetricsReport r;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const bool ok = ref[i] == hyp[i];
    r.character.add(ok);
    if (table.isImportant(ref[i])) r.important.add(ok);
  }
  std::size_t i = 0;
  while (i < ref.size()) {
    if (utf8::isSpace(ref[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    bool alpha = false;
    while (j < ref.size() && !utf8::isSpace(ref[j])) alpha |= utf8::isAlpha(ref[j++]);
    if (alpha) r.alphaWord.add(ref.substr(i, j - i) == hyp.substr(i, j - i));
    i = j;
  }
  r.sequence.add(ref == hyp);
  return r;
}

MetricsReport scoreSequences(std::span<const std::u32string> refs, std::span<const std::u32string> hyps,
                             const DiacriticTable& table) {
  checkCounts(refs.size(), hyps.size());
  MetricsReport total;
  for (std::size_t i = 0; i < refs.size(); ++i) total += scorePair(refs[i], hyps[i], table, i);
  return total;
}

// ---------------------------------------------------------------------------

std::size_t ConfusionMatrix::index(char32_t c) const {
  const std::size_t at = classes.find(c);
  return at == std::u32string::npos ? static_cast<std::size_t>(-1) : at;
}

std::size_t ConfusionMatrix::rowSum(std::size_t i) const {
  std::size_t s = 0;
  for (std::size_t v : counts[i]) s += v;
  return s;
}

std::size_t ConfusionMatrix::colSum(std::size_t j) const {
  std::size_t s = 0;
  for (const auto& row : counts) s += row[j];
  return s;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t s = 0;
  for (std::size_t i = 0; i < size(); ++i) s += rowSum(i);
  return s;
}

std::size_t ConfusionMatrix::errors() const {
  std::size_t s = total();
  for (std::size_t i = 0; i < size(); ++i) s -= counts[i][i];
  return s;
}

std::size_t ConfusionMatrix::crossFamilyErrors() const {
  std::size_t s = 0;
  for (const auto& [pair, n] : crossFamily) s += n;
  return s;
}

double ConfusionMatrix::withinFamilyErrorShare() const {
  const std::size_t e = errors();
  return e == 0 ? 1.0 : double(e - crossFamilyErrors()) / double(e);
}

double ConfusionMatrix::tpr(std::size_t i) const {
  const std::size_t r = rowSum(i);
  return r == 0 ? 0.0 : double(counts[i][i]) / double(r);
}

double ConfusionMatrix::ppv(std::size_t i) const {
  const std::size_t c = colSum(i);
  return c == 0 ? 0.0 : double(counts[i][i]) / double(c);
}

double ConfusionMatrix::f1(std::size_t i) const {
  const double p = ppv(i);
  const double r = tpr(i);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

double ConfusionMatrix::weightedF1() const {
  const std::size_t n = total();
  if (n == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) s += double(rowSum(i)) / double(n) * f1(i);
  return s;
}

std::string ConfusionMatrix::toJson() const {
  Json j;
  Json cls = Json::array();
  for (char32_t c : classes) cls.push_back(utf8::encode(c));
  j["classes"] = cls;
  j["columns"] = cls;
  j["columns"].push_back("other");
  j["counts"] = counts;
  Json per = Json::array();
  for (std::size_t i = 0; i < size(); ++i) {
    per.push_back(Json{{"class", utf8::encode(classes[i])},
                       {"support", rowSum(i)},
                       {"tpr", tpr(i)},
                       {"ppv", ppv(i)},
                       {"f1", f1(i)}});
  }
  j["per_class"] = per;
  j["total"] = total();
  j["errors"] = errors();
  j["weighted_f1"] = weightedF1();
  j["within_family_error_share"] = withinFamilyErrorShare();
  Json cross = Json::array();
  for (const auto& [pair, n] : crossFamily) {
    cross.push_back(Json{{"reference", utf8::encode(pair.first)}, {"predicted", utf8::encode(pair.second)}, {"count", n}});
  }
  j["cross_family_errors"] = cross;
  return j.dump(2);
}

std::string ConfusionMatrix::toTable() const {
  const std::size_t w = 9;
  std::string out;
  std::size_t start = 0;
  for (const std::u32string& fam : families) {
    if (!out.empty()) out += '\n';
    out += padLeft("", 5);
    for (char32_t c : fam) out += padLeft(utf8::encode(c), w);
    out += padLeft("other", w) + padLeft("TPR", w) + '\n';
    for (std::size_t a = 0; a < fam.size(); ++a) {
      const std::size_t i = start + a;
      out += padLeft(utf8::encode(fam[a]), 5);
      std::size_t outside = rowSum(i);
      for (std::size_t b = 0; b < fam.size(); ++b) {
        out += padLeft(std::to_string(counts[i][start + b]), w);
        outside -= counts[i][start + b];
      }
      out += padLeft(std::to_string(outside), w);
      out += padLeft(fixed(tpr(i), 3), w) + '\n';
    }
    out += padLeft("PPV", 5);
    for (std::size_t b = 0; b < fam.size(); ++b) out += padLeft(fixed(ppv(start + b), 3), w);
    out += '\n';
    start += fam.size();
  }
  out += "\nweighted F1: " + fixed(weightedF1(), 4) + '\n';
  out += "errors: " + std::to_string(errors()) + ", cross-family: " + std::to_string(crossFamilyErrors()) + '\n';
  for (const auto& [pair, n] : crossFamily) {
    out += "  " + utf8::encode(pair.first) + " -> " + utf8::encode(pair.second) + ": " + std::to_string(n) + '\n';
  }
  return out;
}

ConfusionMatrix confusion(std::span<const std::u32string> refs, std::span<const std::u32string> hyps,
                          const DiacriticTable& table) {
  checkCounts(refs.size(), hyps.size());
  ConfusionMatrix m;
  for (char32_t b : table.bases()) {
    const std::u32string fam = table.variants(b);
    if (fam.size() < 2) continue;
    m.families.push_back(fam);
    m.classes += fam;
  }
  const std::size_t K = m.classes.size();
  m.counts.assign(K, std::vector<std::size_t>(K + 1, 0));
  for (std::size_t line = 0; line < refs.size(); ++line) {
    const auto& ref = refs[line];
    const auto& hyp = hyps[line];
    if (ref.size() != hyp.size()) throw LengthMismatch(line, ref.size(), hyp.size());
    for (std::size_t t = 0; t < ref.size(); ++t) {
      const std::size_t i = m.index(ref[t]);
      if (i >= K) continue;
      const std::size_t j = m.index(hyp[t]);
      m.counts[i][j < K ? j : K] += 1;
      if (table.base(ref[t]) != table.base(hyp[t])) ++m.crossFamily[{ref[t], hyp[t]}];
    }
  }
  return m;
}

// ---------------------------------------------------------------------------

double AmbiguityStats::wordRatio() const {
  return ambiguousWords == 0 ? 0.0 : double(unambiguousWords) / double(ambiguousWords);
}

double AmbiguityStats::baseRatio() const {
  return ambiguousBases == 0 ? 0.0 : double(unambiguousBases) / double(ambiguousBases);
}

std::string AmbiguityStats::toJson() const {
  Json j;
  j["sequences"] = sequences;
  j["words"] = words;
  j["unambiguous"] = {{"words", unambiguousWords}, {"bases", unambiguousBases}};
  j["ambiguous"] = {{"words", ambiguousWords}, {"bases", ambiguousBases}};
  j["ratio"] = {{"words", wordRatio()}, {"bases", baseRatio()}};
  return j.dump(2);
}

std::string AmbiguityStats::toTable() const {
  const std::size_t w = 12;
  std::string out;
  out += padLeft("", w) + padLeft("", w) + padLeft("unambiguous", 2 * w) + padLeft("ambiguous", 2 * w) +
         padLeft("ratio", 2 * w) + '\n';
  out += padLeft("sequences", w) + padLeft("words", w);
  for (int k = 0; k < 3; ++k) out += padLeft("words", w) + padLeft("bases", w);
  out += '\n';
  out += padLeft(std::to_string(sequences), w) + padLeft(std::to_string(words), w) +
         padLeft(std::to_string(unambiguousWords), w) + padLeft(std::to_string(unambiguousBases), w) +
         padLeft(std::to_string(ambiguousWords), w) + padLeft(std::to_string(ambiguousBases), w) +
         padLeft(fixed(wordRatio(), 3), w) + padLeft(fixed(baseRatio(), 1), w) + '\n';
  return out;
}

AmbiguityStats analyzeAmbiguity(std::span<const std::u32string> goldLines, const DiacriticTable& table) {
  std::map<std::u32string, std::pair<std::set<std::u32string>, std::size_t>> bases;
  AmbiguityStats s;
  s.sequences = goldLines.size();
  for (const auto& line : goldLines) {
    for (auto [b, e] : alphabeticRuns(line)) {
      const std::u32string word = line.substr(b, e - b);
      auto& entry = bases[dediacritize(word, table)];
      entry.first.insert(word);
      ++entry.second;
      ++s.words;
    }
  }
  for (const auto& [base, entry] : bases) {
    if (entry.first.size() >= 2) {
      ++s.ambiguousBases;
      s.ambiguousWords += entry.second;
    } else {
      ++s.unambiguousBases;
      s.unambiguousWords += entry.second;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------

std::string ErrorSampleResult::toJson() const {
  Json j;
  j["total_errors"] = totalErrors;
  j["sampled"] = samples.size();
  j["exhausted"] = exhausted;
  Json list = Json::array();
  for (const auto& e : samples) {
    list.push_back(Json{{"line", e.line + 1},
                        {"position", e.position},
                        {"reference", utf8::encode(e.reference)},
                        {"hypothesis", utf8::encode(e.hypothesis)},
                        {"reference_context", utf8::encode(e.refContext)},
                        {"hypothesis_context", utf8::encode(e.hypContext)}});
  }
  j["errors"] = list;
  return j.dump(2);
}

ErrorSampleResult sampleErrors(std::span<const std::u32string> refs, std::span<const std::u32string> hyps,
                               std::size_t k, std::uint64_t seed) {
  if (k == 0) throw std::invalid_argument("sampleErrors: k must be at least 1");
  checkCounts(refs.size(), hyps.size());
  std::vector<std::pair<std::size_t, std::size_t>> all;
  for (std::size_t line = 0; line < refs.size(); ++line) {
    if (refs[line].size() != hyps[line].size()) throw LengthMismatch(line, refs[line].size(), hyps[line].size());
    for (std::size_t t = 0; t < refs[line].size(); ++t) {
      if (refs[line][t] != hyps[line][t]) all.emplace_back(line, t);
    }
  }
  ErrorSampleResult r;
  r.totalErrors = all.size();
  r.exhausted = all.size() <= k;
  if (!r.exhausted) {
    Rng rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(all.size() - i));
      std::swap(all[i], all[j]);
    }
    all.resize(k);
    std::sort(all.begin(), all.end());
  }
  for (auto [line, t] : all) {
    ErrorSample e;
    e.line = line;
    e.position = t;
    e.reference = refs[line][t];
    e.hypothesis = hyps[line][t];
    const std::size_t lo = t >= kErrorContext ? t - kErrorContext : 0;
    const std::size_t len = std::min(refs[line].size(), t + kErrorContext + 1) - lo;
    e.refContext = refs[line].substr(lo, len);
    e.hypContext = hyps[line].substr(lo, len);
    r.samples.push_back(std::move(e));
  }
  return r;
}

}  // namespace atcn
