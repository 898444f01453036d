#include "atcn/baselines.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "atcn/corpus.hpp"
#include "atcn/utf8.hpp"

namespace atcn {

std::u32string copyRestore(std::u32string_view text) { return std::u32string(text); }

std::vector<std::pair<std::size_t, std::size_t>> alphabeticRuns(std::u32string_view text) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!utf8::isAlpha(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && utf8::isAlpha(text[j])) ++j;
    runs.emplace_back(i, j);
    i = j;
  }
  return runs;
}

DiacriticDictionary::DiacriticDictionary(const DiacriticTable& table) : table_(&table) {}

void DiacriticDictionary::addForm(std::u32string_view form, std::size_t count) {
  if (table_ == nullptr) throw std::logic_error("DiacriticDictionary has no table");
  if (count == 0) return;
  const std::u32string base = dediacritize(form, *table_);
  auto& forms = counts_[base];
  const std::size_t total = (forms[std::u32string(form)] += count);

  auto it = best_.find(base);
  if (it == best_.end()) {
    best_.emplace(base, std::u32string(form));
    return;
  }
  const std::size_t bestCount = forms.at(it->second);
  if (total > bestCount || (total == bestCount && std::u32string_view(form) < it->second)) {
    it->second = std::u32string(form);
  }
}

void DiacriticDictionary::addLine(std::u32string_view goldLine) {
  for (auto [b, e] : alphabeticRuns(goldLine)) addForm(goldLine.substr(b, e - b));
}

const std::u32string* DiacriticDictionary::best(std::u32string_view base) const {
  auto it = best_.find(std::u32string(base));
  return it == best_.end() ? nullptr : &it->second;
}

std::string DiacriticDictionary::toTsv() const {
  std::string out;
  for (const auto& [base, forms] : counts_) {
    for (const auto& [form, count] : forms) {
      out += utf8::encode(base);
      out += '\t';
      out += utf8::encode(form);
      out += '\t';
      out += std::to_string(count);
      out += '\n';
    }
  }
  return out;
}

void DiacriticDictionary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << toTsv();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

DiacriticDictionary DiacriticDictionary::fromTsv(std::string_view text, const DiacriticTable& table) {
  DiacriticDictionary dict(table);
  std::size_t lineNo = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const std::size_t t1 = line.find('\t');
    const std::size_t t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos) {
      throw std::runtime_error("dictionary line " + std::to_string(lineNo) + ": expected base<TAB>form<TAB>count");
    }
    const std::u32string base = utf8::decode(line.substr(0, t1));
    const std::u32string form = utf8::decode(line.substr(t1 + 1, t2 - t1 - 1));
    std::size_t count = 0;
    try {
      count = std::stoull(std::string(line.substr(t2 + 1)));
    } catch (const std::exception&) {
      throw std::runtime_error("dictionary line " + std::to_string(lineNo) + ": bad count");
    }
    if (dediacritize(form, table) != base) {
      throw std::runtime_error("dictionary line " + std::to_string(lineNo) + ": form does not strip to its base");
    }
    dict.addForm(form, count);
  }
  return dict;
}

DiacriticDictionary DiacriticDictionary::load(const std::filesystem::path& path, const DiacriticTable& table) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return fromTsv(ss.str(), table);
}

DiacriticDictionary buildDictionary(std::span<const std::u32string> goldLines, const DiacriticTable& table) {
  DiacriticDictionary dict(table);
  for (const auto& line : goldLines) dict.addLine(line);
  return dict;
}

std::u32string dictionaryRestore(std::u32string_view text, const DiacriticDictionary& dict) {
  std::u32string out(text);
  for (auto [b, e] : alphabeticRuns(text)) {
    const std::u32string word(text.substr(b, e - b));
    const std::u32string base = dediacritize(word, dict.table());
    if (const std::u32string* hit = dict.best(base)) {
      std::copy(hit->begin(), hit->end(), out.begin() + static_cast<std::ptrdiff_t>(b));
      continue;
    }
    std::u32string lower = base;
    for (char32_t& c : lower) c = utf8::toLower(c);
    if (lower == base) continue;
    const std::u32string* hit = dict.best(lower);
    if (hit == nullptr) continue;
    for (std::size_t i = 0; i < hit->size(); ++i) {
      const char32_t c = (*hit)[i];
      out[b + i] = utf8::isUpper(word[i]) ? utf8::toUpper(c) : c;
    }
  }
  return out;
}

}  // namespace atcn
