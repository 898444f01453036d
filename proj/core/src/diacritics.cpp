#include "atcn/diacritics.hpp"

#include <algorithm>
#include <stdexcept>

#include "atcn/utf8.hpp"

namespace atcn {

namespace {

using Pairs = std::vector<std::pair<char32_t, char32_t>>;

// Lowercase pairs; uppercase counterparts are added automatically.
Pairs withUppercase(std::u32string_view marked, std::u32string_view bases) {
  Pairs out;
  for (std::size_t i = 0; i < marked.size(); ++i) {
    out.emplace_back(marked[i], bases[i]);
    out.emplace_back(utf8::toUpper(marked[i]), utf8::toUpper(bases[i]));
  }
  return out;
}

const DiacriticTable& hungarian() {
  static const DiacriticTable t("hu", withUppercase(U"áéíóöőúüű", U"aeiooouuu"));
  return t;
}

const DiacriticTable& polish() {
  static const DiacriticTable t("pl", withUppercase(U"ąćęłńóśźż", U"acelnoszz"));
  return t;
}

const DiacriticTable& czech() {
  static const DiacriticTable t("cs", withUppercase(U"áčďéěíňóřšťúůýž", U"acdeeinorstuuyz"));
  return t;
}

const DiacriticTable& slovak() {
  static const DiacriticTable t("sk", withUppercase(U"áäčďéíĺľňóôŕšťúýž", U"aacdeillnoorstuyz"));
  return t;
}

}  // namespace

DiacriticTable::DiacriticTable(std::string languageCode, const Pairs& pairs)
    : code_(std::move(languageCode)) {
  for (const auto& [marked, base] : pairs) {
    if (marked == base) throw std::invalid_argument("DiacriticTable: character maps to itself");
    auto [it, inserted] = toBase_.emplace(marked, base);
    if (!inserted && it->second != base) {
      throw std::invalid_argument("DiacriticTable: conflicting base for " + utf8::encode(marked));
    }
  }
  for (const auto& [marked, base] : toBase_) {
    if (toBase_.contains(base)) {
      throw std::invalid_argument("DiacriticTable: base " + utf8::encode(base) + " is itself a key");
    }
    auto& fam = families_[base];
    if (fam.empty()) fam.push_back(base);
    fam.push_back(marked);
  }
  for (auto& [base, fam] : families_) std::sort(fam.begin(), fam.end());
}

const DiacriticTable& DiacriticTable::forLanguage(std::string_view code) {
  if (code == "hu") return hungarian();
  if (code == "pl") return polish();
  if (code == "cs") return czech();
  if (code == "sk") return slovak();
  throw std::invalid_argument("unknown language code '" + std::string(code) + "' (known: hu, pl, cs, sk)");
}

std::vector<std::string> DiacriticTable::languages() { return {"cs", "hu", "pl", "sk"}; }

char32_t DiacriticTable::base(char32_t c) const {
  auto it = toBase_.find(c);
  return it == toBase_.end() ? c : it->second;
}

bool DiacriticTable::isImportant(char32_t c) const {
  auto it = families_.find(base(c));
  return it != families_.end() && it->second.size() >= 2;
}

std::u32string DiacriticTable::variants(char32_t c) const {
  auto it = families_.find(base(c));
  if (it == families_.end()) return std::u32string(1, c);
  return it->second;
}

std::u32string DiacriticTable::keys() const {
  std::u32string out;
  for (const auto& [k, v] : toBase_) out.push_back(k);
  return out;
}

std::u32string DiacriticTable::bases() const {
  std::u32string out;
  for (const auto& [b, fam] : families_) out.push_back(b);
  return out;
}

}  // namespace atcn
