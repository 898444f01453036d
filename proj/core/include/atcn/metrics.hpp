#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "atcn/diacritics.hpp"

namespace atcn {

struct Ratio {
  std::size_t correct = 0;
  std::size_t total = 0;
  double value() const { return total == 0 ? 0.0 : double(correct) / double(total); }
  void add(bool ok) {
    ++total;
    if (ok) ++correct;
  }
  Ratio& operator+=(const Ratio& o) {
    correct += o.correct;
    total += o.total;
    return *this;
  }
};

struct MetricsReport {
  Ratio character;
  Ratio important;
  Ratio alphaWord;
  Ratio sequence;

  MetricsReport& operator+=(const MetricsReport& o);
  /// Stable key names: each metric has "correct", "total", "accuracy".
  std::string toJson() const;
};

/// Thrown when a reference/hypothesis pair differs in length.
class LengthMismatch : public std::invalid_argument {
 public:
  LengthMismatch(std::size_t line, std::size_t refLength, std::size_t hypLength);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Scores one pair. `line` only labels errors.
MetricsReport scorePair(std::u32string_view ref, std::u32string_view hyp, const DiacriticTable& table,
                        std::size_t line = 0);
MetricsReport scoreSequences(std::span<const std::u32string> refs, std::span<const std::u32string> hyps,
                             const DiacriticTable& table);

/// Important-character confusion. Rows are reference characters, columns predicted
/// characters plus a final "other" column for predictions outside the class set.
struct ConfusionMatrix {
  std::u32string classes;                       // grouped by family, families in base order
  std::vector<std::u32string> families;         // members of each family, in `classes` order
  std::vector<std::vector<std::size_t>> counts; // [K][K + 1]
  /// Errors whose prediction lies outside the reference's family, keyed by (ref, hyp).
  std::map<std::pair<char32_t, char32_t>, std::size_t> crossFamily;

  std::size_t size() const { return classes.size(); }
  std::size_t index(char32_t c) const;  // npos if not a class
  std::size_t rowSum(std::size_t i) const;
  std::size_t colSum(std::size_t j) const;
  std::size_t total() const;
  std::size_t errors() const;
  std::size_t crossFamilyErrors() const;
  /// Share of errors that stay within the reference's family; 1 when there are no errors.
  double withinFamilyErrorShare() const;

  double tpr(std::size_t i) const;
  double ppv(std::size_t i) const;
  double f1(std::size_t i) const;
  /// Sum over classes of (rowSum / total) * F1.
  double weightedF1() const;

  std::string toJson() const;
  /// One block per family: counts, a TPR column and a PPV row.
  std::string toTable() const;
};

ConfusionMatrix confusion(std::span<const std::u32string> refs, std::span<const std::u32string> hyps,
                          const DiacriticTable& table);

struct AmbiguityStats {
  std::size_t sequences = 0;
  std::size_t words = 0;
  std::size_t unambiguousWords = 0;
  std::size_t unambiguousBases = 0;
  std::size_t ambiguousWords = 0;
  std::size_t ambiguousBases = 0;

  /// unambiguous / ambiguous; 0 when there is nothing ambiguous.
  double wordRatio() const;
  double baseRatio() const;
  std::string toJson() const;
  std::string toTable() const;
};

/// Words are alphabetic runs, compared case-sensitively. A base is ambiguous when
/// more than one form of it occurs.
AmbiguityStats analyzeAmbiguity(std::span<const std::u32string> goldLines, const DiacriticTable& table);

struct ErrorSample {
  std::size_t line = 0;
  std::size_t position = 0;
  char32_t reference = 0;
  char32_t hypothesis = 0;
  std::u32string refContext;
  std::u32string hypContext;
};

struct ErrorSampleResult {
  std::vector<ErrorSample> samples;  // sorted by (line, position)
  std::size_t totalErrors = 0;
  bool exhausted = false;  // fewer errors than requested

  std::string toJson() const;
};

inline constexpr std::size_t kErrorContext = 40;

ErrorSampleResult sampleErrors(std::span<const std::u32string> refs, std::span<const std::u32string> hyps,
                               std::size_t k, std::uint64_t seed);

}  // namespace atcn
