#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "atcn/batch.hpp"
#include "atcn/nn/ops.hpp"
#include "atcn/nn/tensor.hpp"
#include "atcn/vocab.hpp"

namespace atcn {

class DiacriticTable;

enum class UpsamplerKind {
  /// The embedding is repeated C/E times, each copy scaled by its own scalar.
  ScalarCopy,
  /// A dense 1x1 projection E -> C.
  FullProjection,
};

std::string_view toString(UpsamplerKind kind);
UpsamplerKind upsamplerFromString(std::string_view name);

struct AtcnConfig {
  std::size_t embeddingDim = 50;
  std::size_t channels = 250;
  std::vector<std::size_t> dilations{1, 2, 4, 8};
  std::size_t convsPerBlock = 2;
  std::size_t kernelSize = 5;
  double dropoutRate = 0.2;
  std::size_t maxSequenceLength = 500;
  UpsamplerKind upsampler = UpsamplerKind::ScalarCopy;
  double batchNormMomentum = 0.1;
  double batchNormEpsilon = 1e-5;

  std::size_t numBlocks() const { return dilations.size(); }
  std::size_t dilationSum() const;
  /// Positions on each side of t that can influence output t.
  std::size_t receptiveRadius() const;
  std::size_t receptiveField() const { return 1 + 2 * receptiveRadius(); }
  /// Throws std::invalid_argument when the configuration is inconsistent.
  void validate() const;
};

template <typename T>
struct ConvLayer {
  std::size_t dilation = 1;
  nn::Tensor<T> weight;  // [C x C x k]
  nn::Tensor<T> bias;    // [C]
  nn::BatchNormState<T> norm;
};

template <typename T>
struct ForwardCache {
  std::vector<std::size_t> lengths;
  std::vector<std::int32_t> ids;
  nn::Tensor<T> embedded;                      // [B x E x n]
  std::vector<nn::Tensor<T>> blockInputs;      // [B x C x n] per block
  std::vector<nn::BatchNormCache<T>> norms;    // per conv layer
  std::vector<nn::Tensor<T>> activations;      // per conv layer, after dropout
  std::vector<std::vector<T>> dropScales;      // per conv layer
  nn::Tensor<T> finalHidden;                   // [B x C x n]
};

/// The acausal temporal convolutional network: embedding, upsampling to the
/// channel width, residual blocks of dilated convolutions, and a position-wise
/// projection to one logit per vocabulary entry.
template <typename T>
class BasicAtcn {
 public:
  BasicAtcn() = default;
  /// All parameters zero, batch-norm stats at identity.
  BasicAtcn(AtcnConfig config, CharVocab vocab, std::string language);

  /// Randomly initialized model; deterministic in `seed`.
  static BasicAtcn initialized(AtcnConfig config, CharVocab vocab, std::string language, std::uint64_t seed);

  const AtcnConfig& config() const { return config_; }
  const CharVocab& vocab() const { return vocab_; }
  const std::string& language() const { return language_; }
  std::size_t vocabSize() const { return vocab_.size(); }

  /// Trainable tensors in a fixed order with stable names.
  std::vector<std::pair<std::string, nn::Tensor<T>*>> namedParameters();
  std::vector<std::pair<std::string, const nn::Tensor<T>*>> namedParameters() const;
  std::vector<nn::Tensor<T>*> parameters();
  std::size_t parameterCount() const;

  /// Logits [B x V x n]. Positions beyond each sequence's length are zero.
  nn::Tensor<T> forward(const SequenceBatch& batch, nn::Mode mode, std::uint64_t seed,
                        ForwardCache<T>* cache = nullptr);
  /// Logits [V x n] for one sequence in eval mode.
  nn::Tensor<T> logits(std::span<const std::int32_t> ids) const;

  /// Accumulates parameter gradients; requires the cache from a train- or eval-mode forward.
  void backward(const nn::Tensor<T>& gradLogits, const ForwardCache<T>& cache);
  void zeroGrad();

  nn::Tensor<T> embedding;   // [V x E]
  nn::Tensor<T> upWeight;    // [C/E] (scalar copy) or [C x E]
  nn::Tensor<T> upBias;      // [C]
  std::vector<ConvLayer<T>> layers;  // numBlocks * convsPerBlock, block-major
  nn::Tensor<T> outWeight;   // [V x C]
  nn::Tensor<T> outBias;     // [V]

 private:
  nn::ConvSpec convSpec(std::size_t layer) const;

  AtcnConfig config_;
  CharVocab vocab_;
  std::string language_;
};

using AtcnModel = BasicAtcn<float>;

extern template class BasicAtcn<float>;
extern template class BasicAtcn<double>;

enum class Decoding { Unconstrained, VariantConstrained };

/// Restores diacritics of `text`. Output has exactly as many characters as input.
/// Characters outside the vocabulary are copied verbatim, as are positions whose
/// best class is PAD or UNK. Variant-constrained decoding restricts each position
/// to the input character's diacritic family and needs `table`.
std::u32string restore(const AtcnModel& model, std::u32string_view text, Decoding decoding,
                       const DiacriticTable* table = nullptr);

/// Restores several texts with one batched forward pass.
std::vector<std::u32string> restoreBatch(const AtcnModel& model, std::span<const std::u32string> texts,
                                         Decoding decoding, const DiacriticTable* table = nullptr);

/// UTF-8 convenience overload; the table is looked up from the model's language
/// when constrained decoding is requested.
std::string restoreUtf8(const AtcnModel& model, std::string_view text, Decoding decoding);

/// Builds an id batch (no targets) for inference over the given texts.
SequenceBatch makeInputBatch(const CharVocab& vocab, std::span<const std::u32string> texts);

}  // namespace atcn
