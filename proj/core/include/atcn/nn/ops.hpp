#pragma once

// The handful of differentiable operations the A-TCN stack is built from. Each op
// has a hand-derived backward companion; there is no autodiff graph.
//
// Sequence tensors are channel-major: [C x n] for one sequence or [B x C x n]
// for a batch. Batched ops accept an optional `lengths` span giving the valid
// prefix of every sequence; positions at or beyond a sequence's length are
// treated as zero on input and produced as zero on output.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "atcn/nn/tensor.hpp"

namespace atcn::nn {

enum class Mode { Train, Eval };

struct ConvSpec {
  std::size_t kernelSize = 5;
  std::size_t dilation = 1;
  std::size_t inChannels = 1;
  std::size_t outChannels = 1;

  std::size_t halfWidth() const { return (kernelSize - 1) / 2; }
  /// Zeros added on each side: ((k - 1) / 2) * d.
  std::size_t padding() const { return halfWidth() * dilation; }
  void validate() const;
};

template <typename T>
Tensor<T> conv1dAcausal(const Tensor<T>& input, const ConvSpec& spec, const Tensor<T>& weights,
                        const Tensor<T>& bias, std::span<const std::size_t> lengths = {});

template <typename T>
struct ConvGrads {
  Tensor<T> input;
  Tensor<T> weights;
  Tensor<T> bias;
};

template <typename T>
ConvGrads<T> conv1dAcausalBackward(const Tensor<T>& gradOut, const Tensor<T>& savedInput,
                                   const ConvSpec& spec, const Tensor<T>& weights,
                                   std::span<const std::size_t> lengths = {});

template <typename T>
struct BatchNormState {
  Tensor<T> gamma;
  Tensor<T> beta;
  std::vector<T> runningMean;
  std::vector<T> runningVar;
  T momentum = T(0.1);
  T epsilon = T(1e-5);

  static BatchNormState identity(std::size_t channels);
  std::size_t channels() const { return gamma.size(); }
};

template <typename T>
struct BatchNormCache {
  Tensor<T> normalized;
  std::vector<T> invStd;
  std::vector<std::size_t> lengths;
  Mode mode = Mode::Eval;
};

/// Per-channel normalization over (batch, time). Train mode uses batch statistics
/// over valid positions and updates the running stats; eval mode is affine.
template <typename T>
Tensor<T> batchNormChannel(const Tensor<T>& input, BatchNormState<T>& state, Mode mode,
                           std::span<const std::size_t> lengths = {},
                           BatchNormCache<T>* cache = nullptr);

template <typename T>
struct BatchNormGrads {
  Tensor<T> input;
  std::vector<T> gamma;
  std::vector<T> beta;
};

template <typename T>
BatchNormGrads<T> batchNormChannelBackward(const Tensor<T>& gradOut, const BatchNormState<T>& state,
                                           const BatchNormCache<T>& cache);

template <typename T>
Tensor<T> relu(const Tensor<T>& input);

/// Needs the forward output only: relu'(x) = [y > 0].
template <typename T>
Tensor<T> reluBackward(const Tensor<T>& gradOut, const Tensor<T>& output);

/// Zeroes whole channels of each sequence with probability `rate` and scales the
/// survivors by 1 / (1 - rate). Identity in eval mode. `channelScale`, when given,
/// receives the per-(sequence, channel) multiplier for the backward pass.
template <typename T>
Tensor<T> spatialDropout(const Tensor<T>& input, double rate, std::uint64_t seed, Mode mode,
                         std::vector<T>* channelScale = nullptr);

template <typename T>
Tensor<T> spatialDropoutBackward(const Tensor<T>& gradOut, std::span<const T> channelScale);

/// ids of length n, table [V x E] -> [E x n].
template <typename T>
Tensor<T> embedLookup(std::span<const std::int32_t> ids, const Tensor<T>& table);

/// Accumulates into a [V x E] gradient buffer.
template <typename T>
void embedLookupBackward(const Tensor<T>& gradOut, std::span<const std::int32_t> ids,
                         std::span<T> tableGrad, std::size_t embeddingDim);

template <typename T>
struct LossResult {
  double loss = 0.0;
  std::size_t count = 0;
  Tensor<T> gradLogits;
};

/// logits [V x n] or [B x V x n]; targets and mask are flattened [B x n].
/// Loss is the mean over positions with mask != 0.
template <typename T>
LossResult<T> softmaxCrossEntropy(const Tensor<T>& logits, std::span<const std::int32_t> targets,
                                  std::span<const std::uint8_t> mask);

}  // namespace atcn::nn
