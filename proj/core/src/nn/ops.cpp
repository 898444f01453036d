#include "atcn/nn/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "atcn/random.hpp"
#include "reduce.hpp"

namespace atcn::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using RowMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstRowMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using ColVec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

struct SeqLayout {
  std::size_t batch = 1;
  std::size_t channels = 0;
  std::size_t steps = 0;
};

template <typename T>
SeqLayout layoutOf(const Tensor<T>& t, const char* op, const char* what) {
  if (t.rank() == 2) return {1, t.dim(0), t.dim(1)};
  if (t.rank() == 3) return {t.dim(0), t.dim(1), t.dim(2)};
  throw std::invalid_argument(std::string(op) + ": " + what + " must be [C x n] or [B x C x n], got " +
                              shapeToString(t.shape()));
}

Shape sameRank(const SeqLayout& l, std::size_t channels, bool batched) {
  if (batched) return {l.batch, channels, l.steps};
  return {channels, l.steps};
}

std::vector<std::size_t> resolveLengths(std::span<const std::size_t> lengths, const SeqLayout& l,
                                        const char* op) {
  if (lengths.empty()) return std::vector<std::size_t>(l.batch, l.steps);
  if (lengths.size() != l.batch) {
    throw std::invalid_argument(std::string(op) + ": lengths has " + std::to_string(lengths.size()) +
                                " entries for batch dimension " + std::to_string(l.batch));
  }
  for (std::size_t len : lengths) {
    if (len > l.steps) {
      throw std::invalid_argument(std::string(op) + ": sequence length " + std::to_string(len) +
                                  " exceeds time dimension " + std::to_string(l.steps));
    }
  }
  return {lengths.begin(), lengths.end()};
}

// Tap j of the kernel as a dense [C_out x C_in] matrix.
template <typename T>
std::vector<RowMat<T>> packTaps(const Tensor<T>& weights, const ConvSpec& spec) {
  const std::size_t k = spec.kernelSize;
  std::vector<RowMat<T>> taps(k, RowMat<T>(spec.outChannels, spec.inChannels));
  const T* w = weights.ptr();
  for (std::size_t o = 0; o < spec.outChannels; ++o) {
    for (std::size_t i = 0; i < spec.inChannels; ++i) {
      const T* src = w + (o * spec.inChannels + i) * k;
      for (std::size_t j = 0; j < k; ++j) taps[j](o, i) = src[j];
    }
  }
  return taps;
}

struct TapRange {
  std::ptrdiff_t offset;  // input index = output index + offset
  std::ptrdiff_t lo;
  std::ptrdiff_t len;
};

TapRange tapRange(const ConvSpec& spec, std::size_t tap, std::size_t length) {
  const auto off = (static_cast<std::ptrdiff_t>(tap) - static_cast<std::ptrdiff_t>(spec.halfWidth())) *
                   static_cast<std::ptrdiff_t>(spec.dilation);
  const auto n = static_cast<std::ptrdiff_t>(length);
  const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -off);
  const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n, n - off);
  return {off, lo, std::max<std::ptrdiff_t>(0, hi - lo)};
}

template <typename T>
void checkConvShapes(const SeqLayout& l, const ConvSpec& spec, const Tensor<T>& weights,
                     const Tensor<T>* bias, const char* op) {
  spec.validate();
  if (l.channels != spec.inChannels) {
    throw std::invalid_argument(std::string(op) + ": input channel dimension " +
                                std::to_string(l.channels) + " != spec.inChannels " +
                                std::to_string(spec.inChannels));
  }
  if (l.steps == 0) throw std::invalid_argument(std::string(op) + ": time dimension n must be >= 1");
  const Shape expectW{spec.outChannels, spec.inChannels, spec.kernelSize};
  if (weights.shape() != expectW) {
    throw std::invalid_argument(std::string(op) + ": weights shape " + shapeToString(weights.shape()) +
                                " != expected " + shapeToString(expectW));
  }
  if (bias != nullptr && bias->size() != spec.outChannels) {
    throw std::invalid_argument(std::string(op) + ": bias length " + std::to_string(bias->size()) +
                                " != spec.outChannels " + std::to_string(spec.outChannels));
  }
}

}  // namespace

void ConvSpec::validate() const {
  if (kernelSize == 0 || kernelSize % 2 == 0) {
    throw std::invalid_argument("ConvSpec: kernel size must be odd and positive, got " +
                                std::to_string(kernelSize));
  }
  if (dilation == 0) throw std::invalid_argument("ConvSpec: dilation must be positive");
  if (inChannels == 0 || outChannels == 0) {
    throw std::invalid_argument("ConvSpec: channel counts must be positive");
  }
}

template <typename T>
Tensor<T> conv1dAcausal(const Tensor<T>& input, const ConvSpec& spec, const Tensor<T>& weights,
                        const Tensor<T>& bias, std::span<const std::size_t> lengths) {
  const SeqLayout l = layoutOf(input, "conv1dAcausal", "input");
  checkConvShapes(l, spec, weights, &bias, "conv1dAcausal");
  const auto lens = resolveLengths(lengths, l, "conv1dAcausal");
  const auto taps = packTaps(weights, spec);
  const Eigen::Map<const ColVec<T>> b(bias.ptr(), static_cast<Eigen::Index>(spec.outChannels));

  Tensor<T> out(sameRank(l, spec.outChannels, input.rank() == 3));
  const auto n = static_cast<Eigen::Index>(l.steps);
  for (std::size_t s = 0; s < l.batch; ++s) {
    const std::size_t len = lens[s];
    if (len == 0) continue;
    ConstRowMap<T> x(input.ptr() + s * spec.inChannels * l.steps,
                     static_cast<Eigen::Index>(spec.inChannels), n);
    RowMap<T> y(out.ptr() + s * spec.outChannels * l.steps, static_cast<Eigen::Index>(spec.outChannels), n);
    y.leftCols(static_cast<Eigen::Index>(len)).colwise() = b;
    for (std::size_t j = 0; j < spec.kernelSize; ++j) {
      const TapRange r = tapRange(spec, j, len);
      if (r.len <= 0) continue;
      y.middleCols(r.lo, r.len).noalias() += taps[j] * x.middleCols(r.lo + r.offset, r.len);
    }
  }
  return out;
}

template <typename T>
ConvGrads<T> conv1dAcausalBackward(const Tensor<T>& gradOut, const Tensor<T>& savedInput,
                                   const ConvSpec& spec, const Tensor<T>& weights,
                                   std::span<const std::size_t> lengths) {
  const SeqLayout l = layoutOf(savedInput, "conv1dAcausalBackward", "savedInput");
  checkConvShapes(l, spec, weights, static_cast<const Tensor<T>*>(nullptr), "conv1dAcausalBackward");
  const SeqLayout g = layoutOf(gradOut, "conv1dAcausalBackward", "gradOut");
  if (g.batch != l.batch || g.steps != l.steps || g.channels != spec.outChannels) {
    throw std::invalid_argument("conv1dAcausalBackward: gradOut shape " + shapeToString(gradOut.shape()) +
                                " inconsistent with input " + shapeToString(savedInput.shape()) +
                                " and outChannels " + std::to_string(spec.outChannels));
  }
  const auto lens = resolveLengths(lengths, l, "conv1dAcausalBackward");
  const auto taps = packTaps(weights, spec);

  ConvGrads<T> grads{Tensor<T>(savedInput.shape()), Tensor<T>(weights.shape()),
                     Tensor<T>(Shape{spec.outChannels})};
  std::vector<RowMat<T>> tapGrads(spec.kernelSize, RowMat<T>::Zero(spec.outChannels, spec.inChannels));
  ColVec<T> biasGrad = ColVec<T>::Zero(static_cast<Eigen::Index>(spec.outChannels));

  const auto n = static_cast<Eigen::Index>(l.steps);
  for (std::size_t s = 0; s < l.batch; ++s) {
    const std::size_t len = lens[s];
    if (len == 0) continue;
    ConstRowMap<T> x(savedInput.ptr() + s * spec.inChannels * l.steps,
                     static_cast<Eigen::Index>(spec.inChannels), n);
    ConstRowMap<T> go(gradOut.ptr() + s * spec.outChannels * l.steps,
                      static_cast<Eigen::Index>(spec.outChannels), n);
    RowMap<T> gx(grads.input.ptr() + s * spec.inChannels * l.steps,
                 static_cast<Eigen::Index>(spec.inChannels), n);
    detail::addRowSums(go.data(), spec.outChannels, l.steps, len, biasGrad.data());
    for (std::size_t j = 0; j < spec.kernelSize; ++j) {
      const TapRange r = tapRange(spec, j, len);
      if (r.len <= 0) continue;
      gx.middleCols(r.lo + r.offset, r.len).noalias() += taps[j].transpose() * go.middleCols(r.lo, r.len);
      tapGrads[j].noalias() += go.middleCols(r.lo, r.len) * x.middleCols(r.lo + r.offset, r.len).transpose();
    }
  }

  T* gw = grads.weights.ptr();
  for (std::size_t o = 0; o < spec.outChannels; ++o) {
    for (std::size_t i = 0; i < spec.inChannels; ++i) {
      T* dst = gw + (o * spec.inChannels + i) * spec.kernelSize;
      for (std::size_t j = 0; j < spec.kernelSize; ++j) dst[j] = tapGrads[j](o, i);
    }
  }
  for (std::size_t o = 0; o < spec.outChannels; ++o) grads.bias[o] = biasGrad(o);
  return grads;
}

template <typename T>
BatchNormState<T> BatchNormState<T>::identity(std::size_t channels) {
  BatchNormState<T> s;
  s.gamma = Tensor<T>(Shape{channels}, T(1));
  s.beta = Tensor<T>(Shape{channels}, T(0));
  s.runningMean.assign(channels, T(0));
  s.runningVar.assign(channels, T(1));
  return s;
}

template <typename T>
Tensor<T> batchNormChannel(const Tensor<T>& input, BatchNormState<T>& state, Mode mode,
                           std::span<const std::size_t> lengths, BatchNormCache<T>* cache) {
  const SeqLayout l = layoutOf(input, "batchNormChannel", "input");
  const std::size_t C = l.channels;
  if (state.gamma.size() != C || state.beta.size() != C || state.runningMean.size() != C ||
      state.runningVar.size() != C) {
    throw std::invalid_argument("batchNormChannel: state has " + std::to_string(state.gamma.size()) +
                                " channels, input channel dimension is " + std::to_string(C));
  }
  const auto lens = resolveLengths(lengths, l, "batchNormChannel");
  std::size_t count = 0;
  for (std::size_t len : lens) count += len;

  std::vector<T> mean(C), invStd(C);
  if (mode == Mode::Train) {
    if (count < 2) {
      throw std::invalid_argument("batchNormChannel: train mode needs at least 2 valid positions per channel, got " +
                                  std::to_string(count));
    }
    for (std::size_t c = 0; c < C; ++c) {
      double sum = 0.0;
      for (std::size_t s = 0; s < l.batch; ++s) {
        const T* row = input.ptr() + (s * C + c) * l.steps;
        for (std::size_t t = 0; t < lens[s]; ++t) sum += static_cast<double>(row[t]);
      }
      const double mu = sum / static_cast<double>(count);
      double sq = 0.0;
      for (std::size_t s = 0; s < l.batch; ++s) {
        const T* row = input.ptr() + (s * C + c) * l.steps;
        for (std::size_t t = 0; t < lens[s]; ++t) {
          const double d = static_cast<double>(row[t]) - mu;
          sq += d * d;
        }
      }
      const double var = sq / static_cast<double>(count);
      mean[c] = static_cast<T>(mu);
      invStd[c] = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(state.epsilon)));
      const double unbiased = sq / static_cast<double>(count - 1);
      state.runningMean[c] = static_cast<T>((1.0 - state.momentum) * state.runningMean[c] + state.momentum * mu);
      state.runningVar[c] =
          static_cast<T>((1.0 - state.momentum) * state.runningVar[c] + state.momentum * unbiased);
    }
  } else {
    for (std::size_t c = 0; c < C; ++c) {
      mean[c] = state.runningMean[c];
      invStd[c] = static_cast<T>(1.0 / std::sqrt(static_cast<double>(state.runningVar[c]) +
                                                 static_cast<double>(state.epsilon)));
    }
  }

  Tensor<T> out(input.shape());
  Tensor<T> normalized;
  if (cache != nullptr) normalized = Tensor<T>(input.shape());
  for (std::size_t s = 0; s < l.batch; ++s) {
    for (std::size_t c = 0; c < C; ++c) {
      const std::size_t base = (s * C + c) * l.steps;
      const T g = state.gamma[c];
      const T b = state.beta[c];
      for (std::size_t t = 0; t < lens[s]; ++t) {
        const T xh = (input[base + t] - mean[c]) * invStd[c];
        out[base + t] = g * xh + b;
        if (cache != nullptr) normalized[base + t] = xh;
      }
    }
  }
  if (cache != nullptr) {
    cache->normalized = std::move(normalized);
    cache->invStd = std::move(invStd);
    cache->lengths = lens;
    cache->mode = mode;
  }
  return out;
}

template <typename T>
BatchNormGrads<T> batchNormChannelBackward(const Tensor<T>& gradOut, const BatchNormState<T>& state,
                                           const BatchNormCache<T>& cache) {
  if (gradOut.shape() != cache.normalized.shape()) {
    throw std::invalid_argument("batchNormChannelBackward: gradOut shape " + shapeToString(gradOut.shape()) +
                                " != cached " + shapeToString(cache.normalized.shape()));
  }
  const SeqLayout l = layoutOf(gradOut, "batchNormChannelBackward", "gradOut");
  const std::size_t C = l.channels;
  const auto& lens = cache.lengths;
  std::size_t count = 0;
  for (std::size_t len : lens) count += len;

  BatchNormGrads<T> g{Tensor<T>(gradOut.shape()), std::vector<T>(C, T(0)), std::vector<T>(C, T(0))};
  for (std::size_t c = 0; c < C; ++c) {
    double sumDy = 0.0;
    double sumDyXh = 0.0;
    for (std::size_t s = 0; s < l.batch; ++s) {
      const std::size_t base = (s * C + c) * l.steps;
      for (std::size_t t = 0; t < lens[s]; ++t) {
        const double dy = gradOut[base + t];
        sumDy += dy;
        sumDyXh += dy * static_cast<double>(cache.normalized[base + t]);
      }
    }
    g.gamma[c] = static_cast<T>(sumDyXh);
    g.beta[c] = static_cast<T>(sumDy);
    const double gamma = state.gamma[c];
    const double inv = cache.invStd[c];
    for (std::size_t s = 0; s < l.batch; ++s) {
      const std::size_t base = (s * C + c) * l.steps;
      for (std::size_t t = 0; t < lens[s]; ++t) {
        const double dy = gradOut[base + t];
        if (cache.mode == Mode::Train) {
          const double n = static_cast<double>(count);
          const double xh = cache.normalized[base + t];
          g.input[base + t] = static_cast<T>(gamma * inv / n * (n * dy - sumDy - xh * sumDyXh));
        } else {
          g.input[base + t] = static_cast<T>(gamma * inv * dy);
        }
      }
    }
  }
  return g;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& input) {
  Tensor<T> out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) out[i] = input[i] > T(0) ? input[i] : T(0);
  return out;
}

template <typename T>
Tensor<T> reluBackward(const Tensor<T>& gradOut, const Tensor<T>& output) {
  if (gradOut.shape() != output.shape()) {
    throw std::invalid_argument("reluBackward: gradOut shape " + shapeToString(gradOut.shape()) +
                                " != output shape " + shapeToString(output.shape()));
  }
  Tensor<T> g(gradOut.shape());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = output[i] > T(0) ? gradOut[i] : T(0);
  return g;
}

template <typename T>
Tensor<T> spatialDropout(const Tensor<T>& input, double rate, std::uint64_t seed, Mode mode,
                         std::vector<T>* channelScale) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw std::invalid_argument("spatialDropout: rate must be in [0, 1), got " + std::to_string(rate));
  }
  const SeqLayout l = layoutOf(input, "spatialDropout", "input");
  const std::size_t groups = l.batch * l.channels;
  std::vector<T> scale(groups, T(1));
  if (mode == Mode::Train && rate > 0.0) {
    Rng rng(seed);
    const T keepScale = static_cast<T>(1.0 / (1.0 - rate));
    for (std::size_t g = 0; g < groups; ++g) scale[g] = rng.uniform() < rate ? T(0) : keepScale;
  }
  Tensor<T> out(input.shape());
  for (std::size_t g = 0; g < groups; ++g) {
    const T sc = scale[g];
    const T* src = input.ptr() + g * l.steps;
    T* dst = out.ptr() + g * l.steps;
    for (std::size_t t = 0; t < l.steps; ++t) dst[t] = src[t] * sc;
  }
  if (channelScale != nullptr) *channelScale = std::move(scale);
  return out;
}

template <typename T>
Tensor<T> spatialDropoutBackward(const Tensor<T>& gradOut, std::span<const T> channelScale) {
  const SeqLayout l = layoutOf(gradOut, "spatialDropoutBackward", "gradOut");
  if (channelScale.size() != l.batch * l.channels) {
    throw std::invalid_argument("spatialDropoutBackward: expected " + std::to_string(l.batch * l.channels) +
                                " channel scales, got " + std::to_string(channelScale.size()));
  }
  Tensor<T> g(gradOut.shape());
  for (std::size_t k = 0; k < channelScale.size(); ++k) {
    for (std::size_t t = 0; t < l.steps; ++t) g[k * l.steps + t] = gradOut[k * l.steps + t] * channelScale[k];
  }
  return g;
}

template <typename T>
Tensor<T> embedLookup(std::span<const std::int32_t> ids, const Tensor<T>& table) {
  if (table.rank() != 2) {
    throw std::invalid_argument("embedLookup: table must be [V x E], got " + shapeToString(table.shape()));
  }
  const std::size_t V = table.dim(0);
  const std::size_t E = table.dim(1);
  const std::size_t n = ids.size();
  Tensor<T> out(Shape{E, n});
  for (std::size_t t = 0; t < n; ++t) {
    const std::int32_t id = ids[t];
    if (id < 0 || static_cast<std::size_t>(id) >= V) {
      throw std::invalid_argument("embedLookup: id " + std::to_string(id) + " at position " + std::to_string(t) +
                                  " outside vocabulary of size " + std::to_string(V));
    }
    const T* row = table.ptr() + static_cast<std::size_t>(id) * E;
    for (std::size_t f = 0; f < E; ++f) out[f * n + t] = row[f];
  }
  return out;
}

template <typename T>
void embedLookupBackward(const Tensor<T>& gradOut, std::span<const std::int32_t> ids,
                         std::span<T> tableGrad, std::size_t embeddingDim) {
  const std::size_t n = ids.size();
  if (gradOut.size() != embeddingDim * n) {
    throw std::invalid_argument("embedLookupBackward: gradOut shape " + shapeToString(gradOut.shape()) +
                                " does not match [E x n] = [" + std::to_string(embeddingDim) + " x " +
                                std::to_string(n) + "]");
  }
  for (std::size_t t = 0; t < n; ++t) {
    const auto id = static_cast<std::size_t>(ids[t]);
    if ((id + 1) * embeddingDim > tableGrad.size()) {
      throw std::invalid_argument("embedLookupBackward: id " + std::to_string(ids[t]) + " out of range");
    }
    T* row = tableGrad.data() + id * embeddingDim;
    for (std::size_t f = 0; f < embeddingDim; ++f) row[f] += gradOut[f * n + t];
  }
}

template <typename T>
LossResult<T> softmaxCrossEntropy(const Tensor<T>& logits, std::span<const std::int32_t> targets,
                                  std::span<const std::uint8_t> mask) {
  const SeqLayout l = layoutOf(logits, "softmaxCrossEntropy", "logits");
  const std::size_t V = l.channels;
  const std::size_t positions = l.batch * l.steps;
  if (targets.size() != positions || mask.size() != positions) {
    throw std::invalid_argument("softmaxCrossEntropy: targets/mask length " + std::to_string(targets.size()) +
                                "/" + std::to_string(mask.size()) + " != B*n = " + std::to_string(positions));
  }
  std::size_t count = 0;
  for (std::uint8_t m : mask) count += m != 0 ? 1 : 0;
  if (count == 0) throw std::invalid_argument("softmaxCrossEntropy: mask has no valid positions");

  LossResult<T> r;
  r.count = count;
  r.gradLogits = Tensor<T>(logits.shape());
  const double invCount = 1.0 / static_cast<double>(count);
  double total = 0.0;
  std::vector<double> prob(V);
  for (std::size_t s = 0; s < l.batch; ++s) {
    const T* z = logits.ptr() + s * V * l.steps;
    T* dz = r.gradLogits.ptr() + s * V * l.steps;
    for (std::size_t t = 0; t < l.steps; ++t) {
      const std::size_t pos = s * l.steps + t;
      if (mask[pos] == 0) continue;
      const std::int32_t target = targets[pos];
      if (target < 0 || static_cast<std::size_t>(target) >= V) {
        throw std::invalid_argument("softmaxCrossEntropy: target " + std::to_string(target) + " at position " +
                                    std::to_string(pos) + " outside [0, " + std::to_string(V) + ")");
      }
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t v = 0; v < V; ++v) mx = std::max(mx, static_cast<double>(z[v * l.steps + t]));
      double sum = 0.0;
      for (std::size_t v = 0; v < V; ++v) {
        prob[v] = std::exp(static_cast<double>(z[v * l.steps + t]) - mx);
        sum += prob[v];
      }
      const double logSum = std::log(sum) + mx;
      total += logSum - static_cast<double>(z[static_cast<std::size_t>(target) * l.steps + t]);
      for (std::size_t v = 0; v < V; ++v) {
        double p = prob[v] / sum;
        if (v == static_cast<std::size_t>(target)) p -= 1.0;
        dz[v * l.steps + t] = static_cast<T>(p * invCount);
      }
    }
  }
  r.loss = total * invCount;
  return r;
}

#define ATCN_INSTANTIATE_OPS(T)                                                                           \
  template Tensor<T> conv1dAcausal<T>(const Tensor<T>&, const ConvSpec&, const Tensor<T>&, const Tensor<T>&, \
                                      std::span<const std::size_t>);                                      \
  template ConvGrads<T> conv1dAcausalBackward<T>(const Tensor<T>&, const Tensor<T>&, const ConvSpec&,       \
                                                 const Tensor<T>&, std::span<const std::size_t>);         \
  template struct BatchNormState<T>;                                                                      \
  template Tensor<T> batchNormChannel<T>(const Tensor<T>&, BatchNormState<T>&, Mode,                       \
                                         std::span<const std::size_t>, BatchNormCache<T>*);               \
  template BatchNormGrads<T> batchNormChannelBackward<T>(const Tensor<T>&, const BatchNormState<T>&,       \
                                                         const BatchNormCache<T>&);                       \
  template Tensor<T> relu<T>(const Tensor<T>&);                                                           \
  template Tensor<T> reluBackward<T>(const Tensor<T>&, const Tensor<T>&);                                 \
  template Tensor<T> spatialDropout<T>(const Tensor<T>&, double, std::uint64_t, Mode, std::vector<T>*);   \
  template Tensor<T> spatialDropoutBackward<T>(const Tensor<T>&, std::span<const T>);                     \
  template Tensor<T> embedLookup<T>(std::span<const std::int32_t>, const Tensor<T>&);                     \
  template void embedLookupBackward<T>(const Tensor<T>&, std::span<const std::int32_t>, std::span<T>,     \
                                       std::size_t);                                                      \
  template LossResult<T> softmaxCrossEntropy<T>(const Tensor<T>&, std::span<const std::int32_t>,          \
                                                std::span<const std::uint8_t>);

ATCN_INSTANTIATE_OPS(float)
ATCN_INSTANTIATE_OPS(double)

#undef ATCN_INSTANTIATE_OPS

}  // namespace atcn::nn
