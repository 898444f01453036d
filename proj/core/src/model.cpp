#include "atcn/model.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "atcn/diacritics.hpp"
#include "nn/reduce.hpp"
#include "atcn/random.hpp"
#include "atcn/utf8.hpp"

namespace atcn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using RowMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstRowMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using ColVec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

using nn::Mode;
using nn::Shape;
using nn::Tensor;

template <typename T>
void zeroPadding(Tensor<T>& t, std::span<const std::size_t> lengths) {
  const std::size_t B = t.dim(0);
  const std::size_t C = t.dim(1);
  const std::size_t n = t.dim(2);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t c = 0; c < C; ++c) {
      T* row = t.ptr() + (b * C + c) * n;
      std::fill(row + lengths[b], row + n, T(0));
    }
  }
}

template <typename T>
void addInto(Tensor<T>& dst, const Tensor<T>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

template <typename T>
void accumulateGrad(Tensor<T>& param, std::span<const T> g) {
  param.ensureGrad();
  auto dst = param.grad();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
}

}  // namespace

std::string_view toString(UpsamplerKind kind) {
  return kind == UpsamplerKind::ScalarCopy ? "scalar-copy" : "full-projection";
}

UpsamplerKind upsamplerFromString(std::string_view name) {
  if (name == "scalar-copy") return UpsamplerKind::ScalarCopy;
  if (name == "full-projection") return UpsamplerKind::FullProjection;
  throw std::invalid_argument("unknown upsampler kind '" + std::string(name) + "'");
}

std::size_t AtcnConfig::dilationSum() const {
  std::size_t s = 0;
  for (std::size_t d : dilations) s += d;
  return s;
}

std::size_t AtcnConfig::receptiveRadius() const {
  return convsPerBlock * ((kernelSize - 1) / 2) * dilationSum();
}

void AtcnConfig::validate() const {
  if (embeddingDim == 0 || channels == 0) throw std::invalid_argument("AtcnConfig: dimensions must be positive");
  if (kernelSize == 0 || kernelSize % 2 == 0) {
    throw std::invalid_argument("AtcnConfig: kernelSize must be odd, got " + std::to_string(kernelSize));
  }
  if (dilations.empty()) throw std::invalid_argument("AtcnConfig: at least one block is required");
  for (std::size_t d : dilations) {
    if (d == 0) throw std::invalid_argument("AtcnConfig: dilations must be positive");
  }
  if (convsPerBlock == 0) throw std::invalid_argument("AtcnConfig: convsPerBlock must be positive");
  if (upsampler == UpsamplerKind::ScalarCopy && channels % embeddingDim != 0) {
    throw std::invalid_argument("AtcnConfig: channels (" + std::to_string(channels) +
                                ") must be divisible by embeddingDim (" + std::to_string(embeddingDim) +
                                ") for the scalar-copy upsampler");
  }
  if (!(dropoutRate >= 0.0 && dropoutRate < 1.0)) {
    throw std::invalid_argument("AtcnConfig: dropoutRate must be in [0, 1)");
  }
  if (maxSequenceLength == 0) throw std::invalid_argument("AtcnConfig: maxSequenceLength must be positive");
}

template <typename T>
BasicAtcn<T>::BasicAtcn(AtcnConfig config, CharVocab vocab, std::string language)
    : config_(std::move(config)), vocab_(std::move(vocab)), language_(std::move(language)) {
  config_.validate();
  const std::size_t V = vocab_.size();
  const std::size_t E = config_.embeddingDim;
  const std::size_t C = config_.channels;
  embedding = Tensor<T>(Shape{V, E});
  upWeight = config_.upsampler == UpsamplerKind::ScalarCopy ? Tensor<T>(Shape{C / E}) : Tensor<T>(Shape{C, E});
  upBias = Tensor<T>(Shape{C});
  for (std::size_t blk = 0; blk < config_.numBlocks(); ++blk) {
    for (std::size_t j = 0; j < config_.convsPerBlock; ++j) {
      ConvLayer<T> layer;
      layer.dilation = config_.dilations[blk];
      layer.weight = Tensor<T>(Shape{C, C, config_.kernelSize});
      layer.bias = Tensor<T>(Shape{C});
      layer.norm = nn::BatchNormState<T>::identity(C);
      layer.norm.momentum = static_cast<T>(config_.batchNormMomentum);
      layer.norm.epsilon = static_cast<T>(config_.batchNormEpsilon);
      layers.push_back(std::move(layer));
    }
  }
  outWeight = Tensor<T>(Shape{V, C});
  outBias = Tensor<T>(Shape{V});
}

template <typename T>
BasicAtcn<T> BasicAtcn<T>::initialized(AtcnConfig config, CharVocab vocab, std::string language,
                                       std::uint64_t seed) {
  BasicAtcn<T> m(std::move(config), std::move(vocab), std::move(language));
  const std::size_t E = m.config_.embeddingDim;
  const std::size_t C = m.config_.channels;

  Rng embRng(deriveSeed(seed, {1}));
  const double embScale = 1.0 / std::sqrt(static_cast<double>(E));
  for (auto& w : m.embedding.data()) w = static_cast<T>(embRng.normal() * embScale);

  if (m.config_.upsampler == UpsamplerKind::ScalarCopy) {
    m.upWeight.fill(T(1));
  } else {
    Rng upRng(deriveSeed(seed, {2}));
    const double bound = std::sqrt(6.0 / static_cast<double>(E));
    for (auto& w : m.upWeight.data()) w = static_cast<T>((2.0 * upRng.uniform() - 1.0) * bound);
  }

  const double convBound = std::sqrt(6.0 / static_cast<double>(C * m.config_.kernelSize));
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    Rng rng(deriveSeed(seed, {3, l}));
    for (auto& w : m.layers[l].weight.data()) w = static_cast<T>((2.0 * rng.uniform() - 1.0) * convBound);
  }

  Rng outRng(deriveSeed(seed, {4}));
  const double outBound = std::sqrt(6.0 / static_cast<double>(C));
  for (auto& w : m.outWeight.data()) w = static_cast<T>((2.0 * outRng.uniform() - 1.0) * outBound);
  return m;
}

template <typename T>
std::vector<std::pair<std::string, Tensor<T>*>> BasicAtcn<T>::namedParameters() {
  std::vector<std::pair<std::string, Tensor<T>*>> out;
  out.emplace_back("embedding", &embedding);
  out.emplace_back("upsample.weight", &upWeight);
  out.emplace_back("upsample.bias", &upBias);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string prefix = "block" + std::to_string(l / config_.convsPerBlock) + ".conv" +
                               std::to_string(l % config_.convsPerBlock);
    out.emplace_back(prefix + ".weight", &layers[l].weight);
    out.emplace_back(prefix + ".bias", &layers[l].bias);
    out.emplace_back(prefix + ".norm.gamma", &layers[l].norm.gamma);
    out.emplace_back(prefix + ".norm.beta", &layers[l].norm.beta);
  }
  out.emplace_back("output.weight", &outWeight);
  out.emplace_back("output.bias", &outBias);
  return out;
}

template <typename T>
std::vector<std::pair<std::string, const Tensor<T>*>> BasicAtcn<T>::namedParameters() const {
  auto named = const_cast<BasicAtcn<T>*>(this)->namedParameters();
  std::vector<std::pair<std::string, const Tensor<T>*>> out;
  out.reserve(named.size());
  for (auto& [name, t] : named) out.emplace_back(std::move(name), t);
  return out;
}

template <typename T>
std::vector<Tensor<T>*> BasicAtcn<T>::parameters() {
  std::vector<Tensor<T>*> out;
  for (auto& [name, t] : namedParameters()) out.push_back(t);
  return out;
}

template <typename T>
std::size_t BasicAtcn<T>::parameterCount() const {
  std::size_t n = 0;
  for (const auto& [name, t] : namedParameters()) n += t->size();
  return n;
}

template <typename T>
void BasicAtcn<T>::zeroGrad() {
  for (Tensor<T>* p : parameters()) p->zeroGrad();
}

template <typename T>
nn::ConvSpec BasicAtcn<T>::convSpec(std::size_t layer) const {
  return nn::ConvSpec{config_.kernelSize, layers[layer].dilation, config_.channels, config_.channels};
}

template <typename T>
Tensor<T> BasicAtcn<T>::forward(const SequenceBatch& batch, Mode mode, std::uint64_t seed,
                                ForwardCache<T>* cache) {
  const std::size_t B = batch.batchSize;
  const std::size_t n = batch.steps;
  const std::size_t E = config_.embeddingDim;
  const std::size_t C = config_.channels;
  const std::size_t V = vocab_.size();
  if (B == 0 || n == 0) throw std::invalid_argument("forward: empty batch");
  if (batch.inputIds.size() != B * n || batch.lengths.size() != B) {
    throw std::invalid_argument("forward: batch arrays do not match [B x n] = [" + std::to_string(B) + " x " +
                                std::to_string(n) + "]");
  }
  for (std::size_t b = 0; b < B; ++b) {
    if (batch.lengths[b] > n) throw std::invalid_argument("forward: sequence length exceeds batch width");
  }
  const std::span<const std::size_t> lengths(batch.lengths);

  // Embedding lookup, [B x E x n].
  Tensor<T> embedded(Shape{B, E, n});
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t t = 0; t < batch.lengths[b]; ++t) {
      const std::int32_t id = batch.inputIds[b * n + t];
      if (id < 0 || static_cast<std::size_t>(id) >= V) {
        throw std::invalid_argument("forward: id " + std::to_string(id) + " at (" + std::to_string(b) + ", " +
                                    std::to_string(t) + ") outside vocabulary of size " + std::to_string(V));
      }
      const T* row = embedding.ptr() + static_cast<std::size_t>(id) * E;
      for (std::size_t f = 0; f < E; ++f) embedded[(b * E + f) * n + t] = row[f];
    }
  }

  // Upsampling E -> C.
  Tensor<T> h(Shape{B, C, n});
  for (std::size_t b = 0; b < B; ++b) {
    const std::size_t len = batch.lengths[b];
    if (len == 0) continue;
    const auto L = static_cast<Eigen::Index>(len);
    ConstRowMap<T> x(embedded.ptr() + b * E * n, static_cast<Eigen::Index>(E), static_cast<Eigen::Index>(n));
    RowMap<T> y(h.ptr() + b * C * n, static_cast<Eigen::Index>(C), static_cast<Eigen::Index>(n));
    if (config_.upsampler == UpsamplerKind::ScalarCopy) {
      for (std::size_t copy = 0; copy < C / E; ++copy) {
        y.middleRows(static_cast<Eigen::Index>(copy * E), static_cast<Eigen::Index>(E)).leftCols(L) =
            upWeight[copy] * x.leftCols(L);
      }
    } else {
      ConstRowMap<T> w(upWeight.ptr(), static_cast<Eigen::Index>(C), static_cast<Eigen::Index>(E));
      y.leftCols(L).noalias() = w * x.leftCols(L);
    }
    const Eigen::Map<const ColVec<T>> bias(upBias.ptr(), static_cast<Eigen::Index>(C));
    y.leftCols(L).colwise() += bias;
  }

  if (cache != nullptr) {
    cache->lengths = batch.lengths;
    cache->ids = batch.inputIds;
    cache->embedded = std::move(embedded);
    cache->blockInputs.clear();
    cache->norms.assign(layers.size(), {});
    cache->activations.assign(layers.size(), {});
    cache->dropScales.assign(layers.size(), {});
  }

  const double dropRate = mode == Mode::Train ? config_.dropoutRate : 0.0;
  for (std::size_t blk = 0; blk < config_.numBlocks(); ++blk) {
    Tensor<T> skip = h;
    if (cache != nullptr) cache->blockInputs.push_back(h);
    for (std::size_t j = 0; j < config_.convsPerBlock; ++j) {
      const std::size_t l = blk * config_.convsPerBlock + j;
      ConvLayer<T>& layer = layers[l];
      Tensor<T> a = nn::conv1dAcausal(h, convSpec(l), layer.weight, layer.bias, lengths);
      nn::BatchNormCache<T>* normCache = cache != nullptr ? &cache->norms[l] : nullptr;
      a = nn::batchNormChannel(a, layer.norm, mode, lengths, normCache);
      for (auto& v : a.data()) v = v > T(0) ? v : T(0);
      std::vector<T> scales;
      if (dropRate > 0.0) {
        a = nn::spatialDropout(a, dropRate, deriveSeed(seed, {static_cast<std::uint64_t>(l)}), mode, &scales);
      } else {
        scales.assign(B * C, T(1));
      }
      if (cache != nullptr) {
        cache->activations[l] = a;
        cache->dropScales[l] = std::move(scales);
      }
      h = std::move(a);
    }
    addInto(h, skip);
  }

  // Position-wise projection C -> V.
  Tensor<T> out(Shape{B, V, n});
  const Eigen::Map<const ColVec<T>> ob(outBias.ptr(), static_cast<Eigen::Index>(V));
  ConstRowMap<T> ow(outWeight.ptr(), static_cast<Eigen::Index>(V), static_cast<Eigen::Index>(C));
  for (std::size_t b = 0; b < B; ++b) {
    const auto L = static_cast<Eigen::Index>(batch.lengths[b]);
    if (L == 0) continue;
    ConstRowMap<T> x(h.ptr() + b * C * n, static_cast<Eigen::Index>(C), static_cast<Eigen::Index>(n));
    RowMap<T> y(out.ptr() + b * V * n, static_cast<Eigen::Index>(V), static_cast<Eigen::Index>(n));
    y.leftCols(L).noalias() = ow * x.leftCols(L);
    y.leftCols(L).colwise() += ob;
  }
  if (cache != nullptr) cache->finalHidden = std::move(h);
  return out;
}

template <typename T>
Tensor<T> BasicAtcn<T>::logits(std::span<const std::int32_t> ids) const {
  SequenceBatch batch;
  batch.batchSize = 1;
  batch.steps = ids.size();
  batch.inputIds.assign(ids.begin(), ids.end());
  batch.lengths = {ids.size()};
  // Eval mode never touches batch-norm running stats, so forward is logically const.
  Tensor<T> out = const_cast<BasicAtcn<T>*>(this)->forward(batch, Mode::Eval, 0);
  out.reshape(Shape{vocab_.size(), ids.size()});
  return out;
}

template <typename T>
void BasicAtcn<T>::backward(const Tensor<T>& gradLogits, const ForwardCache<T>& cache) {
  const std::size_t B = cache.lengths.size();
  const std::size_t E = config_.embeddingDim;
  const std::size_t C = config_.channels;
  const std::size_t V = vocab_.size();
  const std::size_t n = cache.finalHidden.dim(2);
  if (gradLogits.shape() != Shape{B, V, n}) {
    throw std::invalid_argument("backward: gradLogits shape " + nn::shapeToString(gradLogits.shape()) +
                                " does not match the cached forward pass");
  }
  const std::span<const std::size_t> lengths(cache.lengths);
  const auto Ei = static_cast<Eigen::Index>(E);
  const auto Ci = static_cast<Eigen::Index>(C);
  const auto Vi = static_cast<Eigen::Index>(V);
  const auto ni = static_cast<Eigen::Index>(n);

  // Output projection.
  RowMat<T> gOutW = RowMat<T>::Zero(Vi, Ci);
  ColVec<T> gOutB = ColVec<T>::Zero(Vi);
  Tensor<T> gh(Shape{B, C, n});
  ConstRowMap<T> ow(outWeight.ptr(), Vi, Ci);
  for (std::size_t b = 0; b < B; ++b) {
    const auto L = static_cast<Eigen::Index>(lengths[b]);
    if (L == 0) continue;
    ConstRowMap<T> g(gradLogits.ptr() + b * V * n, Vi, ni);
    ConstRowMap<T> x(cache.finalHidden.ptr() + b * C * n, Ci, ni);
    RowMap<T> gx(gh.ptr() + b * C * n, Ci, ni);
    gOutW.noalias() += g.leftCols(L) * x.leftCols(L).transpose();
    nn::detail::addRowSums(g.data(), V, n, lengths[b], gOutB.data());
    gx.leftCols(L).noalias() = ow.transpose() * g.leftCols(L);
  }
  accumulateGrad(outWeight, std::span<const T>(gOutW.data(), static_cast<std::size_t>(gOutW.size())));
  accumulateGrad(outBias, std::span<const T>(gOutB.data(), static_cast<std::size_t>(gOutB.size())));

  for (std::size_t blk = config_.numBlocks(); blk-- > 0;) {
    const Tensor<T> skipGrad = gh;
    for (std::size_t j = config_.convsPerBlock; j-- > 0;) {
      const std::size_t l = blk * config_.convsPerBlock + j;
      ConvLayer<T>& layer = layers[l];
      const Tensor<T>& act = cache.activations[l];
      const auto& scales = cache.dropScales[l];
      // Through dropout and ReLU: act = relu(z) * scale, so d/dz = scale * [act > 0].
      for (std::size_t g = 0; g < B * C; ++g) {
        const T sc = scales[g];
        T* dst = gh.ptr() + g * n;
        const T* a = act.ptr() + g * n;
        for (std::size_t t = 0; t < n; ++t) dst[t] = a[t] > T(0) ? dst[t] * sc : T(0);
      }
      auto normGrads = nn::batchNormChannelBackward(gh, layer.norm, cache.norms[l]);
      accumulateGrad(layer.norm.gamma, std::span<const T>(normGrads.gamma));
      accumulateGrad(layer.norm.beta, std::span<const T>(normGrads.beta));
      const Tensor<T>& convInput = j == 0 ? cache.blockInputs[blk] : cache.activations[l - 1];
      auto convGrads = nn::conv1dAcausalBackward(normGrads.input, convInput, convSpec(l), layer.weight, lengths);
      accumulateGrad(layer.weight, std::as_const(convGrads.weights).data());
      accumulateGrad(layer.bias, std::as_const(convGrads.bias).data());
      gh = std::move(convGrads.input);
    }
    addInto(gh, skipGrad);
  }
  zeroPadding(gh, lengths);

  // Upsampling.
  Tensor<T> gEmb(Shape{B, E, n});
  std::vector<T> gUpW(upWeight.size(), T(0));
  ColVec<T> gUpB = ColVec<T>::Zero(Ci);
  for (std::size_t b = 0; b < B; ++b) {
    const auto L = static_cast<Eigen::Index>(lengths[b]);
    if (L == 0) continue;
    ConstRowMap<T> g(gh.ptr() + b * C * n, Ci, ni);
    ConstRowMap<T> x(cache.embedded.ptr() + b * E * n, Ei, ni);
    RowMap<T> gx(gEmb.ptr() + b * E * n, Ei, ni);
    nn::detail::addRowSums(g.data(), C, n, lengths[b], gUpB.data());
    if (config_.upsampler == UpsamplerKind::ScalarCopy) {
      for (std::size_t copy = 0; copy < C / E; ++copy) {
        const auto gBlock = g.middleRows(static_cast<Eigen::Index>(copy * E), Ei).leftCols(L);
        gUpW[copy] += nn::detail::dotRows(g.data() + copy * E * n, x.data(), E, n, lengths[b]);
        gx.leftCols(L) += upWeight[copy] * gBlock;
      }
    } else {
      ConstRowMap<T> w(upWeight.ptr(), Ci, Ei);
      Eigen::Map<RowMat<T>> gw(gUpW.data(), Ci, Ei);
      gw.noalias() += g.leftCols(L) * x.leftCols(L).transpose();
      gx.leftCols(L).noalias() += w.transpose() * g.leftCols(L);
    }
  }
  accumulateGrad(upWeight, std::span<const T>(gUpW));
  accumulateGrad(upBias, std::span<const T>(gUpB.data(), static_cast<std::size_t>(gUpB.size())));

  // Embedding scatter.
  embedding.ensureGrad();
  auto gTable = embedding.grad();
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t t = 0; t < lengths[b]; ++t) {
      const auto id = static_cast<std::size_t>(cache.ids[b * n + t]);
      T* row = gTable.data() + id * E;
      for (std::size_t f = 0; f < E; ++f) row[f] += gEmb[(b * E + f) * n + t];
    }
  }
}

template class BasicAtcn<float>;
template class BasicAtcn<double>;

SequenceBatch makeInputBatch(const CharVocab& vocab, std::span<const std::u32string> texts) {
  SequenceBatch batch;
  batch.batchSize = texts.size();
  std::size_t steps = 0;
  for (const auto& t : texts) steps = std::max(steps, t.size());
  batch.steps = steps;
  batch.inputIds.assign(batch.batchSize * steps, CharVocab::kPad);
  batch.targetIds.assign(batch.batchSize * steps, CharVocab::kPad);
  batch.mask.assign(batch.batchSize * steps, 0);
  for (std::size_t b = 0; b < texts.size(); ++b) {
    batch.lengths.push_back(texts[b].size());
    for (std::size_t t = 0; t < texts[b].size(); ++t) {
      batch.inputIds[b * steps + t] = vocab.id(texts[b][t]);
      batch.mask[b * steps + t] = 1;
    }
  }
  return batch;
}

namespace {

void decodeSequence(const CharVocab& vocab, const float* logits, std::size_t stride, std::u32string& text,
                    Decoding decoding, const DiacriticTable* table) {
  const std::size_t V = vocab.size();
  const std::u32string input = text;
  for (std::size_t t = 0; t < input.size(); ++t) {
    const std::int32_t inputId = vocab.id(input[t]);
    if (inputId == CharVocab::kUnk) continue;  // unknown input characters pass through
    std::int32_t best = -1;
    float bestScore = 0.0f;
    auto consider = [&](std::int32_t id) {
      const float s = logits[static_cast<std::size_t>(id) * stride + t];
      if (best < 0 || s > bestScore || (s == bestScore && id < best)) {
        best = id;
        bestScore = s;
      }
    };
    if (decoding == Decoding::Unconstrained) {
      for (std::size_t v = 0; v < V; ++v) consider(static_cast<std::int32_t>(v));
    } else {
      for (char32_t c : table->variants(input[t])) {
        const std::int32_t id = vocab.id(c);
        if (id != CharVocab::kUnk) consider(id);
      }
      consider(inputId);
    }
    if (best >= CharVocab::kFirstChar) text[t] = vocab.character(best);
  }
}

}  // namespace

std::vector<std::u32string> restoreBatch(const AtcnModel& model, std::span<const std::u32string> texts,
                                         Decoding decoding, const DiacriticTable* table) {
  if (decoding == Decoding::VariantConstrained && table == nullptr) {
    throw std::invalid_argument("restore: variant-constrained decoding needs a diacritic table");
  }
  std::vector<std::u32string> out(texts.begin(), texts.end());
  std::vector<std::u32string> nonEmpty;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (texts[i].empty()) continue;
    nonEmpty.push_back(texts[i]);
    where.push_back(i);
  }
  if (nonEmpty.empty()) return out;
  const SequenceBatch batch = makeInputBatch(model.vocab(), nonEmpty);
  const Tensor<float> logits = const_cast<AtcnModel&>(model).forward(batch, nn::Mode::Eval, 0);
  const std::size_t V = model.vocabSize();
  const std::size_t n = batch.steps;
  for (std::size_t b = 0; b < nonEmpty.size(); ++b) {
    decodeSequence(model.vocab(), logits.ptr() + b * V * n, n, out[where[b]], decoding, table);
  }
  return out;
}

std::u32string restore(const AtcnModel& model, std::u32string_view text, Decoding decoding,
                       const DiacriticTable* table) {
  const std::u32string one(text);
  return std::move(restoreBatch(model, std::span<const std::u32string>(&one, 1), decoding, table)[0]);
}

std::string restoreUtf8(const AtcnModel& model, std::string_view text, Decoding decoding) {
  const DiacriticTable* table = nullptr;
  if (decoding == Decoding::VariantConstrained) table = &DiacriticTable::forLanguage(model.language());
  return utf8::encode(restore(model, utf8::decode(text), decoding, table));
}

}  // namespace atcn
