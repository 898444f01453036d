#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numeric>

#include "atcn/nn/ops.hpp"
#include "atcn/random.hpp"
#include "gradcheck.hpp"

using atcn::Rng;
using atcn::nn::BatchNormCache;
using atcn::nn::BatchNormState;
using atcn::nn::ConvSpec;
using atcn::nn::Mode;
using atcn::nn::Shape;
using atcn::nn::Tensor;
using atcn::testing::checkGradient;
using atcn::testing::randomVector;

namespace {

using TensorD = Tensor<double>;

TensorD fromVector(Shape shape, std::vector<double> v) { return TensorD(std::move(shape), std::move(v)); }

// Direct evaluation of out[c,t] = bias[c] + sum_{i,j} w[c,i,j] * x[i, t + (j - (k-1)/2) d].
std::vector<double> naiveConv(const std::vector<double>& x, std::size_t cin, std::size_t n,
                              const std::vector<double>& w, const std::vector<double>& bias,
                              std::size_t cout, std::size_t k, std::size_t d) {
  std::vector<double> out(cout * n, 0.0);
  const long half = static_cast<long>((k - 1) / 2);
  for (std::size_t c = 0; c < cout; ++c) {
    for (std::size_t t = 0; t < n; ++t) {
      double s = bias[c];
      for (std::size_t i = 0; i < cin; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
          const long src = static_cast<long>(t) + (static_cast<long>(j) - half) * static_cast<long>(d);
          if (src < 0 || src >= static_cast<long>(n)) continue;
          s += w[(c * cin + i) * k + j] * x[i * n + static_cast<std::size_t>(src)];
        }
      }
      out[c * n + t] = s;
    }
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

TEST(Conv1dAcausal, FollowsCrossCorrelationFormula) {
  const TensorD x = fromVector({1, 5}, {1, 2, 3, 4, 5});
  const ConvSpec spec{3, 1, 1, 1};
  const TensorD bias = fromVector({1}, {0});
  const TensorD y = atcn::nn::conv1dAcausal(x, spec, fromVector({1, 1, 3}, {1, 0, -1}), bias);
  const std::vector<double> expected{-2, -2, -2, -2, 4};
  EXPECT_EQ(y.values(), expected);
  EXPECT_EQ(y.values(), naiveConv(x.values(), 1, 5, {1, 0, -1}, {0}, 1, 3, 1));

  // Mirrored kernel gives the difference in the other direction.
  const TensorD mirrored = atcn::nn::conv1dAcausal(x, spec, fromVector({1, 1, 3}, {-1, 0, 1}), bias);
  EXPECT_EQ(mirrored.values(), (std::vector<double>{2, 2, 2, 2, -4}));
}

TEST(Conv1dAcausal, IdentityKernel) {
  Rng rng(3);
  const TensorD x = fromVector({3, 11}, randomVector(33, rng));
  std::vector<double> w(9, 0.0);
  for (std::size_t c = 0; c < 3; ++c) w[c * 3 + c] = 1.0;
  const TensorD y = atcn::nn::conv1dAcausal(x, ConvSpec{1, 1, 3, 3}, fromVector({3, 3, 1}, w),
                                            TensorD(Shape{3}));
  EXPECT_EQ(y.values(), x.values());
}

TEST(Conv1dAcausal, DilatedTaps) {
  const TensorD x = fromVector({1, 7}, {1, 0, 0, 0, 0, 0, 0});
  const TensorD y = atcn::nn::conv1dAcausal(x, ConvSpec{3, 3, 1, 1}, fromVector({1, 1, 3}, {1, 1, 1}),
                                            TensorD(Shape{1}));
  EXPECT_EQ(y.values(), (std::vector<double>{1, 0, 0, 1, 0, 0, 0}));
}

TEST(Conv1dAcausal, MatchesNaiveOnRandomCases) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const std::size_t cin = 1 + rng.below(4), cout = 1 + rng.below(4), n = 1 + rng.below(20);
    const std::size_t k = 1 + 2 * rng.below(3), d = 1 + rng.below(4);
    const auto x = randomVector(cin * n, rng);
    const auto w = randomVector(cout * cin * k, rng);
    const auto b = randomVector(cout, rng);
    const TensorD y = atcn::nn::conv1dAcausal(fromVector({cin, n}, x), ConvSpec{k, d, cin, cout},
                                              fromVector({cout, cin, k}, w), fromVector({cout}, b));
    const auto ref = naiveConv(x, cin, n, w, b, cout, k, d);
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(y[i], ref[i], 1e-12);
  }
}

TEST(Conv1dAcausal, PreservesLengthForPaperKernel) {
  const TensorD w = fromVector({1, 1, 5}, {0.1, 0.2, 0.3, 0.2, 0.1});
  const TensorD b(Shape{1});
  for (std::size_t d : {1u, 2u, 4u, 8u}) {
    for (std::size_t n = 1; n <= 500; ++n) {
      const TensorD y = atcn::nn::conv1dAcausal(TensorD(Shape{1, n}, 1.0), ConvSpec{5, d, 1, 1}, w, b);
      ASSERT_EQ(y.shape(), (Shape{1, n}));
    }
  }
}

TEST(Conv1dAcausal, IsLinear) {
  Rng rng(11);
  const std::size_t cin = 3, cout = 4, n = 17;
  const ConvSpec spec{5, 2, cin, cout};
  const TensorD w = fromVector({cout, cin, 5}, randomVector(cout * cin * 5, rng));
  const TensorD zero(Shape{cout});
  const auto x = randomVector(cin * n, rng), y = randomVector(cin * n, rng);
  const double a = 1.7, b = -0.3;
  std::vector<double> mix(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) mix[i] = a * x[i] + b * y[i];
  const auto cx = atcn::nn::conv1dAcausal(fromVector({cin, n}, x), spec, w, zero);
  const auto cy = atcn::nn::conv1dAcausal(fromVector({cin, n}, y), spec, w, zero);
  const auto cm = atcn::nn::conv1dAcausal(fromVector({cin, n}, mix), spec, w, zero);
  for (std::size_t i = 0; i < cm.size(); ++i) EXPECT_NEAR(cm[i], a * cx[i] + b * cy[i], 1e-10);
}

TEST(Conv1dAcausal, ShapeErrorsNameTheDimension) {
  const TensorD x(Shape{2, 5});
  try {
    atcn::nn::conv1dAcausal(x, ConvSpec{3, 1, 3, 1}, TensorD(Shape{1, 3, 3}), TensorD(Shape{1}));
    FAIL() << "expected invalid_argument";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("input channel"), std::string::npos);
  }
  EXPECT_THROW(atcn::nn::conv1dAcausal(x, ConvSpec{3, 1, 2, 1}, TensorD(Shape{1, 2, 5}), TensorD(Shape{1})),
               std::invalid_argument);
  EXPECT_THROW(atcn::nn::conv1dAcausal(x, ConvSpec{4, 1, 2, 1}, TensorD(Shape{1, 2, 4}), TensorD(Shape{1})),
               std::invalid_argument);
  EXPECT_THROW(atcn::nn::conv1dAcausal(x, ConvSpec{3, 1, 2, 1}, TensorD(Shape{1, 2, 3}), TensorD(Shape{2})),
               std::invalid_argument);
}

TEST(Conv1dAcausal, LengthsTreatTailAsZeroPadding) {
  Rng rng(5);
  const std::size_t c = 2, n = 9, len = 6;
  const auto w = randomVector(c * c * 3, rng);
  const auto b = randomVector(c, rng);
  auto padded = randomVector(c * n, rng);
  std::vector<double> shortSeq(c * len);
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t t = 0; t < len; ++t) shortSeq[i * len + t] = padded[i * n + t];
  const std::size_t lengths[] = {len};
  const auto y = atcn::nn::conv1dAcausal(fromVector({1, c, n}, padded), ConvSpec{3, 2, c, c},
                                         fromVector({c, c, 3}, w), fromVector({c}, b), lengths);
  const auto ref = naiveConv(shortSeq, c, len, w, b, c, 3, 2);
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t t = 0; t < n; ++t) {
      EXPECT_NEAR(y[i * n + t], t < len ? ref[i * len + t] : 0.0, 1e-12);
    }
  }
}

TEST(Conv1dAcausalBackward, ZeroGradOutGivesZeroGradients) {
  Rng rng(1);
  const ConvSpec spec{3, 2, 2, 2};
  const TensorD x = fromVector({2, 7}, randomVector(14, rng));
  const TensorD w = fromVector({2, 2, 3}, randomVector(12, rng));
  const auto g = atcn::nn::conv1dAcausalBackward(TensorD(Shape{2, 7}), x, spec, w);
  for (double v : g.input.values()) EXPECT_EQ(v, 0.0);
  for (double v : g.weights.values()) EXPECT_EQ(v, 0.0);
  for (double v : g.bias.values()) EXPECT_EQ(v, 0.0);
}

TEST(Conv1dAcausalBackward, IdentityKernelPassesGradientThrough) {
  Rng rng(2);
  const TensorD gradOut = fromVector({2, 6}, randomVector(12, rng));
  const TensorD w = fromVector({2, 2, 1}, {1, 0, 0, 1});
  const auto g = atcn::nn::conv1dAcausalBackward(gradOut, TensorD(Shape{2, 6}), ConvSpec{1, 1, 2, 2}, w);
  EXPECT_EQ(g.input.values(), gradOut.values());
}

TEST(Conv1dAcausalBackward, MatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(100 + seed);
    const std::size_t B = 1 + rng.below(2);
    const std::size_t cin = seed == 0 ? 2 : 1 + rng.below(3);
    const std::size_t cout = seed == 0 ? 2 : 1 + rng.below(3);
    const std::size_t n = seed == 0 ? 7 : 2 + rng.below(10);
    const std::size_t k = seed == 0 ? 3 : 1 + 2 * rng.below(3);
    const std::size_t d = seed == 0 ? 2 : 1 + rng.below(3);
    const ConvSpec spec{k, d, cin, cout};
    auto x = randomVector(B * cin * n, rng);
    auto w = randomVector(cout * cin * k, rng);
    auto b = randomVector(cout, rng);
    const auto r = randomVector(B * cout * n, rng);
    std::vector<std::size_t> lengths(B);
    for (auto& len : lengths) len = 1 + rng.below(n);

    auto loss = [&] {
      const auto y = atcn::nn::conv1dAcausal(fromVector({B, cin, n}, x), spec, fromVector({cout, cin, k}, w),
                                             fromVector({cout}, b), lengths);
      return dot(y.values(), r);
    };
    // Gradient of r . y only flows from valid output positions.
    auto gradOut = fromVector({B, cout, n}, r);
    const auto g = atcn::nn::conv1dAcausalBackward(gradOut, fromVector({B, cin, n}, x), spec,
                                                   fromVector({cout, cin, k}, w), lengths);
    auto gx = g.input.values();
    auto gw = g.weights.values();
    auto gb = g.bias.values();
    EXPECT_LT(checkGradient(x, gx, loss).maxRelError, 1e-4) << "input, seed " << seed;
    EXPECT_LT(checkGradient(w, gw, loss).maxRelError, 1e-4) << "weights, seed " << seed;
    EXPECT_LT(checkGradient(b, gb, loss).maxRelError, 1e-4) << "bias, seed " << seed;
  }
}

TEST(BatchNorm, EvalWithIdentityStatsIsIdentity) {
  Rng rng(4);
  const TensorD x = fromVector({2, 3, 5}, randomVector(30, rng));
  auto state = BatchNormState<double>::identity(3);
  const auto y = atcn::nn::batchNormChannel(x, state, Mode::Eval);
  const double scale = 1.0 / std::sqrt(1.0 + state.epsilon);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y[i], x[i] * scale, 1e-15);
}

TEST(BatchNorm, TrainOutputHasBetaMeanAndGammaStd) {
  Rng rng(8);
  const std::size_t B = 4, C = 3, n = 25;
  const TensorD x = fromVector({B, C, n}, randomVector(B * C * n, rng, 3.0));
  auto state = BatchNormState<double>::identity(C);
  state.gamma = fromVector({C}, {2.0, 0.5, 1.0});
  state.beta = fromVector({C}, {0.5, -1.0, 0.0});
  const auto y = atcn::nn::batchNormChannel(x, state, Mode::Train);
  for (std::size_t c = 0; c < C; ++c) {
    double sx = 0, sxx = 0, sy = 0, syy = 0;
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t t = 0; t < n; ++t) {
        const double xv = x[(b * C + c) * n + t], yv = y[(b * C + c) * n + t];
        sx += xv, sxx += xv * xv, sy += yv, syy += yv * yv;
      }
    const double N = B * n;
    const double varX = sxx / N - (sx / N) * (sx / N);
    const double meanY = sy / N;
    const double stdY = std::sqrt(syy / N - meanY * meanY);
    EXPECT_NEAR(meanY, state.beta[c], 1e-6);
    EXPECT_NEAR(stdY, state.gamma[c] * std::sqrt(varX / (varX + state.epsilon)), 1e-6);
  }
}

TEST(BatchNorm, TrainUpdatesRunningStatsWithMomentum) {
  const TensorD x = fromVector({1, 1, 4}, {1, 2, 3, 4});
  auto state = BatchNormState<double>::identity(1);
  atcn::nn::batchNormChannel(x, state, Mode::Train);
  EXPECT_NEAR(state.runningMean[0], 0.9 * 0.0 + 0.1 * 2.5, 1e-12);
  EXPECT_NEAR(state.runningVar[0], 0.9 * 1.0 + 0.1 * (5.0 / 3.0), 1e-12);
  EXPECT_GT(state.runningVar[0], 0.0);
}

TEST(BatchNorm, TrainNeedsTwoPositions) {
  auto state = BatchNormState<double>::identity(1);
  EXPECT_THROW(atcn::nn::batchNormChannel(TensorD(Shape{1, 1, 1}), state, Mode::Train), std::invalid_argument);
}

TEST(BatchNorm, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(200 + seed);
    const std::size_t B = seed == 0 ? 2 : 1 + rng.below(3);
    const std::size_t C = seed == 0 ? 3 : 1 + rng.below(4);
    const std::size_t n = seed == 0 ? 5 : 2 + rng.below(6);
    auto x = randomVector(B * C * n, rng, 2.0);
    auto gamma = randomVector(C, rng);
    auto beta = randomVector(C, rng);
    const auto r = randomVector(B * C * n, rng);
    std::vector<std::size_t> lengths(B, n);
    if (seed % 2 == 1) lengths[0] = 2 + rng.below(n - 1);
    for (Mode mode : {Mode::Train, Mode::Eval}) {
      auto makeState = [&] {
        auto s = BatchNormState<double>::identity(C);
        s.gamma = fromVector({C}, gamma);
        s.beta = fromVector({C}, beta);
        s.runningMean.assign(C, 0.3);
        s.runningVar.assign(C, 1.7);
        return s;
      };
      auto loss = [&] {
        auto s = makeState();
        const auto y = atcn::nn::batchNormChannel(fromVector({B, C, n}, x), s, mode, lengths);
        return dot(y.values(), r);
      };
      auto s = makeState();
      BatchNormCache<double> cache;
      atcn::nn::batchNormChannel(fromVector({B, C, n}, x), s, mode, lengths, &cache);
      const auto g = atcn::nn::batchNormChannelBackward(fromVector({B, C, n}, r), s, cache);
      auto gx = g.input.values();
      EXPECT_LT(checkGradient(x, gx, loss).maxRelError, 1e-4) << "input, seed " << seed;
      EXPECT_LT(checkGradient(gamma, g.gamma, loss).maxRelError, 1e-4) << "gamma, seed " << seed;
      EXPECT_LT(checkGradient(beta, g.beta, loss).maxRelError, 1e-4) << "beta, seed " << seed;
    }
  }
}

TEST(Relu, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(300 + seed);
    auto x = randomVector(30, rng);
    for (double& v : x) {
      if (std::abs(v) < 1e-2) v = 0.5;  // stay away from the kink
    }
    const auto r = randomVector(30, rng);
    auto loss = [&] { return dot(atcn::nn::relu(fromVector({3, 10}, x)).values(), r); };
    const auto y = atcn::nn::relu(fromVector({3, 10}, x));
    const auto g = atcn::nn::reluBackward(fromVector({3, 10}, r), y);
    EXPECT_LT(checkGradient(x, g.values(), loss).maxRelError, 1e-4);
  }
}

TEST(SpatialDropout, RateZeroAndEvalAreIdentity) {
  Rng rng(6);
  const TensorD x = fromVector({2, 4, 6}, randomVector(48, rng));
  EXPECT_EQ(atcn::nn::spatialDropout(x, 0.0, 1, Mode::Train).values(), x.values());
  EXPECT_EQ(atcn::nn::spatialDropout(x, 0.5, 1, Mode::Eval).values(), x.values());
}

TEST(SpatialDropout, DropsWholeChannelsAndIsReproducible) {
  const std::size_t B = 3, C = 50, n = 8;
  const TensorD x(Shape{B, C, n}, 1.0);
  std::vector<double> scales;
  const auto y = atcn::nn::spatialDropout(x, 0.2, 42, Mode::Train, &scales);
  std::size_t dropped = 0;
  for (std::size_t g = 0; g < B * C; ++g) {
    for (std::size_t t = 0; t < n; ++t) EXPECT_EQ(y[g * n + t], scales[g]);
    if (scales[g] == 0.0) ++dropped;
    else EXPECT_DOUBLE_EQ(scales[g], 1.0 / 0.8);
  }
  EXPECT_GT(dropped, 0u);
  EXPECT_LT(dropped, B * C / 2);
  const auto again = atcn::nn::spatialDropout(x, 0.2, 42, Mode::Train);
  EXPECT_EQ(std::memcmp(again.ptr(), y.ptr(), y.size() * sizeof(double)), 0);
  EXPECT_THROW(atcn::nn::spatialDropout(x, 1.0, 1, Mode::Train), std::invalid_argument);
}

TEST(SpatialDropout, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(400 + seed);
    auto x = randomVector(2 * 5 * 4, rng);
    const auto r = randomVector(x.size(), rng);
    auto loss = [&] { return dot(atcn::nn::spatialDropout(fromVector({2, 5, 4}, x), 0.3, seed, Mode::Train).values(), r); };
    std::vector<double> scales;
    atcn::nn::spatialDropout(fromVector({2, 5, 4}, x), 0.3, seed, Mode::Train, &scales);
    const auto g = atcn::nn::spatialDropoutBackward(fromVector({2, 5, 4}, r), std::span<const double>(scales));
    EXPECT_LT(checkGradient(x, g.values(), loss).maxRelError, 1e-4);
  }
}

TEST(EmbedLookup, GathersRowsAndAccumulatesGradients) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(500 + seed);
    const std::size_t V = 6, E = 3, n = 8;
    auto table = randomVector(V * E, rng);
    std::vector<std::int32_t> ids(n);
    for (auto& id : ids) id = static_cast<std::int32_t>(rng.below(V));
    const auto r = randomVector(E * n, rng);
    const auto out = atcn::nn::embedLookup<double>(ids, fromVector({V, E}, table));
    for (std::size_t t = 0; t < n; ++t)
      for (std::size_t f = 0; f < E; ++f) EXPECT_EQ(out[f * n + t], table[ids[t] * E + f]);
    auto loss = [&] { return dot(atcn::nn::embedLookup<double>(ids, fromVector({V, E}, table)).values(), r); };
    std::vector<double> g(V * E, 0.0);
    atcn::nn::embedLookupBackward<double>(fromVector({E, n}, r), ids, g, E);
    EXPECT_LT(checkGradient(table, g, loss).maxRelError, 1e-4);
  }
  const std::int32_t bad[] = {0, 9};
  EXPECT_THROW(atcn::nn::embedLookup<double>(bad, TensorD(Shape{4, 2})), std::invalid_argument);
}

TEST(SoftmaxCrossEntropy, UniformLogitsGiveLogV) {
  const std::size_t V = 7, n = 5;
  const std::vector<std::int32_t> targets{0, 3, 6, 2, 1};
  const std::vector<std::uint8_t> mask{1, 1, 0, 1, 1};
  const auto r = atcn::nn::softmaxCrossEntropy(TensorD(Shape{V, n}, 0.25), targets, mask);
  EXPECT_NEAR(r.loss, std::log(7.0), 1e-12);
  EXPECT_EQ(r.count, 4u);
  for (std::size_t v = 0; v < V; ++v) EXPECT_EQ(r.gradLogits[v * n + 2], 0.0);
}

TEST(SoftmaxCrossEntropy, EmptyMaskIsAnError) {
  const std::vector<std::int32_t> targets{0, 1};
  const std::vector<std::uint8_t> mask{0, 0};
  EXPECT_THROW(atcn::nn::softmaxCrossEntropy(TensorD(Shape{3, 2}), targets, mask), std::invalid_argument);
}

TEST(SoftmaxCrossEntropy, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(600 + seed);
    const std::size_t B = 1 + rng.below(3), V = 2 + rng.below(6), n = 1 + rng.below(7);
    auto z = randomVector(B * V * n, rng, 3.0);
    std::vector<std::int32_t> targets(B * n);
    std::vector<std::uint8_t> mask(B * n);
    for (std::size_t i = 0; i < B * n; ++i) {
      targets[i] = static_cast<std::int32_t>(rng.below(V));
      mask[i] = i == 0 || rng.uniform() < 0.7 ? 1 : 0;
    }
    auto loss = [&] { return atcn::nn::softmaxCrossEntropy(fromVector({B, V, n}, z), targets, mask).loss; };
    const auto r = atcn::nn::softmaxCrossEntropy(fromVector({B, V, n}, z), targets, mask);
    EXPECT_LT(checkGradient(z, r.gradLogits.values(), loss).maxRelError, 1e-4) << "seed " << seed;
  }
}
