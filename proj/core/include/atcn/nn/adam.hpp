#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "atcn/nn/tensor.hpp"

namespace atcn::nn {

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moments per parameter tensor plus the step counter.
template <typename T>
struct AdamState {
  std::vector<std::vector<T>> m;
  std::vector<std::vector<T>> v;
  std::int64_t step = 0;

  void initFor(std::span<Tensor<T>* const> params);
};

/// One bias-corrected Adam update using each parameter's grad buffer.
/// Parameters without a grad buffer are skipped.
template <typename T>
void adamStep(std::span<Tensor<T>* const> params, AdamState<T>& state, const AdamHyper& hyper);

/// Scales all gradients so their global L2 norm is at most `maxNorm`; returns the norm before clipping.
template <typename T>
double clipGradNorm(std::span<Tensor<T>* const> params, double maxNorm);

extern template struct AdamState<float>;
extern template struct AdamState<double>;

}  // namespace atcn::nn
