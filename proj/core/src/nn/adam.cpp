#include "atcn/nn/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace atcn::nn {

template <typename T>
void AdamState<T>::initFor(std::span<Tensor<T>* const> params) {
  m.clear();
  v.clear();
  for (const Tensor<T>* p : params) {
    m.emplace_back(p->size(), T(0));
    v.emplace_back(p->size(), T(0));
  }
  step = 0;
}

template <typename T>
void adamStep(std::span<Tensor<T>* const> params, AdamState<T>& state, const AdamHyper& hyper) {
  if (state.m.empty() && !params.empty()) state.initFor(params);
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw std::invalid_argument("adamStep: optimizer state holds " + std::to_string(state.m.size()) +
                                " tensors for " + std::to_string(params.size()) + " parameters");
  }
  ++state.step;
  const double b1 = hyper.beta1;
  const double b2 = hyper.beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor<T>& p = *params[k];
    auto& m = state.m[k];
    auto& v = state.v[k];
    if (m.size() != p.size() || v.size() != p.size()) {
      throw std::invalid_argument("adamStep: moment size mismatch for parameter " + std::to_string(k));
    }
    if (!p.hasGrad()) continue;
    auto g = p.grad();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g[i];
      const double mi = b1 * m[i] + (1.0 - b1) * gi;
      const double vi = b2 * v[i] + (1.0 - b2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double mhat = mi / corr1;
      const double vhat = vi / corr2;
      p[i] = static_cast<T>(p[i] - hyper.lr * mhat / (std::sqrt(vhat) + hyper.eps));
    }
  }
}

template <typename T>
double clipGradNorm(std::span<Tensor<T>* const> params, double maxNorm) {
  double sq = 0.0;
  for (const Tensor<T>* p : params) {
    for (T g : p->grad()) sq += static_cast<double>(g) * static_cast<double>(g);
  }
  const double norm = std::sqrt(sq);
  if (maxNorm > 0.0 && norm > maxNorm) {
    const T scale = static_cast<T>(maxNorm / (norm + 1e-12));
    for (Tensor<T>* p : params) {
      for (T& g : p->grad()) g *= scale;
    }
  }
  return norm;
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adamStep<float>(std::span<Tensor<float>* const>, AdamState<float>&, const AdamHyper&);
template void adamStep<double>(std::span<Tensor<double>* const>, AdamState<double>&, const AdamHyper&);
template double clipGradNorm<float>(std::span<Tensor<float>* const>, double);
template double clipGradNorm<double>(std::span<Tensor<double>* const>, double);

}  // namespace atcn::nn
