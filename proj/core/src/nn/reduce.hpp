#pragma once

// Fixed-order reductions. Eigen's vectorized redux peels differently depending on
// the buffer's alignment, which makes sums vary with the allocation address.

#include <cstddef>

namespace atcn::nn::detail {

/// out[r] += sum of src[r * stride + t] for t < len.
template <typename T>
void addRowSums(const T* src, std::size_t rows, std::size_t stride, std::size_t len, T* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = src + r * stride;
    T acc = T(0);
    for (std::size_t t = 0; t < len; ++t) acc += row[t];
    out[r] += acc;
  }
}

/// Sum over rows x len of a[r * stride + t] * b[r * stride + t].
template <typename T>
T dotRows(const T* a, const T* b, std::size_t rows, std::size_t stride, std::size_t len) {
  T acc = T(0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t t = 0; t < len; ++t) acc += a[r * stride + t] * b[r * stride + t];
  }
  return acc;
}

}  // namespace atcn::nn::detail
