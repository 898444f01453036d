#include "atcn/nn/tensor.hpp"

#include <algorithm>
#include <stdexcept>

namespace atcn::nn {

std::size_t shapeSize(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return shape.empty() ? 0 : n;
}

std::string shapeToString(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) s += " x ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : shape_(std::move(shape)), data_(shapeSize(shape_), fill) {}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shapeSize(shape_)) {
    throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                " does not match shape " + shapeToString(shape_));
  }
}

template <typename T>
void Tensor<T>::ensureGrad() {
  if (grad_.size() != data_.size()) grad_.assign(data_.size(), T{0});
}

template <typename T>
void Tensor<T>::zeroGrad() {
  grad_.assign(data_.size(), T{0});
}

template <typename T>
void Tensor<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
void Tensor<T>::reshape(Shape shape) {
  if (shapeSize(shape) != data_.size()) {
    throw std::invalid_argument("cannot reshape " + shapeToString(shape_) + " to " +
                                shapeToString(shape));
  }
  shape_ = std::move(shape);
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace atcn::nn
