#include "ctgn/diff/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "ctgn/errors.hpp"

namespace ctgn {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  for (auto d : shape_) CTGN_REQUIRE(d > 0, "tensor dimensions must be positive");
  data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  for (auto d : shape_) CTGN_REQUIRE(d > 0, "tensor dimensions must be positive");
  CTGN_REQUIRE(data_.size() == shape_size(shape_), "tensor data length " +
                                                  std::to_string(data_.size()) +
                                                  " does not match shape " + shape_string());
}

Tensor Tensor::row(std::vector<double> values) {
  const auto n = values.size();
  return Tensor({1, n}, std::move(values));
}

Tensor Tensor::column(std::vector<double> values) {
  const auto n = values.size();
  return Tensor({n, 1}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

std::size_t Tensor::rows() const {
  CTGN_REQUIRE(rank() == 2, "expected a rank-2 tensor, got " + shape_string());
  return shape_[0];
}

std::size_t Tensor::cols() const {
  CTGN_REQUIRE(rank() == 2, "expected a rank-2 tensor, got " + shape_string());
  return shape_[1];
}

double Tensor::item() const {
  CTGN_REQUIRE(data_.size() == 1, "item() on tensor of shape " + shape_string());
  return data_[0];
}

bool Tensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

std::string Tensor::shape_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape_.size(); ++i) os << (i ? "x" : "") << shape_[i];
  os << ']';
  return os.str();
}

}  // namespace ctgn
