#ifndef PNO_TENSOR_HPP
#define PNO_TENSOR_HPP

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace pno {

// Dense row-major float64 tensor. Training runs in float64 throughout;
// float32 appears only at the serialization boundary.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s, double init = 0.0)
      : shape(std::move(s)),
        data(std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                             std::multiplies<>()),
             init) {}

  std::size_t size() const { return data.size(); }

  std::size_t dim(std::size_t i) const { return shape.at(i); }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  // (h, w, c) indexing for field tensors
  double& at3(std::size_t i, std::size_t j, std::size_t c) {
    return data[(i * shape[1] + j) * shape[2] + c];
  }
  double at3(std::size_t i, std::size_t j, std::size_t c) const {
    return data[(i * shape[1] + j) * shape[2] + c];
  }

  void fill(double v) { std::fill(data.begin(), data.end(), v); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

inline void axpy(double a, const Tensor& x, Tensor& y) {
  if (!x.same_shape(y)) throw std::invalid_argument("axpy: shape mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y.data[i] += a * x.data[i];
}

}  // namespace pno

#endif  // PNO_TENSOR_HPP
