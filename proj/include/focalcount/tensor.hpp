#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace focalcount {

// Dense row-major tensor of 64-bit reals. Shapes are immutable after
// construction; element storage is mutable through data().
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor full(std::vector<std::size_t> shape, double value);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t dim(std::size_t axis) const;
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double& at(std::size_t i) { return data_[i]; }
    double at(std::size_t i) const { return data_[i]; }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    // Same element count, new shape.
    Tensor reshaped(std::vector<std::size_t> new_shape) const;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

std::size_t shape_product(const std::vector<std::size_t>& shape);
std::string shape_string(const std::vector<std::size_t>& shape);

// Throws finite_value_error if any element is NaN or Inf.
void require_finite(const Tensor& t, const char* context);

// Cross-correlation of a single image. input is [C_in,H,W], kernel is
// [C_out,C_in,k,k] with k odd and padding (k-1)/2, so output is [C_out,H,W].
Tensor conv2d(const Tensor& input, const Tensor& kernel, std::size_t padding);

// Gradients of a scalar through conv2d. grad_out has the output shape.
Tensor conv2d_grad_input(const Tensor& grad_out, const Tensor& kernel, std::size_t padding);
Tensor conv2d_grad_kernel(const Tensor& grad_out, const Tensor& input, const std::vector<std::size_t>& kernel_shape, std::size_t padding);

// out[c,h,w] = input[c,h,w] + bias[c]; input [C,H,W], bias [C].
Tensor channel_bias(const Tensor& input, const Tensor& bias);

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

// Deterministic left-to-right reductions.
double sum(const Tensor& x);
double mean(const Tensor& x);

} // namespace focalcount
