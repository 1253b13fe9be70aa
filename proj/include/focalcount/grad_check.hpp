#pragma once

#include <functional>

#include "focalcount/tensor.hpp"

namespace focalcount {

// A differentiable scalar function of a tensor: returns a one-element tensor.
using ScalarFn = std::function<Tensor(const Tensor&)>;

// Compares an analytic gradient against central finite differences of f at x.
// Returns the max over elements of |analytic - central| / (|analytic| +
// |central| + 1e-12). h must lie in [1e-7, 1e-3]; f must return exactly one
// element; non-finite gradients raise finite_value_error.
double grad_check(const ScalarFn& f, const Tensor& x, const Tensor& analytic_grad, double h);

} // namespace focalcount
