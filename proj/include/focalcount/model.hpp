#pragma once

#include <cstdint>
#include <string>

#include "focalcount/autograd.hpp"
#include "focalcount/tensor.hpp"

namespace focalcount {

// Fixed-shape parameters of the toy counter:
// conv1 3x3 (4->8), relu, conv2 3x3 (8->8), sigmoid (features), 1x1 head,
// sigmoid (density).
struct CounterParams {
    Tensor conv1_kernel;  // [8,4,3,3]
    Tensor conv1_bias;    // [8]
    Tensor conv2_kernel;  // [8,8,3,3]
    Tensor conv2_bias;    // [8]
    Tensor head_kernel;   // [1,8,1,1]
    Tensor head_bias;     // [1]
};

// Kernels uniform in (-a, a) with a = sqrt(1/fan_in); biases zero.
CounterParams init_params(std::uint64_t seed);

struct ForwardResult {
    Tensor features;      // [8,H,W], post-sigmoid
    Tensor pred_density;  // [H,W], post-sigmoid
};

// Inference path, no gradient bookkeeping. image is [4,H,W] with H,W >= 8.
ForwardResult forward(const CounterParams& params, const Tensor& image);

// Training path: records the same pipeline on g and hands back the parameter
// leaves plus the feature and prediction nodes. pred is [1,H,W] on the tape.
struct TapeForward {
    Var conv1_kernel, conv1_bias, conv2_kernel, conv2_bias, head_kernel, head_bias;
    Var features, pred;
};
TapeForward forward_on_tape(Graph& g, const CounterParams& params, const Tensor& image);

// Count = density mass. Rejects negative entries.
double predict_count(const Tensor& pred_density);

// Text checkpoint: one record per tensor, name + shape + values.
void save_checkpoint(const CounterParams& params, const std::string& path);
CounterParams load_checkpoint(const std::string& path);

} // namespace focalcount
