#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "focalcount/tensor.hpp"

namespace focalcount {

enum class LossKind { MSE, ES, FMSE };

std::string loss_kind_name(LossKind kind);

// Scalar loss plus its exact gradient with respect to the prediction.
struct LossReport {
    LossKind kind = LossKind::MSE;
    double value = 0.0;
    Tensor grad;
};

// Sum of squared errors: value = sum((p-g)^2), grad = 2(p-g). Summed, not
// averaged, over pixels.
LossReport mse_loss(const Tensor& pred, const Tensor& gt);

// Per-pixel binary cross entropy against gt treated as a soft occupancy
// target: pred is clamped to [eps, 1-eps], gt to [0,1], and
// value = -sum(g ln p + (1-g) ln(1-p)), grad = (p-g)/(p(1-p)) at clamped p.
LossReport es_loss(const Tensor& pred, const Tensor& gt, double eps = 1e-7);

// mse_loss + es_loss, composed value and gradient. The squared-error term
// sees the unclamped gt; the cross-entropy term sees the clamped one.
LossReport focal_mse_loss(const Tensor& pred, const Tensor& gt, double eps = 1e-7);

struct CurriculumPolicy {
    std::size_t switch_epoch = 20;
};

// FMSE while epoch < switch_epoch, MSE from the switch epoch on.
LossKind select_loss(const CurriculumPolicy& policy, std::size_t epoch);

LossReport eval_loss(LossKind kind, const Tensor& pred, const Tensor& gt, double eps = 1e-7);

// Weighted batch reduction: value = (1/n) sum_i weights[i] * loss_i, and
// grads[i] = weights[i]/n * dloss_i/dpred_i.
struct BatchLossResult {
    LossKind kind = LossKind::MSE;
    double value = 0.0;
    std::vector<Tensor> grads;
};

BatchLossResult batch_loss(const std::vector<Tensor>& preds, const std::vector<Tensor>& gts,
                           const std::vector<double>& weights, const CurriculumPolicy& policy,
                           std::size_t epoch, double eps = 1e-7);

// Same reduction with the loss kind fixed by the caller.
BatchLossResult batch_loss(const std::vector<Tensor>& preds, const std::vector<Tensor>& gts,
                           const std::vector<double>& weights, LossKind kind, double eps = 1e-7);

} // namespace focalcount
