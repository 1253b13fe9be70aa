#include "focalcount/losses.hpp"

#include <algorithm>
#include <cmath>

#include "focalcount/errors.hpp"

namespace focalcount {

std::string loss_kind_name(LossKind kind) {
    switch (kind) {
        case LossKind::MSE: return "mse";
        case LossKind::ES: return "es";
        case LossKind::FMSE: return "fmse";
    }
    throw contract_error("loss_kind_name: unknown kind");
}

namespace {

void check_pair(const Tensor& pred, const Tensor& gt, const char* who) {
    if (!pred.same_shape(gt)) {
        throw dimension_error(std::string(who) + ": pred shape " + shape_string(pred.shape()) +
                              " does not match gt shape " + shape_string(gt.shape()));
    }
    if (pred.size() == 0) throw contract_error(std::string(who) + ": empty tensors");
    require_finite(pred, who);
    require_finite(gt, who);
}

} // namespace

LossReport mse_loss(const Tensor& pred, const Tensor& gt) {
    check_pair(pred, gt, "mse_loss");
    LossReport r;
    r.kind = LossKind::MSE;
    r.grad = Tensor(pred.shape());
    double acc = 0.0;
    for (std::size_t i = 0, n = pred.size(); i < n; ++i) {
        const double d = pred.at(i) - gt.at(i);
        acc += d * d;
        r.grad.at(i) = 2.0 * d;
    }
    r.value = acc;
    require_finite(r.grad, "mse_loss grad");
    return r;
}

LossReport es_loss(const Tensor& pred, const Tensor& gt, double eps) {
    check_pair(pred, gt, "es_loss");
    if (!(eps > 0.0 && eps < 0.5)) {
        throw contract_error("es_loss: eps must be in (0, 0.5), got " + std::to_string(eps));
    }
    LossReport r;
    r.kind = LossKind::ES;
    r.grad = Tensor(pred.shape());
    double acc = 0.0;
    for (std::size_t i = 0, n = pred.size(); i < n; ++i) {
        const double p = std::clamp(pred.at(i), eps, 1.0 - eps);
        const double g = std::clamp(gt.at(i), 0.0, 1.0);
        acc -= g * std::log(p) + (1.0 - g) * std::log(1.0 - p);
        r.grad.at(i) = (p - g) / (p * (1.0 - p));
    }
    r.value = acc;
    require_finite(r.grad, "es_loss grad");
    return r;
}

LossReport focal_mse_loss(const Tensor& pred, const Tensor& gt, double eps) {
    LossReport mse = mse_loss(pred, gt);
    LossReport es = es_loss(pred, gt, eps);
    LossReport r;
    r.kind = LossKind::FMSE;
    r.value = mse.value + es.value;
    r.grad = add(mse.grad, es.grad);
    return r;
}

LossKind select_loss(const CurriculumPolicy& policy, std::size_t epoch) {
    return epoch < policy.switch_epoch ? LossKind::FMSE : LossKind::MSE;
}

LossReport eval_loss(LossKind kind, const Tensor& pred, const Tensor& gt, double eps) {
    switch (kind) {
        case LossKind::MSE: return mse_loss(pred, gt);
        case LossKind::ES: return es_loss(pred, gt, eps);
        case LossKind::FMSE: return focal_mse_loss(pred, gt, eps);
    }
    throw contract_error("eval_loss: unknown kind");
}

BatchLossResult batch_loss(const std::vector<Tensor>& preds, const std::vector<Tensor>& gts,
                           const std::vector<double>& weights, const CurriculumPolicy& policy,
                           std::size_t epoch, double eps) {
    return batch_loss(preds, gts, weights, select_loss(policy, epoch), eps);
}

BatchLossResult batch_loss(const std::vector<Tensor>& preds, const std::vector<Tensor>& gts,
                           const std::vector<double>& weights, LossKind kind, double eps) {
    const std::size_t n = preds.size();
    if (n == 0) throw contract_error("batch_loss: batch must not be empty");
    if (gts.size() != n || weights.size() != n) {
        throw contract_error("batch_loss: list lengths disagree (preds " + std::to_string(n) +
                             ", gts " + std::to_string(gts.size()) + ", weights " +
                             std::to_string(weights.size()) + ")");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(weights[i] >= 0.0)) {
            throw contract_error("batch_loss: weight " + std::to_string(i) + " is negative");
        }
    }

    BatchLossResult out;
    out.kind = kind;
    out.grads.reserve(n);
    const double inv_n = 1.0 / static_cast<double>(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        LossReport r = eval_loss(out.kind, preds[i], gts[i], eps);
        acc += weights[i] * r.value;
        const double scale = weights[i] * inv_n;
        Tensor g(r.grad.shape());
        for (std::size_t j = 0; j < g.size(); ++j) g.at(j) = r.grad.at(j) * scale;
        out.grads.push_back(std::move(g));
    }
    out.value = acc * inv_n;
    return out;
}

} // namespace focalcount
