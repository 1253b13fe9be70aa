#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "focalcount/errors.hpp"
#include "focalcount/grad_check.hpp"
#include "focalcount/losses.hpp"
#include "focalcount/rng.hpp"
#include "focalcount/tensor.hpp"

using namespace focalcount;

namespace {

Tensor vec(std::vector<double> values) {
    Tensor t({values.size()});
    for (std::size_t i = 0; i < values.size(); ++i) t.at(i) = values[i];
    return t;
}

Tensor random_pred(std::size_t n, Rng& rng) {
    Tensor t({n});
    for (std::size_t i = 0; i < n; ++i) t.at(i) = rng.uniform_in(0.02, 0.98);
    return t;
}

Tensor random_gt(std::size_t n, Rng& rng) {
    Tensor t({n});
    for (std::size_t i = 0; i < n; ++i) t.at(i) = rng.uniform() < 0.5 ? 0.0 : rng.uniform();
    return t;
}

}  // namespace

TEST_CASE("mse fixtures") {
    LossReport r = mse_loss(vec({0.2, 0.7}), vec({0.0, 1.0}));
    CHECK(r.kind == LossKind::MSE);
    CHECK(r.value == doctest::Approx(0.13).epsilon(1e-12));
    CHECK(r.grad.at(0) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(r.grad.at(1) == doctest::Approx(-0.6).epsilon(1e-12));

    CHECK(mse_loss(vec({0.3, 0.4}), vec({0.3, 0.4})).value == 0.0);
}

TEST_CASE("es fixtures") {
    LossReport r = es_loss(vec({0.5}), vec({1.0}));
    CHECK(r.kind == LossKind::ES);
    CHECK(r.value == doctest::Approx(0.6931471805599453).epsilon(1e-12));
    CHECK(r.grad.at(0) == doctest::Approx(-2.0).epsilon(1e-12));

    // Perfect prediction of a binary target still pays the clamp tax but
    // stays finite and tiny.
    LossReport perfect = es_loss(vec({1.0}), vec({1.0}));
    CHECK(perfect.value > 0.0);
    CHECK(perfect.value < 1e-5);
}

TEST_CASE("es clamps both arguments") {
    // pred 0 would blow up the log; gt 3.2 would make the loss unbounded
    // below. Both must come out finite.
    LossReport r = es_loss(vec({0.0, 0.5}), vec({1.0, 3.2}));
    CHECK(std::isfinite(r.value));
    CHECK(std::isfinite(r.grad.at(0)));
    // gt clamped to 1: same gradient as the ln2 fixture.
    CHECK(r.grad.at(1) == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("es rejects a degenerate clamp width") {
    CHECK_THROWS_AS(es_loss(vec({0.5}), vec({1.0}), 0.0), contract_error);
    CHECK_THROWS_AS(es_loss(vec({0.5}), vec({1.0}), 0.5), contract_error);
}

TEST_CASE("fmse composes mse and es") {
    LossReport r = focal_mse_loss(vec({0.5}), vec({1.0}));
    CHECK(r.kind == LossKind::FMSE);
    CHECK(r.value == doctest::Approx(0.9431471805599453).epsilon(1e-12));
    CHECK(r.grad.at(0) == doctest::Approx(-3.0).epsilon(1e-12));
}

TEST_CASE("loss rejects shape mismatch") {
    CHECK_THROWS_AS(mse_loss(vec({0.5}), vec({1.0, 0.0})), dimension_error);
    CHECK_THROWS_AS(es_loss(vec({0.5}), vec({1.0, 0.0})), dimension_error);
}

TEST_CASE("fmse gradient dominates the mse gradient on binary targets") {
    // The cross-entropy term never changes the sign and at least doubles the
    // magnitude: its ratio to the mse gradient is 1/(2p(1-p)) >= 2.
    for (double g : {0.0, 1.0}) {
        for (int i = 1; i <= 99; ++i) {
            const double p = i / 100.0;
            const double mse_g = mse_loss(vec({p}), vec({g})).grad.at(0);
            const double fmse_g = focal_mse_loss(vec({p}), vec({g})).grad.at(0);
            CHECK(mse_g * fmse_g > 0.0);
            CHECK(std::abs(fmse_g) > std::abs(mse_g));
            CHECK(std::abs(fmse_g) >= 2.9 * std::abs(mse_g));
        }
    }
}

TEST_CASE("loss gradients agree with finite differences") {
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        Tensor pred = random_pred(6, rng);
        Tensor gt = random_gt(6, rng);
        for (LossKind kind : {LossKind::MSE, LossKind::ES, LossKind::FMSE}) {
            LossReport r = eval_loss(kind, pred, gt);
            const double err = grad_check(
                [&](const Tensor& p) {
                    Tensor out({1});
                    out.at(0) = eval_loss(kind, p, gt).value;
                    return out;
                },
                pred, r.grad, 1e-5);
            CHECK(err < 1e-6);
        }
    }
}

TEST_CASE("curriculum switches from fmse to mse at the boundary") {
    CurriculumPolicy policy;
    policy.switch_epoch = 20;
    CHECK(select_loss(policy, 0) == LossKind::FMSE);
    CHECK(select_loss(policy, 19) == LossKind::FMSE);
    CHECK(select_loss(policy, 20) == LossKind::MSE);
    CHECK(select_loss(policy, 100) == LossKind::MSE);

    policy.switch_epoch = 0;
    CHECK(select_loss(policy, 0) == LossKind::MSE);
}

TEST_CASE("loss kind names") {
    CHECK(loss_kind_name(LossKind::MSE) == "mse");
    CHECK(loss_kind_name(LossKind::ES) == "es");
    CHECK(loss_kind_name(LossKind::FMSE) == "fmse");
}

TEST_CASE("batch loss fixture") {
    // Two one-pixel images, weights 1.8 and 0.2:
    // value = (1/2)(1.8*0.25 + 0.2*0.01) = 0.226.
    std::vector<Tensor> preds = {vec({0.5}), vec({0.1})};
    std::vector<Tensor> gts = {vec({1.0}), vec({0.0})};
    BatchLossResult r = batch_loss(preds, gts, {1.8, 0.2}, LossKind::MSE);
    CHECK(r.value == doctest::Approx(0.226).epsilon(1e-12));
    CHECK(r.grads.size() == 2);
    CHECK(r.grads[0].at(0) == doctest::Approx(1.8 * 0.5 * (2.0 * -0.5)).epsilon(1e-12));
    CHECK(r.grads[1].at(0) == doctest::Approx(0.2 * 0.5 * (2.0 * 0.1)).epsilon(1e-12));
}

TEST_CASE("batch loss is linear in the weights") {
    Rng rng(41);
    std::vector<Tensor> preds = {random_pred(8, rng), random_pred(8, rng)};
    std::vector<Tensor> gts = {random_gt(8, rng), random_gt(8, rng)};
    const double a = batch_loss(preds, gts, {1.0, 0.0}, LossKind::FMSE).value;
    const double b = batch_loss(preds, gts, {0.0, 1.0}, LossKind::FMSE).value;
    const double both = batch_loss(preds, gts, {1.0, 1.0}, LossKind::FMSE).value;
    CHECK(both == doctest::Approx(a + b).epsilon(1e-12));

    // A zero weight annihilates the image entirely.
    BatchLossResult r = batch_loss(preds, gts, {1.0, 0.0}, LossKind::FMSE);
    for (std::size_t i = 0; i < r.grads[1].size(); ++i) CHECK(r.grads[1].at(i) == 0.0);
}

TEST_CASE("batch loss follows the curriculum") {
    std::vector<Tensor> preds = {vec({0.5})};
    std::vector<Tensor> gts = {vec({1.0})};
    CurriculumPolicy policy;
    policy.switch_epoch = 20;
    CHECK(batch_loss(preds, gts, {1.0}, policy, 5).kind == LossKind::FMSE);
    CHECK(batch_loss(preds, gts, {1.0}, policy, 5).value ==
          doctest::Approx(0.9431471805599453).epsilon(1e-12));
    CHECK(batch_loss(preds, gts, {1.0}, policy, 20).kind == LossKind::MSE);
    CHECK(batch_loss(preds, gts, {1.0}, policy, 20).value == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("batch loss rejects malformed input") {
    std::vector<Tensor> preds = {vec({0.5})};
    std::vector<Tensor> gts = {vec({1.0})};
    CHECK_THROWS_AS(batch_loss(preds, gts, {1.0, 2.0}, LossKind::MSE), contract_error);
    CHECK_THROWS_AS(batch_loss(preds, gts, {-0.1}, LossKind::MSE), contract_error);
    CHECK_THROWS_AS(batch_loss({}, {}, {}, LossKind::MSE), contract_error);
}
