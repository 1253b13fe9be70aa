#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "focalcount/autograd.hpp"
#include "focalcount/errors.hpp"
#include "focalcount/grad_check.hpp"
#include "focalcount/losses.hpp"
#include "focalcount/model.hpp"
#include "focalcount/rng.hpp"
#include "focalcount/synthgen.hpp"
#include "focalcount/tensor.hpp"

using namespace focalcount;

namespace {

Tensor random_image(std::size_t size, Rng& rng) {
    Tensor t({4, size, size});
    for (std::size_t i = 0; i < t.size(); ++i) t.at(i) = rng.uniform();
    return t;
}

std::string temp_path(const char* name) {
    std::string dir = std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp";
    return dir + "/" + name;
}

// Pairs each parameter tensor with its tape leaf so tests can walk all six.
struct ParamSlot {
    Tensor CounterParams::* field;
    Var TapeForward::* var;
};

constexpr ParamSlot kParamSlots[] = {
    {&CounterParams::conv1_kernel, &TapeForward::conv1_kernel},
    {&CounterParams::conv1_bias, &TapeForward::conv1_bias},
    {&CounterParams::conv2_kernel, &TapeForward::conv2_kernel},
    {&CounterParams::conv2_bias, &TapeForward::conv2_bias},
    {&CounterParams::head_kernel, &TapeForward::head_kernel},
    {&CounterParams::head_bias, &TapeForward::head_bias},
};

}  // namespace

TEST_CASE("init shapes and ranges") {
    CounterParams p = init_params(7);
    CHECK(p.conv1_kernel.shape() == std::vector<std::size_t>{8, 4, 3, 3});
    CHECK(p.conv1_bias.shape() == std::vector<std::size_t>{8});
    CHECK(p.conv2_kernel.shape() == std::vector<std::size_t>{8, 8, 3, 3});
    CHECK(p.conv2_bias.shape() == std::vector<std::size_t>{8});
    CHECK(p.head_kernel.shape() == std::vector<std::size_t>{1, 8, 1, 1});
    CHECK(p.head_bias.shape() == std::vector<std::size_t>{1});

    const double a1 = std::sqrt(1.0 / (4 * 3 * 3));
    for (std::size_t i = 0; i < p.conv1_kernel.size(); ++i) {
        CHECK(std::abs(p.conv1_kernel.at(i)) < a1);
    }
    const double a2 = std::sqrt(1.0 / (8 * 3 * 3));
    for (std::size_t i = 0; i < p.conv2_kernel.size(); ++i) {
        CHECK(std::abs(p.conv2_kernel.at(i)) < a2);
    }
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(p.conv1_bias.at(i) == 0.0);
        CHECK(p.conv2_bias.at(i) == 0.0);
    }
    CHECK(p.head_bias.at(0) == 0.0);
}

TEST_CASE("init is seed-deterministic and seed-sensitive") {
    CounterParams a = init_params(3);
    CounterParams b = init_params(3);
    CounterParams c = init_params(4);
    CHECK(std::memcmp(a.conv1_kernel.data(), b.conv1_kernel.data(),
                      a.conv1_kernel.size() * sizeof(double)) == 0);

    std::size_t differing = 0;
    for (std::size_t i = 0; i < a.conv1_kernel.size(); ++i)
        differing += a.conv1_kernel.at(i) != c.conv1_kernel.at(i) ? 1 : 0;
    CHECK(differing > a.conv1_kernel.size() * 99 / 100);
}

TEST_CASE("forward emits sigmoid-squashed maps of the right shape") {
    Rng rng(2);
    CounterParams p = init_params(1);
    ForwardResult r = forward(p, random_image(16, rng));
    REQUIRE(r.features.shape() == std::vector<std::size_t>{8, 16, 16});
    REQUIRE(r.pred_density.shape() == std::vector<std::size_t>{16, 16});
    for (std::size_t i = 0; i < r.features.size(); ++i) {
        CHECK(r.features.at(i) > 0.0);
        CHECK(r.features.at(i) < 1.0);
    }
    for (std::size_t i = 0; i < r.pred_density.size(); ++i) {
        CHECK(r.pred_density.at(i) > 0.0);
        CHECK(r.pred_density.at(i) < 1.0);
    }
}

TEST_CASE("zero parameters and zero input yield the sigmoid midpoint") {
    CounterParams p = init_params(1);
    for (Tensor* t : {&p.conv1_kernel, &p.conv2_kernel, &p.head_kernel})
        for (std::size_t i = 0; i < t->size(); ++i) t->at(i) = 0.0;
    Tensor zero({4, 8, 8});
    ForwardResult r = forward(p, zero);
    for (std::size_t i = 0; i < r.pred_density.size(); ++i)
        CHECK(r.pred_density.at(i) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("forward rejects malformed images") {
    CounterParams p = init_params(1);
    CHECK_THROWS_AS(forward(p, Tensor({3, 16, 16})), dimension_error);
    CHECK_THROWS_AS(forward(p, Tensor({4, 4, 4})), contract_error);
    CHECK_THROWS_AS(forward(p, Tensor({4, 16})), dimension_error);
}

TEST_CASE("tape forward matches the inference path") {
    Rng rng(9);
    CounterParams p = init_params(5);
    Tensor image = random_image(12, rng);
    ForwardResult plain = forward(p, image);
    Graph g;
    TapeForward tf = forward_on_tape(g, p, image);
    const Tensor& taped = g.value(tf.pred);
    REQUIRE(taped.size() == plain.pred_density.size());
    for (std::size_t i = 0; i < taped.size(); ++i)
        CHECK(taped.data()[i] == doctest::Approx(plain.pred_density.data()[i]).epsilon(1e-12));
}

TEST_CASE("end-to-end parameter gradients pass a finite-difference check") {
    Rng rng(31);
    CounterParams p = init_params(8);
    Tensor image = random_image(8, rng);
    Tensor gt({1, 8, 8});
    for (std::size_t i = 0; i < gt.size(); ++i) gt.at(i) = rng.uniform() < 0.8 ? 0.0 : 0.3;

    auto loss_of = [&](const CounterParams& params) {
        Graph g;
        TapeForward tf = forward_on_tape(g, params, image);
        return focal_mse_loss(g.value(tf.pred), gt);
    };

    // Analytic gradients via one backward pass seeded with the loss gradient.
    Graph g;
    TapeForward tf = forward_on_tape(g, p, image);
    LossReport loss = focal_mse_loss(g.value(tf.pred), gt);
    g.backward(tf.pred, loss.grad);

    for (const ParamSlot& slot : kParamSlots) {
        const double err = grad_check(
            [&](const Tensor& x) {
                CounterParams probe = p;
                probe.*slot.field = x;
                Tensor out({1});
                out.at(0) = loss_of(probe).value;
                return out;
            },
            p.*slot.field, g.grad(tf.*slot.var), 1e-5);
        CHECK(err < 1e-5);
    }
}

TEST_CASE("predict_count sums the density") {
    Tensor d({2, 2});
    d.at(0) = 0.5;
    d.at(1) = 1.25;
    d.at(2) = 0.0;
    d.at(3) = 0.25;
    CHECK(predict_count(d) == doctest::Approx(2.0).epsilon(1e-12));

    d.at(2) = -0.01;
    CHECK_THROWS_AS(predict_count(d), contract_error);
}

TEST_CASE("checkpoint round-trips bit-exactly") {
    CounterParams p = init_params(21);
    p.conv1_bias.at(3) = -0.75;
    p.head_bias.at(0) = 1e-17;
    const std::string path = temp_path("focalcount_ckpt_test.txt");
    save_checkpoint(p, path);
    CounterParams q = load_checkpoint(path);
    CHECK(std::memcmp(p.conv1_kernel.data(), q.conv1_kernel.data(),
                      p.conv1_kernel.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(p.conv2_kernel.data(), q.conv2_kernel.data(),
                      p.conv2_kernel.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(p.head_kernel.data(), q.head_kernel.data(),
                      p.head_kernel.size() * sizeof(double)) == 0);
    CHECK(q.conv1_bias.at(3) == -0.75);
    CHECK(q.head_bias.at(0) == 1e-17);
    std::remove(path.c_str());
}

TEST_CASE("checkpoint loader rejects truncated files") {
    const std::string path = temp_path("focalcount_ckpt_bad.txt");
    {
        FILE* f = std::fopen(path.c_str(), "w");
        REQUIRE(f != nullptr);
        std::fputs("conv1_kernel 8 4 3 3\n0.5 0.5\n", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_checkpoint(path), parse_error);
    CHECK_THROWS_AS(load_checkpoint(temp_path("focalcount_missing.txt")), parse_error);
    std::remove(path.c_str());
}

TEST_CASE("a few hundred descent steps cut the loss on a small corpus") {
    std::vector<Scene> corpus = generate_corpus(64, 0.9, 13);
    CounterParams p = init_params(2);

    auto corpus_loss = [&](const CounterParams& params) {
        double total = 0.0;
        for (const Scene& s : corpus) {
            Graph g;
            TapeForward tf = forward_on_tape(g, params, s.image);
            total += mse_loss(g.value(tf.pred), s.gt_density.reshaped({1, 32, 32})).value;
        }
        return total / corpus.size();
    };

    const double before = corpus_loss(p);
    const double lr = 0.003;
    for (int step = 0; step < 200; ++step) {
        const Scene& s = corpus[step % corpus.size()];
        Graph g;
        TapeForward tf = forward_on_tape(g, p, s.image);
        LossReport loss = mse_loss(g.value(tf.pred), s.gt_density.reshaped({1, 32, 32}));
        g.backward(tf.pred, loss.grad);
        for (const ParamSlot& slot : kParamSlots) {
            const Tensor& grad = g.grad(tf.*slot.var);
            Tensor& field = p.*slot.field;
            for (std::size_t i = 0; i < field.size(); ++i) field.at(i) -= lr * grad.data()[i];
        }
    }
    const double after = corpus_loss(p);
    CHECK(after < 0.5 * before);
}
