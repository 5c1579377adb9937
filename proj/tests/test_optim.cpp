#include <doctest.h>

#include <array>
#include <limits>

#include "ayn/error.hpp"
#include "ayn/optim.hpp"
#include "ayn/tensor.hpp"

using namespace ayn;

namespace {

Tensor with_grad(double value, double grad) {
    Tensor t = Tensor::scalar(value);
    t.ensure_grad();
    (*t.grad)[0] = grad;
    return t;
}

}  // namespace

TEST_CASE("adam first step sizes like lr for unit gradient") {
    // With g = 1 at t = 1 the bias-corrected moments are both exactly 1,
    // so the update is lr / (1 + eps).
    Tensor p = with_grad(1.0, 1.0);
    std::array<Tensor*, 1> params{&p};
    Optimizer opt({.kind = OptimizerKind::adam, .learning_rate = 1e-3});
    opt.step(params);
    CHECK(p.data[0] == doctest::Approx(1.0 - 1e-3 / (1.0 + 1e-8)).epsilon(1e-15));
    CHECK(opt.steps_taken() == 1);
}

TEST_CASE("adam with zero gradient is a fixed point") {
    Tensor p = with_grad(0.7, 0.0);
    std::array<Tensor*, 1> params{&p};
    Optimizer opt({.kind = OptimizerKind::adam, .learning_rate = 0.1});
    for (int i = 0; i < 5; ++i) opt.step(params);
    CHECK(p.data[0] == 0.7);
}

TEST_CASE("adam direction follows the gradient sign per coordinate") {
    Tensor p = Tensor::vector({0.0, 0.0});
    p.ensure_grad();
    (*p.grad)[0] = 2.5;
    (*p.grad)[1] = -0.3;
    std::array<Tensor*, 1> params{&p};
    Optimizer opt({.kind = OptimizerKind::adam, .learning_rate = 1e-2});
    opt.step(params);
    CHECK(p.data[0] < 0.0);
    CHECK(p.data[1] > 0.0);
    // At t = 1 bias correction makes the step magnitude ~lr regardless of |g|.
    CHECK(p.data[0] == doctest::Approx(-1e-2).epsilon(1e-6));
    CHECK(p.data[1] == doctest::Approx(1e-2).epsilon(1e-6));
}

TEST_CASE("momentum accumulates velocity across steps") {
    Tensor p = with_grad(1.0, 1.0);
    std::array<Tensor*, 1> params{&p};
    Optimizer opt({.kind = OptimizerKind::sgd_momentum, .learning_rate = 0.1, .momentum = 0.9});
    opt.step(params);
    CHECK(p.data[0] == doctest::Approx(0.9).epsilon(1e-14));  // vel = 1
    opt.step(params);
    CHECK(p.data[0] == doctest::Approx(0.71).epsilon(1e-14));  // vel = 1.9
    opt.step(params);
    CHECK(p.data[0] == doctest::Approx(0.439).epsilon(1e-12));  // vel = 2.71
}

TEST_CASE("optimizer validates its configuration") {
    CHECK_THROWS_AS(Optimizer({.kind = OptimizerKind::adam, .learning_rate = 0.0}), Error);
    CHECK_THROWS_AS(Optimizer({.kind = OptimizerKind::adam, .learning_rate = 1e-3, .beta1 = 1.0}), Error);
    CHECK_THROWS_AS(Optimizer({.kind = OptimizerKind::adam, .learning_rate = 1e-3, .epsilon = 0.0}), Error);
    CHECK_NOTHROW(Optimizer({.kind = OptimizerKind::sgd_momentum, .learning_rate = 0.5}));
}

TEST_CASE("optimizer rejects drifting parameter lists and missing grads") {
    Tensor a = with_grad(1.0, 1.0);
    Tensor b = with_grad(2.0, 1.0);
    Optimizer opt({.kind = OptimizerKind::adam, .learning_rate = 1e-3});
    std::array<Tensor*, 2> both{&a, &b};
    opt.step(both);
    std::array<Tensor*, 1> fewer{&a};
    CHECK_THROWS_AS(opt.step(fewer), Error);

    Tensor c = Tensor::scalar(1.0);  // no grad buffer
    Optimizer opt2({.kind = OptimizerKind::adam, .learning_rate = 1e-3});
    std::array<Tensor*, 1> missing{&c};
    CHECK_THROWS_AS(opt2.step(missing), Error);

    Tensor d = with_grad(1.0, std::numeric_limits<double>::quiet_NaN());
    Optimizer opt3({.kind = OptimizerKind::adam, .learning_rate = 1e-3});
    std::array<Tensor*, 1> nan_grad{&d};
    CHECK_THROWS_AS(opt3.step(nan_grad), Error);
}

TEST_CASE("optimizer kind names round-trip") {
    CHECK(optimizer_kind_from_string("adam") == OptimizerKind::adam);
    CHECK(optimizer_kind_from_string("sgd_momentum") == OptimizerKind::sgd_momentum);
    CHECK(optimizer_kind_from_string("sgd") == OptimizerKind::sgd_momentum);
    CHECK(to_string(OptimizerKind::adam) == "adam");
    CHECK(to_string(OptimizerKind::sgd_momentum) == "sgd_momentum");
    CHECK_THROWS_AS(optimizer_kind_from_string("rmsprop"), Error);
}
