#include <benchmark/benchmark.h>

#include <array>

#include "ayn/graph.hpp"
#include "ayn/rng.hpp"
#include "ayn/tensor.hpp"

namespace {

// Forward+backward through a dense layer stack, the hot loop of training.
void bm_graph_dense_forward_backward(benchmark::State& state) {
    const std::size_t dim = static_cast<std::size_t>(state.range(0));
    ayn::Rng rng(1);
    ayn::Tensor w1 = ayn::Tensor::zeros({dim, dim});
    ayn::Tensor w2 = ayn::Tensor::zeros({dim, dim});
    ayn::Tensor v = ayn::Tensor::zeros({dim});
    ayn::init_uniform_glorot(w1, dim, dim, rng);
    ayn::init_uniform_glorot(w2, dim, dim, rng);
    for (double& x : v.data) x = rng.uniform(-1.0, 1.0);

    for (auto _ : state) {
        ayn::Graph g;
        ayn::NodeId h = g.tanh_(g.matvec(g.param(w1), g.input(v)));
        ayn::NodeId out = g.cross_entropy(g.matvec(g.param(w2), h), 0);
        g.backward(out);
        benchmark::DoNotOptimize(g.scalar_value(out));
        w1.zero_grad();
        w2.zero_grad();
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}

void bm_matvec_forward_only(benchmark::State& state) {
    const std::size_t dim = static_cast<std::size_t>(state.range(0));
    ayn::Rng rng(2);
    ayn::Tensor w = ayn::Tensor::zeros({dim, dim});
    ayn::Tensor v = ayn::Tensor::zeros({dim});
    ayn::init_uniform_glorot(w, dim, dim, rng);
    for (double& x : v.data) x = rng.uniform(-1.0, 1.0);

    for (auto _ : state) {
        ayn::Graph g;
        ayn::NodeId out = g.matvec(g.input(w), g.input(v));
        benchmark::DoNotOptimize(g.value(out).data[0]);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}

}  // namespace

BENCHMARK(bm_graph_dense_forward_backward)->Arg(64)->Arg(256);
BENCHMARK(bm_matvec_forward_only)->Arg(256)->Arg(1024);
