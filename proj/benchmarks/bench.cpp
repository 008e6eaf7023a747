// Microbenchmarks: neuron kernels, whole-network forward/backward under both
// parametrizations, and packed vs per-row circuit inference.

#include <benchmark/benchmark.h>

#include "dlgn/circuit.hpp"
#include "dlgn/train.hpp"

using namespace dlgn;

namespace {

Batch random_rows(int rows, int cols, std::uint64_t seed) {
    Batch b(rows, cols);
    Rng rng(seed);
    for (auto& v : b.data) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
    return b;
}

NetworkConfig bench_cfg(Parametrization param) {
    NetworkConfig cfg;
    cfg.encoder.input_dim = 64;
    cfg.encoder.k = 4;
    cfg.layer_width = 512;
    cfg.base_layers = 6;
    cfg.class_count = 2;
    cfg.param = param;
    cfg.init.kind = InitScheme::Kind::Residual;
    return cfg;
}

void bench_op_forward_kernel(benchmark::State& state) {
    OpParams p;
    Rng rng(1);
    for (auto& l : p.logits) l = rng.normal(0.0, 1.0);
    double x = 0.3, y = 0.7;
    for (auto _ : state) {
        benchmark::DoNotOptimize(op_forward(p, x, y));
    }
}
BENCHMARK(bench_op_forward_kernel);

void bench_op_backward_kernel(benchmark::State& state) {
    OpParams p;
    Rng rng(1);
    for (auto& l : p.logits) l = rng.normal(0.0, 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(op_backward(p, 0.3, 0.7, 1.0));
    }
}
BENCHMARK(bench_op_backward_kernel);

void bench_iwp_forward_kernel(benchmark::State& state) {
    IwpParams p;
    Rng rng(1);
    for (auto& l : p.logits) l = rng.normal(0.0, 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(iwp_forward(p, Estimator::Sin01, 0.3, 0.7));
    }
}
BENCHMARK(bench_iwp_forward_kernel);

void bench_iwp_backward_kernel(benchmark::State& state) {
    IwpParams p;
    Rng rng(1);
    for (auto& l : p.logits) l = rng.normal(0.0, 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(iwp_backward(p, Estimator::Sin01, 0.3, 0.7, 1.0));
    }
}
BENCHMARK(bench_iwp_backward_kernel);

void bench_network_forward(benchmark::State& state) {
    const auto param = state.range(0) == 0 ? Parametrization::OP : Parametrization::IWP;
    const auto net = build_network(bench_cfg(param), 1);
    const auto rows = random_rows(64, net.input_width(), 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(forward(net, rows));
    }
    state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(bench_network_forward)->Arg(0)->Arg(1);

void bench_network_backward(benchmark::State& state) {
    const auto param = state.range(0) == 0 ? Parametrization::OP : Parametrization::IWP;
    const auto net = build_network(bench_cfg(param), 1);
    const auto rows = random_rows(64, net.input_width(), 2);
    const auto trace = forward(net, rows);
    Batch dl(64, 2);
    Rng rng(3);
    for (auto& v : dl.data) v = rng.normal(0.0, 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(backward(net, trace, dl));
    }
    state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(bench_network_backward)->Arg(0)->Arg(1);

void bench_circuit_per_row(benchmark::State& state) {
    const auto net = build_network(bench_cfg(Parametrization::IWP), 1);
    const auto circuit = discretize_network(net);
    const int n = 256;
    BitRows rows;
    rows.rows = n;
    rows.cols = circuit.input_width;
    rows.data.resize(size_t(n) * rows.cols);
    Rng rng(4);
    for (auto& b : rows.data) b = rng.uniform() < 0.5 ? 0 : 1;
    for (auto _ : state) {
        for (int r = 0; r < n; ++r) {
            std::span<const std::uint8_t> row(rows.data.data() + size_t(r) * rows.cols,
                                              size_t(rows.cols));
            benchmark::DoNotOptimize(eval_circuit(circuit, row));
        }
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(bench_circuit_per_row);

void bench_circuit_packed(benchmark::State& state) {
    const auto net = build_network(bench_cfg(Parametrization::IWP), 1);
    const auto packed = pack(discretize_network(net));
    const int n = 256;
    BitRows rows;
    rows.rows = n;
    rows.cols = packed.circuit.input_width;
    rows.data.resize(size_t(n) * rows.cols);
    Rng rng(4);
    for (auto& b : rows.data) b = rng.uniform() < 0.5 ? 0 : 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(eval_packed(packed, rows, 1));
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(bench_circuit_packed);

}  // namespace

BENCHMARK_MAIN();
