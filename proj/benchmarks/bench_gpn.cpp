#include <benchmark/benchmark.h>

#include <random>

#include "gpn/flows.hpp"
#include "gpn/graph.hpp"
#include "gpn/model.hpp"
#include "gpn/training.hpp"

namespace {

gpn::Dataset bench_data(std::size_t n_per_class) {
    return gpn::make_synthetic_benchmark(n_per_class, 4, 16, 0.8, 7);
}

void BM_Propagate(benchmark::State& state) {
    auto data = bench_data(static_cast<std::size_t>(state.range(0)));
    gpn::PropagationOperator op(data.graph, gpn::PropagationMode::symmetric, 0.1, 10);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> draw(0.0, 1.0);
    auto x = gpn::Tensor::zeros({data.num_nodes(), 4});
    for (auto& v : x->values) v = draw(rng);
    for (auto _ : state) {
        gpn::Tape tape;
        auto out = gpn::propagate(tape, op, x);
        benchmark::DoNotOptimize(out->values.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(data.num_nodes()));
}
BENCHMARK(BM_Propagate)->Arg(250)->Arg(1000);

void BM_FlowLogDensity(benchmark::State& state) {
    std::mt19937_64 rng(3);
    auto stack = gpn::FlowStack::init(16, 10, rng);
    std::normal_distribution<double> draw(0.0, 1.0);
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    auto z = gpn::Tensor::zeros({n, 16});
    for (auto& v : z->values) v = draw(rng);
    for (auto _ : state) {
        gpn::Tape tape;
        auto out = stack.log_density(tape, z);
        benchmark::DoNotOptimize(out->values.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}
BENCHMARK(BM_FlowLogDensity)->Arg(256)->Arg(1024);

void BM_TrainingStep(benchmark::State& state) {
    auto data = bench_data(200);
    auto split = gpn::stratified_split(data, 1);
    gpn::GpnConfig config;
    config.input_dim = data.num_features();
    config.num_classes = data.num_classes;
    config.init_seed = 1;
    auto model = gpn::GpnModel::init(config);
    auto op = model.make_operator(data.graph);
    gpn::Adam opt({gpn::ParamGroup{model.parameters(), 0.0}}, 0.01);
    std::mt19937_64 rng(2);
    for (auto _ : state) {
        gpn::Tape tape;
        auto fwd = model.forward(tape, op, data.features, true, rng);
        auto loss = gpn::bayesian_loss(tape, fwd.post, data.labels, split.train, {});
        opt.zero_grad();
        tape.backward(loss);
        opt.step();
        benchmark::DoNotOptimize(loss->item());
    }
}
BENCHMARK(BM_TrainingStep);

void BM_BfsDistances(benchmark::State& state) {
    auto data = bench_data(500);
    std::vector<std::size_t> sources;
    for (std::size_t v = 0; v < data.num_nodes(); v += 20) sources.push_back(v);
    for (auto _ : state) {
        auto d = gpn::bfs_distances(data.graph, sources);
        benchmark::DoNotOptimize(d.data());
    }
}
BENCHMARK(BM_BfsDistances);

}  // namespace

BENCHMARK_MAIN();
