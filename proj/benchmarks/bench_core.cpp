#include <benchmark/benchmark.h>

#include <sstream>

#include "fsreal/aggregate.hpp"
#include "fsreal/codec.hpp"
#include "fsreal/device.hpp"
#include "fsreal/rng.hpp"
#include "fsreal/sim.hpp"
#include "fsreal/wire.hpp"

using namespace fsreal;

namespace {

ModelParams bench_params(size_t n, uint64_t seed) {
    Layout layout = Layout::from_lengths({{"body", n * 9 / 10}, {"head", n - n * 9 / 10}});
    Rng rng(seed);
    std::vector<double> v(layout.total_length());
    for (double& x : v) x = rng.next_normal();
    return ModelParams(std::move(v), layout);
}

void BM_FedAvgAggregate(benchmark::State& state) {
    const size_t n_params = static_cast<size_t>(state.range(0));
    const size_t n_clients = 30;
    const auto prev = bench_params(n_params, 1);
    std::vector<UpdateRecord> updates;
    for (size_t c = 0; c < n_clients; ++c) {
        UpdateRecord u;
        u.client_id = c;
        u.params = bench_params(n_params, 10 + c);
        u.n_samples = 10 + c;
        u.upload_mask = prev.layout.layer_names();
        updates.push_back(std::move(u));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(fedavg_aggregate(updates, prev));
    }
    state.SetItemsProcessed(state.iterations() * n_clients * n_params);
}
BENCHMARK(BM_FedAvgAggregate)->Arg(1000)->Arg(100000);

void BM_CodecEncode(benchmark::State& state) {
    const auto codec = static_cast<CodecKind>(state.range(0));
    const auto p = bench_params(100000, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(encode(p, codec));
    }
}
BENCHMARK(BM_CodecEncode)->Arg(0)->Arg(1)->Arg(2)->Arg(3);

void BM_CodecDecode(benchmark::State& state) {
    const auto codec = static_cast<CodecKind>(state.range(0));
    const auto payload = encode(bench_params(100000, 3), codec);
    for (auto _ : state) {
        benchmark::DoNotOptimize(decode(payload));
    }
}
BENCHMARK(BM_CodecDecode)->Arg(0)->Arg(1)->Arg(2)->Arg(3);

void BM_BetaBinomialSample(benchmark::State& state) {
    const auto dist = DeviceDistribution::beta_binomial(10.0, 2.0);
    Rng rng(4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_capacity_index(dist, rng));
    }
}
BENCHMARK(BM_BetaBinomialSample);

void BM_FrameRoundtrip(benchmark::State& state) {
    Frame f;
    f.msg_type = MsgType::kModelUpload;
    f.round = 12;
    f.sender_id = 34;
    f.payload.assign(static_cast<size_t>(state.range(0)), 0xab);
    for (auto _ : state) {
        const auto bytes = frame_encode(f);
        benchmark::DoNotOptimize(frame_decode(bytes));
    }
    state.SetBytesProcessed(state.iterations() * static_cast<int64_t>(f.wire_size()));
}
BENCHMARK(BM_FrameRoundtrip)->Arg(1024)->Arg(65536);

void BM_SimRound(benchmark::State& state) {
    SimConfig cfg;
    cfg.total_clients = 100;
    cfg.data.n_clients = 100;
    cfg.data.samples_per_client = 50;
    cfg.seed = 5;
    cfg.device_dist = DeviceDistribution::beta_binomial(10.0, 10.0);
    cfg.server.n_participants = 30;
    cfg.server.response_goal = 30;
    cfg.server.max_rounds = static_cast<uint64_t>(state.range(0));
    for (auto _ : state) {
        std::ostringstream log;
        benchmark::DoNotOptimize(run_simulation(cfg, log));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimRound)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
