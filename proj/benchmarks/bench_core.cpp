#include "pfeddst/experiments.hpp"

#include <benchmark/benchmark.h>

using namespace pfeddst;

namespace {

WarnFn quiet() {
    return [](const std::string&) {};
}

SimConfig desk_config(int clients, int rounds) {
    SimConfig c;
    c.input_dim = 16;
    c.hidden_dims = {32};
    c.num_classes = 10;
    c.per_class = 120;
    c.spread = 0.9;
    c.num_clients = clients;
    c.rounds = rounds;
    c.top_k = 4;
    c.master_seed = 1;
    return c;
}

Batch random_batch(int n, int dim, int classes, Rng& rng) {
    Batch b;
    b.inputs = DenseMatrix(n, dim);
    for (double& v : b.inputs.data) v = rng.uniform(-1.0, 1.0);
    b.labels.resize(static_cast<std::size_t>(n));
    for (int& y : b.labels) y = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(classes)));
    return b;
}

void BM_forward_backward(benchmark::State& state) {
    const int batch = static_cast<int>(state.range(0));
    Rng rng(1);
    SplitModel model = make_split_mlp(16, {32}, 10, rng);
    Batch b = random_batch(batch, 16, 10, rng);
    Gradients g;
    for (auto _ : state) {
        benchmark::DoNotOptimize(loss_and_grads(model, b, FreezeMode::NoneFrozen, g));
    }
    state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_forward_backward)->Arg(32)->Arg(128);

void BM_score_candidates(benchmark::State& state) {
    const int peers = static_cast<int>(state.range(0));
    // The piece a round spends on candidate evaluation: probe + cosine +
    // recency + composite for every visible peer, then top-k selection.
    Rng rng(2);
    ClientState me;
    me.id = 0;
    me.model = make_split_mlp(16, {32}, 10, rng);
    me.recency.current_iter = 1;
    Registry reg(static_cast<std::size_t>(peers + 1));
    std::vector<int> visible;
    Batch eval = random_batch(64, 16, 10, rng);
    for (int p = 1; p <= peers; ++p) {
        ClientState other;
        other.id = p;
        other.model = make_split_mlp(16, {32}, 10, rng);
        reg[static_cast<std::size_t>(p)] = publish(other, 0, {});
        me.recency.last_selected[p] = RecencyArray::kNever;
        visible.push_back(p);
    }
    ScoringParams params;
    params.top_k = 10;
    LossProbe probe = [&](int, const SplitModel& m) { return mean_cross_entropy(m, eval); };
    for (auto _ : state) {
        auto scores = score_candidates(me, reg, visible, params, probe);
        benchmark::DoNotOptimize(select_peers(scores, params));
    }
    state.SetItemsProcessed(state.iterations() * peers);
}
BENCHMARK(BM_score_candidates)->Arg(19)->Arg(99);

void BM_full_round(benchmark::State& state) {
    const int clients = static_cast<int>(state.range(0));
    for (auto _ : state) {
        state.PauseTiming();
        SimConfig cfg = desk_config(clients, 1);
        Simulation sim(cfg, quiet());
        state.ResumeTiming();
        sim.run_round();
        benchmark::DoNotOptimize(sim.metrics().size());
    }
    state.SetItemsProcessed(state.iterations() * clients);
}
BENCHMARK(BM_full_round)->Arg(10)->Arg(20);

} // namespace

BENCHMARK_MAIN();
