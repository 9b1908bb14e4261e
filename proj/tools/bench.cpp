// Microbenchmark comparing the batched/OpenMP kernels against their serial
// reference implementations. Numbers are medians over repeated runs; the
// equivalence itself is covered by the test suite.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "pathmamba/dataset.hpp"
#include "pathmamba/model.hpp"
#include "pathmamba/parallel.hpp"
#include "pathmamba/pathsampler.hpp"
#include "pathmamba/rng.hpp"
#include "pathmamba/train.hpp"

using namespace pathmamba;

namespace {

double median_ms(const std::function<void()>& fn, int reps) {
    std::vector<double> times;
    fn();  // warm up
    for (int r = 0; r < reps; ++r) {
        auto start = std::chrono::steady_clock::now();
        fn();
        auto stop = std::chrono::steady_clock::now();
        times.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

void report(const char* name, double reference_ms, double kernel_ms) {
    std::printf("%-34s %10.3f ms %10.3f ms %8.2fx\n", name, reference_ms, kernel_ms,
                kernel_ms > 0 ? reference_ms / kernel_ms : 0.0);
}

}  // namespace

int main() {
    std::printf("threads available: %d\n", max_threads());
    std::printf("%-34s %13s %13s %9s\n", "kernel", "reference", "optimized", "speedup");

    SyntheticSpec spec;
    spec.num_graphs_per_class = 16;
    spec.classes = 2;
    spec.background_nodes = 64;
    spec.background_edge_prob = 0.1;
    spec.motif_length = 8;
    spec.feature_dim = 8;
    spec.feature_signal = 2.0;
    Dataset ds = generate_synthetic(spec, 42);
    const Graph& g = ds.graphs[0].graph;

    // Positional encoding: dense matrix powers vs per-node sparse pushes.
    {
        double dense = median_ms([&] { rwse_dense_reference(g, 8); }, 9);
        double sparse = median_ms([&] { rwse(g, 8); }, 9);
        report("rwse (dense power vs sparse)", dense, sparse);
    }

    ModelConfig mc;
    mc.num_layers = 1;
    mc.hidden = 32;
    mc.walk_length = 8;
    mc.pe_steps = 4;
    mc.d_state = 16;
    mc.classes = 2;
    mc.feature_dim = 8;
    Model model = init_model(mc, 1);
    nd::Tensor pe = rwse(g, mc.pe_steps);
    PathwaySet paths = sample_pathways(g, mc.walk_length, 3);

    // Selective scan: walk-at-a-time reference vs length-grouped batches.
    {
        auto run = [&](bool batched) {
            nd::Tape tape;
            TapedModel staged = stage_model(tape, model, false);
            nd::Var x = nd::matmul(
                nd::concat_columns(tape.input(ds.graphs[0].features), tape.input(pe)),
                staged.input_proj);
            if (batched) {
                global_layer(tape, x, g, paths, staged.layers[0].mamba);
            } else {
                global_layer_reference(tape, x, g, paths, staged.layers[0].mamba);
            }
        };
        double reference = median_ms([&] { run(false); }, 15);
        double batched = median_ms([&] { run(true); }, 15);
        report("selective scan (per-walk vs batch)", reference, batched);
    }

    // Batched gradients: serial loop vs OpenMP over the batch.
    {
        TrainConfig tc;
        tc.epochs = 1;
        tc.batch_size = 32;
        tc.seed = 9;
        std::vector<int> all;
        for (size_t i = 0; i < ds.graphs.size(); ++i) all.push_back(static_cast<int>(i));
        auto run = [&](bool parallel) {
            set_parallel_enabled(parallel);
            Model m = init_model(mc, 2);
            train_on_subset(m, ds, all, tc);
        };
        double serial = median_ms([&] { run(false); }, 5);
        double parallel = median_ms([&] { run(true); }, 5);
        set_parallel_enabled(true);
        report("batch gradients (serial vs omp)", serial, parallel);
    }

    return 0;
}
