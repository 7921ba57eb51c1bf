// Serial reference vs OpenMP kernels. Thread count follows COKRIG_THREADS.

#include <random>

#include <benchmark/benchmark.h>

#include "cokrig/kernels.hpp"

using namespace cokrig;

namespace {

std::vector<Location> points(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Location> out(n);
    for (auto& p : out) p = {u(rng), u(rng)};
    return out;
}

std::vector<double> values(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::vector<double> out(n);
    for (auto& v : out) v = z(rng);
    return out;
}

const KernelConvModel& model() {
    static const KernelConvModel m = [] {
        Eigen::MatrixXd a(2, 2);
        a << 1.0, 0.0, 0.5, 0.8;
        return make_lmc(a, {{CorrelationFamily::matern, 0.3, 1.5}, {CorrelationFamily::matern, 0.2, 2.2}});
    }();
    return m;
}

template <bool Parallel>
void assemble(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const std::vector<LocationSet> locs{LocationSet(points(n, 1)), LocationSet(points(n, 2))};
    for (auto _ : state) {
        auto m = Parallel ? kernels::omp::assemble_joint(model(), locs) : kernels::serial::assemble_joint(model(), locs);
        benchmark::DoNotOptimize(m.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 4 * n * n));
}

template <bool Parallel>
void fill(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const LocationSet a(points(n, 3)), b(points(n, 4));
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (auto _ : state) {
        if (Parallel) {
            kernels::omp::fill_block(model(), 0, a, 1, b, out);
        } else {
            kernels::serial::fill_block(model(), 0, a, 1, b, out);
        }
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n));
}

template <bool Parallel>
void binning(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto la = points(n, 5), lb = points(n, 6);
    const auto va = values(n, 7), vb = values(n, 8);
    const auto bins = LagBins::uniform(0.5, 15);
    const kernels::BinningProblem p{{la, va}, {lb, vb}, false, false, false,
                                    kernels::PairStatistic::half_squared_difference, &bins};
    for (auto _ : state) {
        auto r = Parallel ? kernels::omp::bin_pairs(p) : kernels::serial::bin_pairs(p);
        benchmark::DoNotOptimize(r.sums.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n));
}

} // namespace

BENCHMARK(fill<false>)->Name("fill_block/serial")->Arg(500)->Arg(1500)->Unit(benchmark::kMillisecond);
BENCHMARK(fill<true>)->Name("fill_block/omp")->Arg(500)->Arg(1500)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(assemble<false>)->Name("assemble_joint/serial")->Arg(400)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(assemble<true>)->Name("assemble_joint/omp")->Arg(400)->Arg(1000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(binning<false>)->Name("bin_pairs/serial")->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);
BENCHMARK(binning<true>)->Name("bin_pairs/omp")->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond)->UseRealTime();

int main(int argc, char** argv) {
    kernels::apply_thread_env();
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
