#include "cci/index.hpp"
#include "cci/proxy_svar.hpp"
#include "cci/simlab.hpp"
#include "cci/var.hpp"

#include <benchmark/benchmark.h>

#include <algorithm>
#include <filesystem>
#include <vector>

namespace fs = std::filesystem;

namespace {

const cci::sim::Simulation& reference_sample() {
    static const auto s = cci::sim::simulate(cci::sim::reference_dgp_5x6(), 240);
    return s;
}

void BM_EstimateVar(benchmark::State& state) {
    const auto& s = reference_sample();
    const cci::var::VarSpec spec{static_cast<int>(state.range(0)), true};
    for (auto _ : state) benchmark::DoNotOptimize(cci::var::estimate_var(s.panel, spec));
}
BENCHMARK(BM_EstimateVar)->Arg(1)->Arg(6)->Arg(12);

void BM_Pca(benchmark::State& state) {
    const auto& s = reference_sample();
    for (auto _ : state) benchmark::DoNotOptimize(cci::var::pca(s.panel));
}
BENCHMARK(BM_Pca);

void BM_MbbBands(benchmark::State& state) {
    const auto& s = reference_sample();
    cci::proxy::BootstrapOptions opt;
    opt.reps = static_cast<int>(state.range(0));
    opt.threads = 1;
    for (auto _ : state) benchmark::DoNotOptimize(cci::proxy::mbb_bands(s.panel, {6, true}, s.instrument, opt));
}
BENCHMARK(BM_MbbBands)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_BuildCci(benchmark::State& state) {
    const fs::path root = CCI_FIXTURE_DIR;
    const auto vocab = cci::index::load_vocabulary(root / "vocabulary.csv");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(root / "groups")) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<cci::index::QueryGroup> groups;
    int id = 0;
    for (const auto& f : files) groups.push_back(cci::index::load_group_csv(f, ++id, vocab));
    cci::index::BuildOptions opt;
    opt.seasonal_adjust = state.range(0) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(cci::index::build_cci(vocab, groups, opt));
}
BENCHMARK(BM_BuildCci)->Arg(0)->Arg(1);

}  // namespace
BENCHMARK_MAIN();
