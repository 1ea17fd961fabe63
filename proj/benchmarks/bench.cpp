#include "posteval/comparison.hpp"
#include "posteval/hdr.hpp"
#include "posteval/metrics.hpp"
#include "posteval/posterior.hpp"
#include "posteval/rng.hpp"

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

namespace {

using namespace posteval;

std::vector<GroupPosterior> two_groups() {
    std::vector<GroupPosterior> groups(2);
    groups[0].posterior.group_id = "g0";
    groups[0].posterior.alpha_post = {41.0, 31.0, 11.0, 21.0};
    groups[0].resample_total = 104;
    groups[1].posterior.group_id = "g1";
    groups[1].posterior.alpha_post = {31.0, 41.0, 16.0, 16.0};
    groups[1].resample_total = 104;
    return groups;
}

void bm_sample_joint(benchmark::State& state) {
    const auto groups = two_groups();
    const auto metrics = resolve_metrics({"accuracy", "dp"});
    SampleOptions opt;
    opt.draws = static_cast<std::size_t>(state.range(0));
    opt.seed = 42;
    opt.threads = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_joint(groups, metrics, opt));
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<std::int64_t>(opt.draws));
}
BENCHMARK(bm_sample_joint)->Arg(1 << 12)->Arg(1 << 15);

void bm_sample_joint_parallel(benchmark::State& state) {
    const auto groups = two_groups();
    const auto metrics = resolve_metrics({"accuracy", "dp"});
    SampleOptions opt;
    opt.draws = 1 << 15;
    opt.seed = 42;
    opt.threads = 0; // hardware concurrency
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_joint(groups, metrics, opt));
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<std::int64_t>(opt.draws));
}
BENCHMARK(bm_sample_joint_parallel);

void bm_binomial(benchmark::State& state) {
    rng::Rng r(7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(r.binomial(1000, 0.3));
    }
}
BENCHMARK(bm_binomial);

void bm_dirichlet(benchmark::State& state) {
    rng::Rng r(7);
    const std::array<double, 4> alpha = {41.0, 31.0, 11.0, 21.0};
    std::array<double, 4> pi{};
    for (auto _ : state) {
        r.dirichlet(alpha, pi);
        benchmark::DoNotOptimize(pi);
    }
}
BENCHMARK(bm_dirichlet);

JointSampleMatrix normal_matrix(std::size_t rows, std::size_t cols) {
    rng::Rng r(1234);
    JointSampleMatrix m;
    m.rows = rows;
    m.data.resize(rows * cols);
    for (std::size_t c = 0; c < cols; ++c) {
        m.columns.push_back("x" + std::to_string(c));
    }
    for (auto& v : m.data) {
        v = r.normal();
    }
    return m;
}

void bm_fit_hdr_1d(benchmark::State& state) {
    const auto m = normal_matrix(static_cast<std::size_t>(state.range(0)), 1);
    const std::vector<std::string> cols = {"x0"};
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_hdr(m, cols, 0.95));
    }
}
BENCHMARK(bm_fit_hdr_1d)->Arg(1 << 13)->Arg(1 << 16);

void bm_fit_hdr_2d(benchmark::State& state) {
    const auto m = normal_matrix(static_cast<std::size_t>(state.range(0)), 2);
    const std::vector<std::string> cols = {"x0", "x1"};
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_hdr(m, cols, 0.95));
    }
}
BENCHMARK(bm_fit_hdr_2d)->Arg(1 << 13)->Arg(1 << 16);

void bm_compare(benchmark::State& state) {
    const auto base = normal_matrix(1 << 16, 2);
    const std::vector<double> eps = {0.5, 0.5};
    for (auto _ : state) {
        auto gap = base;
        gap.columns = {"delta_a", "delta_b"};
        benchmark::DoNotOptimize(compare(std::move(gap), eps));
    }
}
BENCHMARK(bm_compare);

} // namespace

BENCHMARK_MAIN();
