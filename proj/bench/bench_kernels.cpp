// Serial reference kernels against their OpenMP counterparts.
// Run with e.g. OMP_NUM_THREADS=4 ./bench_kernels; the Exec argument is 0 for
// serial and 1 for parallel, the size argument is cells per axis.

#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "plap/exec.hpp"
#include "plap/functionals.hpp"
#include "plap/jet.hpp"
#include "plap/linear.hpp"
#include "plap/oracles.hpp"

namespace {

plap::Exec exec_of(const benchmark::State& s) { return s.range(0) ? plap::Exec::parallel : plap::Exec::serial; }

plap::ScalarField radial_field(int cells)
{
    const auto d = plap::GridDomain::cube(2, -1.0, 1.0, cells);
    return plap::oracles::radial_solution(1.5, 2).sample_u(d);
}

void BM_BlockSum(benchmark::State& s)
{
    std::vector<double> v(static_cast<std::size_t>(s.range(1)) * static_cast<std::size_t>(s.range(1)));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(0.001 * static_cast<double>(i));
    for (auto _ : s) benchmark::DoNotOptimize(plap::block_sum(v, exec_of(s)));
    s.SetItemsProcessed(static_cast<long>(s.iterations()) * static_cast<long>(v.size()));
}

void BM_Jet3(benchmark::State& s)
{
    const auto u = radial_field(static_cast<int>(s.range(1)));
    for (auto _ : s) benchmark::DoNotOptimize(plap::jet(u, 3, exec_of(s)).third_norm.data());
}

void BM_Apply(benchmark::State& s)
{
    const auto u = radial_field(static_cast<int>(s.range(1)));
    std::vector<double> a(u.size(), 1.0);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = 1.0 + 0.5 * std::abs(u[i]);
    const auto A = plap::linear::FaceOperator::from_node_coefficients(u.domain(), a);
    std::vector<double> y(u.size());
    for (auto _ : s) {
        A.apply(u.values(), y, exec_of(s));
        benchmark::DoNotOptimize(y.data());
    }
}

void BM_GaussSeidel(benchmark::State& s)
{
    const auto u = radial_field(static_cast<int>(s.range(1)));
    std::vector<double> a(u.size(), 1.0);
    const auto A = plap::linear::FaceOperator::from_node_coefficients(u.domain(), a);
    std::vector<double> x(u.size(), 0.0);
    for (auto _ : s) {
        A.gauss_seidel_color(u.values(), x, 0, exec_of(s));
        A.gauss_seidel_color(u.values(), x, 1, exec_of(s));
        benchmark::DoNotOptimize(x.data());
    }
}

void BM_HessianEnergy(benchmark::State& s)
{
    const auto u = radial_field(static_cast<int>(s.range(1)));
    plap::WindowOptions w;
    w.exec = exec_of(s);
    for (auto _ : s) benchmark::DoNotOptimize(plap::hessian_energy(u, 1.5, 0.5, 1e-3, w).value);
}

void sizes(benchmark::internal::Benchmark* b)
{
    for (int e : {0, 1})
        for (int n : {128, 256, 512}) b->Args({e, n});
}

} // namespace

BENCHMARK(BM_BlockSum)->Apply(sizes);
BENCHMARK(BM_Jet3)->Apply(sizes);
BENCHMARK(BM_Apply)->Apply(sizes);
BENCHMARK(BM_GaussSeidel)->Apply(sizes);
BENCHMARK(BM_HessianEnergy)->Apply(sizes);

BENCHMARK_MAIN();
