#include "curvatur/catalog.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace curvatur;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::parallel : Exec::serial; }

void label(benchmark::State& st) { st.SetLabel(st.range(0) ? "openmp" : "serial"); }

void BM_IntegrateGrid(benchmark::State& st)
{
    const auto g = builtin("torus");
    const SurfacePatch& s = *g.surface;
    GridIntegrand f = [&s](double u, double v, double* out) {
        auto f1 = forms_at(s, u, v);
        out[0] = std::sqrt(f1.g.determinant());
        out[1] = principal_at(s, u, v).K * out[0];
    };
    const int cells = static_cast<int>(st.range(1));
    for (auto _ : st) benchmark::DoNotOptimize(integrate_grid(f, 2, s.domain, cells, cells, exec_of(st)));
    label(st);
}
BENCHMARK(BM_IntegrateGrid)->ArgsProduct({{0, 1}, {8, 32}})->Unit(benchmark::kMillisecond);

void BM_GeodesicCircleFan(benchmark::State& st)
{
    const auto g = builtin("torus");
    VecN P(2);
    P << 1.0, 0.5;
    CircleOptions opt;
    opt.directions = static_cast<int>(st.range(1));
    opt.exec = exec_of(st);
    for (auto _ : st) benchmark::DoNotOptimize(geodesic_circle(*g.chart, P, 0.3, opt));
    label(st);
}
BENCHMARK(BM_GeodesicCircleFan)->ArgsProduct({{0, 1}, {128, 512}})->Unit(benchmark::kMillisecond);

void BM_GeodesicSphere(benchmark::State& st)
{
    const auto g = builtin("s3_round");
    VecN P = VecN::Zero(3);
    for (auto _ : st) benchmark::DoNotOptimize(geodesic_sphere_area(*g.chart, P, 0.2, 12, exec_of(st)));
    label(st);
}
BENCHMARK(BM_GeodesicSphere)->ArgsProduct({{0, 1}})->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
