#include <benchmark/benchmark.h>

#include "qkverify/ck_forms.hpp"
#include "qkverify/sampling.hpp"
#include "qkverify/suite.hpp"
#include "qkverify/twistor.hpp"

using namespace qk;
using namespace qk::geometry;
using twistor::Vec3;

namespace {

const HpnGeometry& geo(int n) {
  static const HpnGeometry g2(2), g3(3);
  return n == 2 ? g2 : g3;
}

Vec point(int n) {
  Rng rng = derive_rng(1, "bench");
  return sample_ball(rng, 4 * n);
}

}  // namespace

static void BM_Metric(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Vec p = point(n);
  for (auto _ : state) benchmark::DoNotOptimize(geo(n).metric_at(p));
}
BENCHMARK(BM_Metric)->Arg(2)->Arg(3);

static void BM_Christoffel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Vec p = point(n);
  for (auto _ : state) benchmark::DoNotOptimize(geo(n).christoffel_at(p));
}
BENCHMARK(BM_Christoffel)->Arg(2)->Arg(3);

static void BM_Riemann(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Vec p = point(n);
  for (auto _ : state) benchmark::DoNotOptimize(geo(n).riemann_at(p));
}
BENCHMARK(BM_Riemann)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

static void BM_CkPointEvaluation(benchmark::State& state) {
  const auto basis = killing_basis(2);
  const auto psi = ckforms::build_ck_form(geo(2), basis[7]);
  const Vec p = point(2);
  for (auto _ : state) {
    ckforms::CkPointEvaluation ev(geo(2), psi, p);
    benchmark::DoNotOptimize(ev.dpsi_residual());
  }
}
BENCHMARK(BM_CkPointEvaluation)->Unit(benchmark::kMillisecond);

static void BM_TwistorMetric(benchmark::State& state) {
  const twistor::TwistorSpace Z(geo(2));
  const Vec z = Z.to_coordinates(twistor::TwistorPoint::make(point(2), Vec3(0.6, 0.0, -0.8)));
  for (auto _ : state) benchmark::DoNotOptimize(Z.metric_at(z));
}
BENCHMARK(BM_TwistorMetric);

static void BM_Hamiltonian(benchmark::State& state) {
  const twistor::TwistorSpace Z(geo(2));
  const auto basis = killing_basis(2);
  const Vec z = Z.to_coordinates(twistor::TwistorPoint::make(point(2), Vec3(0.6, 0.0, -0.8)));
  for (auto _ : state) benchmark::DoNotOptimize(Z.hamiltonian(basis[5], z));
}
BENCHMARK(BM_Hamiltonian)->Unit(benchmark::kMillisecond);

static void BM_AlgebraSuite(benchmark::State& state) {
  report::SuiteConfig c;
  c.suites = {report::Suite::Algebra};
  for (auto _ : state) benchmark::DoNotOptimize(report::run_suite(c));
}
BENCHMARK(BM_AlgebraSuite)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
