#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "spectral/data.hpp"
#include "spectral/dist.hpp"
#include "spectral/losses.hpp"
#include "spectral/optim.hpp"
#include "spectral/risk.hpp"
#include "spectral/spectrum.hpp"

using namespace spectral;

namespace {

std::vector<double> lognormal_losses(std::size_t n) {
  Rng rng(1);
  std::lognormal_distribution<double> d(0.0, 1.0);
  std::vector<double> xs(n);
  for (auto& x : xs) x = d(rng);
  return xs;
}

}  // namespace

static void BM_EmpiricalCdfFit(benchmark::State& state) {
  const auto xs = lognormal_losses(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(EmpiricalCdf::fit(xs));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EmpiricalCdfFit)->RangeMultiplier(8)->Range(64, 1 << 18)->Complexity();

static void BM_PluginRisk(benchmark::State& state) {
  const auto xs = lognormal_losses(static_cast<std::size_t>(state.range(0)));
  const auto spec = Spectrum::exponential(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(plugin_spectral_risk(xs, spec));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PluginRisk)->RangeMultiplier(8)->Range(64, 1 << 18)->Complexity();

static void BM_LogisticGradient(benchmark::State& state) {
  const std::size_t p = static_cast<std::size_t>(state.range(0));
  const auto model = LossModel::logistic(10, p);
  Rng rng(2);
  std::normal_distribution<double> g;
  ParamVector w(model.dim());
  for (auto& x : w) x = g(rng);
  Example z;
  z.features.resize(p);
  for (auto& x : z.features) x = g(rng);
  z.label = 3;
  ParamVector out(model.dim());
  for (auto _ : state) benchmark::DoNotOptimize(model.loss_and_gradient(w, z, out));
}
BENCHMARK(BM_LogisticGradient)->Arg(8)->Arg(64)->Arg(512);

// One full step: M ancillary draws plus the update.
static void BM_DescentStep(benchmark::State& state) {
  const auto method = static_cast<Method>(state.range(0));
  SyntheticParams sp;
  sp.p = 16;
  const auto gen = synthetic_generator(SyntheticKind::TwoGaussian, sp);
  const auto model = LossModel::logistic(2, sp.p);
  const auto spec = Spectrum::exponential(1.0);
  const EuclideanBall ball(100.0);
  SpectralDescent engine(model, spec, ball, method, 0.01, 0.5, 100, ParamVector(model.dim(), 0.0), 3);
  GeneratorSource src(gen, 4);
  for (auto _ : state) engine.step(src);
}
BENCHMARK(BM_DescentStep)
    ->Arg(static_cast<int>(Method::Default))
    ->Arg(static_cast<int>(Method::Fast))
    ->Arg(static_cast<int>(Method::Off));
BENCHMARK_MAIN();
