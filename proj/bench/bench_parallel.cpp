// Serial reference against the OpenMP kernels on the two parallel hot spots:
// the finite-difference Jacobian of the period map and the amplitude sweep.
#include <benchmark/benchmark.h>

#include "relcrawl/cycles.hpp"
#include "relcrawl/parallel.hpp"

using namespace relcrawl;

namespace {

ExecPolicy policy_of(const benchmark::State& state) {
  return state.range(0) == 0 ? ExecPolicy::serial : ExecPolicy::openmp;
}

void BM_PeriodMapJacobian(benchmark::State& state) {
  const auto params = CrawlerParams::baseline_2d();
  RestLengthSchedule sched;
  sched.epsilon = 0.5;
  const StroboscopicMap<2> map(Crawler2D(params), sched);
  const Eigen::VectorXd x = equilibrium_section_2d(params);
  const Eigen::VectorXd fx = map(x);
  const auto f = [&](const Eigen::VectorXd& y) { return map(y); };
  for (auto _ : state) benchmark::DoNotOptimize(fd_jacobian(f, x, fx, policy_of(state)));
  state.SetLabel(state.range(0) == 0 ? "serial" : "openmp");
}
BENCHMARK(BM_PeriodMapJacobian)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_AmplitudeSweep(benchmark::State& state) {
  const Crawler2D model(CrawlerParams::baseline_2d());
  const RestLengthSchedule sched;
  CycleOptions opts;
  opts.policy = policy_of(state);
  const std::vector<double> eps{1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125};
  for (auto _ : state) benchmark::DoNotOptimize(scaling_study(model, sched, eps, opts));
  state.SetLabel(state.range(0) == 0 ? "serial" : "openmp");
}
BENCHMARK(BM_AmplitudeSweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
