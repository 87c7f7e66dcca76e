#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "relcrawl/cycles.hpp"
#include "relcrawl/parallel.hpp"

using namespace relcrawl;

TEST(Parallel, VisitsEveryIndexOnce) {
  for (ExecPolicy policy : {ExecPolicy::serial, ExecPolicy::openmp}) {
    std::vector<std::atomic<int>> hits(257);
    parallel_for(257, [&](int i) { hits[i]++; }, policy);
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
  parallel_for(0, [](int) { FAIL(); }, ExecPolicy::openmp);
}

TEST(Parallel, ExceptionsPropagate) {
  for (ExecPolicy policy : {ExecPolicy::serial, ExecPolicy::openmp}) {
    EXPECT_THROW(parallel_for(
                     64,
                     [](int i) {
                       if (i == 37) throw std::domain_error("boom");
                     },
                     policy),
                 std::domain_error);
  }
}

TEST(Parallel, ThreadCapFromEnvironment) {
  ::setenv("RELCRAWL_THREADS", "3", 1);
  EXPECT_EQ(configured_threads(), 3);
  ::setenv("RELCRAWL_THREADS", "zero", 1);
  EXPECT_GE(configured_threads(), 1);
  ::unsetenv("RELCRAWL_THREADS");
  EXPECT_GE(configured_threads(), 1);
}

TEST(Parallel, JacobianOfLinearMap) {
  Eigen::MatrixXd a(3, 4);
  a << 1, 2, 3, 4, -1, 0, 2, 5, 0.5, 0.25, 0, 1;
  const auto f = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a * x; };
  Eigen::VectorXd x(4);
  x << 0.1, 10.0, -3.0, 0.0;
  const Eigen::MatrixXd jac = fd_jacobian(f, x, f(x), ExecPolicy::openmp);
  EXPECT_LE((jac - a).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Parallel, PeriodMapJacobianBitwiseIdentical) {
  const auto params = CrawlerParams::baseline_2d();
  RestLengthSchedule sched;
  sched.epsilon = 0.5;
  const StroboscopicMap<2> map(Crawler2D(params), sched);
  const Eigen::VectorXd x = equilibrium_section_2d(params);
  const Eigen::VectorXd fx = map(x);
  const auto f = [&](const Eigen::VectorXd& y) { return map(y); };
  const Eigen::MatrixXd serial = fd_jacobian(f, x, fx, ExecPolicy::serial);
  const Eigen::MatrixXd threaded = fd_jacobian(f, x, fx, ExecPolicy::openmp);
  EXPECT_TRUE((serial.array() == threaded.array()).all());
}

TEST(Parallel, SweepIdenticalAcrossPolicies) {
  const Crawler2D model(CrawlerParams::baseline_2d());
  const RestLengthSchedule sched;
  CycleOptions serial, threaded;
  serial.policy = ExecPolicy::serial;
  threaded.policy = ExecPolicy::openmp;
  const std::vector<double> eps{0.5, 0.25, 0.125};
  const ScalingStudy a = scaling_study(model, sched, eps, serial);
  const ScalingStudy b = scaling_study(model, sched, eps, threaded);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].delta_x, b.rows[i].delta_x);
    EXPECT_EQ(a.rows[i].residual, b.rows[i].residual);
  }
}
