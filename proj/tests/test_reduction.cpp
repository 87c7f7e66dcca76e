#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "relcrawl/equilibrium.hpp"
#include "relcrawl/errors.hpp"
#include "relcrawl/integrate.hpp"
#include "relcrawl/reduction.hpp"

using namespace relcrawl;

namespace {

const double kS3 = std::sqrt(3.0) / 2.0;

PhaseState random_state_2d(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  std::normal_distribution<double> n;
  Eigen::VectorXd q(6), v(6);
  q << u(rng), u(rng) - 0.05, 1 + u(rng), u(rng) - 0.05, 0.5 + u(rng), 0.8 + u(rng);
  for (int i = 0; i < 6; ++i) v[i] = n(rng);
  return {q, v, 0.0};
}

PhaseState random_state_3d(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.15, 0.15);
  std::normal_distribution<double> n;
  Eigen::VectorXd q(12), v(12);
  q << u(rng), u(rng), u(rng) - 0.05, 1 + u(rng), u(rng), u(rng) - 0.05, 0.5 + u(rng),
      0.85 + u(rng), u(rng) - 0.05, 0.5 + u(rng), 0.3 + u(rng), 0.8 + u(rng);
  for (int i = 0; i < 12; ++i) v[i] = n(rng);
  return {q, v, 0.0};
}

double se2_gap(const SE2Element& g, const Eigen::Vector3d& h) {
  return std::max({std::abs(std::remainder(g.phi - h[0], 2 * std::numbers::pi)), std::abs(g.x - h[1]),
                   std::abs(g.y - h[2])});
}

}  // namespace

TEST(Reduction, TranslationActionLaws) {
  std::mt19937_64 rng(1);
  const PhaseState s = random_state_2d(rng);
  EXPECT_EQ((act_r(0.0, s).q - s.q).norm(), 0.0);
  const PhaseState a = act_r(0.3, act_r(-1.1, s));
  const PhaseState b = act_r(-0.8, s);
  EXPECT_LE((a.q - b.q).norm(), 1e-15);
  EXPECT_EQ((a.u - s.u).norm(), 0.0);
}

TEST(Reduction, PlanarActionLaws) {
  std::mt19937_64 rng(2);
  const PhaseState s = random_state_3d(rng);
  EXPECT_LE((act_se2({}, s).q - s.q).norm(), 0.0);
  const SE2Element g{0.7, 1.0, -2.0}, h{-2.1, 0.3, 0.4};
  const PhaseState a = act_se2(g, act_se2(h, s));
  const PhaseState b = act_se2(se2_compose(g, h), s);
  EXPECT_LE((a.q - b.q).norm(), 1e-13);
  EXPECT_LE((a.u - b.u).norm(), 1e-13);
  // Heights and vertical velocities are invariant.
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(a.q[3 * i + 2], s.q[3 * i + 2]);
    EXPECT_EQ(a.u[3 * i + 2], s.u[3 * i + 2]);
  }
}

TEST(Reduction, GroupIdentities) {
  const SE2Element g{2.5, 1.0, -3.0};
  const SE2Element e = se2_compose(g, se2_inverse(g));
  EXPECT_LE(se2_distance(e, SE2Element{}), 1e-15);
  EXPECT_LE(se2_distance(se2_compose(se2_inverse(g), g), SE2Element{}), 1e-15);
  EXPECT_NEAR(wrap_angle(3 * std::numbers::pi), std::numbers::pi, 1e-15);
  EXPECT_NEAR(wrap_angle(-std::numbers::pi), std::numbers::pi, 1e-15);
}

TEST(Reduction, Mass3HeightExamples) {
  EXPECT_NEAR(mass3_height(0.0, 0.0, 1.0, 1.0, 1.0), kS3, 1e-15);
  EXPECT_NEAR(mass3_height(0.0, 0.0, 4.0, 3.0, 5.0), 2.4, 1e-14);
  EXPECT_NEAR(mass3_height(0.1, 0.1, 1.0, 1.0, 1.0), kS3 + 0.1, 1e-15);
  EXPECT_THROW(mass3_height(0.0, 2.0, 1.0, 1.0, 1.0), ChartDomain);
  EXPECT_THROW(mass3_height(0.0, 0.0, 1.0, 1.0, 3.0), ChartDomain);
}

TEST(Reduction, ProjectLiftRoundTrip2D) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 100; ++k) {
    const PhaseState s = random_state_2d(rng);
    const Projection2D p = project_2d(s);
    EXPECT_LE((lift_2d(p.point, p.fiber) - s.q).norm(), 1e-12);
    EXPECT_EQ(p.fiber, s.q[4]);
    // Invariance along the group orbit.
    const Projection2D p2 = project_2d(act_r(3.7, s));
    EXPECT_LE((p2.point.vec() - p.point.vec()).norm(), 1e-14);
    EXPECT_LE((p2.velocity - p.velocity).norm(), 1e-14);
  }
}

TEST(Reduction, ProjectRejectsOffChart) {
  Eigen::VectorXd q(6);
  q << 1, 0, 0, 0, 0.5, 1;  // mass 2 left of mass 1
  EXPECT_THROW(project_2d({q, Eigen::VectorXd::Zero(6), 0.0}), ChartDomain);
  q << 0, 0, 1, 0, 0.5, -1;  // mass 3 below the base
  EXPECT_THROW(project_2d({q, Eigen::VectorXd::Zero(6), 0.0}), ChartDomain);
}

TEST(Reduction, SectionRoundTrip2D) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 50; ++k) {
    const PhaseState s = random_state_2d(rng);
    const SectionState sec = to_section_2d(s);
    ASSERT_EQ(sec.reduced.size(), kReducedSize2D);
    const PhaseState back = from_section_2d(sec.reduced, sec.fiber[0]);
    EXPECT_LE((back.q - s.q).norm(), 1e-14);
    EXPECT_EQ((back.u - s.u).norm(), 0.0);
  }
}

TEST(Reduction, SectionMapsAreInverse) {
  const Eigen::MatrixXd p = section_projection_2d(), r = section_embedding_2d();
  EXPECT_LE((p * r - Eigen::MatrixXd::Identity(5, 5)).norm(), 0.0);
  Eigen::VectorXd e(6);
  e << 1, 0, 1, 0, 1, 0;
  EXPECT_EQ((p * e).norm(), 0.0);

  std::mt19937_64 rng(5);
  const SectionState sec = to_section_3d(random_state_3d(rng));
  const PhaseState s = from_section_3d(sec.reduced, SE2Element{});
  const Eigen::MatrixXd p3 = section_projection_3d(s.q), r3 = section_embedding_3d();
  EXPECT_LE((p3 * r3 - Eigen::MatrixXd::Identity(9, 9)).norm(), 1e-12);
}

TEST(Reduction, ReducedVectorFieldMatchesFull2D) {
  const Crawler2D m(CrawlerParams::baseline_2d());
  RestLengthSchedule sched;
  sched.epsilon = 0.5;
  const Rhs reduced = reduced_rhs_2d(m, sched);
  std::mt19937_64 rng(6);
  for (int k = 0; k < 50; ++k) {
    const PhaseState s = random_state_2d(rng);
    const double t = 0.13 * k;
    const SectionState sec = to_section_2d(s);
    Eigen::VectorXd y(12), dy(12);
    y << sec.reduced, sec.fiber;
    reduced(t, y, dy);
    // Push the full field forward along the section.
    const PhaseState f = m.eom_rhs({s.q, s.u, t}, sched);
    Eigen::VectorXd expect(12);
    expect << section_projection_2d() * f.q, f.u, f.q[4];
    EXPECT_LE((dy - expect).norm(), 1e-8 * std::max(1.0, expect.norm()));
  }
}

TEST(Reduction, ReducedVectorFieldMatchesFull3D) {
  const Crawler3D m(CrawlerParams::tetrad_3d());
  RestLengthSchedule sched = RestLengthSchedule::constant(std::vector<double>(6, 1.0));
  const Rhs reduced = reduced_rhs_3d(m, sched);
  std::mt19937_64 rng(7);
  auto section_of = [](const Eigen::VectorXd& x) {
    const SectionState sec = to_section_3d(unpack(x, 0.0));
    Eigen::VectorXd y(24);
    y << sec.reduced, sec.fiber;
    return y;
  };
  // Push the full field forward by a directional difference of the section map.
  const double h = 1e-6;
  for (int k = 0; k < 50; ++k) {
    PhaseState s = random_state_3d(rng);
    s = act_se2(SE2Element{0.1 * k - 2.5, 0.3, -0.2}, s);
    const Eigen::VectorXd x = pack(s);
    Eigen::VectorXd f(24);
    m.rhs(0.0, x, f, sched);
    const Eigen::VectorXd push = (section_of(x + h * f) - section_of(x - h * f)) / (2 * h);
    Eigen::VectorXd dy(24);
    reduced(0.0, section_of(x), dy);
    EXPECT_LE((dy - push).cwiseAbs().maxCoeff(), 1e-8 * std::max(1.0, push.norm())) << k;
  }
}

TEST(Reduction, SectionRoundTrip3D) {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 50; ++k) {
    const PhaseState s = random_state_3d(rng);
    const SectionState sec = to_section_3d(s);
    ASSERT_EQ(sec.reduced.size(), kReducedSize3D);
    const PhaseState back =
        from_section_3d(sec.reduced, SE2Element{sec.fiber[0], sec.fiber[1], sec.fiber[2]});
    EXPECT_LE((back.q - s.q).norm(), 1e-13);
    EXPECT_LE((back.u - s.u).norm(), 1e-13);
  }
}

TEST(Reduction, PlanarActionIsFree) {
  std::mt19937_64 rng(9);
  const PhaseState s = random_state_3d(rng);
  const SectionState a = to_section_3d(s);
  const SE2Element g{1.2, -0.5, 2.0};
  const SectionState b = to_section_3d(act_se2(g, s));
  EXPECT_LE((a.reduced - b.reduced).norm(), 1e-12);
  // The fiber moves by exactly g.
  const SE2Element fa{a.fiber[0], a.fiber[1], a.fiber[2]};
  const SE2Element fb{b.fiber[0], b.fiber[1], b.fiber[2]};
  EXPECT_LE(se2_distance(se2_compose(g, fa), fb), 1e-12);
}

TEST(Reduction, ProjectLiftRoundTrip3D) {
  std::mt19937_64 rng(10);
  for (int k = 0; k < 50; ++k) {
    const PhaseState s = random_state_3d(rng);
    const ReducedPoint3D rp = project_3d(s.q);
    const SectionState sec = to_section_3d(s);
    const auto q = lift_3d(rp, SE2Element{sec.fiber[0], sec.fiber[1], sec.fiber[2]});
    EXPECT_LE((q - s.q).norm(), 1e-11);
  }
  ReducedPoint3D regular;
  EXPECT_NEAR(mass4_height(regular.l, regular.z), std::sqrt(2.0 / 3.0), 1e-14);
}

TEST(Reduction, SimpsonQuadrature) {
  const std::vector<double> ones(65, 2.0);
  EXPECT_NEAR(reconstruct_shift_2d(ones, 1.5), 3.0, 1e-15);
  std::vector<double> s(129);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double t = std::numbers::pi * i / 128.0;
    s[i] = std::sin(t);
  }
  EXPECT_NEAR(reconstruct_shift_2d(s, std::numbers::pi), 2.0, 1e-7);
  const std::vector<double> even(4, 1.0);
  EXPECT_THROW(reconstruct_shift_2d(even, 1.0), ConfigError);
  EXPECT_EQ(reconstruct_shift_2d(1.5, 2.25), 0.75);
}

TEST(Reduction, PlanarReconstructionClosedForms) {
  const SE2Element trans = reconstruct_shift_3d([](double) { return Se2Velocity{0.0, 1.0, 0.0}; }, 1.0);
  EXPECT_LE(se2_gap(trans, {0.0, 1.0, 0.0}), 1e-12);
  const SE2Element rot = reconstruct_shift_3d([](double) { return Se2Velocity{1.0, 0.0, 0.0}; }, 1.0);
  EXPECT_LE(se2_gap(rot, {1.0, 0.0, 0.0}), 1e-12);

  IntegratorConfig cfg;
  cfg.rtol = 1e-12;
  cfg.atol = 1e-14;
  for (const auto& v : {Se2Velocity{0.7, 1.0, -0.3}, Se2Velocity{-2.0, 0.2, 0.5},
                        Se2Velocity{5.0, 1.0, 1.0}}) {
    const SE2Element g = reconstruct_shift_3d([v](double) { return v; }, 1.3, cfg);
    EXPECT_LE(se2_gap(g, oracle::se2_exp_center(v.omega, v.xi_x, v.xi_y, 1.3)), 1e-10);
    const SE2Element e = se2_exp(v, 1.3);
    EXPECT_LE(se2_distance(g, e), 1e-10);
  }
}

TEST(Reduction, ReconstructionComposesOverPeriods) {
  // A time-periodic body velocity: two periods compose g(T) with itself.
  const auto xi = [](double t) {
    return Se2Velocity{0.5 + std::cos(2 * std::numbers::pi * t), 1.0, std::sin(2 * std::numbers::pi * t)};
  };
  IntegratorConfig cfg;
  cfg.rtol = 1e-12;
  cfg.atol = 1e-14;
  const SE2Element one = reconstruct_shift_3d(xi, 1.0, cfg);
  const SE2Element two = reconstruct_shift_3d(xi, 2.0, cfg);
  EXPECT_GT(se2_distance(one, SE2Element{}), 0.1);
  EXPECT_LE(se2_distance(two, se2_compose(one, one)), 1e-10);
}

TEST(Reduction, EquilibriumConfigurationIsOnChart) {
  const auto rp = homotopy_equilibrium(CrawlerParams::baseline_2d());
  const Eigen::VectorXd q = equilibrium_configuration(rp);
  EXPECT_EQ(q[0], 0.0);
  const Projection2D p = project_2d({q, Eigen::VectorXd::Zero(6), 0.0});
  EXPECT_LE((p.point.vec() - rp.vec()).norm(), 1e-13);
}
