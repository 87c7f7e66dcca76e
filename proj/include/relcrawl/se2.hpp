#pragma once

#include <Eigen/Core>

namespace relcrawl {

/// Planar isometry: rotation by phi followed by translation (x, y).
struct SE2Element {
  double phi = 0.0;  // wrapped to (-pi, pi]
  double x = 0.0;
  double y = 0.0;
};

/// Left-trivialized velocity on SE(2): angular rate and body-frame
/// translational rates.
struct Se2Velocity {
  double omega = 0.0;
  double xi_x = 0.0;
  double xi_y = 0.0;
};

double wrap_angle(double a);

SE2Element se2_compose(const SE2Element& a, const SE2Element& b);
SE2Element se2_inverse(const SE2Element& a);
Eigen::Vector2d se2_apply(const SE2Element& g, const Eigen::Vector2d& p);
Eigen::Matrix2d rotation(double phi);

/// exp(t * xi) for constant xi, i.e. the solution of g' = g * xi, g(0) = e.
SE2Element se2_exp(const Se2Velocity& xi, double t);

/// Max of the angle difference (wrapped) and the translation difference.
double se2_distance(const SE2Element& a, const SE2Element& b);

}  // namespace relcrawl
