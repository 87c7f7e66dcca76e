#include "relcrawl/se2.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace relcrawl {

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::remainder(a, two_pi);  // [-pi, pi]
  if (w <= -std::numbers::pi) w += two_pi;
  return w;
}

Eigen::Matrix2d rotation(double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

Eigen::Vector2d se2_apply(const SE2Element& g, const Eigen::Vector2d& p) {
  return rotation(g.phi) * p + Eigen::Vector2d(g.x, g.y);
}

SE2Element se2_compose(const SE2Element& a, const SE2Element& b) {
  const Eigen::Vector2d t = se2_apply(a, Eigen::Vector2d(b.x, b.y));
  return {wrap_angle(a.phi + b.phi), t.x(), t.y()};
}

SE2Element se2_inverse(const SE2Element& a) {
  const Eigen::Vector2d t = -(rotation(-a.phi) * Eigen::Vector2d(a.x, a.y));
  return {wrap_angle(-a.phi), t.x(), t.y()};
}

SE2Element se2_exp(const Se2Velocity& xi, double t) {
  const double th = xi.omega * t;
  Eigen::Vector2d p;
  if (std::abs(th) < 1e-8) {
    // Series of sin(th)/th and (1 - cos(th))/th.
    const double a = 1.0 - th * th / 6.0, b = 0.5 * th;
    p << t * (a * xi.xi_x - b * xi.xi_y), t * (b * xi.xi_x + a * xi.xi_y);
  } else {
    const double s = std::sin(th), c = 1.0 - std::cos(th);
    p << (s * xi.xi_x - c * xi.xi_y) / xi.omega, (c * xi.xi_x + s * xi.xi_y) / xi.omega;
  }
  return {wrap_angle(th), p.x(), p.y()};
}

double se2_distance(const SE2Element& a, const SE2Element& b) {
  return std::max({std::abs(wrap_angle(a.phi - b.phi)), std::abs(a.x - b.x), std::abs(a.y - b.y)});
}

}  // namespace relcrawl
