#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "relcrawl/errors.hpp"
#include "relcrawl/integrate.hpp"
#include "relcrawl/jet.hpp"
#include "relcrawl/model.hpp"
#include "relcrawl/se2.hpp"

namespace relcrawl {

// ---------------------------------------------------------------------------
// Group actions.

/// Translates every particle by g along x; velocities are unchanged.
PhaseState act_r(double g, const PhaseState& state);

/// Rotates and translates the planar part of a 3D state.
PhaseState act_se2(const SE2Element& g, const PhaseState& state);

// ---------------------------------------------------------------------------
// Quotient chart (z1, z2, l1, l2, l3) of Q/R for the 2D crawler, valid on the
// branch where mass 1 is left of mass 2 and mass 3 sits on the upper side.

struct ReducedPoint2D {
  double z1 = 0.0, z2 = 0.0;
  double l1 = 1.0, l2 = 1.0, l3 = 1.0;

  Eigen::Matrix<double, 5, 1> vec() const;
  static ReducedPoint2D from_vec(const Eigen::Matrix<double, 5, 1>& v);
};

/// Horizontal position of mass 3 relative to mass 1 and its height, for the
/// triangle with base endpoints at heights z1, z2.
template <class S>
std::array<S, 2> mass3_offset(const S& z1, const S& z2, const S& l1, const S& l2, const S& l3) {
  using std::sqrt;
  const S dz = z2 - z1;
  const S gap2 = l3 * l3 - dz * dz;
  const S along = (l2 * l2 - l1 * l1 + l3 * l3) / (2.0 * l3);
  const S perp2 = l2 * l2 - along * along;
  if (!(value_of(gap2) > 0.0) || !(value_of(perp2) > 0.0) || !(value_of(l3) > 0.0))
    throw ChartDomain("lengths and heights outside the chart domain");
  const S gap = sqrt(gap2);
  const S perp = sqrt(perp2);
  return {(along * gap - perp * dz) / l3, z1 + (along * dz + perp * gap) / l3};
}

template <class S>
S mass3_height(const S& z1, const S& z2, const S& l1, const S& l2, const S& l3) {
  return mass3_offset(z1, z2, l1, l2, l3)[1];
}

struct Projection2D {
  ReducedPoint2D point;
  /// (v_z1, v_z2, v_l1, v_l2, v_l3, v3): chart velocities plus the retained
  /// horizontal velocity of mass 3.
  Eigen::Matrix<double, 6, 1> velocity;
  double fiber = 0.0;  // x3
};

Projection2D project_2d(const PhaseState& state);
/// Configuration with x3 = fiber. Throws ChartDomain off the chart.
Eigen::Matrix<double, 6, 1> lift_2d(const ReducedPoint2D& rp, double fiber);

// ---------------------------------------------------------------------------
// Quotient chart (l1..l6, z1, z2, z3) of Q/SE(2) for the 3D crawler.

struct ReducedPoint3D {
  std::array<double, 6> l{1, 1, 1, 1, 1, 1};
  std::array<double, 3> z{0, 0, 0};

  Eigen::Matrix<double, 9, 1> vec() const;
  static ReducedPoint3D from_vec(const Eigen::Matrix<double, 9, 1>& v);
};

/// Body-frame positions of the four masses: mass 1 above the origin, mass 2
/// on the positive x axis, mass 3 at y > 0, mass 4 on the upper side of the
/// base triangle.
template <class S>
std::array<S, 12> tetrad_body_positions(const std::array<S, 6>& l, const std::array<S, 3>& z) {
  using std::sqrt;
  const S d12z = z[1] - z[0];
  const S h12sq = l[0] * l[0] - d12z * d12z;
  if (!(value_of(h12sq) > 0.0)) throw ChartDomain("base edge shorter than its height gap");
  const S h12 = sqrt(h12sq);
  const S r13sq = l[1] * l[1] - (z[2] - z[0]) * (z[2] - z[0]);
  const S r23sq = l[3] * l[3] - (z[2] - z[1]) * (z[2] - z[1]);
  const S x3 = (r13sq - r23sq + h12 * h12) / (2.0 * h12);
  const S y3sq = r13sq - x3 * x3;
  if (!(value_of(y3sq) > 0.0)) throw ChartDomain("base triangle degenerate");
  const S y3 = sqrt(y3sq);

  // Trilateration of mass 4 in the frame spanned by the base triangle.
  const std::array<S, 3> p2{h12, S(0.0), d12z};
  const std::array<S, 3> p3{x3, y3, z[2] - z[0]};
  auto dot = [](const std::array<S, 3>& a, const std::array<S, 3>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
  };
  const S d = sqrt(dot(p2, p2));
  const std::array<S, 3> ex{p2[0] / d, p2[1] / d, p2[2] / d};
  const S i = dot(ex, p3);
  std::array<S, 3> ey{p3[0] - i * ex[0], p3[1] - i * ex[1], p3[2] - i * ex[2]};
  const S ny = sqrt(dot(ey, ey));
  for (auto& c : ey) c = c / ny;
  const std::array<S, 3> ez{ex[1] * ey[2] - ex[2] * ey[1], ex[2] * ey[0] - ex[0] * ey[2],
                            ex[0] * ey[1] - ex[1] * ey[0]};
  const S j = dot(ey, p3);
  const S r1 = l[2], r2 = l[4], r3 = l[5];
  const S X = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
  const S Y = (r1 * r1 - r3 * r3 + i * i + j * j) / (2.0 * j) - (i / j) * X;
  const S Zsq = r1 * r1 - X * X - Y * Y;
  if (!(value_of(Zsq) > 0.0)) throw ChartDomain("tetrad degenerate");
  const S Z = sqrt(Zsq);
  std::array<S, 12> q;
  q[0] = S(0.0), q[1] = S(0.0), q[2] = z[0];
  q[3] = h12, q[4] = S(0.0), q[5] = z[1];
  q[6] = x3, q[7] = y3, q[8] = z[2];
  for (int c = 0; c < 3; ++c) q[9 + c] = X * ex[c] + Y * ey[c] + Z * ez[c];
  q[11] = q[11] + z[0];
  return q;
}

template <class S>
S mass4_height(const std::array<S, 6>& l, const std::array<S, 3>& z) {
  return tetrad_body_positions(l, z)[11];
}

/// Configuration with the body frame placed by g.
Eigen::Matrix<double, 12, 1> lift_3d(const ReducedPoint3D& rp, const SE2Element& g);
ReducedPoint3D project_3d(const Eigen::Matrix<double, 12, 1>& q);

// ---------------------------------------------------------------------------
// Global sections used for the reduced dynamics.
//
// 2D: reduced state (x1 - x3, z1, x2 - x3, z2, z3, u1..u6), fiber x3.
// 3D: reduced state (z1, b2x, z2, b3x, b3y, z3, b4x, b4y, z4, w1..w12) where b
//     are body-frame planar positions (mass 1 at the origin, mass 2 on the x
//     axis) and w the body-frame velocities; fiber g = (theta, x1, y1).

inline constexpr int kReducedSize2D = 11;
inline constexpr int kReducedSize3D = 21;

struct SectionState {
  Eigen::VectorXd reduced;
  Eigen::VectorXd fiber;  // (x3) in 2D, (theta, x1, y1) in 3D
};

SectionState to_section_2d(const PhaseState& state);
PhaseState from_section_2d(const Eigen::VectorXd& reduced, double x3, double t = 0.0);
SectionState to_section_3d(const PhaseState& state);
PhaseState from_section_3d(const Eigen::VectorXd& reduced, const SE2Element& g, double t = 0.0);

/// Linear maps between configuration coordinates and section coordinates:
/// projection P (tangent of the quotient map at q) and the right inverse R
/// (embedding of the section), P R = I.
Eigen::MatrixXd section_projection_2d();
Eigen::MatrixXd section_embedding_2d();
Eigen::MatrixXd section_projection_3d(const Eigen::VectorXd& q);
Eigen::MatrixXd section_embedding_3d();

/// Left-trivialized group velocity of a 3D reduced state.
Se2Velocity body_velocity_3d(const Eigen::VectorXd& reduced);

/// Reduced vector field with the fiber appended: the state is
/// (reduced, fiber) and the fiber never feeds back into the reduced part.
Rhs reduced_rhs_2d(const Crawler2D& model, const RestLengthSchedule& schedule);
Rhs reduced_rhs_3d(const Crawler3D& model, const RestLengthSchedule& schedule);

// ---------------------------------------------------------------------------
// Reconstruction.

/// Delta x from the fiber values at both ends of a period.
inline double reconstruct_shift_2d(double x3_begin, double x3_end) { return x3_end - x3_begin; }
/// Delta x by composite Simpson quadrature of uniform v3 samples over [0, T]
/// (an odd number of samples including both endpoints).
double reconstruct_shift_2d(std::span<const double> v3_samples, double period);
/// Delta x by quadrature of v3 along a dense trajectory; v3_index selects the
/// component holding v3.
double reconstruct_shift_2d(const Trajectory& traj, int v3_index);

/// Solves g' = g * xi(t), g(0) = e over [0, T] and returns g(T).
SE2Element reconstruct_shift_3d(const std::function<Se2Velocity(double)>& xi, double period,
                                const IntegratorConfig& config = {});

}  // namespace relcrawl
