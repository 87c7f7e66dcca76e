#pragma once

#include <array>
#include <span>

#include <Eigen/Core>

#include "relcrawl/jet.hpp"
#include "relcrawl/params.hpp"
#include "relcrawl/smoothing.hpp"

namespace relcrawl {

/// Full unreduced state. Coordinates are mass-major with the vertical
/// component last: (x1, z1, x2, z2, x3, z3) in 2D, (x1, y1, z1, ...) in 3D.
struct PhaseState {
  Eigen::VectorXd q;
  Eigen::VectorXd u;
  double t = 0.0;
};

Eigen::VectorXd pack(const PhaseState& s);
PhaseState unpack(const Eigen::VectorXd& y, double t);

template <int Dim>
struct Layout {
  static constexpr int kDim = Dim;
  static constexpr int kMasses = Dim + 1;
  static constexpr int kSprings = kMasses * (kMasses - 1) / 2;
  static constexpr int kCoords = Dim * kMasses;
  static constexpr int kState = 2 * kCoords;
};

/// Mass index pairs of each spring (zero based). In 2D spring k is opposite
/// mass k; in 3D the pairs are in lexicographic order.
template <int Dim>
constexpr std::array<std::array<int, 2>, Layout<Dim>::kSprings> spring_pairs() {
  if constexpr (Dim == 2) {
    return {{{1, 2}, {0, 2}, {0, 1}}};
  } else {
    return {{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
  }
}

/// Energies, dissipative forces and the equations of motion of the
/// regularized crawler with Dim + 1 unit masses.
template <int Dim>
class CrawlerModel {
 public:
  using L = Layout<Dim>;
  static constexpr int kCoords = L::kCoords;
  static constexpr int kSprings = L::kSprings;
  using Coords = Eigen::Matrix<double, kCoords, 1>;
  using Lengths = Eigen::Matrix<double, kSprings, 1>;
  using Matrix = Eigen::Matrix<double, kCoords, kCoords>;

  explicit CrawlerModel(CrawlerParams params);

  const CrawlerParams& params() const { return params_; }
  std::span<const double> base_rest() const { return params_.rest_lengths; }

  Lengths spring_lengths(const Coords& q) const;

  double shape_potential(const Coords& q, std::span<const double> rest) const;
  double ground_potential(const Coords& q) const;
  double gravity_potential(const Coords& q) const;
  double total_potential(const Coords& q, std::span<const double> rest) const;
  double total_potential(const Coords& q) const { return total_potential(q, base_rest()); }

  /// dU as a covector in the standard basis.
  Coords potential_gradient(const Coords& q, std::span<const double> rest) const;
  /// Hessian of U, exact up to rounding (forward-mode second derivatives).
  Matrix potential_hessian(const Coords& q, std::span<const double> rest) const;

  Coords shape_damping_force(const Coords& q, const Coords& u) const;
  Coords noslip_force(const Coords& q, const Coords& u) const;
  Coords debounce_force(const Coords& q, const Coords& u) const;
  Coords viscous_force(const Coords& q, const Coords& u) const;

  double rayleigh_value(const Coords& q, const Coords& u) const;
  /// nu(q) with R(q, u) = u^T nu(q) u / 2.
  Matrix rayleigh_matrix(const Coords& q) const;
  Matrix rayleigh_shape_matrix(const Coords& q) const;
  Matrix rayleigh_noslip_matrix(const Coords& q) const;
  Matrix rayleigh_debounce_matrix(const Coords& q) const;

  /// qddot = F(q, u) - dU(q) with the given rest lengths.
  Coords acceleration(const Coords& q, const Coords& u, std::span<const double> rest) const;

  /// Phase velocity (u, qddot) with rest lengths taken from the schedule.
  PhaseState eom_rhs(const PhaseState& state, const RestLengthSchedule& schedule) const;
  /// Same, on a packed state y = (q, u); writes (u, qddot) into dydt.
  void rhs(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt,
           const RestLengthSchedule& schedule) const;

  double total_energy(const PhaseState& state, std::span<const double> rest) const;

  /// Weight multiplying nu_ns * xdot in the no-slip force, per mass height.
  double noslip_weight(double z) const;
  double debounce_weight(double z) const;

  /// Potential energy templated on the scalar (double or Jet).
  template <class S>
  S potential_t(const std::array<S, kCoords>& q, std::span<const double> rest) const;

 private:
  void check_distances(const Coords& q) const;

  CrawlerParams params_;
};

using Crawler2D = CrawlerModel<2>;
using Crawler3D = CrawlerModel<3>;

template <int Dim>
template <class S>
S CrawlerModel<Dim>::potential_t(const std::array<S, kCoords>& q,
                                 std::span<const double> rest) const {
  constexpr auto pairs = spring_pairs<Dim>();
  S shape(0.0);
  for (int k = 0; k < kSprings; ++k) {
    const int i = pairs[k][0], j = pairs[k][1];
    S d2(0.0);
    for (int c = 0; c < Dim; ++c) {
      const S d = q[Dim * i + c] - q[Dim * j + c];
      d2 += d * d;
    }
    using std::sqrt;
    const S len = sqrt(d2);
    const S stretch = len - rest[k];
    shape += stretch * stretch;
  }
  S ground(0.0), grav(0.0);
  for (int i = 0; i < L::kMasses; ++i) {
    const S& z = q[Dim * i + Dim - 1];
    ground += chi(z, params_.profile);
    grav += z;
  }
  return shape * (0.5 * params_.kappa_s) + ground * params_.kappa_np + grav * params_.gravity;
}

extern template class CrawlerModel<2>;
extern template class CrawlerModel<3>;

}  // namespace relcrawl
