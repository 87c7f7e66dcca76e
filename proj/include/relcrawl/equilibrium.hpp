#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "relcrawl/model.hpp"
#include "relcrawl/reduction.hpp"

namespace relcrawl {

inline constexpr double kTolGrad = 1e-10;
inline constexpr double kTolEig = 1e-10;

/// Reduced potential on the chart (z1, z2, l1, l2, l3): springs, gravity of
/// all three masses and ground contact. Mass 3 contributes a ground term too,
/// which vanishes on the branch where it stands above the ground.
template <class S>
S reduced_potential_t(const std::array<S, 5>& x, const CrawlerParams& p,
                      std::span<const double> rest) {
  const S z3 = mass3_height(x[0], x[1], x[2], x[3], x[4]);
  S springs(0.0);
  for (int k = 0; k < 3; ++k) springs += (x[2 + k] - rest[k]) * (x[2 + k] - rest[k]);
  const S ground = chi(x[0], p.profile) + chi(x[1], p.profile) + chi(z3, p.profile);
  return springs * (0.5 * p.kappa_s) + (x[0] + x[1] + z3) * p.gravity + ground * p.kappa_np;
}

/// 3D analogue on the chart (l1..l6, z1, z2, z3).
template <class S>
S reduced_potential_t(const std::array<S, 9>& x, const CrawlerParams& p,
                      std::span<const double> rest) {
  const std::array<S, 6> l{x[0], x[1], x[2], x[3], x[4], x[5]};
  const std::array<S, 3> z{x[6], x[7], x[8]};
  const S z4 = mass4_height(l, z);
  S springs(0.0);
  for (int k = 0; k < 6; ++k) springs += (l[k] - rest[k]) * (l[k] - rest[k]);
  S ground = chi(z4, p.profile);
  for (const S& zi : z) ground += chi(zi, p.profile);
  return springs * (0.5 * p.kappa_s) + (z[0] + z[1] + z[2] + z4) * p.gravity +
         ground * p.kappa_np;
}

double reduced_potential(const ReducedPoint2D& rp, const CrawlerParams& params);
Eigen::Matrix<double, 5, 1> reduced_gradient(const ReducedPoint2D& rp, const CrawlerParams& params);
Eigen::Matrix<double, 5, 5> reduced_hessian(const ReducedPoint2D& rp, const CrawlerParams& params);

double reduced_potential(const ReducedPoint3D& rp, const CrawlerParams& params);
Eigen::Matrix<double, 9, 1> reduced_gradient(const ReducedPoint3D& rp, const CrawlerParams& params);
Eigen::Matrix<double, 9, 9> reduced_hessian(const ReducedPoint3D& rp, const CrawlerParams& params);

/// Minimizer of the reduced potential by continuation from the rigid-spring
/// limit: solve the per-mass contact equations with l = rest, then continue
/// the spring compliance from 0 to 1/kappa_s with Newton corrections.
/// Throws ContinuationFailed, AssumptionViolated (Hessian not PD, top mass
/// not above ground) or ChartDomain.
ReducedPoint2D homotopy_equilibrium(const CrawlerParams& params);
ReducedPoint3D homotopy_equilibrium_3d(const CrawlerParams& params);

/// Equilibrium configuration with mass 1 above the origin (and, in 3D, mass 2
/// on the positive x axis).
Eigen::VectorXd equilibrium_configuration(const ReducedPoint2D& rp);
Eigen::VectorXd equilibrium_configuration(const ReducedPoint3D& rp);

struct RayleighKernels {
  Eigen::MatrixXd debounce;  // orthonormal basis columns
  Eigen::MatrixXd noslip;
  Eigen::MatrixXd shape;
  int dim_contact = 0;  // dim(ker debounce ∩ ker noslip)
  int dim_all = 0;      // dim of the triple intersection
};

/// Null spaces of the three PSD blocks of nu(q) and their intersections.
template <int Dim>
RayleighKernels rayleigh_kernels(const CrawlerModel<Dim>& model,
                                 const typename CrawlerModel<Dim>::Coords& q);

struct RayleighCertificate {
  Eigen::VectorXd eigenvalues;  // ascending
  double min_eigenvalue = 0.0;
  bool positive_definite = false;
};

/// Eigenvalues of nu(q) on the velocity fiber (all velocity components).
template <int Dim>
RayleighCertificate certify_rayleigh(const CrawlerModel<Dim>& model,
                                     const typename CrawlerModel<Dim>::Coords& q);

/// [[0, P], [-K R, -nu]] for the projection P onto section coordinates and
/// its right inverse R.
Eigen::MatrixXd reduced_linearization(const Eigen::MatrixXd& stiffness, const Eigen::MatrixXd& damping,
                                      const Eigen::MatrixXd& projection,
                                      const Eigen::MatrixXd& embedding);
/// [[0, I], [-K, -nu]].
Eigen::MatrixXd unreduced_linearization(const Eigen::MatrixXd& stiffness,
                                        const Eigen::MatrixXd& damping);

/// 11 x 11 reduced linearization about a 2D equilibrium configuration.
/// Throws AssumptionViolated unless ker K is exactly the x-translation line.
Eigen::MatrixXd reduced_linearization_2d(const Crawler2D& model, const Eigen::VectorXd& q);
/// 21 x 21 reduced linearization about a 3D equilibrium on the section.
Eigen::MatrixXd reduced_linearization_3d(const Crawler3D& model, const Eigen::VectorXd& q);

double spectral_abscissa(const Eigen::VectorXcd& spectrum);

enum class Verdict { robustly_stable, marginal, unstable, indefinite_inputs };
enum class FailureKind { none, assumption, numerical };

std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

struct StabilityReport {
  int dim = 2;
  Eigen::VectorXd reduced_equilibrium;  // chart coordinates (5 or 9)
  Eigen::VectorXd configuration;        // lifted equilibrium positions
  double gradient_norm = 0.0;
  Eigen::VectorXd hessian_eigenvalues;
  Eigen::VectorXd rayleigh_eigenvalues;
  Eigen::VectorXcd linearization_spectrum;
  double spectral_abscissa = 0.0;
  Verdict verdict = Verdict::indefinite_inputs;
  FailureKind failure = FailureKind::none;
  std::string diagnostic;
};

/// Marginal band for the spectral abscissa.
inline constexpr double kTolAbscissa = 1e-9;

/// Full certification pipeline; failures are reported in the verdict.
StabilityReport certify_stability(const CrawlerParams& params);
StabilityReport certify_stability_3d(const CrawlerParams& params);

extern template RayleighKernels rayleigh_kernels<2>(const Crawler2D&, const Crawler2D::Coords&);
extern template RayleighKernels rayleigh_kernels<3>(const Crawler3D&, const Crawler3D::Coords&);
extern template RayleighCertificate certify_rayleigh<2>(const Crawler2D&, const Crawler2D::Coords&);
extern template RayleighCertificate certify_rayleigh<3>(const Crawler3D&, const Crawler3D::Coords&);

}  // namespace relcrawl
