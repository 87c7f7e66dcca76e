#include "relcrawl/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <boost/math/tools/toms748_solve.hpp>

#include "relcrawl/errors.hpp"

namespace relcrawl {

namespace {

template <int N>
std::array<Jet<N>, N> seed_jets(const Eigen::Matrix<double, N, 1>& x) {
  std::array<Jet<N>, N> j;
  for (int i = 0; i < N; ++i) j[i] = Jet<N>::variable(x[i], i);
  return j;
}

template <int N>
std::array<double, N> as_array(const Eigen::Matrix<double, N, 1>& x) {
  std::array<double, N> a;
  for (int i = 0; i < N; ++i) a[i] = x[i];
  return a;
}

template <int N>
Jet<N> potential_jet(const Eigen::Matrix<double, N, 1>& x, const CrawlerParams& p,
                     std::span<const double> rest) {
  return reduced_potential_t<Jet<N>>(seed_jets<N>(x), p, rest);
}

// Chart layout: indices of the ground heights and of the spring lengths.
template <int N>
struct ChartLayout;
template <>
struct ChartLayout<5> {
  static constexpr std::array<int, 2> z{0, 1};
  static constexpr std::array<int, 3> l{2, 3, 4};
};
template <>
struct ChartLayout<9> {
  static constexpr std::array<int, 3> z{6, 7, 8};
  static constexpr std::array<int, 6> l{0, 1, 2, 3, 4, 5};
};

// Potential without the spring energy; the homotopy scales its length
// derivatives by the compliance 1/kappa_s.
template <int N>
Jet<N> geometric_jet(const Eigen::Matrix<double, N, 1>& x, const CrawlerParams& p) {
  CrawlerParams q = p;
  q.kappa_s = 0.0;
  return potential_jet<N>(x, q, p.rest_lengths);
}

template <int N>
double top_height(const Eigen::Matrix<double, N, 1>& x) {
  if constexpr (N == 5) {
    return mass3_height(x[0], x[1], x[2], x[3], x[4]);
  } else {
    return mass4_height<double>({x[0], x[1], x[2], x[3], x[4], x[5]}, {x[6], x[7], x[8]});
  }
}

// F(x, c) = (dG/dz, (l - rest) + c dG/dl) and its Jacobian.
template <int N>
void homotopy_system(const Eigen::Matrix<double, N, 1>& x, double c, const CrawlerParams& p,
                     Eigen::Matrix<double, N, 1>& f, Eigen::Matrix<double, N, N>& jac) {
  using CL = ChartLayout<N>;
  const Jet<N> g = geometric_jet<N>(x, p);
  f = g.g;
  jac = g.h;
  for (std::size_t k = 0; k < CL::l.size(); ++k) {
    const int i = CL::l[k];
    f[i] = x[i] - p.rest_lengths[k] + c * g.g[i];
    jac.row(i) = c * g.h.row(i);
    jac(i, i) += 1.0;
  }
}

enum class Newton { converged, diverged, left_chart };

template <int N>
Newton newton_solve(Eigen::Matrix<double, N, 1>& x, double c, const CrawlerParams& p) {
  Eigen::Matrix<double, N, 1> f;
  Eigen::Matrix<double, N, N> jac;
  try {
    homotopy_system<N>(x, c, p, f, jac);
    const double start = f.norm();
    for (int it = 0; it < 40; ++it) {
      if (f.norm() <= 1e-13) return Newton::converged;
      const Eigen::Matrix<double, N, 1> step = jac.partialPivLu().solve(f);
      if (!step.allFinite()) return Newton::diverged;
      x -= step;
      homotopy_system<N>(x, c, p, f, jac);
      if (!f.allFinite() || f.norm() > 1e3 * std::max(start, 1.0)) return Newton::diverged;
      if (step.norm() <= 1e-15 * std::max(1.0, x.norm())) break;
    }
  } catch (const ChartDomain&) {
    return Newton::left_chart;
  }
  return f.norm() <= 1e-10 ? Newton::converged : Newton::diverged;
}

// Stage 1: lengths at rest, alternate scalar root solves for each ground
// height of dG/dz_i = 0.
template <int N>
void contact_stage(Eigen::Matrix<double, N, 1>& x, const CrawlerParams& p) {
  using CL = ChartLayout<N>;
  for (std::size_t k = 0; k < CL::l.size(); ++k) x[CL::l[k]] = p.rest_lengths[k];
  for (int i : CL::z) x[i] = 0.0;

  for (int sweep = 0; sweep < 500; ++sweep) {
    double change = 0.0;
    for (int i : CL::z) {
      auto dgdz = [&](double zi) {
        Eigen::Matrix<double, N, 1> y = x;
        y[i] = zi;
        return geometric_jet<N>(y, p).g[i];
      };
      double hi = 0.0;
      double fhi = dgdz(hi);
      if (!(fhi > 0.0))
        throw AssumptionViolated("a ground mass is pulled upward at the contact height");
      double lo = -1.0 / p.kappa_np;
      double flo;
      for (int tries = 0;; ++tries) {
        try {
          flo = dgdz(lo);
        } catch (const ChartDomain&) {
          throw AssumptionViolated("contact stiffness too small to support the weight");
        }
        if (flo < 0.0) break;
        if (tries > 60) throw AssumptionViolated("no contact equilibrium found");
        hi = lo, fhi = flo;
        lo *= 2.0;
      }
      std::uintmax_t iters = 200;
      const auto root = boost::math::tools::toms748_solve(
          dgdz, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52), iters);
      const double zi = 0.5 * (root.first + root.second);
      change = std::max(change, std::abs(zi - x[i]));
      x[i] = zi;
    }
    if (change <= 1e-15) return;
  }
}

template <int N>
Eigen::Matrix<double, N, 1> homotopy(const CrawlerParams& params) {
  Eigen::Matrix<double, N, 1> x;
  contact_stage<N>(x, params);
  if (newton_solve<N>(x, 0.0, params) != Newton::converged)
    throw ContinuationFailed("contact stage did not converge");

  const double c_end = 1.0 / params.kappa_s;
  constexpr int kSteps = 8;
  std::vector<double> targets;
  for (int j = 1; j <= kSteps; ++j) targets.push_back(c_end * std::ldexp(1.0, j - kSteps));

  double c = 0.0;
  int halvings = 0;
  std::size_t next = 0;
  double target = targets[0];
  while (true) {
    Eigen::Matrix<double, N, 1> trial = x;
    const Newton status = newton_solve<N>(trial, target, params);
    if (status == Newton::converged) {
      x = trial;
      c = target;
      if (c == c_end) break;
      if (target == targets[next]) ++next;
      target = targets[next];
    } else {
      if (++halvings > 30) {
        if (status == Newton::left_chart)
          throw AssumptionViolated("springs too soft to hold the shape off the ground");
        throw ContinuationFailed("step halving exhausted");
      }
      target = c + 0.5 * (target - c);
    }
  }

  // Polish on the gradient of the reduced potential itself.
  for (int it = 0; it < 20; ++it) {
    const Jet<N> u = potential_jet<N>(x, params, params.rest_lengths);
    if (u.g.norm() <= 1e-14) break;
    const Eigen::Matrix<double, N, 1> step = u.h.ldlt().solve(u.g);
    x -= step;
    if (step.norm() <= 1e-16 * std::max(1.0, x.norm())) break;
  }
  const Jet<N> u = potential_jet<N>(x, params, params.rest_lengths);
  if (!(u.g.norm() <= kTolGrad)) throw ContinuationFailed("gradient polish did not converge");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> es(u.h);
  if (!(es.eigenvalues().minCoeff() > kTolEig))
    throw AssumptionViolated("reduced Hessian is not positive definite at the critical point");
  if (!(top_height<N>(x) > 0.0)) throw AssumptionViolated("top mass is not above the ground");
  return x;
}

Eigen::MatrixXd null_space(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double scale = std::max(1.0, s.size() ? s[0] : 0.0);
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > 1e-9 * scale) ++rank;
  return svd.matrixV().rightCols(m.cols() - rank);
}

}  // namespace

double reduced_potential(const ReducedPoint2D& rp, const CrawlerParams& params) {
  return reduced_potential_t<double>(as_array<5>(rp.vec()), params, params.rest_lengths);
}
Eigen::Matrix<double, 5, 1> reduced_gradient(const ReducedPoint2D& rp, const CrawlerParams& params) {
  return potential_jet<5>(rp.vec(), params, params.rest_lengths).g;
}
Eigen::Matrix<double, 5, 5> reduced_hessian(const ReducedPoint2D& rp, const CrawlerParams& params) {
  return potential_jet<5>(rp.vec(), params, params.rest_lengths).h;
}

double reduced_potential(const ReducedPoint3D& rp, const CrawlerParams& params) {
  return reduced_potential_t<double>(as_array<9>(rp.vec()), params, params.rest_lengths);
}
Eigen::Matrix<double, 9, 1> reduced_gradient(const ReducedPoint3D& rp, const CrawlerParams& params) {
  return potential_jet<9>(rp.vec(), params, params.rest_lengths).g;
}
Eigen::Matrix<double, 9, 9> reduced_hessian(const ReducedPoint3D& rp, const CrawlerParams& params) {
  return potential_jet<9>(rp.vec(), params, params.rest_lengths).h;
}

ReducedPoint2D homotopy_equilibrium(const CrawlerParams& params) {
  validate(params, 2);
  return ReducedPoint2D::from_vec(homotopy<5>(params));
}

ReducedPoint3D homotopy_equilibrium_3d(const CrawlerParams& params) {
  validate(params, 3);
  return ReducedPoint3D::from_vec(homotopy<9>(params));
}

Eigen::VectorXd equilibrium_configuration(const ReducedPoint2D& rp) {
  const double x3 = mass3_offset(rp.z1, rp.z2, rp.l1, rp.l2, rp.l3)[0];
  return lift_2d(rp, x3);
}

Eigen::VectorXd equilibrium_configuration(const ReducedPoint3D& rp) { return lift_3d(rp, {}); }

template <int Dim>
RayleighKernels rayleigh_kernels(const CrawlerModel<Dim>& model,
                                 const typename CrawlerModel<Dim>::Coords& q) {
  model.spring_lengths(q);  // degenerate-configuration guard
  RayleighKernels k;
  const Eigen::MatrixXd db = model.rayleigh_debounce_matrix(q);
  const Eigen::MatrixXd ns = model.rayleigh_noslip_matrix(q);
  const Eigen::MatrixXd sh = model.rayleigh_shape_matrix(q);
  k.debounce = null_space(db);
  k.noslip = null_space(ns);
  k.shape = null_space(sh);
  const Eigen::Index n = db.rows();
  Eigen::MatrixXd two(2 * n, n), three(3 * n, n);
  two << db, ns;
  three << db, ns, sh;
  k.dim_contact = static_cast<int>(null_space(two).cols());
  k.dim_all = static_cast<int>(null_space(three).cols());
  return k;
}

template <int Dim>
RayleighCertificate certify_rayleigh(const CrawlerModel<Dim>& model,
                                     const typename CrawlerModel<Dim>::Coords& q) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(model.rayleigh_matrix(q)));
  RayleighCertificate c;
  c.eigenvalues = es.eigenvalues();
  c.min_eigenvalue = c.eigenvalues.minCoeff();
  c.positive_definite = c.min_eigenvalue > kTolEig;
  return c;
}

template RayleighKernels rayleigh_kernels<2>(const Crawler2D&, const Crawler2D::Coords&);
template RayleighKernels rayleigh_kernels<3>(const Crawler3D&, const Crawler3D::Coords&);
template RayleighCertificate certify_rayleigh<2>(const Crawler2D&, const Crawler2D::Coords&);
template RayleighCertificate certify_rayleigh<3>(const Crawler3D&, const Crawler3D::Coords&);

Eigen::MatrixXd reduced_linearization(const Eigen::MatrixXd& stiffness, const Eigen::MatrixXd& damping,
                                      const Eigen::MatrixXd& projection,
                                      const Eigen::MatrixXd& embedding) {
  const Eigen::Index m = projection.rows(), n = projection.cols();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m + n, m + n);
  a.block(0, m, m, n) = projection;
  a.block(m, 0, n, m) = -stiffness * embedding;
  a.block(m, m, n, n) = -damping;
  return a;
}

Eigen::MatrixXd unreduced_linearization(const Eigen::MatrixXd& stiffness,
                                        const Eigen::MatrixXd& damping) {
  const Eigen::Index n = stiffness.rows();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  a.block(0, n, n, n).setIdentity();
  a.block(n, 0, n, n) = -stiffness;
  a.block(n, n, n, n) = -damping;
  return a;
}

namespace {

void check_symmetry_kernel(const Eigen::MatrixXd& k, const Eigen::MatrixXd& generators) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  const Eigen::Index g = generators.cols();
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  const double tol = 1e-7 * scale;
  if (es.eigenvalues()[g] <= tol || es.eigenvalues()[g - 1] > tol ||
      (k * generators).norm() > tol * generators.norm())
    throw AssumptionViolated("stiffness kernel differs from the symmetry directions");
}

}  // namespace

Eigen::MatrixXd reduced_linearization_2d(const Crawler2D& model, const Eigen::VectorXd& q) {
  const std::span<const double> rest = model.base_rest();
  const Eigen::MatrixXd k = model.potential_hessian(q, rest);
  Eigen::MatrixXd e(6, 1);
  e << 1, 0, 1, 0, 1, 0;
  check_symmetry_kernel(k, e);
  return reduced_linearization(k, model.rayleigh_matrix(q), section_projection_2d(),
                               section_embedding_2d());
}

Eigen::MatrixXd reduced_linearization_3d(const Crawler3D& model, const Eigen::VectorXd& q) {
  const std::span<const double> rest = model.base_rest();
  const Eigen::MatrixXd k = model.potential_hessian(q, rest);
  Eigen::MatrixXd gens = Eigen::MatrixXd::Zero(12, 3);
  for (int i = 0; i < 4; ++i) {
    gens(3 * i, 0) = -q[3 * i + 1];
    gens(3 * i + 1, 0) = q[3 * i];
    gens(3 * i, 1) = 1.0;
    gens(3 * i + 1, 2) = 1.0;
  }
  check_symmetry_kernel(k, gens);
  return reduced_linearization(k, model.rayleigh_matrix(q), section_projection_3d(q),
                               section_embedding_3d());
}

double spectral_abscissa(const Eigen::VectorXcd& spectrum) {
  double a = -std::numeric_limits<double>::infinity();
  for (const auto& l : spectrum) a = std::max(a, l.real());
  return a;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::robustly_stable: return "robustly_stable";
    case Verdict::marginal: return "marginal";
    case Verdict::unstable: return "unstable";
    case Verdict::indefinite_inputs: return "indefinite_inputs";
  }
  return "indefinite_inputs";
}

Verdict verdict_from_string(const std::string& s) {
  for (Verdict v : {Verdict::robustly_stable, Verdict::marginal, Verdict::unstable,
                    Verdict::indefinite_inputs})
    if (to_string(v) == s) return v;
  throw ConfigError("unknown verdict '" + s + "'");
}

namespace {

template <int Dim, class Point, class Solve, class Linearize>
StabilityReport certify(const CrawlerParams& params, Solve solve, Linearize linearize) {
  StabilityReport r;
  r.dim = Dim;
  try {
    const CrawlerModel<Dim> model(params);
    const Point rp = solve(params);
    r.reduced_equilibrium = rp.vec();
    r.gradient_norm = reduced_gradient(rp, params).norm();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hs(Eigen::MatrixXd(reduced_hessian(rp, params)));
    r.hessian_eigenvalues = hs.eigenvalues();
    const typename CrawlerModel<Dim>::Coords q = equilibrium_configuration(rp);
    r.configuration = q;
    const RayleighCertificate rc = certify_rayleigh<Dim>(model, q);
    r.rayleigh_eigenvalues = rc.eigenvalues;
    const Eigen::MatrixXd a = linearize(model, q);
    r.linearization_spectrum = Eigen::EigenSolver<Eigen::MatrixXd>(a, false).eigenvalues();
    r.spectral_abscissa = spectral_abscissa(r.linearization_spectrum);

    if (!(r.gradient_norm <= kTolGrad) || !(r.hessian_eigenvalues.minCoeff() > 0.0)) {
      r.verdict = Verdict::indefinite_inputs;
      r.diagnostic = "equilibrium is not a nondegenerate minimum";
    } else if (r.spectral_abscissa > kTolAbscissa) {
      r.verdict = Verdict::unstable;
    } else if (r.spectral_abscissa < -kTolAbscissa && rc.positive_definite) {
      r.verdict = Verdict::robustly_stable;
    } else {
      r.verdict = Verdict::marginal;
      if (!rc.positive_definite) r.diagnostic = "Rayleigh matrix is only semidefinite";
    }
  } catch (const AssumptionViolated& e) {
    r.verdict = Verdict::indefinite_inputs;
    r.failure = FailureKind::assumption;
    r.diagnostic = e.what();
  } catch (const ChartDomain& e) {
    r.verdict = Verdict::indefinite_inputs;
    r.failure = FailureKind::assumption;
    r.diagnostic = e.what();
  } catch (const ConfigError& e) {
    r.verdict = Verdict::indefinite_inputs;
    r.failure = FailureKind::assumption;
    r.diagnostic = e.what();
  } catch (const Error& e) {
    r.verdict = Verdict::indefinite_inputs;
    r.failure = FailureKind::numerical;
    r.diagnostic = e.what();
  }
  return r;
}

}  // namespace

StabilityReport certify_stability(const CrawlerParams& params) {
  return certify<2, ReducedPoint2D>(
      params, [](const CrawlerParams& p) { return homotopy_equilibrium(p); },
      [](const Crawler2D& m, const Crawler2D::Coords& q) {
        return reduced_linearization_2d(m, q);
      });
}

StabilityReport certify_stability_3d(const CrawlerParams& params) {
  return certify<3, ReducedPoint3D>(
      params, [](const CrawlerParams& p) { return homotopy_equilibrium_3d(p); },
      [](const Crawler3D& m, const Crawler3D::Coords& q) {
        return reduced_linearization_3d(m, q);
      });
}

}  // namespace relcrawl
