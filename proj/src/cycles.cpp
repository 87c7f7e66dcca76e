#include "relcrawl/cycles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "relcrawl/equilibrium.hpp"
#include "relcrawl/errors.hpp"

namespace relcrawl {

IntegratorConfig cycle_integrator() {
  IntegratorConfig c;
  c.rtol = 1e-12;
  c.atol = 1e-14;
  return c;
}

template <int Dim>
StroboscopicMap<Dim>::StroboscopicMap(CrawlerModel<Dim> model, RestLengthSchedule schedule,
                                      IntegratorConfig config)
    : model_(std::move(model)), schedule_(std::move(schedule)), config_(config) {
  validate(schedule_, Dim);
  validate(config_);
  config_.controlled_dims = reduced_size();
}

template <int Dim>
Rhs StroboscopicMap<Dim>::rhs() const {
  if constexpr (Dim == 2) {
    return reduced_rhs_2d(model_, schedule_);
  } else {
    return reduced_rhs_3d(model_, schedule_);
  }
}

template <int Dim>
Eigen::VectorXd StroboscopicMap<Dim>::operator()(const Eigen::VectorXd& reduced) const {
  if (reduced.size() != reduced_size()) throw ConfigError("reduced state has the wrong size");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(reduced_size() + fiber_size());
  y.head(reduced_size()) = reduced;
  IntegratorConfig cfg = config_;
  cfg.dense_output = false;
  return flow_map(rhs(), y, 0.0, period(), cfg).head(reduced_size());
}

template <int Dim>
Eigen::VectorXd StroboscopicMap<Dim>::operator()(const PhaseState& state) const {
  const SectionState s = Dim == 2 ? to_section_2d(state) : to_section_3d(state);
  Eigen::VectorXd y(reduced_size() + fiber_size());
  y << s.reduced, s.fiber;
  IntegratorConfig cfg = config_;
  cfg.dense_output = false;
  return flow_map(rhs(), y, 0.0, period(), cfg).head(reduced_size());
}

template <int Dim>
Trajectory StroboscopicMap<Dim>::orbit(const Eigen::VectorXd& reduced, double periods) const {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(reduced_size() + fiber_size());
  y.head(reduced_size()) = reduced;
  IntegratorConfig cfg = config_;
  cfg.dense_output = true;
  return integrate(rhs(), y, 0.0, periods * period(), cfg);
}

template class StroboscopicMap<2>;
template class StroboscopicMap<3>;

double max_multiplier(const CycleResult& r) {
  double m = 0.0;
  for (const auto& mu : r.floquet_multipliers) m = std::max(m, std::abs(mu));
  return m;
}

namespace {

template <int Dim>
void describe_cycle(const StroboscopicMap<Dim>& map, CycleResult& r, int samples) {
  const Trajectory orbit = map.orbit(r.fixed_point);
  const int n = map.reduced_size();
  const Eigen::VectorXd& end = orbit.back();
  if constexpr (Dim == 2) {
    r.delta_x = reconstruct_shift_2d(0.0, end[n]);
    r.delta_x_quadrature = reconstruct_shift_2d(orbit, 9);
    const Crawler2D& model = map.model();
    r.cyclic_balance = orbit.integrate_scalar([&model](double, const Eigen::VectorXd& y) {
      const PhaseState s = from_section_2d(y.head(kReducedSize2D), y[kReducedSize2D]);
      const Crawler2D::Coords f = model.viscous_force(s.q, s.u);
      return f[0] + f[2] + f[4];
    });
  } else {
    r.delta_g = {wrap_angle(end[n]), end[n + 1], end[n + 2]};
  }
  r.sample_times.clear();
  r.samples.clear();
  for (int k = 0; k < samples; ++k) {
    const double t = k == samples - 1 ? orbit.t_end() : r.period * k / (samples - 1);
    r.sample_times.push_back(t);
    r.samples.push_back(orbit.sample_at(t));
  }
}

}  // namespace

template <int Dim>
CycleResult find_limit_cycle(const StroboscopicMap<Dim>& map, const Eigen::VectorXd& seed,
                             const CycleOptions& options) {
  StroboscopicMap<Dim> strobe(map.model(), map.schedule(), options.integrator);
  CycleResult r;
  r.dim = Dim;
  r.epsilon = map.schedule().epsilon;
  r.period = map.period();

  auto guarded = [&](const Eigen::VectorXd& y) {
    Eigen::VectorXd py = strobe(y);
    if (!py.allFinite() || py.norm() > options.divergence_guard)
      throw NoConvergence("period map left the divergence guard");
    return py;
  };
  auto fmap = [&](const Eigen::VectorXd& y) { return strobe(y); };

  Eigen::VectorXd y = seed;
  Eigen::VectorXd py = guarded(y);
  double res = (py - y).norm();
  while (res > options.picard_switch && res > options.tol) {
    if (++r.picard_iterations > options.max_picard)
      throw NoConvergence("Picard iteration budget exhausted (residual " + std::to_string(res) + ")");
    y = py;
    py = guarded(y);
    res = (py - y).norm();
  }

  const Eigen::Index n = y.size();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd jac = fd_jacobian(fmap, y, py, options.policy);
  while (res > options.tol) {
    if (++r.newton_iterations > options.max_newton)
      throw NoConvergence("Newton budget exhausted (residual " + std::to_string(res) + ")");
    const Eigen::VectorXd step = (jac - eye).partialPivLu().solve(py - y);
    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k < 6 && !accepted; ++k, lambda *= 0.5) {
      const Eigen::VectorXd trial = y - lambda * step;
      const Eigen::VectorXd ptrial = guarded(trial);
      const double tres = (ptrial - trial).norm();
      if (tres < res) {
        y = trial;
        py = ptrial;
        res = tres;
        accepted = true;
      }
    }
    if (!accepted) {
      if (res <= 10.0 * options.tol) break;
      throw NoConvergence("Newton step failed to reduce the residual " + std::to_string(res));
    }
    jac = fd_jacobian(fmap, y, py, options.policy);
  }

  r.fixed_point = y;
  r.residual = res;
  r.floquet_multipliers = Eigen::EigenSolver<Eigen::MatrixXd>(jac, false).eigenvalues();
  r.converged = res <= options.tol && max_multiplier(r) < 1.0;
  describe_cycle<Dim>(strobe, r, options.samples);
  return r;
}

template CycleResult find_limit_cycle<2>(const StroboscopicMap<2>&, const Eigen::VectorXd&,
                                         const CycleOptions&);
template CycleResult find_limit_cycle<3>(const StroboscopicMap<3>&, const Eigen::VectorXd&,
                                         const CycleOptions&);

Eigen::VectorXd equilibrium_section_2d(const CrawlerParams& params) {
  const ReducedPoint2D rp = homotopy_equilibrium(params);
  PhaseState s{equilibrium_configuration(rp), Eigen::VectorXd::Zero(6), 0.0};
  return to_section_2d(s).reduced;
}

Eigen::VectorXd equilibrium_section_3d(const CrawlerParams& params) {
  const ReducedPoint3D rp = homotopy_equilibrium_3d(params);
  PhaseState s{equilibrium_configuration(rp), Eigen::VectorXd::Zero(12), 0.0};
  return to_section_3d(s).reduced;
}

// ---------------------------------------------------------------------------

LinearResponse first_order_response(const Crawler2D& model, const RestLengthSchedule& schedule,
                                    ExecPolicy policy, const IntegratorConfig& config) {
  validate(schedule, 2);
  LinearResponse out;
  const ReducedPoint2D rp = homotopy_equilibrium(model.params());
  const Crawler2D::Coords q = equilibrium_configuration(rp);
  out.equilibrium = q;
  out.system = reduced_linearization_2d(model, q);
  out.period = schedule.period();

  // Rows are the length gradients d l_k / dq at the equilibrium.
  constexpr auto pairs = spring_pairs<2>();
  Eigen::Matrix<double, 3, 6> dl = Eigen::Matrix<double, 3, 6>::Zero();
  for (int k = 0; k < 3; ++k) {
    const int i = pairs[k][0], j = pairs[k][1];
    const Eigen::Vector2d d = q.segment<2>(2 * i) - q.segment<2>(2 * j);
    const Eigen::Vector2d unit = d / d.norm();
    dl.block<1, 2>(k, 2 * i) = unit.transpose();
    dl.block<1, 2>(k, 2 * j) = -unit.transpose();
  }
  const double kappa = model.params().kappa_s;
  const Eigen::MatrixXd a = out.system;

  auto make_rhs = [a, dl, kappa, schedule](bool forced) -> Rhs {
    return [a, dl, kappa, schedule, forced](double t, const Eigen::VectorXd& y,
                                            Eigen::VectorXd& dy) {
      dy.resize(12);
      dy.head(11) = a * y.head(11);
      if (forced) {
        std::array<double, 3> dir;
        schedule.direction(t, dir);
        const Eigen::Vector3d d(dir[0], dir[1], dir[2]);
        dy.segment<6>(5) += kappa * dl.transpose() * d;
      }
      dy[11] = y[9];
    };
  };
  IntegratorConfig cfg = config;
  cfg.dense_output = false;
  cfg.controlled_dims = 11;

  Eigen::MatrixXd monodromy(11, 11);
  const Rhs homogeneous = make_rhs(false);
  parallel_for(
      11,
      [&](int j) {
        Eigen::VectorXd y0 = Eigen::VectorXd::Zero(12);
        y0[j] = 1.0;
        monodromy.col(j) = flow_map(homogeneous, y0, 0.0, out.period, cfg).head(11);
      },
      policy);
  const Rhs forced = make_rhs(true);
  const Eigen::VectorXd c = flow_map(forced, Eigen::VectorXd::Zero(12), 0.0, out.period, cfg).head(11);

  const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(11, 11) - monodromy;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(lhs);
  if (!(svd.singularValues().minCoeff() > 1e-10 * std::max(1.0, svd.singularValues()[0])))
    throw SingularPeriodMap("1 is a Floquet multiplier of the linearized period map");
  out.initial = lhs.partialPivLu().solve(c);

  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(12);
  y0.head(11) = out.initial;
  cfg.dense_output = true;
  out.trajectory = integrate(forced, y0, 0.0, out.period, cfg);
  return out;
}

double check_first_order_shift(const LinearResponse& response) {
  return reconstruct_shift_2d(0.0, response.trajectory.back()[11]);
}

double second_order_shift(const Crawler2D& model, const LinearResponse& response,
                          bool freeze_damping) {
  const Crawler2D::Coords q = response.equilibrium;
  Eigen::Matrix<double, 6, 1> e;
  e << 1, 0, 1, 0, 1, 0;
  const double nu_v3 = e.dot(model.rayleigh_matrix(q) * e);
  if (!(nu_v3 > 0.0)) throw AssumptionViolated("no damping along the fiber direction");

  const Eigen::MatrixXd embed = section_embedding_2d();
  constexpr double h = 1e-6;
  std::array<Eigen::Matrix<double, 6, 6>, 5> dnu;
  for (int j = 0; j < 5; ++j) {
    const Crawler2D::Coords dq = h * embed.col(j);
    dnu[j] = freeze_damping
                 ? Eigen::Matrix<double, 6, 6>::Zero().eval()
                 : ((model.rayleigh_matrix(q + dq) - model.rayleigh_matrix(q - dq)) / (2.0 * h)).eval();
  }
  const double integral =
      response.trajectory.integrate_scalar([&](double, const Eigen::VectorXd& y) {
        Eigen::Matrix<double, 6, 6> m = Eigen::Matrix<double, 6, 6>::Zero();
        for (int j = 0; j < 5; ++j) m += dnu[j] * y[j];
        return e.dot(m * y.segment<6>(5));
      });
  return -integral / nu_v3;
}

// ---------------------------------------------------------------------------

double scaling_exponent(const ScalingRow& a, const ScalingRow& b) {
  if (a.delta_x == 0.0 || b.delta_x == 0.0 || !std::isfinite(a.delta_x) ||
      !std::isfinite(b.delta_x))
    return std::numeric_limits<double>::quiet_NaN();
  return (std::log(std::abs(a.delta_x)) - std::log(std::abs(b.delta_x))) /
         (std::log(a.epsilon) - std::log(b.epsilon));
}

ScalingStudy scaling_study(const Crawler2D& model, const RestLengthSchedule& schedule,
                           std::vector<double> epsilons, const CycleOptions& options) {
  ScalingStudy study;
  for (double e : epsilons)
    if (!(e > 0.0) || !std::isfinite(e)) throw ConfigError("amplitudes must be positive");
  if (!std::is_sorted(epsilons.begin(), epsilons.end(), std::greater<>())) {
    std::sort(epsilons.begin(), epsilons.end(), std::greater<>());
    study.warnings.push_back("amplitudes were not in descending order; sorted");
  }

  const Eigen::VectorXd base = equilibrium_section_2d(model.params());
  const LinearResponse response = first_order_response(model, schedule.with_epsilon(1.0), options.policy);

  study.rows.resize(epsilons.size());
  CycleOptions inner = options;
  inner.policy = ExecPolicy::serial;
  parallel_for(
      static_cast<int>(epsilons.size()),
      [&](int i) {
        ScalingRow& row = study.rows[i];
        row.epsilon = epsilons[i];
        try {
          const StroboscopicMap<2> map(model, schedule.with_epsilon(row.epsilon), options.integrator);
          const CycleResult c = find_limit_cycle(map, base + row.epsilon * response.initial, inner);
          row.delta_x = c.delta_x;
          row.residual = c.residual;
          row.max_multiplier = max_multiplier(c);
          if (!c.converged) row.status = "unstable";
        } catch (const Error& e) {
          row.delta_x = std::numeric_limits<double>::quiet_NaN();
          row.residual = std::numeric_limits<double>::quiet_NaN();
          row.max_multiplier = std::numeric_limits<double>::quiet_NaN();
          row.status = e.what();
        }
      },
      options.policy);
  for (std::size_t i = 0; i + 1 < study.rows.size(); ++i)
    study.rows[i].p = scaling_exponent(study.rows[i], study.rows[i + 1]);
  return study;
}

double fitted_exponent(const std::vector<ScalingRow>& rows) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& r : rows) {
    if (!(std::abs(r.delta_x) > 0.0) || !std::isfinite(r.delta_x)) continue;
    const double x = std::log(r.epsilon), y = std::log(std::abs(r.delta_x));
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------------------

SettleResult settle_then_force(const Crawler2D& model, const RestLengthSchedule& schedule,
                               double t_settle, int n_periods, double start_offset,
                               const IntegratorConfig& config) {
  if (!(t_settle >= 0.0) || n_periods < 0) throw ConfigError("settle time and period count must be >= 0");
  validate(schedule, 2);
  SettleResult out;
  out.t_settle = t_settle;
  out.period = schedule.period();

  const ReducedPoint2D rp = homotopy_equilibrium(model.params());
  PhaseState start{equilibrium_configuration(rp), Eigen::VectorXd::Zero(6), 0.0};
  for (int i = 0; i < 3; ++i) start.q[2 * i + 1] += start_offset;
  const SectionState s = to_section_2d(start);
  Eigen::VectorXd y0(12);
  y0 << s.reduced, s.fiber;

  IntegratorConfig cfg = config;
  cfg.dense_output = true;
  cfg.controlled_dims = kReducedSize2D;
  const RestLengthSchedule rest = RestLengthSchedule::constant(
      std::vector<double>(model.base_rest().begin(), model.base_rest().end()));
  out.settle = integrate(reduced_rhs_2d(model, rest), y0, 0.0, t_settle, cfg);

  const Rhs base = reduced_rhs_2d(model, schedule);
  const Rhs shifted = [base, t_settle](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    base(t - t_settle, y, dy);
  };
  const double t_end = t_settle + n_periods * out.period;
  out.forced = integrate(shifted, out.settle.back(), t_settle, t_end, cfg);

  double prev = out.forced.states().front()[kReducedSize2D];
  for (int k = 1; k <= n_periods; ++k) {
    const double t = k == n_periods ? t_end : t_settle + k * out.period;
    const double x3 = out.forced.sample_at(t)[kReducedSize2D];
    out.shifts.push_back(x3 - prev);
    prev = x3;
  }
  return out;
}

}  // namespace relcrawl
