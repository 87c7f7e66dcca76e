#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "relcrawl/integrate.hpp"
#include "relcrawl/model.hpp"
#include "relcrawl/parallel.hpp"
#include "relcrawl/reduction.hpp"

namespace relcrawl {

/// Default integrator settings for periodic-orbit work: tight enough that
/// the period map is smooth well below the fixed-point tolerance.
IntegratorConfig cycle_integrator();

/// Period map of the forced reduced system at forcing phase 0. States are
/// section coordinates (11 in 2D, 21 in 3D); the fiber is carried along but
/// excluded from step-size control, so the map does not depend on it.
template <int Dim>
class StroboscopicMap {
 public:
  StroboscopicMap(CrawlerModel<Dim> model, RestLengthSchedule schedule,
                  IntegratorConfig config = cycle_integrator());

  static constexpr int reduced_size() { return Dim == 2 ? kReducedSize2D : kReducedSize3D; }
  static constexpr int fiber_size() { return Dim == 2 ? 1 : 3; }

  const CrawlerModel<Dim>& model() const { return model_; }
  const RestLengthSchedule& schedule() const { return schedule_; }
  const IntegratorConfig& config() const { return config_; }
  double period() const { return schedule_.period(); }

  /// Reduced state after one period.
  Eigen::VectorXd operator()(const Eigen::VectorXd& reduced) const;
  /// Same starting from a full state: project, integrate, return reduced.
  Eigen::VectorXd operator()(const PhaseState& state) const;

  /// Augmented (reduced, fiber) trajectory over n periods with dense output,
  /// fiber starting at the identity.
  Trajectory orbit(const Eigen::VectorXd& reduced, double periods = 1.0) const;

  Rhs rhs() const;

 private:
  CrawlerModel<Dim> model_;
  RestLengthSchedule schedule_;
  IntegratorConfig config_;
};

extern template class StroboscopicMap<2>;
extern template class StroboscopicMap<3>;

struct CycleOptions {
  IntegratorConfig integrator = cycle_integrator();
  int max_picard = 400;
  double picard_switch = 1e-4;  // Newton takes over below this residual
  int max_newton = 15;
  double tol = 1e-10;
  int samples = 65;  // uniform samples over the cycle, both ends included
  double divergence_guard = 1e3;
  ExecPolicy policy = ExecPolicy::openmp;
};

struct CycleResult {
  int dim = 2;
  double epsilon = 0.0;
  double period = 1.0;
  Eigen::VectorXd fixed_point;
  double residual = 0.0;
  double delta_x = 0.0;       // 2D shift
  SE2Element delta_g;         // 3D shift
  double delta_x_quadrature = 0.0;  // 2D shift by quadrature of v3
  double cyclic_balance = 0.0;      // period integral of the net horizontal friction
  Eigen::VectorXcd floquet_multipliers;
  bool converged = false;
  int picard_iterations = 0;
  int newton_iterations = 0;
  std::vector<double> sample_times;
  std::vector<Eigen::VectorXd> samples;  // (reduced, fiber)
};

double max_multiplier(const CycleResult& r);

/// Fixed point of the period map: Picard iteration from the seed, then
/// Newton with a finite-difference Jacobian whose eigenvalues are the Floquet
/// multipliers. Throws NoConvergence when the budgets run out or the
/// iterates leave the guard.
template <int Dim>
CycleResult find_limit_cycle(const StroboscopicMap<Dim>& map, const Eigen::VectorXd& seed,
                             const CycleOptions& options = {});

extern template CycleResult find_limit_cycle<2>(const StroboscopicMap<2>&, const Eigen::VectorXd&,
                                                const CycleOptions&);
extern template CycleResult find_limit_cycle<3>(const StroboscopicMap<3>&, const Eigen::VectorXd&,
                                                const CycleOptions&);

/// Section state at the equilibrium with zero velocity.
Eigen::VectorXd equilibrium_section_2d(const CrawlerParams& params);
Eigen::VectorXd equilibrium_section_3d(const CrawlerParams& params);

// ---------------------------------------------------------------------------
// Linear response about the 2D equilibrium.

struct LinearResponse {
  Eigen::VectorXd equilibrium;  // configuration q*
  Eigen::MatrixXd system;       // 11 x 11 reduced linearization
  Eigen::VectorXd initial;      // periodic solution at t = 0 (11 components)
  double period = 1.0;
  /// (y, x3) with y the periodic response and x3 the integrated v3.
  Trajectory trajectory;
};

/// T-periodic solution of y' = A y + b(t), b being the spring-force
/// sensitivity to the rest lengths along the schedule's epsilon-direction.
/// Throws SingularPeriodMap if 1 is (numerically) a Floquet multiplier.
LinearResponse first_order_response(const Crawler2D& model, const RestLengthSchedule& schedule,
                                    ExecPolicy policy = ExecPolicy::openmp,
                                    const IntegratorConfig& config = cycle_integrator());

/// Integral of v3 over one period of the linear response.
double check_first_order_shift(const LinearResponse& response);

/// Coefficient of epsilon^2 in the per-period shift. With freeze_damping
/// the damping matrix is held at its equilibrium value.
double second_order_shift(const Crawler2D& model, const LinearResponse& response,
                          bool freeze_damping = false);

// ---------------------------------------------------------------------------
// Scaling study.

struct ScalingRow {
  double epsilon = 0.0;
  double delta_x = 0.0;
  double p = std::numeric_limits<double>::quiet_NaN();  // with the next row
  double residual = 0.0;
  double max_multiplier = 0.0;
  std::string status = "ok";
};

struct ScalingStudy {
  std::vector<ScalingRow> rows;
  std::vector<std::string> warnings;
};

/// p between two rows; NaN unless both shifts are nonzero.
double scaling_exponent(const ScalingRow& a, const ScalingRow& b);

/// Runs one cycle search per amplitude (sorted descending). Each row is
/// seeded independently from the equilibrium plus the first-order response,
/// so rows can run concurrently and results do not depend on the policy.
ScalingStudy scaling_study(const Crawler2D& model, const RestLengthSchedule& schedule,
                           std::vector<double> epsilons, const CycleOptions& options = {});

/// Least-squares slope of log|delta_x| against log epsilon.
double fitted_exponent(const std::vector<ScalingRow>& rows);

// ---------------------------------------------------------------------------
// Settle-then-force protocol.

struct SettleResult {
  Trajectory settle;  // unforced phase, augmented section state
  Trajectory forced;  // forcing switched on at t_settle
  double t_settle = 0.0;
  double period = 1.0;
  std::vector<double> shifts;  // x3 increment over each forced period
};

/// Starts from the equilibrium at rest (lifted by start_offset in height),
/// integrates t_settle without forcing, then n_periods with the schedule
/// clock starting at t_settle.
SettleResult settle_then_force(const Crawler2D& model, const RestLengthSchedule& schedule,
                               double t_settle, int n_periods, double start_offset = 0.0,
                               const IntegratorConfig& config = cycle_integrator());

}  // namespace relcrawl
