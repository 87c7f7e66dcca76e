#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace relcrawl {

/// y' = f(t, y); the callee writes f into dydt (already sized like y).
using Rhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt)>;

struct IntegratorConfig {
  double rtol = 1e-9;
  double atol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 0.0;  // 0 selects a starting step automatically
  bool dense_output = true;
  long max_steps = 50'000'000;
  /// Only the leading `controlled_dims` components enter the error norm
  /// (0 means all). Trailing components must not feed back into the others.
  int controlled_dims = 0;
};

void validate(const IntegratorConfig& config);

/// Accepted steps of an embedded Dormand-Prince 5(4) integration together
/// with the dense-output polynomials of each step.
class Trajectory {
 public:
  struct StepRecord {
    double t;        // start of the step
    double h;        // accepted step size
    int rejections;  // rejected attempts before acceptance
  };

  const std::vector<double>& times() const { return times_; }
  const std::vector<Eigen::VectorXd>& states() const { return states_; }
  const std::vector<StepRecord>& step_log() const { return log_; }
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  const Eigen::VectorXd& back() const { return states_.back(); }
  bool has_dense_output() const { return !dense_.empty() || times_.size() == 1; }

  /// Dense-output state at t (4th order); node times return stored states.
  /// Throws OutOfSpan outside [t_begin, t_end].
  Eigen::VectorXd sample_at(double t) const;

  /// Gauss-Legendre quadrature of f(t, y(t)) over the whole span, five nodes
  /// per accepted step.
  double integrate_scalar(const std::function<double(double, const Eigen::VectorXd&)>& f) const;

 private:
  friend Trajectory integrate(const Rhs&, const Eigen::VectorXd&, double, double,
                              const IntegratorConfig&);

  std::vector<double> times_;
  std::vector<Eigen::VectorXd> states_;
  // Five coefficient vectors per accepted step (Hairer's contd5 form).
  std::vector<std::array<Eigen::VectorXd, 5>> dense_;
  std::vector<StepRecord> log_;

  Eigen::VectorXd eval_dense(std::size_t step, double theta) const;
};

/// Integrates from t0 to t1 (t1 >= t0). Throws StepSizeUnderflow when the
/// step collapses and propagates exceptions raised by rhs.
Trajectory integrate(const Rhs& rhs, const Eigen::VectorXd& y0, double t0, double t1,
                     const IntegratorConfig& config = {});

/// Endpoint of an integration over [t0, t0 + duration].
Eigen::VectorXd flow_map(const Rhs& rhs, const Eigen::VectorXd& y0, double t0, double duration,
                         IntegratorConfig config = {});

/// CSV with header "t,<names...>" and 17 significant digits.
void write_trajectory_csv(std::ostream& out, const std::vector<double>& times,
                          const std::vector<Eigen::VectorXd>& states,
                          const std::vector<std::string>& column_names);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;
  /// Numeric cell; empty cells read as NaN.
  double number(std::size_t row, int col) const;
};
CsvTable read_csv(std::istream& in);

}  // namespace relcrawl
