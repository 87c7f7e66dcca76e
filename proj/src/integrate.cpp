#include "relcrawl/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "relcrawl/errors.hpp"

namespace relcrawl {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;
constexpr double a21 = 0.2;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Dense output.
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

// Step-size control (PI, Lund stabilization).
constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;   // h_new / h >= 0.2
constexpr double kFacMax = 10.0;  // h_new / h <= 10
constexpr double kBeta = 0.04;

double weighted_rms(const Eigen::VectorXd& v, const Eigen::VectorXd& y0,
                    const Eigen::VectorXd& y1, int n, double atol, double rtol) {
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double sk = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = v[i] / sk;
    sum += r * r;
  }
  return std::sqrt(sum / n);
}

double initial_step(const Rhs& rhs, double t, const Eigen::VectorXd& y, const Eigen::VectorXd& f0,
                    int n, const IntegratorConfig& cfg, double span) {
  double dnf = 0.0, dny = 0.0;
  for (int i = 0; i < n; ++i) {
    const double sk = cfg.atol + cfg.rtol * std::abs(y[i]);
    dnf += (f0[i] / sk) * (f0[i] / sk);
    dny += (y[i] / sk) * (y[i] / sk);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
  h = std::min({h, cfg.max_step, span});
  const Eigen::VectorXd y1 = y + h * f0;
  Eigen::VectorXd f1(y.size());
  rhs(t + h, y1, f1);
  double der2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double sk = cfg.atol + cfg.rtol * std::abs(y[i]);
    der2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
  }
  der2 = std::sqrt(der2) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
  return std::min({100.0 * h, h1, cfg.max_step, span});
}

}  // namespace

void validate(const IntegratorConfig& c) {
  if (!(c.rtol > 0.0) || !(c.atol > 0.0)) throw ConfigError("rtol and atol must be > 0");
  if (!(c.max_step > 0.0)) throw ConfigError("max_step must be > 0");
  if (c.controlled_dims < 0) throw ConfigError("controlled_dims must be >= 0");
}

Trajectory integrate(const Rhs& rhs, const Eigen::VectorXd& y0, double t0, double t1,
                     const IntegratorConfig& cfg) {
  validate(cfg);
  if (!(t1 >= t0) || !std::isfinite(t0) || !std::isfinite(t1))
    throw ConfigError("integration span must be finite with t1 >= t0");

  const Eigen::Index dim = y0.size();
  const int n_ctrl = cfg.controlled_dims > 0 ? std::min<int>(cfg.controlled_dims, dim)
                                             : static_cast<int>(dim);
  Trajectory traj;
  traj.times_.push_back(t0);
  traj.states_.push_back(y0);
  if (t1 == t0) return traj;

  Eigen::VectorXd y = y0, ynew(dim), ytmp(dim);
  Eigen::VectorXd k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim), err_vec(dim);
  rhs(t0, y, k1);

  double t = t0;
  double h = cfg.initial_step > 0.0 ? std::min(cfg.initial_step, t1 - t0)
                                    : initial_step(rhs, t, y, k1, n_ctrl, cfg, t1 - t0);
  double facold = 1e-4;
  bool reject = false;
  int rejections = 0;
  long steps = 0;

  while (t < t1) {
    if (++steps > cfg.max_steps) throw StepSizeUnderflow("step budget exhausted");
    if (0.1 * std::abs(h) <= std::abs(t) * std::numeric_limits<double>::epsilon() ||
        !(h > 0.0))
      throw StepSizeUnderflow("step size underflow at t = " + std::to_string(t));

    bool last = false;
    if (t + 1.01 * h >= t1) {
      h = t1 - t;
      last = true;
    }

    ytmp = y + h * a21 * k1;
    rhs(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    const double tph = last ? t1 : t + h;
    rhs(tph, ytmp, k6);
    ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    rhs(tph, ynew, k7);

    err_vec = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double err = weighted_rms(err_vec, y, ynew, n_ctrl, cfg.atol, cfg.rtol);
    if (!std::isfinite(err)) {
      h *= 0.1;
      reject = true;
      ++rejections;
      continue;
    }
    const double fac11 = std::pow(err, 0.2 - kBeta * 0.75);
    double fac = fac11 / std::pow(facold, kBeta);
    fac = std::max(1.0 / kFacMax, std::min(1.0 / kFacMin, fac / kSafety));
    double hnew = h / fac;

    if (err <= 1.0) {
      facold = std::max(err, 1e-4);
      if (cfg.dense_output) {
        const Eigen::VectorXd ydiff = ynew - y;
        const Eigen::VectorXd bspl = h * k1 - ydiff;
        traj.dense_.push_back({y, ydiff, bspl, ydiff - h * k7 - bspl,
                               h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7)});
      }
      traj.log_.push_back({t, h, rejections});
      rejections = 0;
      t = tph;
      y = ynew;
      k1 = k7;
      traj.times_.push_back(t);
      traj.states_.push_back(y);
      if (reject) hnew = std::min(hnew, h);
      reject = false;
      h = std::min(hnew, cfg.max_step);
    } else {
      h /= std::min(1.0 / kFacMin, fac11 / kSafety);
      reject = true;
      ++rejections;
    }
  }
  return traj;
}

Eigen::VectorXd Trajectory::eval_dense(std::size_t step, double theta) const {
  const auto& r = dense_[step];
  const double theta1 = 1.0 - theta;
  return r[0] + theta * (r[1] + theta1 * (r[2] + theta * (r[3] + theta1 * r[4])));
}

Eigen::VectorXd Trajectory::sample_at(double t) const {
  if (!(t >= times_.front() && t <= times_.back()))
    throw OutOfSpan("time " + std::to_string(t) + " outside trajectory span");
  auto it = std::lower_bound(times_.begin(), times_.end(), t);
  const auto idx = static_cast<std::size_t>(it - times_.begin());
  if (*it == t) return states_[idx];
  if (dense_.empty()) throw OutOfSpan("trajectory was integrated without dense output");
  const std::size_t step = idx - 1;
  const double theta = (t - times_[step]) / (times_[step + 1] - times_[step]);
  return eval_dense(step, theta);
}

double Trajectory::integrate_scalar(
    const std::function<double(double, const Eigen::VectorXd&)>& f) const {
  if (times_.size() > 1 && dense_.empty())
    throw OutOfSpan("trajectory was integrated without dense output");
  static constexpr std::array<double, 5> nodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                               0.5384693101056831, 0.9061798459386640};
  static constexpr std::array<double, 5> weights{0.2369268850561891, 0.4786286704993665,
                                                 0.5688888888888889, 0.4786286704993665,
                                                 0.2369268850561891};
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < times_.size(); ++s) {
    const double h = times_[s + 1] - times_[s];
    double part = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const double theta = 0.5 * (nodes[k] + 1.0);
      part += weights[k] * f(times_[s] + theta * h, eval_dense(s, theta));
    }
    total += 0.5 * h * part;
  }
  return total;
}

Eigen::VectorXd flow_map(const Rhs& rhs, const Eigen::VectorXd& y0, double t0, double duration,
                         IntegratorConfig config) {
  config.dense_output = false;
  return integrate(rhs, y0, t0, t0 + duration, config).back();
}

void write_trajectory_csv(std::ostream& out, const std::vector<double>& times,
                          const std::vector<Eigen::VectorXd>& states,
                          const std::vector<std::string>& names) {
  out << "t";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  out << std::setprecision(17);
  for (std::size_t i = 0; i < times.size(); ++i) {
    out << times[i];
    for (Eigen::Index c = 0; c < states[i].size(); ++c) out << ',' << states[i][c];
    out << '\n';
  }
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) return table;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> row;
    while (std::getline(ss, cell, ',')) row.push_back(cell);
    row.resize(std::max(row.size(), table.header.size()));
    table.rows.push_back(std::move(row));
  }
  return table;
}

int CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ConfigError("missing CSV column " + name);
  return static_cast<int>(it - header.begin());
}

double CsvTable::number(std::size_t row, int col) const {
  const std::string& cell = rows.at(row).at(col);
  if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::stod(cell);
}

}  // namespace relcrawl
