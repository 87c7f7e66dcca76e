#include "relcrawl/params.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "relcrawl/errors.hpp"

namespace relcrawl {

CrawlerParams CrawlerParams::baseline_2d() { return CrawlerParams{}; }

CrawlerParams CrawlerParams::tetrad_3d() {
  CrawlerParams p;
  p.rest_lengths.assign(6, 1.0);
  return p;
}

double cayley_menger(std::span<const double> l) {
  // Edge order (1,2),(1,3),(1,4),(2,3),(2,4),(3,4).
  const double d12 = l[0] * l[0], d13 = l[1] * l[1], d14 = l[2] * l[2];
  const double d23 = l[3] * l[3], d24 = l[4] * l[4], d34 = l[5] * l[5];
  Eigen::Matrix<double, 5, 5> m;
  m << 0, 1, 1, 1, 1,
       1, 0, d12, d13, d14,
       1, d12, 0, d23, d24,
       1, d13, d23, 0, d34,
       1, d14, d24, d34, 0;
  return m.determinant();
}

namespace {

void require_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v))
    throw ConfigError(std::string(name) + " must be finite and >= 0");
}

bool strict_triangle(double a, double b, double c) {
  return a > 0 && b > 0 && c > 0 && a < b + c && b < a + c && c < a + b;
}

}  // namespace

void validate(const CrawlerParams& p, int dim) {
  require_nonnegative(p.nu_s, "nu_s");
  require_nonnegative(p.nu_ns, "nu_ns");
  require_nonnegative(p.nu_db, "nu_db");
  require_nonnegative(p.gravity, "gravity");
  if (!(p.kappa_s > 0.0) || !(p.kappa_np > 0.0))
    throw ConfigError("kappa_s and kappa_np must be > 0");
  if (p.profile.kind == ProfileKind::mollified && !(p.profile.mollifier_width > 0.0))
    throw ConfigError("mollifier_width must be > 0");
  const auto& l = p.rest_lengths;
  if (dim == 2) {
    if (l.size() != 3) throw ConfigError("2D model needs 3 rest lengths");
    if (!strict_triangle(l[0], l[1], l[2]))
      throw AssumptionViolated("rest lengths do not form a non-degenerate triangle");
  } else if (dim == 3) {
    if (l.size() != 6) throw ConfigError("3D model needs 6 rest lengths");
    if (!(cayley_menger(l) > 0.0))
      throw AssumptionViolated("rest lengths do not form a non-degenerate tetrad");
  } else {
    throw ConfigError("dimension must be 2 or 3");
  }
}

bool relabel_longest_spring_last(CrawlerParams& p) {
  auto& l = p.rest_lengths;
  if (l.size() != 3 || l[2] >= std::max(l[0], l[1])) return false;
  // Swapping the labels of masses k and 3 swaps springs k and 3.
  if (l[0] >= l[1])
    std::swap(l[0], l[2]);
  else
    std::swap(l[1], l[2]);
  return true;
}

void RestLengthSchedule::eval(double t, std::span<double> out) const {
  const std::size_t n = base_lengths.size();
  if (mode == ScheduleMode::paper_default) {
    const double l1 = base_lengths[0] + epsilon * std::cos(omega * t);
    const double l2 = base_lengths[1] - epsilon * std::sin(omega * (t - 0.5));
    out[0] = l1;
    out[1] = l2;
    out[2] = base_lengths[0] + base_lengths[1] + base_lengths[2] - l1 - l2;
  } else {
    for (std::size_t k = 0; k < n; ++k)
      out[k] = base_lengths[k] +
               epsilon * table[k].amplitude * std::cos(omega * t - table[k].phase);
  }
  for (std::size_t k = 0; k < n; ++k)
    if (!std::isfinite(out[k])) throw ScheduleDomain("non-finite rest length");
}

std::vector<double> RestLengthSchedule::eval(double t) const {
  std::vector<double> out(base_lengths.size());
  eval(t, out);
  return out;
}

void RestLengthSchedule::direction(double t, std::span<double> out) const {
  if (mode == ScheduleMode::paper_default) {
    out[0] = std::cos(omega * t);
    out[1] = -std::sin(omega * (t - 0.5));
    out[2] = -out[0] - out[1];
  } else {
    for (std::size_t k = 0; k < base_lengths.size(); ++k)
      out[k] = table[k].amplitude * std::cos(omega * t - table[k].phase);
  }
}

std::vector<double> RestLengthSchedule::direction(double t) const {
  std::vector<double> out(base_lengths.size());
  direction(t, out);
  return out;
}

RestLengthSchedule RestLengthSchedule::with_epsilon(double eps) const {
  RestLengthSchedule s = *this;
  s.epsilon = eps;
  return s;
}

RestLengthSchedule RestLengthSchedule::constant(std::vector<double> lengths) {
  RestLengthSchedule s;
  s.base_lengths = std::move(lengths);
  s.epsilon = 0.0;
  s.mode = ScheduleMode::user_table;
  s.table.assign(s.base_lengths.size(), SpringHarmonic{});
  return s;
}

void validate(const RestLengthSchedule& s, int dim) {
  const std::size_t springs = dim == 2 ? 3 : 6;
  if (s.base_lengths.size() != springs)
    throw ConfigError("schedule has the wrong number of base lengths");
  if (!(s.omega > 0.0) || !std::isfinite(s.omega))
    throw ConfigError("omega must be positive and finite");
  if (!(s.epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
  if (s.mode == ScheduleMode::paper_default && dim != 2)
    throw ConfigError("paper_default schedule is only defined for the 2D model");
  if (s.mode == ScheduleMode::user_table && s.table.size() != springs)
    throw ConfigError("user_table schedule needs one entry per spring");
}

}  // namespace relcrawl
