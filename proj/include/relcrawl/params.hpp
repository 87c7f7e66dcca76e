#pragma once

#include <numbers>
#include <span>
#include <vector>

#include "relcrawl/smoothing.hpp"

namespace relcrawl {

/// Particles closer than this are a DegenerateConfiguration.
inline constexpr double kMinDistance = 1e-8;

/// Which contact weight multiplies the vertical de-bounce damping.
enum class DebounceWeight {
  chi,        // nu_db * chi(z) as written in the model equations
  chi_prime,  // nu_db * |chi'(z)|, reproduces the published sweep values
};

/// Sign convention of the no-slip friction.
enum class NoslipSign {
  dissipative,  // -nu_ns * |chi'(z)| * xdot
  literal,      // -nu_ns * chi'(z) * xdot, anti-dissipative below the ground
};

struct CrawlerParams {
  double kappa_s = 10.0;
  double nu_s = 10.0;
  double kappa_np = 10.0;
  double nu_ns = 10.0;
  double nu_db = 5.0;
  /// 3 entries (2D, spring k opposite mass k) or 6 entries (3D, pairs in
  /// lexicographic order (1,2),(1,3),(1,4),(2,3),(2,4),(3,4)).
  std::vector<double> rest_lengths{1.0, 1.0, 1.0};
  double gravity = 1.0;
  SmoothingProfile profile{};
  DebounceWeight debounce_weight = DebounceWeight::chi_prime;
  NoslipSign noslip_sign = NoslipSign::dissipative;

  /// Parameter set used for the crawling experiments.
  static CrawlerParams baseline_2d();
  /// Regular unit tetrad with the same stiffness and viscosity values.
  static CrawlerParams tetrad_3d();
};

/// Throws AssumptionViolated for a degenerate rest shape and ConfigError for
/// out-of-range constants. `dim` is 2 or 3.
void validate(const CrawlerParams& params, int dim);

/// 288 * volume^2 of the tetrad with the given six edge lengths.
double cayley_menger(std::span<const double> lengths);

/// Relabels a 2D rest triangle so the longest spring is spring 3 (between the
/// two grounded masses). Returns true when a relabeling happened.
bool relabel_longest_spring_last(CrawlerParams& params);

enum class ScheduleMode { paper_default, user_table };

/// One harmonic per spring: amplitude * cos(omega * t - phase).
struct SpringHarmonic {
  double amplitude = 0.0;
  double phase = 0.0;
};

/// Time-periodic rest lengths driven with amplitude epsilon.
struct RestLengthSchedule {
  std::vector<double> base_lengths{1.0, 1.0, 1.0};
  double epsilon = 0.0;
  double omega = 2.0 * std::numbers::pi;
  ScheduleMode mode = ScheduleMode::paper_default;
  std::vector<SpringHarmonic> table;  // one entry per spring in user_table mode

  double period() const { return 2.0 * std::numbers::pi / omega; }

  /// Rest lengths at time t. Throws ScheduleDomain on non-finite output.
  void eval(double t, std::span<double> out) const;
  std::vector<double> eval(double t) const;

  /// Derivative of the rest lengths with respect to epsilon at time t.
  void direction(double t, std::span<double> out) const;
  std::vector<double> direction(double t) const;

  RestLengthSchedule with_epsilon(double eps) const;
  /// A constant schedule holding the given lengths.
  static RestLengthSchedule constant(std::vector<double> lengths);
};

void validate(const RestLengthSchedule& schedule, int dim);

}  // namespace relcrawl
