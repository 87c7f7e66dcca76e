#include "relcrawl/smoothing.hpp"

namespace relcrawl {
namespace {

// Quintic smoothstep on [0, 1] and its derivatives.
double smoothstep(double s) { return s * s * s * (10.0 + s * (-15.0 + 6.0 * s)); }
double smoothstep_d1(double s) { return 30.0 * s * s * (1.0 - s) * (1.0 - s); }
double smoothstep_d2(double s) { return 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s); }

}  // namespace

// The mollified profile is (1 - S((x + w) / 2w)) * x^2 / 2 on (-w, w).

double chi(double x, const SmoothingProfile& profile) {
  if (profile.kind == ProfileKind::raw_c1) return x < 0.0 ? 0.5 * x * x : 0.0;
  const double w = profile.mollifier_width;
  if (x <= -w) return 0.5 * x * x;
  if (x >= w) return 0.0;
  const double s = (x + w) / (2.0 * w);
  return (1.0 - smoothstep(s)) * 0.5 * x * x;
}

double chi_prime(double x, const SmoothingProfile& profile) {
  if (profile.kind == ProfileKind::raw_c1) return x < 0.0 ? x : 0.0;
  const double w = profile.mollifier_width;
  if (x <= -w) return x;
  if (x >= w) return 0.0;
  const double s = (x + w) / (2.0 * w);
  return (1.0 - smoothstep(s)) * x - smoothstep_d1(s) / (2.0 * w) * 0.5 * x * x;
}

double chi_second(double x, const SmoothingProfile& profile) {
  if (profile.kind == ProfileKind::raw_c1) return x < 0.0 ? 1.0 : 0.0;
  const double w = profile.mollifier_width;
  if (x <= -w) return 1.0;
  if (x >= w) return 0.0;
  const double s = (x + w) / (2.0 * w);
  const double k = 1.0 / (2.0 * w);
  return (1.0 - smoothstep(s)) - 2.0 * smoothstep_d1(s) * k * x -
         smoothstep_d2(s) * k * k * 0.5 * x * x;
}

}  // namespace relcrawl
