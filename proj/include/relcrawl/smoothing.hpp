#pragma once

#include "relcrawl/jet.hpp"

namespace relcrawl {

enum class ProfileKind { raw_c1, mollified };

/// Contact-regularization profile: chi(x) = x^2/2 below the ground, 0 above.
struct SmoothingProfile {
  ProfileKind kind = ProfileKind::raw_c1;
  double mollifier_width = 1e-3;  // only used when kind == mollified
};

double chi(double x, const SmoothingProfile& profile = {});
double chi_prime(double x, const SmoothingProfile& profile = {});
double chi_second(double x, const SmoothingProfile& profile = {});

/// chi lifted to Jet arguments through its value and first two derivatives.
template <int N>
Jet<N> chi(const Jet<N>& x, const SmoothingProfile& profile = {}) {
  return x.chain(chi(x.v, profile), chi_prime(x.v, profile), chi_second(x.v, profile));
}

}  // namespace relcrawl
