#pragma once

#include <cmath>

#include <Eigen/Core>

namespace relcrawl {

/// Second-order forward-mode differentiation number: value, gradient and
/// Hessian with respect to N independent variables.
template <int N>
struct Jet {
  using Grad = Eigen::Matrix<double, N, 1>;
  using Hess = Eigen::Matrix<double, N, N>;

  double v = 0.0;
  Grad g = Grad::Zero();
  Hess h = Hess::Zero();

  Jet() = default;
  Jet(double value) : v(value) {}  // NOLINT(google-explicit-constructor)

  static Jet variable(double value, int index) {
    Jet j(value);
    j.g[index] = 1.0;
    return j;
  }

  Jet& operator+=(const Jet& o) {
    v += o.v;
    g += o.g;
    h += o.h;
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v -= o.v;
    g -= o.g;
    h -= o.h;
    return *this;
  }
  Jet& operator*=(const Jet& o) {
    h = v * o.h + o.v * h + g * o.g.transpose() + o.g * g.transpose();
    g = v * o.g + o.v * g;
    v *= o.v;
    return *this;
  }
  Jet& operator/=(const Jet& o) { return *this *= o.reciprocal(); }

  Jet reciprocal() const {
    // f(v) = 1/v, f' = -1/v^2, f'' = 2/v^3
    const double inv = 1.0 / v;
    return chain(inv, -inv * inv, 2.0 * inv * inv * inv);
  }

  /// Applies a scalar function given its value and first two derivatives.
  Jet chain(double f, double df, double d2f) const {
    Jet r;
    r.v = f;
    r.g = df * g;
    r.h = df * h + d2f * g * g.transpose();
    return r;
  }
};

template <int N>
Jet<N> operator+(Jet<N> a, const Jet<N>& b) {
  return a += b;
}
template <int N>
Jet<N> operator-(Jet<N> a, const Jet<N>& b) {
  return a -= b;
}
template <int N>
Jet<N> operator*(Jet<N> a, const Jet<N>& b) {
  return a *= b;
}
template <int N>
Jet<N> operator/(Jet<N> a, const Jet<N>& b) {
  return a /= b;
}
template <int N>
Jet<N> operator+(Jet<N> a, double b) {
  a.v += b;
  return a;
}
template <int N>
Jet<N> operator+(double b, Jet<N> a) {
  a.v += b;
  return a;
}
template <int N>
Jet<N> operator-(Jet<N> a, double b) {
  a.v -= b;
  return a;
}
template <int N>
Jet<N> operator-(double b, const Jet<N>& a) {
  Jet<N> r;
  r.v = b - a.v;
  r.g = -a.g;
  r.h = -a.h;
  return r;
}
template <int N>
Jet<N> operator-(const Jet<N>& a) {
  return 0.0 - a;
}
template <int N>
Jet<N> operator*(Jet<N> a, double b) {
  a.v *= b;
  a.g *= b;
  a.h *= b;
  return a;
}
template <int N>
Jet<N> operator*(double b, Jet<N> a) {
  return a * b;
}
template <int N>
Jet<N> operator/(Jet<N> a, double b) {
  return a * (1.0 / b);
}
template <int N>
Jet<N> operator/(double b, const Jet<N>& a) {
  return a.reciprocal() * b;
}

template <int N>
Jet<N> sqrt(const Jet<N>& a) {
  const double s = std::sqrt(a.v);
  return a.chain(s, 0.5 / s, -0.25 / (s * a.v));
}

inline double value_of(double x) { return x; }
template <int N>
double value_of(const Jet<N>& x) {
  return x.v;
}

}  // namespace relcrawl
