#include "relcrawl/model.hpp"

#include <cmath>
#include <string>

#include "relcrawl/errors.hpp"

namespace relcrawl {

Eigen::VectorXd pack(const PhaseState& s) {
  Eigen::VectorXd y(s.q.size() + s.u.size());
  y << s.q, s.u;
  return y;
}

PhaseState unpack(const Eigen::VectorXd& y, double t) {
  const Eigen::Index n = y.size() / 2;
  return PhaseState{y.head(n), y.tail(n), t};
}

template <int Dim>
CrawlerModel<Dim>::CrawlerModel(CrawlerParams params) : params_(std::move(params)) {
  validate(params_, Dim);
}

template <int Dim>
void CrawlerModel<Dim>::check_distances(const Coords& q) const {
  for (int i = 0; i < L::kMasses; ++i)
    for (int j = i + 1; j < L::kMasses; ++j) {
      const double d = (q.template segment<Dim>(Dim * i) - q.template segment<Dim>(Dim * j)).norm();
      if (!(d >= kMinDistance))
        throw DegenerateConfiguration("masses " + std::to_string(i + 1) + " and " +
                                      std::to_string(j + 1) + " coincide");
    }
}

template <int Dim>
typename CrawlerModel<Dim>::Lengths CrawlerModel<Dim>::spring_lengths(const Coords& q) const {
  check_distances(q);
  constexpr auto pairs = spring_pairs<Dim>();
  Lengths l;
  for (int k = 0; k < kSprings; ++k)
    l[k] = (q.template segment<Dim>(Dim * pairs[k][0]) -
            q.template segment<Dim>(Dim * pairs[k][1])).norm();
  return l;
}

template <int Dim>
double CrawlerModel<Dim>::shape_potential(const Coords& q, std::span<const double> rest) const {
  const Lengths l = spring_lengths(q);
  double sum = 0.0;
  for (int k = 0; k < kSprings; ++k) sum += (l[k] - rest[k]) * (l[k] - rest[k]);
  return 0.5 * params_.kappa_s * sum;
}

template <int Dim>
double CrawlerModel<Dim>::ground_potential(const Coords& q) const {
  double sum = 0.0;
  for (int i = 0; i < L::kMasses; ++i) sum += chi(q[Dim * i + Dim - 1], params_.profile);
  return params_.kappa_np * sum;
}

template <int Dim>
double CrawlerModel<Dim>::gravity_potential(const Coords& q) const {
  double sum = 0.0;
  for (int i = 0; i < L::kMasses; ++i) sum += q[Dim * i + Dim - 1];
  return params_.gravity * sum;
}

template <int Dim>
double CrawlerModel<Dim>::total_potential(const Coords& q, std::span<const double> rest) const {
  return shape_potential(q, rest) + ground_potential(q) + gravity_potential(q);
}

template <int Dim>
typename CrawlerModel<Dim>::Coords CrawlerModel<Dim>::potential_gradient(
    const Coords& q, std::span<const double> rest) const {
  check_distances(q);
  constexpr auto pairs = spring_pairs<Dim>();
  Coords g = Coords::Zero();
  for (int k = 0; k < kSprings; ++k) {
    const int i = pairs[k][0], j = pairs[k][1];
    const Eigen::Matrix<double, Dim, 1> d =
        q.template segment<Dim>(Dim * i) - q.template segment<Dim>(Dim * j);
    const double len = d.norm();
    const Eigen::Matrix<double, Dim, 1> f = params_.kappa_s * (len - rest[k]) / len * d;
    g.template segment<Dim>(Dim * i) += f;
    g.template segment<Dim>(Dim * j) -= f;
  }
  for (int i = 0; i < L::kMasses; ++i) {
    const double z = q[Dim * i + Dim - 1];
    g[Dim * i + Dim - 1] += params_.kappa_np * chi_prime(z, params_.profile) + params_.gravity;
  }
  return g;
}

template <int Dim>
typename CrawlerModel<Dim>::Matrix CrawlerModel<Dim>::potential_hessian(
    const Coords& q, std::span<const double> rest) const {
  check_distances(q);
  using J = Jet<kCoords>;
  std::array<J, kCoords> qj;
  for (int c = 0; c < kCoords; ++c) qj[c] = J::variable(q[c], c);
  return potential_t(qj, rest).h;
}

template <int Dim>
typename CrawlerModel<Dim>::Coords CrawlerModel<Dim>::shape_damping_force(const Coords& q,
                                                                          const Coords& u) const {
  check_distances(q);
  constexpr auto pairs = spring_pairs<Dim>();
  Coords f = Coords::Zero();
  for (int k = 0; k < kSprings; ++k) {
    const int i = pairs[k][0], j = pairs[k][1];
    const Eigen::Matrix<double, Dim, 1> d =
        q.template segment<Dim>(Dim * i) - q.template segment<Dim>(Dim * j);
    const Eigen::Matrix<double, Dim, 1> dv =
        u.template segment<Dim>(Dim * i) - u.template segment<Dim>(Dim * j);
    // F_ij = -nu_s <u_i - u_j, q_i - q_j> / |q_i - q_j|^2 (q_i - q_j), and F_ji.
    const Eigen::Matrix<double, Dim, 1> fij = -params_.nu_s * dv.dot(d) / d.squaredNorm() * d;
    f.template segment<Dim>(Dim * i) += fij;
    f.template segment<Dim>(Dim * j) -= fij;
  }
  return f;
}

template <int Dim>
double CrawlerModel<Dim>::noslip_weight(double z) const {
  const double c = chi_prime(z, params_.profile);
  return params_.noslip_sign == NoslipSign::dissipative ? std::abs(c) : c;
}

template <int Dim>
double CrawlerModel<Dim>::debounce_weight(double z) const {
  return params_.debounce_weight == DebounceWeight::chi ? chi(z, params_.profile)
                                                        : std::abs(chi_prime(z, params_.profile));
}

template <int Dim>
typename CrawlerModel<Dim>::Coords CrawlerModel<Dim>::noslip_force(const Coords& q,
                                                                   const Coords& u) const {
  Coords f = Coords::Zero();
  for (int i = 0; i < L::kMasses; ++i) {
    const double w = params_.nu_ns * noslip_weight(q[Dim * i + Dim - 1]);
    for (int c = 0; c < Dim - 1; ++c) f[Dim * i + c] = -w * u[Dim * i + c];
  }
  return f;
}

template <int Dim>
typename CrawlerModel<Dim>::Coords CrawlerModel<Dim>::debounce_force(const Coords& q,
                                                                     const Coords& u) const {
  Coords f = Coords::Zero();
  for (int i = 0; i < L::kMasses; ++i) {
    const int zi = Dim * i + Dim - 1;
    f[zi] = -params_.nu_db * debounce_weight(q[zi]) * u[zi];
  }
  return f;
}

template <int Dim>
typename CrawlerModel<Dim>::Coords CrawlerModel<Dim>::viscous_force(const Coords& q,
                                                                    const Coords& u) const {
  return shape_damping_force(q, u) + noslip_force(q, u) + debounce_force(q, u);
}

template <int Dim>
typename CrawlerModel<Dim>::Matrix CrawlerModel<Dim>::rayleigh_shape_matrix(
    const Coords& q) const {
  check_distances(q);
  constexpr auto pairs = spring_pairs<Dim>();
  Matrix m = Matrix::Zero();
  for (int k = 0; k < kSprings; ++k) {
    const int i = pairs[k][0], j = pairs[k][1];
    Coords grad = Coords::Zero();  // d ell_k / dq
    const Eigen::Matrix<double, Dim, 1> n =
        (q.template segment<Dim>(Dim * i) - q.template segment<Dim>(Dim * j)).normalized();
    grad.template segment<Dim>(Dim * i) = n;
    grad.template segment<Dim>(Dim * j) = -n;
    m += params_.nu_s * grad * grad.transpose();
  }
  return m;
}

template <int Dim>
typename CrawlerModel<Dim>::Matrix CrawlerModel<Dim>::rayleigh_noslip_matrix(
    const Coords& q) const {
  Matrix m = Matrix::Zero();
  for (int i = 0; i < L::kMasses; ++i) {
    const double w = params_.nu_ns * noslip_weight(q[Dim * i + Dim - 1]);
    for (int c = 0; c < Dim - 1; ++c) m(Dim * i + c, Dim * i + c) = w;
  }
  return m;
}

template <int Dim>
typename CrawlerModel<Dim>::Matrix CrawlerModel<Dim>::rayleigh_debounce_matrix(
    const Coords& q) const {
  Matrix m = Matrix::Zero();
  for (int i = 0; i < L::kMasses; ++i) {
    const int zi = Dim * i + Dim - 1;
    m(zi, zi) = params_.nu_db * debounce_weight(q[zi]);
  }
  return m;
}

template <int Dim>
typename CrawlerModel<Dim>::Matrix CrawlerModel<Dim>::rayleigh_matrix(const Coords& q) const {
  return rayleigh_shape_matrix(q) + rayleigh_noslip_matrix(q) + rayleigh_debounce_matrix(q);
}

template <int Dim>
double CrawlerModel<Dim>::rayleigh_value(const Coords& q, const Coords& u) const {
  check_distances(q);
  constexpr auto pairs = spring_pairs<Dim>();
  double r = 0.0;
  for (int k = 0; k < kSprings; ++k) {
    const int i = pairs[k][0], j = pairs[k][1];
    const Eigen::Matrix<double, Dim, 1> d =
        q.template segment<Dim>(Dim * i) - q.template segment<Dim>(Dim * j);
    const double rate = (u.template segment<Dim>(Dim * i) - u.template segment<Dim>(Dim * j))
                            .dot(d) / d.norm();
    r += 0.5 * params_.nu_s * rate * rate;
  }
  for (int i = 0; i < L::kMasses; ++i) {
    const double z = q[Dim * i + Dim - 1];
    const double wns = params_.nu_ns * noslip_weight(z);
    for (int c = 0; c < Dim - 1; ++c) r += 0.5 * wns * u[Dim * i + c] * u[Dim * i + c];
    const double vz = u[Dim * i + Dim - 1];
    r += 0.5 * params_.nu_db * debounce_weight(z) * vz * vz;
  }
  return r;
}

template <int Dim>
typename CrawlerModel<Dim>::Coords CrawlerModel<Dim>::acceleration(
    const Coords& q, const Coords& u, std::span<const double> rest) const {
  return viscous_force(q, u) - potential_gradient(q, rest);
}

template <int Dim>
PhaseState CrawlerModel<Dim>::eom_rhs(const PhaseState& state,
                                      const RestLengthSchedule& schedule) const {
  std::array<double, kSprings> rest{};
  schedule.eval(state.t, rest);
  const Coords q = state.q, u = state.u;
  return PhaseState{u, acceleration(q, u, rest), state.t};
}

template <int Dim>
void CrawlerModel<Dim>::rhs(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt,
                            const RestLengthSchedule& schedule) const {
  std::array<double, kSprings> rest{};
  schedule.eval(t, rest);
  const Coords q = y.template head<kCoords>();
  const Coords u = y.template segment<kCoords>(kCoords);
  dydt.resize(2 * kCoords);
  dydt.template head<kCoords>() = u;
  dydt.template segment<kCoords>(kCoords) = acceleration(q, u, rest);
}

template <int Dim>
double CrawlerModel<Dim>::total_energy(const PhaseState& state,
                                       std::span<const double> rest) const {
  const Coords q = state.q;
  return 0.5 * state.u.squaredNorm() + total_potential(q, rest);
}

template class CrawlerModel<2>;
template class CrawlerModel<3>;

}  // namespace relcrawl
