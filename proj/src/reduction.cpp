#include "relcrawl/reduction.hpp"

#include <cmath>

namespace relcrawl {

namespace {

Eigen::Matrix2d skew() {
  Eigen::Matrix2d j;
  j << 0.0, -1.0, 1.0, 0.0;
  return j;
}

void require_size(const Eigen::VectorXd& v, Eigen::Index n, const char* what) {
  if (v.size() != n) throw ConfigError(std::string(what) + ": wrong vector size");
}

}  // namespace

PhaseState act_r(double g, const PhaseState& state) {
  PhaseState out = state;
  for (Eigen::Index i = 0; i < out.q.size(); i += 2) out.q[i] += g;
  return out;
}

PhaseState act_se2(const SE2Element& g, const PhaseState& state) {
  PhaseState out = state;
  const Eigen::Matrix2d rot = rotation(g.phi);
  for (Eigen::Index i = 0; i < out.q.size(); i += 3) {
    out.q.segment<2>(i) = se2_apply(g, state.q.segment<2>(i));
    out.u.segment<2>(i) = rot * state.u.segment<2>(i);
  }
  return out;
}

Eigen::Matrix<double, 5, 1> ReducedPoint2D::vec() const {
  Eigen::Matrix<double, 5, 1> v;
  v << z1, z2, l1, l2, l3;
  return v;
}

ReducedPoint2D ReducedPoint2D::from_vec(const Eigen::Matrix<double, 5, 1>& v) {
  return {v[0], v[1], v[2], v[3], v[4]};
}

Projection2D project_2d(const PhaseState& state) {
  require_size(state.q, 6, "project_2d");
  const auto& q = state.q;
  const auto& u = state.u;
  const Eigen::Vector2d p1 = q.segment<2>(0), p2 = q.segment<2>(2), p3 = q.segment<2>(4);
  if (!(p2.x() > p1.x())) throw ChartDomain("mass 1 is not left of mass 2");
  const Eigen::Vector2d e12 = p2 - p1, e13 = p3 - p1;
  if (!(e12.x() * e13.y() - e12.y() * e13.x() > 0.0))
    throw ChartDomain("mass 3 is not above the base edge");
  Projection2D out;
  const Eigen::Vector2d d1 = p2 - p3, d2 = p1 - p3, d3 = p1 - p2;
  out.point = {p1.y(), p2.y(), d1.norm(), d2.norm(), d3.norm()};
  const Eigen::Vector2d u1 = u.segment<2>(0), u2 = u.segment<2>(2), u3 = u.segment<2>(4);
  out.velocity << u1.y(), u2.y(), d1.dot(u2 - u3) / out.point.l1, d2.dot(u1 - u3) / out.point.l2,
      d3.dot(u1 - u2) / out.point.l3, u3.x();
  out.fiber = p3.x();
  return out;
}

Eigen::Matrix<double, 6, 1> lift_2d(const ReducedPoint2D& rp, double fiber) {
  const auto off = mass3_offset(rp.z1, rp.z2, rp.l1, rp.l2, rp.l3);
  const double dz = rp.z2 - rp.z1;
  const double gap = std::sqrt(rp.l3 * rp.l3 - dz * dz);
  const double x1 = fiber - off[0];
  Eigen::Matrix<double, 6, 1> q;
  q << x1, rp.z1, x1 + gap, rp.z2, fiber, off[1];
  return q;
}

Eigen::Matrix<double, 9, 1> ReducedPoint3D::vec() const {
  Eigen::Matrix<double, 9, 1> v;
  v << l[0], l[1], l[2], l[3], l[4], l[5], z[0], z[1], z[2];
  return v;
}

ReducedPoint3D ReducedPoint3D::from_vec(const Eigen::Matrix<double, 9, 1>& v) {
  ReducedPoint3D rp;
  for (int k = 0; k < 6; ++k) rp.l[k] = v[k];
  for (int k = 0; k < 3; ++k) rp.z[k] = v[6 + k];
  return rp;
}

Eigen::Matrix<double, 12, 1> lift_3d(const ReducedPoint3D& rp, const SE2Element& g) {
  const auto body = tetrad_body_positions(rp.l, rp.z);
  Eigen::Matrix<double, 12, 1> q;
  for (int i = 0; i < 4; ++i) {
    q.segment<2>(3 * i) = se2_apply(g, Eigen::Vector2d(body[3 * i], body[3 * i + 1]));
    q[3 * i + 2] = body[3 * i + 2];
  }
  return q;
}

ReducedPoint3D project_3d(const Eigen::Matrix<double, 12, 1>& q) {
  constexpr auto pairs = spring_pairs<3>();
  ReducedPoint3D rp;
  for (int k = 0; k < 6; ++k)
    rp.l[k] = (q.segment<3>(3 * pairs[k][0]) - q.segment<3>(3 * pairs[k][1])).norm();
  for (int i = 0; i < 3; ++i) rp.z[i] = q[3 * i + 2];
  return rp;
}

// -- 2D section --------------------------------------------------------------

SectionState to_section_2d(const PhaseState& state) {
  require_size(state.q, 6, "to_section_2d");
  const auto& q = state.q;
  SectionState s;
  s.reduced.resize(kReducedSize2D);
  s.reduced << q[0] - q[4], q[1], q[2] - q[4], q[3], q[5], state.u;
  s.fiber = Eigen::VectorXd::Constant(1, q[4]);
  return s;
}

PhaseState from_section_2d(const Eigen::VectorXd& reduced, double x3, double t) {
  require_size(reduced, kReducedSize2D, "from_section_2d");
  PhaseState st;
  st.q.resize(6);
  st.q << reduced[0] + x3, reduced[1], reduced[2] + x3, reduced[3], x3, reduced[4];
  st.u = reduced.tail<6>();
  st.t = t;
  return st;
}

Eigen::MatrixXd section_projection_2d() {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(5, 6);
  p(0, 0) = 1.0, p(0, 4) = -1.0;
  p(1, 1) = 1.0;
  p(2, 2) = 1.0, p(2, 4) = -1.0;
  p(3, 3) = 1.0;
  p(4, 5) = 1.0;
  return p;
}

Eigen::MatrixXd section_embedding_2d() {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(6, 5);
  r(0, 0) = r(1, 1) = r(2, 2) = r(3, 3) = r(5, 4) = 1.0;
  return r;
}

Rhs reduced_rhs_2d(const Crawler2D& model, const RestLengthSchedule& schedule) {
  return [&model, schedule](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt) {
    Crawler2D::Coords q;
    q << y[0], y[1], y[2], y[3], 0.0, y[4];
    const Crawler2D::Coords u = y.segment<6>(5);
    std::array<double, 3> rest;
    schedule.eval(t, rest);
    const Crawler2D::Coords a = model.acceleration(q, u, rest);
    dydt.resize(12);
    dydt << u[0] - u[4], u[1], u[2] - u[4], u[3], u[5], a, u[4];
  };
}

// -- 3D section --------------------------------------------------------------

SectionState to_section_3d(const PhaseState& state) {
  require_size(state.q, 12, "to_section_3d");
  const auto& q = state.q;
  const Eigen::Vector2d p1 = q.segment<2>(0);
  const Eigen::Vector2d d = q.segment<2>(3) - p1;
  if (!(d.norm() >= kMinDistance)) throw ChartDomain("masses 1 and 2 share a vertical line");
  const double theta = std::atan2(d.y(), d.x());
  const Eigen::Matrix2d back = rotation(-theta);
  Eigen::Matrix<double, 12, 1> qb, wb;
  for (int i = 0; i < 4; ++i) {
    qb.segment<2>(3 * i) = back * (q.segment<2>(3 * i) - p1);
    qb[3 * i + 2] = q[3 * i + 2];
    wb.segment<2>(3 * i) = back * state.u.segment<2>(3 * i);
    wb[3 * i + 2] = state.u[3 * i + 2];
  }
  SectionState s;
  s.reduced.resize(kReducedSize3D);
  s.reduced << qb[2], qb[3], qb[5], qb[6], qb[7], qb[8], qb[9], qb[10], qb[11], wb;
  s.fiber.resize(3);
  s.fiber << theta, p1.x(), p1.y();
  return s;
}

namespace {

Eigen::Matrix<double, 12, 1> body_config(const Eigen::VectorXd& r) {
  Eigen::Matrix<double, 12, 1> qb;
  qb << 0.0, 0.0, r[0], r[1], 0.0, r[2], r[3], r[4], r[5], r[6], r[7], r[8];
  return qb;
}

}  // namespace

PhaseState from_section_3d(const Eigen::VectorXd& reduced, const SE2Element& g, double t) {
  require_size(reduced, kReducedSize3D, "from_section_3d");
  const Eigen::Matrix<double, 12, 1> qb = body_config(reduced);
  const Eigen::Matrix2d rot = rotation(g.phi);
  PhaseState st;
  st.q.resize(12);
  st.u.resize(12);
  for (int i = 0; i < 4; ++i) {
    st.q.segment<2>(3 * i) = se2_apply(g, qb.segment<2>(3 * i));
    st.q[3 * i + 2] = qb[3 * i + 2];
    st.u.segment<2>(3 * i) = rot * reduced.segment<2>(9 + 3 * i);
    st.u[3 * i + 2] = reduced[9 + 3 * i + 2];
  }
  st.t = t;
  return st;
}

Eigen::MatrixXd section_projection_3d(const Eigen::VectorXd& q) {
  require_size(q, 12, "section_projection_3d");
  const Eigen::Vector2d d = q.segment<2>(3) - q.segment<2>(0);
  const double len = d.norm();
  if (!(len >= kMinDistance)) throw ChartDomain("masses 1 and 2 share a vertical line");
  const double theta = std::atan2(d.y(), d.x());
  const Eigen::Matrix2d back = rotation(-theta);
  const Eigen::Matrix2d j = skew();

  // Body-frame perturbations: db_i = B(dp_i - dp_1) - dtheta J b_i with
  // dtheta = (B(dp_2 - dp_1))_y / |p2 - p1|.
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(12, 12);  // d(body config) / dq
  Eigen::RowVectorXd dtheta = Eigen::RowVectorXd::Zero(12);
  dtheta.segment<2>(3) = back.row(1) / len;
  dtheta.segment<2>(0) = -back.row(1) / len;
  for (int i = 1; i < 4; ++i) {
    const Eigen::Vector2d b = back * (q.segment<2>(3 * i) - q.segment<2>(0));
    full.block<2, 2>(3 * i, 3 * i) += back;
    full.block<2, 2>(3 * i, 0) -= back;
    full.block(3 * i, 0, 2, 12) -= (j * b) * dtheta;
  }
  for (int i = 0; i < 4; ++i) full(3 * i + 2, 3 * i + 2) = 1.0;
  static constexpr int rows[9] = {2, 3, 5, 6, 7, 8, 9, 10, 11};
  Eigen::MatrixXd p(9, 12);
  for (int k = 0; k < 9; ++k) p.row(k) = full.row(rows[k]);
  return p;
}

Eigen::MatrixXd section_embedding_3d() {
  static constexpr int rows[9] = {2, 3, 5, 6, 7, 8, 9, 10, 11};
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(12, 9);
  for (int k = 0; k < 9; ++k) r(rows[k], k) = 1.0;
  return r;
}

Se2Velocity body_velocity_3d(const Eigen::VectorXd& reduced) {
  require_size(reduced, kReducedSize3D, "body_velocity_3d");
  const double b2x = reduced[1];
  if (!(std::abs(b2x) >= kMinDistance)) throw ChartDomain("masses 1 and 2 share a vertical line");
  return {(reduced[9 + 4] - reduced[9 + 1]) / b2x, reduced[9], reduced[10]};
}

Rhs reduced_rhs_3d(const Crawler3D& model, const RestLengthSchedule& schedule) {
  return [&model, schedule](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt) {
    const Eigen::Matrix<double, 12, 1> qb = body_config(y);
    const Crawler3D::Coords w = y.segment<12>(9);
    std::array<double, 6> rest;
    schedule.eval(t, rest);
    const Crawler3D::Coords a = model.acceleration(qb, w, rest);
    const Se2Velocity xi = body_velocity_3d(y.head(kReducedSize3D));
    const Eigen::Matrix2d j = skew();

    Eigen::Matrix<double, 12, 1> db, dw;
    const Eigen::Vector2d w1 = w.segment<2>(0);
    for (int i = 0; i < 4; ++i) {
      db.segment<2>(3 * i) = w.segment<2>(3 * i) - w1 - xi.omega * (j * qb.segment<2>(3 * i));
      db[3 * i + 2] = w[3 * i + 2];
      dw.segment<2>(3 * i) = a.segment<2>(3 * i) - xi.omega * (j * w.segment<2>(3 * i));
      dw[3 * i + 2] = a[3 * i + 2];
    }
    dydt.resize(24);
    dydt.head<9>() << db[2], db[3], db[5], db[6], db[7], db[8], db[9], db[10], db[11];
    dydt.segment<12>(9) = dw;
    const Eigen::Vector2d dpos = rotation(y[21]) * w1;
    dydt[21] = xi.omega;
    dydt[22] = dpos.x();
    dydt[23] = dpos.y();
  };
}

// -- Reconstruction ------------------------------------------------------------

double reconstruct_shift_2d(std::span<const double> v3, double period) {
  const std::size_t n = v3.size();
  if (n < 3 || n % 2 == 0) throw ConfigError("Simpson quadrature needs an odd sample count >= 3");
  const double h = period / static_cast<double>(n - 1);
  double sum = v3[0] + v3[n - 1];
  for (std::size_t i = 1; i + 1 < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * v3[i];
  return sum * h / 3.0;
}

double reconstruct_shift_2d(const Trajectory& traj, int v3_index) {
  return traj.integrate_scalar(
      [v3_index](double, const Eigen::VectorXd& y) { return y[v3_index]; });
}

SE2Element reconstruct_shift_3d(const std::function<Se2Velocity(double)>& xi, double period,
                                const IntegratorConfig& config) {
  Rhs rhs = [&xi](double t, const Eigen::VectorXd& g, Eigen::VectorXd& dg) {
    const Se2Velocity v = xi(t);
    const Eigen::Vector2d d = rotation(g[0]) * Eigen::Vector2d(v.xi_x, v.xi_y);
    dg.resize(3);
    dg << v.omega, d.x(), d.y();
  };
  IntegratorConfig cfg = config;
  cfg.dense_output = false;
  cfg.controlled_dims = 0;
  const Eigen::VectorXd g = flow_map(rhs, Eigen::Vector3d::Zero(), 0.0, period, cfg);
  return {wrap_angle(g[0]), g[1], g[2]};
}

}  // namespace relcrawl
