// Acceptance checks, one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>

#include "oracles.hpp"
#include "relcrawl/cycles.hpp"
#include "relcrawl/equilibrium.hpp"
#include "relcrawl/io.hpp"
#include "relcrawl/reduction.hpp"

using namespace relcrawl;

namespace {

// Pinned tolerances.
constexpr double kShiftRel = 0.05;           // shift values against the reference table
constexpr double kExponentAbs = 0.02;        // p column against the reference table
constexpr double kRefinementRel = 1e-6;      // shift change when integrator tolerances are halved
constexpr double kSlopeLo = 1.95, kSlopeHi = 2.05;
constexpr double kFirstOrderAbs = 1e-8;
constexpr double kSecondOrderRel = 0.10;
constexpr double kZeroEigen = 1e-9;
constexpr double kTranslationAlign = 1e-8;   // 1 - |cos| between kernel vector and translation
constexpr double kOracleAbs = 1e-6;
constexpr double kEnergyRel = 1e-5;          // |dE/dt + 2R| relative to max(1, R)
constexpr double kTranslationEquivRel = 1e-12;
constexpr double kPlanarEquivRel = 1e-10;
constexpr double kReconstructionAbs = 1e-9;
constexpr double kRelPeriodicAbs = 1e-6;
constexpr double kFiberAbs = 1e-12;
constexpr double kTwoPeriodAbs = 1e-5;
constexpr double kCurvatureMin = 1e-6;       // |delta phi| for a curving path
constexpr double kSettleRel = 0.05;

const double kTableShift[] = {0.17870, 0.04666, 0.01172, 0.002934, 0.000734, 0.000183};
const double kTableExponent[] = {1.9372, 1.9932, 1.9980, 1.9990, 2.0039};
const std::vector<double> kAmplitudes{1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125};

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

RestLengthSchedule baseline_schedule(double eps) {
  RestLengthSchedule s;
  s.epsilon = eps;
  return s;
}

Outcome shift_table() {
  Outcome o;
  const Crawler2D model(CrawlerParams::baseline_2d());
  const ScalingStudy study = scaling_study(model, RestLengthSchedule{}, kAmplitudes);
  double worst_rel = 0.0, worst_p = 0.0;
  for (std::size_t i = 0; i < study.rows.size(); ++i) {
    const auto& r = study.rows[i];
    worst_rel = std::max(worst_rel, std::abs(r.delta_x / kTableShift[i] - 1.0));
    if (i < 5) worst_p = std::max(worst_p, std::abs(r.p - kTableExponent[i]));
    if (r.status != "ok") o.require(false, "row " + std::to_string(i) + " status " + r.status);
  }
  o.require(worst_rel <= kShiftRel, "max shift rel dev " + fmt("%.2e", worst_rel));
  o.require(worst_p <= kExponentAbs, "max p dev " + fmt("%.2e", worst_p));
  o.require(std::isnan(study.rows.back().p), "last p empty");

  CycleOptions fine;
  fine.integrator.rtol /= 2;
  fine.integrator.atol /= 2;
  const ScalingStudy refined = scaling_study(model, RestLengthSchedule{}, kAmplitudes, fine);
  double worst_refine = 0.0;
  for (std::size_t i = 0; i < refined.rows.size(); ++i)
    worst_refine = std::max(worst_refine,
                            std::abs(refined.rows[i].delta_x / study.rows[i].delta_x - 1.0));
  o.require(worst_refine <= kRefinementRel, "halved-tolerance rel change " + fmt("%.2e", worst_refine));
  return o;
}

Outcome quadratic_law() {
  Outcome o;
  const Crawler2D model(CrawlerParams::baseline_2d());
  const ScalingStudy study =
      scaling_study(model, RestLengthSchedule{}, {0.25, 0.125, 0.0625, 0.03125});
  const double slope = fitted_exponent(study.rows);
  o.require(slope >= kSlopeLo && slope <= kSlopeHi, "slope " + fmt("%.5f", slope));
  const double first = check_first_order_shift(first_order_response(model, baseline_schedule(1.0)));
  o.require(std::abs(first) <= kFirstOrderAbs, "first-order shift " + fmt("%.2e", first));
  return o;
}

Outcome second_order() {
  Outcome o;
  const auto p = CrawlerParams::baseline_2d();
  const Crawler2D model(p);
  const LinearResponse lin = first_order_response(model, baseline_schedule(1.0));
  const double d2 = second_order_shift(model, lin);
  const double eps = 1.0 / 32;
  const StroboscopicMap<2> map(model, baseline_schedule(eps));
  const CycleResult c = find_limit_cycle(map, equilibrium_section_2d(p) + eps * lin.initial);
  const double ratio = c.delta_x / (eps * eps);
  o.require(std::abs(d2 / ratio - 1.0) <= kSecondOrderRel,
            "coefficient " + fmt("%.5f", d2) + " vs " + fmt("%.5f", ratio));
  return o;
}

Outcome certification() {
  Outcome o;
  const auto p = CrawlerParams::baseline_2d();
  const StabilityReport r = certify_stability(p);
  o.require(r.gradient_norm <= kTolGrad, "gradient " + fmt("%.1e", r.gradient_norm));
  o.require(r.hessian_eigenvalues.minCoeff() > 0.0, "min Hessian eig " + fmt("%.4f", r.hessian_eigenvalues.minCoeff()));
  o.require(r.rayleigh_eigenvalues.minCoeff() > 0.0,
            "min Rayleigh eig " + fmt("%.4f", r.rayleigh_eigenvalues.minCoeff()));
  o.require(r.spectral_abscissa < 0.0, "abscissa " + fmt("%.6f", r.spectral_abscissa));

  const Crawler2D model(p);
  const Crawler2D::Coords q = r.configuration;
  const Eigen::MatrixXd a = unreduced_linearization(model.potential_hessian(q, model.base_rest()),
                                                    model.rayleigh_matrix(q));
  Eigen::EigenSolver<Eigen::MatrixXd> es(a);
  int zeros = 0;
  double align = 1.0;
  for (int i = 0; i < a.rows(); ++i) {
    if (std::abs(es.eigenvalues()[i]) > kZeroEigen) continue;
    ++zeros;
    Eigen::VectorXd v = es.eigenvectors().col(i).real();
    Eigen::VectorXd e = Eigen::VectorXd::Zero(12);
    e[0] = e[2] = e[4] = 1.0;
    align = 1.0 - std::abs(v.normalized().dot(e.normalized()));
  }
  o.require(zeros == 1, std::to_string(zeros) + " zero eigenvalue(s)");
  o.require(zeros == 1 && align <= kTranslationAlign, "translation alignment defect " + fmt("%.1e", align));
  return o;
}

Outcome oracle_equivalence() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> len(0.8, 1.3);
  const double kappas[] = {10.0, 100.0};
  double worst = 0.0;
  int cases = 0;
  while (cases < 5) {
    CrawlerParams p = CrawlerParams::baseline_2d();
    p.rest_lengths = {len(rng), len(rng), len(rng)};
    relabel_longest_spring_last(p);
    try {
      validate(p, 2);
    } catch (const Error&) {
      continue;
    }
    p.kappa_s = kappas[cases % 2];
    p.kappa_np = kappas[(cases / 2) % 2];
    const ReducedPoint2D rp = homotopy_equilibrium(p);
    Eigen::VectorXd x0(5);
    x0 << 0.0, 0.0, p.rest_lengths[0], p.rest_lengths[1], p.rest_lengths[2];
    const Eigen::VectorXd best = oracle::nelder_mead(
        [&](const Eigen::VectorXd& x) { return reduced_potential(ReducedPoint2D::from_vec(x), p); }, x0,
        0.05, 1e-11, 100000, 6);
    worst = std::max(worst, (best - rp.vec()).cwiseAbs().maxCoeff());
    ++cases;
  }
  o.require(worst <= kOracleAbs, "max coordinate gap " + fmt("%.2e", worst) + " over 5 triangles");
  return o;
}

Outcome identities() {
  Outcome o;
  const auto p = CrawlerParams::baseline_2d();
  const Crawler2D m(p);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  std::normal_distribution<double> n;

  // Energy balance along an unforced trajectory.
  {
    const RestLengthSchedule sched;
    const Rhs rhs = [&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { m.rhs(t, y, dy, sched); };
    Eigen::VectorXd y0(12);
    y0 << 0, 0.35, 1, 0.3, 0.5, 1.17, 0.3, -0.2, -0.1, 0.4, 0.2, 0.0;
    IntegratorConfig cfg;
    cfg.rtol = 1e-11;
    cfg.atol = 1e-13;
    const Trajectory traj = integrate(rhs, y0, 0.0, 5.0, cfg);
    const auto energy = [&](double t) { return m.total_energy(unpack(traj.sample_at(t), t), m.base_rest()); };
    double worst = 0.0;
    const double h = 1e-5;
    for (int k = 1; k < 100; ++k) {
      const double t = 0.05 * k;
      const PhaseState s = unpack(traj.sample_at(t), t);
      const double r = m.rayleigh_value(s.q, s.u);
      worst = std::max(worst, std::abs((energy(t + h) - energy(t - h)) / (2 * h) + 2 * r) / std::max(1.0, r));
    }
    o.require(worst <= kEnergyRel, "energy balance " + fmt("%.1e", worst));
  }

  // Equivariance of the equations of motion.
  {
    RestLengthSchedule sched;
    sched.epsilon = 0.4;
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      Eigen::VectorXd q(6), v(6);
      q << u(rng), u(rng) - 0.1, 1 + u(rng), u(rng) - 0.1, 0.5 + u(rng), 0.8 + u(rng);
      for (int i = 0; i < 6; ++i) v[i] = n(rng);
      const PhaseState s{q, v, 0.3 * k};
      const PhaseState a = m.eom_rhs(act_r(1.7, s), sched), b = m.eom_rhs(s, sched);
      worst = std::max(worst, (a.u - b.u).norm() / std::max(1.0, b.u.norm()));
    }
    o.require(worst <= kTranslationEquivRel, "translation equivariance " + fmt("%.1e", worst));

    const Crawler3D m3(CrawlerParams::tetrad_3d());
    const RestLengthSchedule flat = RestLengthSchedule::constant(std::vector<double>(6, 1.05));
    worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      Eigen::VectorXd q(12), v(12);
      q << u(rng), u(rng), u(rng) - 0.1, 1 + u(rng), u(rng), u(rng) - 0.1, 0.5 + u(rng), 0.85 + u(rng),
          u(rng) - 0.1, 0.5 + u(rng), 0.3 + u(rng), 0.8 + u(rng);
      for (int i = 0; i < 12; ++i) v[i] = n(rng);
      const SE2Element g{3 * u(rng), 5 * u(rng), 5 * u(rng)};
      const PhaseState s{q, v, 0.0};
      const PhaseState lhs = m3.eom_rhs(act_se2(g, s), flat);
      const PhaseState rhs = act_se2(SE2Element{g.phi, 0.0, 0.0}, m3.eom_rhs(s, flat));
      worst = std::max(worst, (lhs.u - rhs.u).norm() / std::max(1.0, rhs.u.norm()));
    }
    o.require(worst <= kPlanarEquivRel, "planar equivariance " + fmt("%.1e", worst));
  }

  // Cycle identities at half amplitude.
  {
    const StroboscopicMap<2> map(m, baseline_schedule(0.5));
    const CycleResult c = find_limit_cycle(map, equilibrium_section_2d(p));
    o.require(std::abs(c.delta_x - c.delta_x_quadrature) <= kReconstructionAbs,
              "reconstruction identity " + fmt("%.1e", std::abs(c.delta_x - c.delta_x_quadrature)));
    const Trajectory orbit = map.orbit(c.fixed_point, 2.0);
    double worst = 0.0;
    for (int k = 0; k <= 64; ++k) {
      const double t = k / 64.0;
      const Eigen::VectorXd y0 = orbit.sample_at(t), y1 = orbit.sample_at(t + 1.0);
      const PhaseState a = act_r(c.delta_x, from_section_2d(y0.head(11), y0[11]));
      const PhaseState b = from_section_2d(y1.head(11), y1[11]);
      worst = std::max(worst, (a.q - b.q).norm() + (a.u - b.u).norm());
    }
    o.require(worst <= kRelPeriodicAbs, "relative periodicity " + fmt("%.1e", worst));

    const PhaseState s = from_section_2d(c.fixed_point, 0.0);
    const double fiber = (map(s) - map(act_r(5.3, s))).norm();
    o.require(fiber <= kFiberAbs, "fiber independence " + fmt("%.1e", fiber));
  }
  return o;
}

Outcome tetrad_demo() {
  Outcome o;
  const ExperimentConfig cfg = default_config(ModelKind::crawler3d);
  const StroboscopicMap<3> map(Crawler3D(cfg.params), cfg.schedule, cfg.integrator);
  const CycleResult c = find_limit_cycle(map, equilibrium_section_3d(cfg.params));
  o.require(c.converged, "converged, residual " + fmt("%.1e", c.residual));
  o.require(max_multiplier(c) < 1.0, "max multiplier " + fmt("%.4f", max_multiplier(c)));

  const SE2Element h{0.9, -1.0, 2.0};
  Eigen::VectorXd y0(24);
  y0 << c.fixed_point, h.phi, h.x, h.y;
  IntegratorConfig ic = cfg.integrator;
  ic.controlled_dims = kReducedSize3D;
  const Eigen::VectorXd y2 = flow_map(map.rhs(), y0, 0.0, 2.0 * map.period(), ic);
  const PhaseState a = from_section_3d(y2.head(kReducedSize3D), SE2Element{y2[21], y2[22], y2[23]});
  const PhaseState b = from_section_3d(c.fixed_point, se2_compose(h, se2_compose(c.delta_g, c.delta_g)));
  const double defect = (a.q - b.q).norm() + (a.u - b.u).norm();
  o.require(defect <= kTwoPeriodAbs, "two-period defect " + fmt("%.1e", defect));
  o.require(std::abs(c.delta_g.phi) > kCurvatureMin, "delta phi " + fmt("%.3e", c.delta_g.phi));
  return o;
}

Outcome settle_protocol() {
  Outcome o;
  const Crawler2D model(CrawlerParams::baseline_2d());
  const int periods = 20;
  const SettleResult s = settle_then_force(model, baseline_schedule(0.5), 10.0, periods);
  const double last = s.shifts.back();
  o.require(std::abs(last / 0.0466 - 1.0) <= kSettleRel, "last shift " + fmt("%.6f", last));

  // Fundamental of x3 minus drift over the last eight forced periods.
  const int window = 8, per = 64;
  const double t0 = s.t_settle + (periods - window) * s.period;
  const double x0 = s.forced.sample_at(t0)[kReducedSize2D];
  std::vector<double> x(window * per);
  for (int k = 0; k < window * per; ++k) {
    const double t = t0 + s.period * k / per;
    x[k] = s.forced.sample_at(t)[kReducedSize2D] - x0 - last * (t - t0) / s.period;
  }
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, x);
  int peak = 1;
  for (int k = 1; k < window * per / 2; ++k)
    if (std::abs(spectrum[k]) > std::abs(spectrum[peak])) peak = k;
  const double rel_period = static_cast<double>(window) / peak;
  o.require(std::abs(peak - window) <= 1, "relative period " + fmt("%.3f", rel_period) + " (bin " +
                                              std::to_string(peak) + ")");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"shift-vs-amplitude table", shift_table},
      {"quadratic scaling law", quadratic_law},
      {"second-order coefficient", second_order},
      {"stability certificate", certification},
      {"equilibrium oracle", oracle_equivalence},
      {"identities and invariances", identities},
      {"tetrad relative cycle", tetrad_demo},
      {"settle-then-force protocol", settle_protocol},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %zu %s: %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed;
}
