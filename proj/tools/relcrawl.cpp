// Command-line experiment runner.
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "relcrawl/cycles.hpp"
#include "relcrawl/equilibrium.hpp"
#include "relcrawl/errors.hpp"
#include "relcrawl/io.hpp"

using namespace relcrawl;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kNegative = 1, kAssumption = 2, kNumerical = 3 };

struct Common {
  std::string config;
  std::optional<double> epsilon;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> profile;
  bool emit_plots = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON config file");
  sub->add_option("--epsilon", c.epsilon, "forcing amplitude");
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--profile", c.profile, "contact profile")
      ->check(CLI::IsMember({"raw_c1", "mollified"}));
  sub->add_flag("--emit-plots", c.emit_plots, "write plot data and a gnuplot script");
}

ExperimentConfig resolve(const Common& c, std::optional<ModelKind> force_model = std::nullopt) {
  ExperimentConfig cfg = c.config.empty() ? default_config(ModelKind::crawler2d) : load_config(c.config);
  if (force_model && cfg.model != *force_model) {
    const std::string out = cfg.out;
    cfg = default_config(*force_model);
    cfg.out = out;
  }
  if (c.epsilon) cfg.schedule.epsilon = *c.epsilon;
  if (c.out) cfg.out = *c.out;
  if (c.seed) cfg.seed = *c.seed;
  if (c.profile)
    cfg.params.profile.kind = *c.profile == "raw_c1" ? ProfileKind::raw_c1 : ProfileKind::mollified;
  if (cfg.model == ModelKind::crawler2d && relabel_longest_spring_last(cfg.params)) {
    std::cerr << "warning: relabeled masses so the longest spring joins the grounded pair\n";
    cfg.schedule.base_lengths = cfg.params.rest_lengths;
  }
  validate(cfg);
  return cfg;
}

fs::path prepare_out(const ExperimentConfig& cfg) {
  const fs::path dir(cfg.out);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw ConfigError("cannot write '" + p.string() + "'");
  return f;
}

void write_json(const fs::path& p, const nlohmann::json& j) {
  auto f = open_out(p);
  f << j.dump(2) << '\n';
}

Eigen::VectorXd full_row(int dim, const Eigen::VectorXd& aug) {
  PhaseState s;
  if (dim == 2) {
    s = from_section_2d(aug.head(kReducedSize2D), aug[kReducedSize2D]);
  } else {
    const Eigen::VectorXd g = aug.tail(3);
    s = from_section_3d(aug.head(kReducedSize3D), {g[0], g[1], g[2]});
  }
  return pack(s);
}

void write_plot_files(const fs::path& dir, int dim, const std::vector<double>& times,
                      const std::vector<Eigen::VectorXd>& full) {
  const fs::path plots = dir / "plots";
  fs::create_directories(plots);
  const int masses = dim + 1;
  {
    auto f = open_out(plots / "x.dat");
    auto g = open_out(plots / "z.dat");
    f << "# t";
    g << "# t";
    for (int i = 1; i <= masses; ++i) f << " x" << i, g << " z" << i;
    f << '\n', g << '\n';
    for (std::size_t k = 0; k < times.size(); ++k) {
      f << format_double(times[k]);
      g << format_double(times[k]);
      for (int i = 0; i < masses; ++i) {
        f << ' ' << format_double(full[k][dim * i]);
        g << ' ' << format_double(full[k][dim * i + dim - 1]);
      }
      f << '\n', g << '\n';
    }
  }
  {
    auto f = open_out(plots / "path.dat");
    for (int i = 0; i < masses; ++i) {
      f << "# mass " << i + 1 << '\n';
      for (std::size_t k = 0; k < times.size(); ++k)
        f << format_double(full[k][dim * i]) << ' ' << format_double(full[k][dim * i + 1]) << '\n';
      f << "\n\n";
    }
  }
  auto gp = open_out(plots / "plot.gp");
  gp << "set terminal pngcairo size 1000,700\n"
     << "set output 'coordinates.png'\n"
     << "set xlabel 't'\n"
     << "plot for [i=2:" << masses + 1 << "] 'x.dat' using 1:i with lines lw 2 title columnhead(i), \\\n"
     << "     for [i=2:" << masses + 1 << "] 'z.dat' using 1:i with lines title columnhead(i)\n"
     << "set output 'paths.png'\n"
     << "set size ratio -1\n"
     << "set xlabel 'x'\n"
     << "set ylabel '" << (dim == 2 ? "z" : "y") << "'\n"
     << "plot for [m=0:" << masses - 1 << "] 'path.dat' index m with lines title sprintf('mass %d', m+1)\n";
}

void write_samples(const fs::path& p, int dim, const std::vector<double>& times,
                   const std::vector<Eigen::VectorXd>& aug) {
  std::vector<Eigen::VectorXd> rows;
  for (const auto& y : aug) {
    Eigen::VectorXd r(y.size() + 2 * dim * (dim + 1));
    r << y, full_row(dim, y);
    rows.push_back(r);
  }
  std::vector<std::string> names = section_column_names(dim);
  for (const auto& n : full_state_column_names(dim)) names.push_back(n);
  auto f = open_out(p);
  write_trajectory_csv(f, times, rows, names);
}

Eigen::VectorXd cycle_seed(const ExperimentConfig& cfg) {
  Eigen::VectorXd seed;
  if (cfg.dim() == 2) {
    const Crawler2D model(cfg.params);
    seed = equilibrium_section_2d(cfg.params);
    if (cfg.schedule.epsilon != 0.0)
      seed += cfg.schedule.epsilon *
              first_order_response(model, cfg.schedule.with_epsilon(1.0)).initial;
  } else {
    seed = equilibrium_section_3d(cfg.params);
  }
  if (cfg.seed_perturbation > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& v : seed) v += cfg.seed_perturbation * u(rng);
  }
  return seed;
}

CycleOptions cycle_options(const ExperimentConfig& cfg) {
  CycleOptions o;
  o.integrator = cfg.integrator;
  o.samples = cfg.samples_per_period;
  return o;
}

// -- Subcommands ---------------------------------------------------------------

int cmd_certify(const ExperimentConfig& cfg) {
  const StabilityReport r =
      cfg.dim() == 2 ? certify_stability(cfg.params) : certify_stability_3d(cfg.params);
  const auto j = to_json(r);
  std::cout << j.dump(2) << '\n';
  write_json(prepare_out(cfg) / "certify.json", j);
  if (r.failure == FailureKind::assumption) {
    std::cerr << "assumption violated: " << r.diagnostic << '\n';
    return kAssumption;
  }
  if (r.failure == FailureKind::numerical) {
    std::cerr << "numerical failure: " << r.diagnostic << '\n';
    return kNumerical;
  }
  return r.verdict == Verdict::robustly_stable ? kOk : kNegative;
}

int cmd_simulate(const ExperimentConfig& cfg, bool plots) {
  const fs::path dir = prepare_out(cfg);
  const int dim = cfg.dim();
  std::vector<double> times;
  std::vector<Eigen::VectorXd> aug;
  auto shifts = open_out(dir / "shifts.csv");
  const double period = cfg.schedule.period();
  const int per = cfg.samples_per_period - 1;

  if (dim == 2) {
    const Crawler2D model(cfg.params);
    const SettleResult s = settle_then_force(model, cfg.schedule, cfg.t_settle, cfg.n_periods,
                                             cfg.start_offset, cfg.integrator);
    const int n_settle = static_cast<int>(std::ceil(cfg.t_settle / period * per));
    for (int k = 0; k < n_settle; ++k) {
      const double t = cfg.t_settle * k / n_settle;
      times.push_back(t);
      aug.push_back(s.settle.sample_at(t));
    }
    const int n_forced = cfg.n_periods * per;
    for (int k = 0; k <= n_forced; ++k) {
      const double t = k == n_forced ? s.forced.t_end() : cfg.t_settle + period * k / per;
      times.push_back(t);
      aug.push_back(s.forced.sample_at(t));
    }
    shifts << "period,t_end,shift\n";
    for (std::size_t k = 0; k < s.shifts.size(); ++k)
      shifts << k + 1 << ',' << format_double(cfg.t_settle + period * (k + 1)) << ','
             << format_double(s.shifts[k]) << '\n';
    if (!s.shifts.empty())
      std::cout << "last-period shift: " << format_double(s.shifts.back()) << '\n';
  } else {
    const StroboscopicMap<3> map(Crawler3D(cfg.params), cfg.schedule, cfg.integrator);
    const Trajectory traj = map.orbit(equilibrium_section_3d(cfg.params), cfg.n_periods);
    const int n = cfg.n_periods * per;
    for (int k = 0; k <= n; ++k) {
      const double t = k == n ? traj.t_end() : period * k / per;
      times.push_back(t);
      aug.push_back(traj.sample_at(t));
    }
    shifts << "period,t_end,delta_phi,delta_X,delta_Y\n";
    SE2Element prev{};
    for (int k = 1; k <= cfg.n_periods; ++k) {
      const Eigen::VectorXd y = traj.sample_at(k == cfg.n_periods ? traj.t_end() : period * k);
      const SE2Element g{wrap_angle(y[kReducedSize3D]), y[kReducedSize3D + 1], y[kReducedSize3D + 2]};
      const SE2Element d = se2_compose(se2_inverse(prev), g);
      shifts << k << ',' << format_double(period * k) << ',' << format_double(d.phi) << ','
             << format_double(d.x) << ',' << format_double(d.y) << '\n';
      prev = g;
    }
  }
  write_samples(dir / "trajectory.csv", dim, times, aug);
  if (plots) {
    std::vector<Eigen::VectorXd> full;
    for (const auto& y : aug) full.push_back(full_row(dim, y));
    write_plot_files(dir, dim, times, full);
  }
  return kOk;
}

template <int Dim>
CycleResult run_cycle(const ExperimentConfig& cfg) {
  const StroboscopicMap<Dim> map(CrawlerModel<Dim>(cfg.params), cfg.schedule, cfg.integrator);
  return find_limit_cycle(map, cycle_seed(cfg), cycle_options(cfg));
}

int cmd_cycle(const ExperimentConfig& cfg, bool plots) {
  const fs::path dir = prepare_out(cfg);
  const CycleResult r = cfg.dim() == 2 ? run_cycle<2>(cfg) : run_cycle<3>(cfg);
  const auto j = to_json(r);
  std::cout << j.dump(2) << '\n';
  write_json(dir / "cycle.json", j);
  write_samples(dir / "cycle.csv", cfg.dim(), r.sample_times, r.samples);
  if (plots) {
    std::vector<Eigen::VectorXd> full;
    for (const auto& y : r.samples) full.push_back(full_row(cfg.dim(), y));
    write_plot_files(dir, cfg.dim(), r.sample_times, full);
  }
  return r.converged ? kOk : kNegative;
}

int cmd_sweep(const ExperimentConfig& cfg) {
  if (cfg.dim() != 2) throw ConfigError("sweep runs on the planar crawler");
  const Crawler2D model(cfg.params);
  CycleOptions opts = cycle_options(cfg);
  const ScalingStudy study = scaling_study(model, cfg.schedule, cfg.epsilons, opts);
  for (const auto& w : study.warnings) std::cerr << "warning: " << w << '\n';
  write_scaling_csv(std::cout, study.rows);
  auto f = open_out(prepare_out(cfg) / "sweep.csv");
  write_scaling_csv(f, study.rows);
  for (const auto& r : study.rows)
    if (r.status != "ok") return kNegative;
  return kOk;
}

int cmd_perturbation(const ExperimentConfig& cfg, bool freeze) {
  if (cfg.dim() != 2) throw ConfigError("perturbation runs on the planar crawler");
  const Crawler2D model(cfg.params);
  const LinearResponse lr = first_order_response(model, cfg.schedule.with_epsilon(1.0));
  PerturbationResult r;
  r.frozen_damping = freeze;
  r.delta_x_first_order = check_first_order_shift(lr);
  r.delta_x_second_order = second_order_shift(model, lr, freeze);
  const double eps = r.nonlinear_epsilon;
  const StroboscopicMap<2> map(model, cfg.schedule.with_epsilon(eps), cfg.integrator);
  const CycleResult c =
      find_limit_cycle(map, equilibrium_section_2d(cfg.params) + eps * lr.initial, cycle_options(cfg));
  r.nonlinear_delta_x = c.delta_x;
  r.nonlinear_ratio = r.delta_x_second_order != 0.0
                          ? c.delta_x / (eps * eps) / r.delta_x_second_order
                          : std::numeric_limits<double>::quiet_NaN();
  const auto j = to_json(r);
  std::cout << j.dump(2) << '\n';
  write_json(prepare_out(cfg) / "perturbation.json", j);
  return kOk;
}

int cmd_demo3d(const ExperimentConfig& cfg, bool plots) {
  const fs::path dir = prepare_out(cfg);
  const StroboscopicMap<3> map(Crawler3D(cfg.params), cfg.schedule, cfg.integrator);
  const CycleResult c = find_limit_cycle(map, cycle_seed(cfg), cycle_options(cfg));
  const Trajectory traj = map.orbit(c.fixed_point, cfg.n_periods);

  // Two-period relative periodicity with the right action.
  const Eigen::VectorXd y2 = traj.sample_at(std::min(2.0 * map.period(), traj.t_end()));
  const SE2Element g2{y2[kReducedSize3D], y2[kReducedSize3D + 1], y2[kReducedSize3D + 2]};
  const SE2Element predicted = se2_compose(c.delta_g, c.delta_g);

  nlohmann::json j = to_json(c);
  j["two_period_defect"] = se2_distance(predicted, g2);
  j["n_periods"] = cfg.n_periods;
  std::cout << j.dump(2) << '\n';
  write_json(dir / "demo3d.json", j);

  const int per = cfg.samples_per_period - 1;
  const int n = cfg.n_periods * per;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> full;
  for (int k = 0; k <= n; ++k) {
    const double t = k == n ? traj.t_end() : map.period() * k / per;
    times.push_back(t);
    full.push_back(full_row(3, traj.sample_at(t)));
  }
  {
    auto f = open_out(dir / "paths.csv");
    std::vector<Eigen::VectorXd> planar;
    for (const auto& r : full) {
      Eigen::VectorXd p(8);
      for (int i = 0; i < 4; ++i) p.segment<2>(2 * i) = r.segment<2>(3 * i);
      planar.push_back(p);
    }
    write_trajectory_csv(f, times, planar, {"x1", "y1", "x2", "y2", "x3", "y3", "x4", "y4"});
  }
  if (plots) write_plot_files(dir, 3, times, full);
  return c.converged ? kOk : kNegative;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized crawler experiments"};
  app.require_subcommand(1);
  Common common;
  bool freeze = false;

  auto* certify = app.add_subcommand("certify", "certify stability of the reduced equilibrium");
  auto* simulate = app.add_subcommand("simulate", "settle, then force and record the trajectory");
  auto* cycle = app.add_subcommand("cycle", "find the relative limit cycle");
  auto* sweep = app.add_subcommand("sweep", "shift against forcing amplitude");
  auto* perturbation = app.add_subcommand("perturbation", "first- and second-order shift analysis");
  auto* demo3d = app.add_subcommand("demo3d", "tetrad relative limit cycle and planar paths");
  for (auto* s : {certify, simulate, cycle, sweep, perturbation, demo3d}) add_common(s, common);
  perturbation->add_flag("--freeze-damping", freeze, "hold the damping matrix at equilibrium");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*certify) return cmd_certify(resolve(common));
    if (*simulate) return cmd_simulate(resolve(common), common.emit_plots);
    if (*cycle) return cmd_cycle(resolve(common), common.emit_plots);
    if (*sweep) return cmd_sweep(resolve(common));
    if (*perturbation) return cmd_perturbation(resolve(common), freeze);
    if (*demo3d) return cmd_demo3d(resolve(common, ModelKind::crawler3d), common.emit_plots);
  } catch (const AssumptionViolated& e) {
    std::cerr << "assumption violated: " << e.what() << '\n';
    return kAssumption;
  } catch (const ChartDomain& e) {
    std::cerr << "chart domain: " << e.what() << '\n';
    return kAssumption;
  } catch (const ScheduleDomain& e) {
    std::cerr << "schedule domain: " << e.what() << '\n';
    return kAssumption;
  } catch (const DegenerateConfiguration& e) {
    std::cerr << "degenerate configuration: " << e.what() << '\n';
    return kAssumption;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kAssumption;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return kAssumption;
  }
  return kOk;
}
