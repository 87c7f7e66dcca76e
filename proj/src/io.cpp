#include "relcrawl/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "relcrawl/errors.hpp"

namespace relcrawl {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_of(const json& j) {
  if (j.is_null()) return kNaN;
  if (!j.is_number()) throw ConfigError("expected a number, got " + j.dump());
  return j.get<double>();
}

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

Eigen::VectorXd vec_of(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number_of(j[i]);
  return v;
}

json complex_json(const Eigen::VectorXcd& v) {
  json a = json::array();
  for (const auto& z : v) a.push_back({number(z.real()), number(z.imag())});
  return a;
}

Eigen::VectorXcd complex_of(const json& j) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = {number_of(j[i].at(0)), number_of(j[i].at(1))};
  return v;
}

std::string profile_name(ProfileKind k) { return k == ProfileKind::raw_c1 ? "raw_c1" : "mollified"; }

ProfileKind profile_of(const std::string& s) {
  if (s == "raw_c1") return ProfileKind::raw_c1;
  if (s == "mollified") return ProfileKind::mollified;
  throw ConfigError("unknown profile '" + s + "'");
}

}  // namespace

std::string format_double(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<SpringHarmonic> tetrad_demo_table() {
  const double pi = std::numbers::pi;
  return {{1.0, 0.0}, {0.5, pi / 2}, {0.0, 0.0}, {0.8, pi}, {0.0, 0.0}, {0.3, pi / 3}};
}

ExperimentConfig default_config(ModelKind model) {
  ExperimentConfig c;
  c.model = model;
  if (model == ModelKind::crawler3d) {
    c.params = CrawlerParams::tetrad_3d();
    c.schedule.base_lengths = c.params.rest_lengths;
    c.schedule.mode = ScheduleMode::user_table;
    c.schedule.table = tetrad_demo_table();
    c.schedule.epsilon = 0.5;
    c.n_periods = 40;
    c.t_settle = 0.0;
  } else {
    c.schedule.epsilon = 0.5;
  }
  return c;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{
      "model", "kappa_s", "nu_s", "kappa_np", "nu_ns", "nu_db", "gravity", "rest_lengths",
      "epsilon", "omega", "schedule_mode", "schedule_amplitudes", "schedule_phases", "profile",
      "mollifier_width", "debounce_weight", "noslip_sign", "rtol", "atol", "max_step",
      "t_settle", "n_periods", "epsilons", "seed", "seed_perturbation", "start_offset",
      "samples_per_period", "out"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");

  try {
    ModelKind model = ModelKind::crawler2d;
    if (j.contains("model")) {
      const auto m = j["model"].get<std::string>();
      if (m == "crawler3d")
        model = ModelKind::crawler3d;
      else if (m != "crawler2d")
        throw ConfigError("unknown model '" + m + "'");
    }
    ExperimentConfig c = default_config(model);
    auto& p = c.params;
    auto get = [&](const char* key, double& dst) {
      if (j.contains(key)) dst = number_of(j[key]);
    };
    get("kappa_s", p.kappa_s);
    get("nu_s", p.nu_s);
    get("kappa_np", p.kappa_np);
    get("nu_ns", p.nu_ns);
    get("nu_db", p.nu_db);
    get("gravity", p.gravity);
    if (j.contains("rest_lengths")) p.rest_lengths = j["rest_lengths"].get<std::vector<double>>();
    if (j.contains("profile")) p.profile.kind = profile_of(j["profile"].get<std::string>());
    get("mollifier_width", p.profile.mollifier_width);
    if (j.contains("debounce_weight")) {
      const auto s = j["debounce_weight"].get<std::string>();
      if (s == "chi")
        p.debounce_weight = DebounceWeight::chi;
      else if (s == "chi_prime")
        p.debounce_weight = DebounceWeight::chi_prime;
      else
        throw ConfigError("unknown debounce_weight '" + s + "'");
    }
    if (j.contains("noslip_sign")) {
      const auto s = j["noslip_sign"].get<std::string>();
      if (s == "dissipative")
        p.noslip_sign = NoslipSign::dissipative;
      else if (s == "literal")
        p.noslip_sign = NoslipSign::literal;
      else
        throw ConfigError("unknown noslip_sign '" + s + "'");
    }

    auto& s = c.schedule;
    s.base_lengths = p.rest_lengths;
    get("epsilon", s.epsilon);
    get("omega", s.omega);
    if (j.contains("schedule_mode")) {
      const auto m = j["schedule_mode"].get<std::string>();
      if (m == "paper_default")
        s.mode = ScheduleMode::paper_default;
      else if (m == "user_table")
        s.mode = ScheduleMode::user_table;
      else
        throw ConfigError("unknown schedule_mode '" + m + "'");
    }
    if (j.contains("schedule_amplitudes") || j.contains("schedule_phases")) {
      const auto amps = j.value("schedule_amplitudes", std::vector<double>(p.rest_lengths.size(), 0.0));
      const auto phases = j.value("schedule_phases", std::vector<double>(amps.size(), 0.0));
      if (amps.size() != phases.size())
        throw ConfigError("schedule_amplitudes and schedule_phases differ in length");
      s.table.clear();
      for (std::size_t k = 0; k < amps.size(); ++k) s.table.push_back({amps[k], phases[k]});
    }
    if (s.mode == ScheduleMode::user_table && s.table.empty())
      s.table.assign(s.base_lengths.size(), SpringHarmonic{});

    get("rtol", c.integrator.rtol);
    get("atol", c.integrator.atol);
    if (j.contains("max_step")) {
      const double m = number_of(j["max_step"]);
      c.integrator.max_step = (std::isnan(m) || m == 0.0) ? std::numeric_limits<double>::infinity() : m;
    }
    get("t_settle", c.t_settle);
    if (j.contains("n_periods")) c.n_periods = j["n_periods"].get<int>();
    if (j.contains("epsilons")) c.epsilons = j["epsilons"].get<std::vector<double>>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    get("seed_perturbation", c.seed_perturbation);
    get("start_offset", c.start_offset);
    if (j.contains("samples_per_period")) c.samples_per_period = j["samples_per_period"].get<int>();
    if (j.contains("out")) c.out = j["out"].get<std::string>();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config value: ") + e.what());
  }
}

json to_json(const ExperimentConfig& c) {
  const auto& p = c.params;
  json j;
  j["model"] = c.model == ModelKind::crawler2d ? "crawler2d" : "crawler3d";
  j["kappa_s"] = p.kappa_s;
  j["nu_s"] = p.nu_s;
  j["kappa_np"] = p.kappa_np;
  j["nu_ns"] = p.nu_ns;
  j["nu_db"] = p.nu_db;
  j["gravity"] = p.gravity;
  j["rest_lengths"] = p.rest_lengths;
  j["profile"] = profile_name(p.profile.kind);
  j["mollifier_width"] = p.profile.mollifier_width;
  j["debounce_weight"] = p.debounce_weight == DebounceWeight::chi ? "chi" : "chi_prime";
  j["noslip_sign"] = p.noslip_sign == NoslipSign::dissipative ? "dissipative" : "literal";
  j["epsilon"] = c.schedule.epsilon;
  j["omega"] = c.schedule.omega;
  j["schedule_mode"] = c.schedule.mode == ScheduleMode::paper_default ? "paper_default" : "user_table";
  if (c.schedule.mode == ScheduleMode::user_table) {
    json amps = json::array(), phases = json::array();
    for (const auto& h : c.schedule.table) amps.push_back(h.amplitude), phases.push_back(h.phase);
    j["schedule_amplitudes"] = amps;
    j["schedule_phases"] = phases;
  }
  j["rtol"] = c.integrator.rtol;
  j["atol"] = c.integrator.atol;
  j["max_step"] = std::isfinite(c.integrator.max_step) ? c.integrator.max_step : 0.0;
  j["t_settle"] = c.t_settle;
  j["n_periods"] = c.n_periods;
  j["epsilons"] = c.epsilons;
  j["seed"] = c.seed;
  j["seed_perturbation"] = c.seed_perturbation;
  j["start_offset"] = c.start_offset;
  j["samples_per_period"] = c.samples_per_period;
  j["out"] = c.out;
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

void validate(const ExperimentConfig& c) {
  validate(c.params, c.dim());
  validate(c.schedule, c.dim());
  validate(c.integrator);
  if (c.n_periods < 0 || !(c.t_settle >= 0.0)) throw ConfigError("n_periods and t_settle must be >= 0");
  if (c.samples_per_period < 2) throw ConfigError("samples_per_period must be >= 2");
  if (!(c.seed_perturbation >= 0.0)) throw ConfigError("seed_perturbation must be >= 0");
}

json to_json(const StabilityReport& r) {
  json j;
  j["dim"] = r.dim;
  j["verdict"] = to_string(r.verdict);
  j["failure"] = r.failure == FailureKind::none         ? "none"
                 : r.failure == FailureKind::assumption ? "assumption"
                                                        : "numerical";
  j["diagnostic"] = r.diagnostic;
  j["reduced_equilibrium"] = vec_json(r.reduced_equilibrium);
  j["configuration"] = vec_json(r.configuration);
  j["gradient_norm"] = number(r.gradient_norm);
  j["hessian_eigenvalues"] = vec_json(r.hessian_eigenvalues);
  j["rayleigh_eigenvalues"] = vec_json(r.rayleigh_eigenvalues);
  j["linearization_spectrum"] = complex_json(r.linearization_spectrum);
  j["spectral_abscissa"] = number(r.spectral_abscissa);
  return j;
}

StabilityReport stability_report_from_json(const json& j) {
  StabilityReport r;
  r.dim = j.at("dim").get<int>();
  r.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  const auto f = j.at("failure").get<std::string>();
  r.failure = f == "none" ? FailureKind::none
              : f == "assumption" ? FailureKind::assumption
                                  : FailureKind::numerical;
  r.diagnostic = j.at("diagnostic").get<std::string>();
  r.reduced_equilibrium = vec_of(j.at("reduced_equilibrium"));
  r.configuration = vec_of(j.at("configuration"));
  r.gradient_norm = number_of(j.at("gradient_norm"));
  r.hessian_eigenvalues = vec_of(j.at("hessian_eigenvalues"));
  r.rayleigh_eigenvalues = vec_of(j.at("rayleigh_eigenvalues"));
  r.linearization_spectrum = complex_of(j.at("linearization_spectrum"));
  r.spectral_abscissa = number_of(j.at("spectral_abscissa"));
  return r;
}

json to_json(const CycleResult& r) {
  json j;
  j["dim"] = r.dim;
  j["epsilon"] = number(r.epsilon);
  j["period"] = number(r.period);
  j["converged"] = r.converged;
  j["residual"] = number(r.residual);
  j["fixed_point"] = vec_json(r.fixed_point);
  j["floquet_multipliers"] = complex_json(r.floquet_multipliers);
  j["max_multiplier"] = number(max_multiplier(r));
  j["picard_iterations"] = r.picard_iterations;
  j["newton_iterations"] = r.newton_iterations;
  if (r.dim == 2) {
    j["delta_x"] = number(r.delta_x);
    j["delta_x_quadrature"] = number(r.delta_x_quadrature);
    j["cyclic_balance"] = number(r.cyclic_balance);
  } else {
    j["delta_phi"] = number(r.delta_g.phi);
    j["delta_X"] = number(r.delta_g.x);
    j["delta_Y"] = number(r.delta_g.y);
  }
  return j;
}

CycleResult cycle_result_from_json(const json& j) {
  CycleResult r;
  r.dim = j.at("dim").get<int>();
  r.epsilon = number_of(j.at("epsilon"));
  r.period = number_of(j.at("period"));
  r.converged = j.at("converged").get<bool>();
  r.residual = number_of(j.at("residual"));
  r.fixed_point = vec_of(j.at("fixed_point"));
  r.floquet_multipliers = complex_of(j.at("floquet_multipliers"));
  r.picard_iterations = j.at("picard_iterations").get<int>();
  r.newton_iterations = j.at("newton_iterations").get<int>();
  if (r.dim == 2) {
    r.delta_x = number_of(j.at("delta_x"));
    r.delta_x_quadrature = number_of(j.at("delta_x_quadrature"));
    r.cyclic_balance = number_of(j.at("cyclic_balance"));
  } else {
    r.delta_g = {number_of(j.at("delta_phi")), number_of(j.at("delta_X")), number_of(j.at("delta_Y"))};
  }
  return r;
}

json to_json(const PerturbationResult& r) {
  json j;
  j["delta_x_first_order"] = number(r.delta_x_first_order);
  j["delta_x_second_order"] = number(r.delta_x_second_order);
  j["nonlinear_epsilon"] = number(r.nonlinear_epsilon);
  j["nonlinear_delta_x"] = number(r.nonlinear_delta_x);
  j["nonlinear_ratio"] = number(r.nonlinear_ratio);
  j["frozen_damping"] = r.frozen_damping;
  return j;
}

PerturbationResult perturbation_result_from_json(const json& j) {
  PerturbationResult r;
  r.delta_x_first_order = number_of(j.at("delta_x_first_order"));
  r.delta_x_second_order = number_of(j.at("delta_x_second_order"));
  r.nonlinear_epsilon = number_of(j.at("nonlinear_epsilon"));
  r.nonlinear_delta_x = number_of(j.at("nonlinear_delta_x"));
  r.nonlinear_ratio = number_of(j.at("nonlinear_ratio"));
  r.frozen_damping = j.at("frozen_damping").get<bool>();
  return r;
}

void write_scaling_csv(std::ostream& out, const std::vector<ScalingRow>& rows) {
  out << "epsilon,delta_x,p,residual,max_multiplier,status\n";
  for (const auto& r : rows) {
    std::string status = r.status;
    for (char& ch : status)
      if (ch == ',' || ch == '\n') ch = ';';
    out << format_double(r.epsilon) << ',' << format_double(r.delta_x) << ','
        << format_double(r.p) << ',' << format_double(r.residual) << ','
        << format_double(r.max_multiplier) << ',' << status << '\n';
  }
}

std::vector<ScalingRow> read_scaling_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  const int ce = t.column("epsilon"), cd = t.column("delta_x"), cp = t.column("p"),
            cr = t.column("residual"), cm = t.column("max_multiplier"), cs = t.column("status");
  std::vector<ScalingRow> rows;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    ScalingRow r;
    r.epsilon = t.number(i, ce);
    r.delta_x = t.number(i, cd);
    r.p = t.number(i, cp);
    r.residual = t.number(i, cr);
    r.max_multiplier = t.number(i, cm);
    r.status = t.rows[i][static_cast<std::size_t>(cs)];
    rows.push_back(r);
  }
  return rows;
}

std::vector<std::string> section_column_names(int dim) {
  if (dim == 2)
    return {"s_x1", "s_z1", "s_x2", "s_z2", "s_z3", "u_x1", "u_z1",
            "u_x2", "u_z2", "u_x3", "u_z3", "x3"};
  std::vector<std::string> n{"z1", "b2x", "z2", "b3x", "b3y", "z3", "b4x", "b4y", "z4"};
  for (int i = 1; i <= 4; ++i)
    for (const char* c : {"w_x", "w_y", "w_z"}) n.push_back(c + std::to_string(i));
  for (const char* c : {"phi", "X", "Y"}) n.push_back(c);
  return n;
}

std::vector<std::string> full_state_column_names(int dim) {
  std::vector<std::string> n;
  const std::vector<std::string> axes = dim == 2 ? std::vector<std::string>{"x", "z"}
                                                 : std::vector<std::string>{"x", "y", "z"};
  for (const char* prefix : {"", "u_"})
    for (int i = 1; i <= dim + 1; ++i)
      for (const auto& a : axes) n.push_back(prefix + a + std::to_string(i));
  return n;
}

}  // namespace relcrawl
