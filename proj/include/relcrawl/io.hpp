#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "relcrawl/cycles.hpp"
#include "relcrawl/equilibrium.hpp"
#include "relcrawl/integrate.hpp"
#include "relcrawl/params.hpp"

namespace relcrawl {

enum class ModelKind { crawler2d, crawler3d };

/// Flat key-value experiment description (JSON object). Unknown keys are
/// rejected so typos do not silently fall back to defaults.
struct ExperimentConfig {
  ModelKind model = ModelKind::crawler2d;
  CrawlerParams params = CrawlerParams::baseline_2d();
  RestLengthSchedule schedule{};
  IntegratorConfig integrator = cycle_integrator();
  double t_settle = 10.0;
  int n_periods = 20;
  std::vector<double> epsilons{1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125};
  std::uint64_t seed = 0;
  double seed_perturbation = 0.0;
  double start_offset = 0.0;
  int samples_per_period = 65;
  std::string out = "out";

  int dim() const { return model == ModelKind::crawler2d ? 2 : 3; }
};

/// Defaults of the planar crawler and of the tetrad demo.
ExperimentConfig default_config(ModelKind model);
/// Asymmetric harmonic table used by the tetrad demo.
std::vector<SpringHarmonic> tetrad_demo_table();

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::string& path);

/// Validates the assembled config; throws ConfigError / AssumptionViolated.
void validate(const ExperimentConfig& c);

nlohmann::json to_json(const StabilityReport& r);
StabilityReport stability_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CycleResult& r);
/// Restores everything except the dense samples (written separately as CSV).
CycleResult cycle_result_from_json(const nlohmann::json& j);

struct PerturbationResult {
  double delta_x_first_order = 0.0;
  double delta_x_second_order = 0.0;
  double nonlinear_epsilon = 0.03125;
  double nonlinear_delta_x = 0.0;
  /// delta_x(eps) / eps^2 divided by the second-order coefficient.
  double nonlinear_ratio = 0.0;
  bool frozen_damping = false;
};

nlohmann::json to_json(const PerturbationResult& r);
PerturbationResult perturbation_result_from_json(const nlohmann::json& j);

/// epsilon,delta_x,p,residual,max_multiplier,status with 17 significant
/// digits; undefined numbers are empty cells.
void write_scaling_csv(std::ostream& out, const std::vector<ScalingRow>& rows);
std::vector<ScalingRow> read_scaling_csv(std::istream& in);

/// Column names of the augmented section state.
std::vector<std::string> section_column_names(int dim);
/// Column names of the full state (positions then velocities).
std::vector<std::string> full_state_column_names(int dim);

std::string format_double(double v);

}  // namespace relcrawl
