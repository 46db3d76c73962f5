#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "minatt/adjoint.hpp"
#include "minatt/dynamics.hpp"
#include "minatt/rollout.hpp"

namespace minatt {

// Inner-loop acceptance test of the line search.
enum class LineSearchRule {
  kOuterCost,       // accept the first trial with eta <= previous outer eta
  kPreviousTrial,   // accept trial m >= 1 when eta_m <= eta_{m-1}
};

// Sign of the step along the update direction `dir` (which points against the
// gradient of eta).
enum class StepSign {
  kDescent,   // law + eps * dir
  kLiteral,   // law - eps * dir
};

// Every constant of a solve. Defaults are the experiment1 preset at desk scale.
struct SolverConfig {
  // [time]
  double horizon = 0.5;
  int intervals = 40;
  // [task]
  Vec x_init = Vec::Zero(4);
  Vec target = (Vec(4) << -0.26, 0.40, 0.0, 0.0).finished();
  TerminalMode mode = TerminalMode::kEndpoint;
  double gamma = 1e6;
  // [box]
  Vec box_lower = (Vec(4) << -5.0, -5.0, -300.0, -300.0).finished();
  Vec box_upper = (Vec(4) << 5.0, 5.0, 300.0, 300.0).finished();
  std::vector<int> box_intervals = {64, 64, 64, 64};
  // [density]
  int trackmax = 2000;
  std::uint64_t seed = 1;
  int half_width = 8;
  int workers = 0;
  // [lqr]
  Vec terminal_weight = (Vec(4) << 1e5, 1e5, 1.0, 1.0).finished();
  Vec control_weight = (Vec(2) << 0.4, 1.3565).finished();
  int riccati_substeps = 64;
  double riccati_bound = 1e12;
  // [optimizer]
  double eps0 = 2.0e-3;
  double eps_tol = 5.0e-5;
  LineSearchRule line_search = LineSearchRule::kOuterCost;
  StepSign step_sign = StepSign::kDescent;
  int max_outer = 200;
  int max_inner = 40;
  double eps_floor = 1e-12;
  bool normalize_volume = false;
  // [rollout]
  int substeps = 4;
  double divergence_bound = 1e6;
  ControlHold hold = ControlHold::kZeroOrder;
  // [arm]
  ArmParams arm;

  int state_dim() const { return static_cast<int>(x_init.size()); }
  int control_dim() const { return static_cast<int>(control_weight.size()); }

  TimeGrid grid() const { return TimeGrid(horizon, intervals); }
  RolloutOptions rollout() const { return {substeps, divergence_bound, hold}; }

  // Throws ConfigError naming the offending key.
  void validate() const;

  bool operator==(const SolverConfig& other) const;
};

// Sectioned key = value text. '#' starts a comment; unknown sections or keys
// are errors; missing keys keep their defaults.
SolverConfig parse_config(std::istream& is);
SolverConfig parse_config_string(std::string_view text);
SolverConfig parse_config_file(const std::string& path);

// Canonical text form; parse_config(write_config(c)) == c.
std::string write_config(const SolverConfig& config);

// FNV-1a hash of the canonical text form.
std::uint64_t config_hash(const SolverConfig& config);

// "experiment1" or "experiment2".
SolverConfig preset(std::string_view name);
bool is_preset(std::string_view name);

// 256 intervals per box dimension.
void apply_full_fidelity(SolverConfig& config);

}  // namespace minatt
