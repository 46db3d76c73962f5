#include "minatt/artifacts.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "minatt/csv.hpp"

namespace minatt {

std::string stamp(const SolverConfig& config) {
  std::ostringstream s;
  s << "config_hash=" << std::hex << std::setw(16) << std::setfill('0')
    << config_hash(config) << std::dec << " seed=" << config.seed;
  return s.str();
}

namespace {

using Writer = void (*)(std::ostream&, const SolveResult&, const SolverConfig&,
                        const ArmSystem&);

void cost_history(std::ostream& os, const SolveResult& r, const SolverConfig&,
                  const ArmSystem&) {
  csv::write_row(os, std::vector<std::string>{"n", "terminal", "attention_x",
                                              "attention_t", "total", "eps_accepted"});
  for (const IterationRecord& h : r.history) {
    csv::write_row(os, std::vector<double>{static_cast<double>(h.n), h.cost.terminal,
                                           h.cost.attention_x, h.cost.attention_t,
                                           h.cost.total, h.eps_accepted});
  }
}

void trials(std::ostream& os, const SolveResult& r, const SolverConfig&,
            const ArmSystem&) {
  csv::write_row(os, std::vector<std::string>{"outer", "inner", "eps", "eta", "accepted"});
  for (const TrialRecord& t : r.trials) {
    csv::write_row(os, std::vector<double>{static_cast<double>(t.outer),
                                           static_cast<double>(t.inner), t.eps, t.eta,
                                           t.accepted ? 1.0 : 0.0});
  }
}

void fk_path(std::ostream& os, const SolveResult& r, const SolverConfig&,
             const ArmSystem& arm) {
  csv::write_row(os, std::vector<std::string>{"t", "elbow_x", "elbow_y", "X", "Y",
                                              "Xdot", "Ydot"});
  const ArmParams& p = arm.params();
  const Trajectory& traj = r.final_trajectory;
  for (int i = 0; i < traj.grid.nodes(); ++i) {
    const Vec& x = traj.states[i];
    const Vec y = arm.output(x);
    csv::write_row(os, std::vector<double>{traj.grid.t(i), p.L1 * std::cos(x(0)),
                                           p.L1 * std::sin(x(0)), y(0), y(1), y(2), y(3)});
  }
}

void diagnostics(std::ostream& os, const SolveResult& r, const SolverConfig&,
                 const ArmSystem&) {
  const IterationRecord& first = r.history.front();
  const IterationRecord& last = r.history.back();
  const FeedbackTrend trend = feedback_trend(r.final_law, r.final_trajectory);
  int fallbacks = 0;
  for (const IterationRecord& h : r.history) fallbacks += h.density_fallbacks;
  csv::write_row(os, std::vector<std::string>{"key", "value"});
  auto row = [&](const std::string& key, const std::string& value) {
    csv::write_row(os, std::vector<std::string>{key, value});
  };
  auto num = [&](const std::string& key, double value) {
    row(key, csv::format_number(value));
  };
  row("termination", to_string(r.reason));
  num("outer_iterations", r.outer_iterations);
  num("inner_iterations", r.inner_iterations);
  num("eta_initial", first.cost.total);
  num("eta_final", last.cost.total);
  num("miss_initial", first.miss);
  num("miss_final", last.miss);
  num("c1", last.ellipticity.c1);
  num("c2", last.ellipticity.c2);
  num("step_bound", last.ellipticity.step_bound());
  num("last_eps_accepted", last.eps_accepted);
  num("mass_leak", r.final_field.exited_fraction(r.final_field.grid.N));
  num("density_fallbacks", fallbacks);
  num("feedback_ratio_first_quarter", trend.first_quarter);
  num("feedback_ratio_last_quarter", trend.last_quarter);
}

}  // namespace

std::map<std::string, std::string> render_artifacts(const SolverConfig& config,
                                                    const ArmSystem& arm,
                                                    const SolveResult& result) {
  const std::string header = stamp(config);
  std::map<std::string, std::string> files;
  auto emit = [&](const std::string& name, auto&& body) {
    std::ostringstream os;
    csv::write_comment(os, header);
    body(os);
    files[name] = os.str();
  };
  const std::map<std::string, Writer> writers = {
      {"cost_history.csv", cost_history},
      {"line_search_trials.csv", trials},
      {"fk_path_final.csv", fk_path},
      {"diagnostics.csv", diagnostics},
  };
  for (const auto& [name, writer] : writers) {
    emit(name, [&](std::ostream& os) { writer(os, result, config, arm); });
  }
  emit("law_initial.csv", [&](std::ostream& os) { write_law_csv(os, result.initial_law); });
  emit("law_final.csv", [&](std::ostream& os) { write_law_csv(os, result.final_law); });
  emit("trajectory_initial.csv",
       [&](std::ostream& os) { write_trajectory_csv(os, result.initial_trajectory); });
  emit("trajectory_final.csv",
       [&](std::ostream& os) { write_trajectory_csv(os, result.final_trajectory); });
  emit("density_marginals.csv",
       [&](std::ostream& os) { write_marginals_csv(os, result.final_field); });
  return files;
}

void write_artifacts(const std::string& dir,
                     const std::map<std::string, std::string>& files) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, text] : files) {
    std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
    if (!out) throw Error("cannot write " + name + " in " + dir);
    out << text;
  }
}

}  // namespace minatt
