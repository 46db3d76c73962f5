#include "minatt/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "minatt/csv.hpp"

namespace minatt {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(std::string_view text) {
  text = trim(text);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError("expected a number, got '" + std::string(text) + "'");
  }
  return value;
}

long long to_integer(std::string_view text) {
  text = trim(text);
  long long value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError("expected an integer, got '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> items;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    items.push_back(trim(text.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return items;
}

Vec to_vec(std::string_view text) {
  const auto items = split_list(text);
  Vec v(static_cast<Eigen::Index>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i) v(i) = to_double(items[i]);
  return v;
}

std::string from_vec(const Vec& v) {
  std::string out;
  for (int i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += csv::format_number(v(i));
  }
  return out;
}

bool to_bool(std::string_view text) {
  text = trim(text);
  if (text == "true") return true;
  if (text == "false") return false;
  throw ConfigError("expected true or false, got '" + std::string(text) + "'");
}

struct Entry {
  const char* section;
  const char* key;
  std::function<void(SolverConfig&, std::string_view)> set;
  std::function<std::string(const SolverConfig&)> get;
};

Entry number(const char* section, const char* key, double SolverConfig::*field) {
  return {section, key,
          [field](SolverConfig& c, std::string_view s) { c.*field = to_double(s); },
          [field](const SolverConfig& c) { return csv::format_number(c.*field); }};
}

Entry integer(const char* section, const char* key, int SolverConfig::*field) {
  return {section, key,
          [field](SolverConfig& c, std::string_view s) {
            c.*field = static_cast<int>(to_integer(s));
          },
          [field](const SolverConfig& c) { return std::to_string(c.*field); }};
}

Entry vector(const char* section, const char* key, Vec SolverConfig::*field) {
  return {section, key,
          [field](SolverConfig& c, std::string_view s) { c.*field = to_vec(s); },
          [field](const SolverConfig& c) { return from_vec(c.*field); }};
}

Entry arm_number(const char* key, double ArmParams::*field) {
  return {"arm", key,
          [field](SolverConfig& c, std::string_view s) { c.arm.*field = to_double(s); },
          [field](const SolverConfig& c) { return csv::format_number(c.arm.*field); }};
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      number("time", "horizon", &SolverConfig::horizon),
      integer("time", "intervals", &SolverConfig::intervals),

      vector("task", "x_init", &SolverConfig::x_init),
      vector("task", "target", &SolverConfig::target),
      {"task", "mode",
       [](SolverConfig& c, std::string_view s) {
         s = trim(s);
         if (s == "endpoint") c.mode = TerminalMode::kEndpoint;
         else if (s == "density-mismatch") c.mode = TerminalMode::kDensityMismatch;
         else throw ConfigError("mode must be endpoint or density-mismatch");
       },
       [](const SolverConfig& c) {
         return std::string(c.mode == TerminalMode::kEndpoint ? "endpoint"
                                                              : "density-mismatch");
       }},
      number("task", "gamma", &SolverConfig::gamma),

      vector("box", "lower", &SolverConfig::box_lower),
      vector("box", "upper", &SolverConfig::box_upper),
      {"box", "intervals",
       [](SolverConfig& c, std::string_view s) {
         c.box_intervals.clear();
         for (auto item : split_list(s)) {
           c.box_intervals.push_back(static_cast<int>(to_integer(item)));
         }
       },
       [](const SolverConfig& c) {
         std::string out;
         for (std::size_t i = 0; i < c.box_intervals.size(); ++i) {
           if (i) out += ", ";
           out += std::to_string(c.box_intervals[i]);
         }
         return out;
       }},

      integer("density", "trackmax", &SolverConfig::trackmax),
      {"density", "seed",
       [](SolverConfig& c, std::string_view s) {
         const long long v = to_integer(s);
         if (v < 0) throw ConfigError("seed must be non-negative");
         c.seed = static_cast<std::uint64_t>(v);
       },
       [](const SolverConfig& c) { return std::to_string(c.seed); }},
      integer("density", "half_width", &SolverConfig::half_width),
      integer("density", "workers", &SolverConfig::workers),

      vector("lqr", "terminal_weight", &SolverConfig::terminal_weight),
      vector("lqr", "control_weight", &SolverConfig::control_weight),
      integer("lqr", "riccati_substeps", &SolverConfig::riccati_substeps),
      number("lqr", "riccati_bound", &SolverConfig::riccati_bound),

      number("optimizer", "eps0", &SolverConfig::eps0),
      number("optimizer", "eps_tol", &SolverConfig::eps_tol),
      {"optimizer", "line_search",
       [](SolverConfig& c, std::string_view s) {
         s = trim(s);
         if (s == "outer") c.line_search = LineSearchRule::kOuterCost;
         else if (s == "literal") c.line_search = LineSearchRule::kPreviousTrial;
         else throw ConfigError("line_search must be outer or literal");
       },
       [](const SolverConfig& c) {
         return std::string(c.line_search == LineSearchRule::kOuterCost ? "outer"
                                                                        : "literal");
       }},
      {"optimizer", "step_sign",
       [](SolverConfig& c, std::string_view s) {
         s = trim(s);
         if (s == "descent") c.step_sign = StepSign::kDescent;
         else if (s == "literal") c.step_sign = StepSign::kLiteral;
         else throw ConfigError("step_sign must be descent or literal");
       },
       [](const SolverConfig& c) {
         return std::string(c.step_sign == StepSign::kDescent ? "descent" : "literal");
       }},
      integer("optimizer", "max_outer", &SolverConfig::max_outer),
      integer("optimizer", "max_inner", &SolverConfig::max_inner),
      number("optimizer", "eps_floor", &SolverConfig::eps_floor),
      {"optimizer", "normalize_volume",
       [](SolverConfig& c, std::string_view s) { c.normalize_volume = to_bool(s); },
       [](const SolverConfig& c) {
         return std::string(c.normalize_volume ? "true" : "false");
       }},

      integer("rollout", "substeps", &SolverConfig::substeps),
      number("rollout", "divergence_bound", &SolverConfig::divergence_bound),
      {"rollout", "hold",
       [](SolverConfig& c, std::string_view s) {
         s = trim(s);
         if (s == "linear") c.hold = ControlHold::kLinear;
         else if (s == "zero-order") c.hold = ControlHold::kZeroOrder;
         else throw ConfigError("hold must be linear or zero-order");
       },
       [](const SolverConfig& c) {
         return std::string(c.hold == ControlHold::kLinear ? "linear" : "zero-order");
       }},

      arm_number("L1", &ArmParams::L1),
      arm_number("L2", &ArmParams::L2),
      arm_number("M1", &ArmParams::M1),
      arm_number("M2", &ArmParams::M2),
      arm_number("S1", &ArmParams::S1),
      arm_number("S2", &ArmParams::S2),
      arm_number("I1", &ArmParams::I1),
      arm_number("I2", &ArmParams::I2),
      arm_number("B11", &ArmParams::B11),
      arm_number("B12", &ArmParams::B12),
      arm_number("B21", &ArmParams::B21),
      arm_number("B22", &ArmParams::B22),
      arm_number("g", &ArmParams::g),
  };
  return table;
}

bool same(const Vec& a, const Vec& b) {
  return a.size() == b.size() && (a.size() == 0 || a == b);
}

}  // namespace

void SolverConfig::validate() const {
  auto require = [](bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError("invalid value for '" + key + "': " + what);
  };
  const int n = state_dim();
  const int m = control_dim();
  require(horizon > 0 && std::isfinite(horizon), "time.horizon", "must be positive");
  require(intervals >= 2, "time.intervals", "must be at least 2");
  require(n >= 1, "task.x_init", "must not be empty");
  require(target.size() >= 1, "task.target", "must not be empty");
  require(mode != TerminalMode::kEndpoint || target.size() == n, "task.target",
          "needs one entry per state in endpoint mode");
  require(gamma > 0, "task.gamma", "must be positive");
  require(box_lower.size() == n, "box.lower", "needs one entry per state");
  require(box_upper.size() == n, "box.upper", "needs one entry per state");
  require(static_cast<int>(box_intervals.size()) == n || box_intervals.size() == 1,
          "box.intervals", "needs one entry, or one per state");
  for (int d = 0; d < n; ++d) {
    require(box_lower(d) < box_upper(d), "box.lower", "must be below box.upper");
  }
  for (int k : box_intervals) require(k >= 1, "box.intervals", "must be >= 1");
  require(trackmax >= 1, "density.trackmax", "must be positive");
  require(half_width >= 1, "density.half_width", "must be positive");
  require(workers >= 0, "density.workers", "must be non-negative");
  require(terminal_weight.size() == n, "lqr.terminal_weight", "needs one entry per state");
  require(m >= 1, "lqr.control_weight", "must not be empty");
  for (int i = 0; i < n; ++i) {
    require(terminal_weight(i) >= 0, "lqr.terminal_weight", "must be non-negative");
  }
  for (int i = 0; i < m; ++i) {
    require(control_weight(i) > 0, "lqr.control_weight", "must be positive");
  }
  require(riccati_substeps >= 1, "lqr.riccati_substeps", "must be positive");
  require(riccati_bound > 0, "lqr.riccati_bound", "must be positive");
  require(eps0 > 0, "optimizer.eps0", "must be positive");
  require(eps_tol > 0, "optimizer.eps_tol", "must be positive");
  require(max_outer >= 1, "optimizer.max_outer", "must be positive");
  require(max_inner >= 1, "optimizer.max_inner", "must be positive");
  require(eps_floor > 0, "optimizer.eps_floor", "must be positive");
  require(substeps >= 1, "rollout.substeps", "must be positive");
  require(divergence_bound > 0, "rollout.divergence_bound", "must be positive");
  arm.validate();
}

bool SolverConfig::operator==(const SolverConfig& o) const {
  return horizon == o.horizon && intervals == o.intervals &&
         same(x_init, o.x_init) && same(target, o.target) && mode == o.mode &&
         gamma == o.gamma && same(box_lower, o.box_lower) &&
         same(box_upper, o.box_upper) && box_intervals == o.box_intervals &&
         trackmax == o.trackmax && seed == o.seed && half_width == o.half_width &&
         workers == o.workers && same(terminal_weight, o.terminal_weight) &&
         same(control_weight, o.control_weight) &&
         riccati_substeps == o.riccati_substeps &&
         riccati_bound == o.riccati_bound && eps0 == o.eps0 &&
         eps_tol == o.eps_tol && line_search == o.line_search &&
         step_sign == o.step_sign &&
         max_outer == o.max_outer && max_inner == o.max_inner &&
         eps_floor == o.eps_floor && normalize_volume == o.normalize_volume &&
         substeps == o.substeps && divergence_bound == o.divergence_bound &&
         hold == o.hold && arm == o.arm;
}

SolverConfig parse_config(std::istream& is) {
  SolverConfig config;
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) {
      text = text.substr(0, hash);
    }
    text = trim(text);
    if (text.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError(where + "unterminated section header");
      section = std::string(trim(text.substr(1, text.size() - 2)));
      bool known = false;
      for (const auto& e : entries()) known = known || section == e.section;
      if (!known) throw ConfigError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
    if (section.empty()) throw ConfigError(where + "key outside of any section");
    const std::string key(trim(text.substr(0, eq)));
    const std::string_view value = trim(text.substr(eq + 1));
    const Entry* match = nullptr;
    for (const auto& e : entries()) {
      if (section == e.section && key == e.key) match = &e;
    }
    if (!match) throw ConfigError(where + "unknown key '" + key + "' in [" + section + "]");
    try {
      match->set(config, value);
    } catch (const ConfigError& err) {
      throw ConfigError(where + section + "." + key + ": " + err.what());
    }
  }
  if (config.box_intervals.size() == 1 && config.state_dim() > 1) {
    config.box_intervals.assign(config.state_dim(), config.box_intervals.front());
  }
  config.validate();
  return config;
}

SolverConfig parse_config_string(std::string_view text) {
  std::istringstream is{std::string(text)};
  return parse_config(is);
}

SolverConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(is);
}

std::string write_config(const SolverConfig& config) {
  std::ostringstream os;
  std::string section;
  for (const auto& e : entries()) {
    if (section != e.section) {
      if (!section.empty()) os << '\n';
      section = e.section;
      os << '[' << section << "]\n";
    }
    os << e.key << " = " << e.get(config) << '\n';
  }
  return os.str();
}

std::uint64_t config_hash(const SolverConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : write_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool is_preset(std::string_view name) {
  return name == "experiment1" || name == "experiment2";
}

SolverConfig preset(std::string_view name) {
  SolverConfig config;
  if (name == "experiment1") return config;
  if (name == "experiment2") {
    config.x_init << 0.1, -0.1, 0.0, 0.0;
    config.target << -0.32, 0.27, 0.0, 0.0;
    return config;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

void apply_full_fidelity(SolverConfig& config) {
  config.box_intervals.assign(config.state_dim(), 256);
}

}  // namespace minatt
