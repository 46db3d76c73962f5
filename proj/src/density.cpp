#include "minatt/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include "minatt/csv.hpp"

namespace minatt {

PhaseBox::PhaseBox(Vec lower, Vec upper, std::vector<int> intervals)
    : lower_(std::move(lower)), upper_(std::move(upper)),
      intervals_(std::move(intervals)) {
  const int n = dim();
  if (n == 0 || upper_.size() != n || static_cast<int>(intervals_.size()) != n) {
    throw ConfigError("phase box: bounds and intervals disagree on dimension");
  }
  width_.resize(n);
  cell_volume_ = 1.0;
  double keys = 1.0;
  for (int d = 0; d < n; ++d) {
    if (!(lower_(d) < upper_(d)) || !std::isfinite(upper_(d) - lower_(d))) {
      throw ConfigError("phase box: lower bound must be below upper bound");
    }
    if (intervals_[d] < 1) throw ConfigError("phase box: intervals must be >= 1");
    width_(d) = (upper_(d) - lower_(d)) / intervals_[d];
    cell_volume_ *= width_(d);
    keys *= intervals_[d];
  }
  if (keys > 9.0e18) throw ConfigError("phase box: too many cells to index");
}

double PhaseBox::volume() const { return (upper_ - lower_).prod(); }

bool PhaseBox::contains(const Vec& x) const {
  for (int d = 0; d < dim(); ++d) {
    if (!(x(d) >= lower_(d) && x(d) <= upper_(d))) return false;
  }
  return true;
}

int PhaseBox::index_along(int d, double value) const {
  if (!(value >= lower_(d) && value <= upper_(d))) return -1;
  const int i = static_cast<int>((value - lower_(d)) / width_(d));
  return std::min(i, intervals_[d] - 1);
}

std::optional<CellKey> PhaseBox::cell_of(const Vec& x) const {
  CellKey key = 0;
  CellKey stride = 1;
  for (int d = 0; d < dim(); ++d) {
    const int i = index_along(d, x(d));
    if (i < 0) return std::nullopt;
    key += stride * static_cast<CellKey>(i);
    stride *= static_cast<CellKey>(intervals_[d]);
  }
  return key;
}

CellKey PhaseBox::pack(const std::vector<int>& index) const {
  CellKey key = 0;
  CellKey stride = 1;
  for (int d = 0; d < dim(); ++d) {
    key += stride * static_cast<CellKey>(index[d]);
    stride *= static_cast<CellKey>(intervals_[d]);
  }
  return key;
}

std::vector<int> PhaseBox::unpack(CellKey key) const {
  std::vector<int> index(dim());
  for (int d = 0; d < dim(); ++d) {
    index[d] = static_cast<int>(key % intervals_[d]);
    key /= intervals_[d];
  }
  return index;
}

Vec PhaseBox::cell_center(CellKey key) const {
  const std::vector<int> index = unpack(key);
  Vec c(dim());
  for (int d = 0; d < dim(); ++d) c(d) = lower_(d) + (index[d] + 0.5) * width_(d);
  return c;
}

SmoothedDelta::SmoothedDelta(Vec center, const PhaseBox& box,
                             int half_width_cells)
    : center_(std::move(center)) {
  const int n = box.dim();
  if (center_.size() != n) throw Error("smoothed delta: dimension mismatch");
  if (half_width_cells < 1) throw ConfigError("smoothed delta: half width must be >= 1 cell");
  half_width_ = half_width_cells * box.cell_width();
  peak_ = 1.0;
  for (int d = 0; d < n; ++d) {
    const double lo = center_(d) - half_width_(d);
    const double hi = center_(d) + half_width_(d);
    if (!(lo >= box.lower()(d) && hi <= box.upper()(d))) {
      throw SupportOverflowError(
          "smoothed delta support leaves the box along dimension " +
          std::to_string(d));
    }
    peak_ /= half_width_(d);
  }
}

double SmoothedDelta::operator()(const Vec& x) const {
  double value = 1.0;
  for (int d = 0; d < center_.size(); ++d) {
    const double r = x(d) - center_(d);
    const double w = half_width_(d);
    if (std::abs(r) >= w) return 0.0;
    value *= (1.0 + std::cos(std::numbers::pi * r / w)) / (2.0 * w);
  }
  return value;
}

BinnedDensity SmoothedDelta::binned(const PhaseBox& box) const {
  const int n = box.dim();
  // Per-dimension profile at cell centers; the product is separable.
  std::vector<std::vector<std::pair<int, double>>> axes(n);
  for (int d = 0; d < n; ++d) {
    const double w = half_width_(d);
    for (int i = 0; i < box.intervals()[d]; ++i) {
      const double r = box.lower()(d) + (i + 0.5) * box.cell_width()(d) - center_(d);
      if (std::abs(r) >= w) continue;
      axes[d].emplace_back(i, (1.0 + std::cos(std::numbers::pi * r / w)) / (2.0 * w));
    }
  }
  BinnedDensity out;
  std::vector<std::size_t> pos(n, 0);
  for (int d = 0; d < n; ++d) {
    if (axes[d].empty()) return out;
  }
  std::vector<int> index(n);
  while (true) {
    double value = 1.0;
    for (int d = 0; d < n; ++d) {
      index[d] = axes[d][pos[d]].first;
      value *= axes[d][pos[d]].second;
    }
    out.emplace(box.pack(index), value);
    int d = 0;
    while (d < n && ++pos[d] == axes[d].size()) pos[d++] = 0;
    if (d == n) break;
  }
  return out;
}

double DensityField::fraction(int node, CellKey key) const {
  const auto& m = counts[node];
  const auto it = m.find(key);
  return it == m.end() ? 0.0 : static_cast<double>(it->second) / trackmax;
}

int DensityField::occupied_count(int node, CellKey key) const {
  const auto& m = counts[node];
  const auto it = m.find(key);
  return it == m.end() ? 0 : static_cast<int>(it->second);
}

double DensityField::mass(int node) const {
  std::uint64_t total = 0;
  for (const auto& [key, c] : counts[node]) total += c;
  return static_cast<double>(total) / trackmax;
}

double DensityField::exited_fraction(int node) const {
  return static_cast<double>(exited[node]) / trackmax;
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Vec draw_initial_state(const InitialDensity& rho0, std::uint64_t seed,
                       std::uint64_t sample) {
  std::mt19937_64 rng(splitmix64(seed ^ splitmix64(sample)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = static_cast<int>(rho0.center().size());
  Vec x(n);
  while (true) {
    for (int d = 0; d < n; ++d) {
      x(d) = rho0.center()(d) + (2.0 * unit(rng) - 1.0) * rho0.half_width()(d);
    }
    if (unit(rng) * rho0.peak() < rho0(x)) return x;
  }
}

struct WorkerTally {
  std::vector<std::unordered_map<CellKey, std::uint32_t>> counts;
  std::vector<int> exits_at;          // samples whose first outside node is i
  std::vector<Vec> terminal_states;
};

void run_samples(const System& system, const ControlLaw& law,
                 const InitialDensity& rho0, const PhaseBox& box,
                 const DensityOptions& options, int begin, int end,
                 WorkerTally& tally) {
  const TimeGrid& grid = law.grid;
  tally.counts.assign(grid.nodes(), {});
  tally.exits_at.assign(grid.nodes(), 0);
  for (int k = begin; k < end; ++k) {
    Vec x = draw_initial_state(rho0, options.seed, static_cast<std::uint64_t>(k));
    bool inside = true;
    for (int i = 0; i < grid.nodes(); ++i) {
      const auto cell = box.cell_of(x);
      if (!cell) {
        ++tally.exits_at[i];
        inside = false;
        break;
      }
      ++tally.counts[i][*cell];
      if (i == grid.N) break;
      try {
        x = advance_interval(system, law, x, i, options.rollout);
      } catch (const SingularMassError&) {
        x.setConstant(std::numeric_limits<double>::infinity());
      } catch (const DivergenceError&) {
        x.setConstant(std::numeric_limits<double>::infinity());
      }
    }
    if (inside) tally.terminal_states.push_back(x);
  }
}

}  // namespace

DensityField estimate_density(const System& system, const ControlLaw& law,
                              const InitialDensity& rho0, const PhaseBox& box,
                              const DensityOptions& options) {
  if (options.trackmax < 1) throw ConfigError("trackmax must be >= 1");
  if (box.dim() != system.state_dim()) {
    throw Error("density: box dimension differs from the state dimension");
  }
  int workers = options.workers > 0
                    ? options.workers
                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, options.trackmax);

  std::vector<WorkerTally> tallies(workers);
  auto block = [&](int w) { return static_cast<int>(
      static_cast<long long>(options.trackmax) * w / workers); };
  if (workers == 1) {
    run_samples(system, law, rho0, box, options, 0, options.trackmax, tallies[0]);
  } else {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          run_samples(system, law, rho0, box, options, block(w), block(w + 1),
                      tallies[w]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  const TimeGrid& grid = law.grid;
  DensityField field;
  field.grid = grid;
  field.box = box;
  field.trackmax = options.trackmax;
  field.counts.assign(grid.nodes(), {});
  field.exited.assign(grid.nodes(), 0);
  std::vector<int> exits_at(grid.nodes(), 0);
  for (auto& tally : tallies) {
    for (int i = 0; i < grid.nodes(); ++i) {
      for (const auto& [key, c] : tally.counts[i]) field.counts[i][key] += c;
      exits_at[i] += tally.exits_at[i];
    }
    for (auto& x : tally.terminal_states) field.terminal_states.push_back(std::move(x));
  }
  int running = 0;
  for (int i = 0; i < grid.nodes(); ++i) {
    running += exits_at[i];
    field.exited[i] = running;
  }
  return field;
}

double density_at(const DensityField& field, const Vec& x, int node) {
  const auto cell = field.box.cell_of(x);
  if (!cell) return 0.0;
  return field.fraction(node, *cell) / field.box.cell_volume();
}

double binned_at(const BinnedDensity& binned, const PhaseBox& box,
                 const Vec& x) {
  const auto cell = box.cell_of(x);
  if (!cell) return 0.0;
  const auto it = binned.find(*cell);
  return it == binned.end() ? 0.0 : it->second;
}

double terminal_mismatch(const DensityField& field, const BinnedDensity& psi) {
  const double vol = field.box.cell_volume();
  const auto& terminal = field.counts[field.grid.N];
  // Summed in key order so the result does not depend on hash-map layout.
  std::vector<CellKey> keys;
  keys.reserve(terminal.size() + psi.size());
  for (const auto& entry : terminal) keys.push_back(entry.first);
  for (const auto& entry : psi) keys.push_back(entry.first);
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  double sum = 0.0;
  for (CellKey key : keys) {
    const auto it = psi.find(key);
    const double diff = field.fraction(field.grid.N, key) / vol -
                        (it == psi.end() ? 0.0 : it->second);
    sum += diff * diff;
  }
  return sum * vol;
}

double terminal_mismatch(const DensityField& field, const TargetDensity& psi) {
  return terminal_mismatch(field, psi.binned(field.box));
}

void write_marginals_csv(std::ostream& os, const DensityField& field) {
  csv::write_row(os, std::vector<std::string>{"t_index", "dim", "bin", "fraction"});
  const PhaseBox& box = field.box;
  for (int i = 0; i < field.grid.nodes(); ++i) {
    std::vector<std::vector<double>> hist(box.dim());
    for (int d = 0; d < box.dim(); ++d) hist[d].assign(box.intervals()[d], 0.0);
    for (const auto& [key, c] : field.counts[i]) {
      const std::vector<int> index = box.unpack(key);
      for (int d = 0; d < box.dim(); ++d) {
        hist[d][index[d]] += static_cast<double>(c) / field.trackmax;
      }
    }
    for (int d = 0; d < box.dim(); ++d) {
      for (int b = 0; b < box.intervals()[d]; ++b) {
        if (hist[d][b] == 0.0) continue;
        csv::write_row(os, std::vector<double>{static_cast<double>(i),
                                               static_cast<double>(d),
                                               static_cast<double>(b), hist[d][b]});
      }
    }
  }
}

void write_field_csv(std::ostream& os, const DensityField& field) {
  const PhaseBox& box = field.box;
  std::vector<std::string> header{"t_index"};
  for (int d = 0; d < box.dim(); ++d) header.push_back("i_" + std::to_string(d));
  header.push_back("fraction");
  csv::write_row(os, header);
  for (int i = 0; i < field.grid.nodes(); ++i) {
    std::vector<std::pair<CellKey, std::uint32_t>> cells(field.counts[i].begin(),
                                                         field.counts[i].end());
    std::sort(cells.begin(), cells.end());
    for (const auto& [key, c] : cells) {
      std::vector<double> row{static_cast<double>(i)};
      for (int idx : box.unpack(key)) row.push_back(idx);
      row.push_back(static_cast<double>(c) / field.trackmax);
      csv::write_row(os, row);
    }
  }
}

}  // namespace minatt
