#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <unordered_map>
#include <vector>

#include "minatt/dynamics.hpp"
#include "minatt/rollout.hpp"
#include "minatt/schedules.hpp"

namespace minatt {

using CellKey = std::uint64_t;

// Axis-aligned state-space box split into uniform cells. Cells are addressed
// by a mixed-radix key (dimension 0 fastest).
class PhaseBox {
 public:
  PhaseBox() = default;
  PhaseBox(Vec lower, Vec upper, std::vector<int> intervals);

  int dim() const { return static_cast<int>(lower_.size()); }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }
  const std::vector<int>& intervals() const { return intervals_; }

  double volume() const;
  Vec center() const { return 0.5 * (lower_ + upper_); }
  Vec half_extent() const { return 0.5 * (upper_ - lower_); }
  const Vec& cell_width() const { return width_; }
  double cell_volume() const { return cell_volume_; }

  bool contains(const Vec& x) const;
  // Cell index along one dimension, or -1 outside [lower, upper].
  int index_along(int d, double value) const;
  std::optional<CellKey> cell_of(const Vec& x) const;
  CellKey pack(const std::vector<int>& index) const;
  std::vector<int> unpack(CellKey key) const;
  Vec cell_center(CellKey key) const;

 private:
  Vec lower_;
  Vec upper_;
  std::vector<int> intervals_;
  Vec width_;
  double cell_volume_ = 0.0;
};

// Cell key -> density value (mass per unit volume).
using BinnedDensity = std::unordered_map<CellKey, double>;

// Product-form cosine kernel: each dimension has profile
// (1 + cos(pi r / w)) / (2 w) for |r| <= w, w = half_width_cells * cell width.
class SmoothedDelta {
 public:
  SmoothedDelta(Vec center, const PhaseBox& box, int half_width_cells);

  double operator()(const Vec& x) const;
  double peak() const { return peak_; }
  const Vec& center() const { return center_; }
  const Vec& half_width() const { return half_width_; }

  // Kernel value at the center of every cell inside the support.
  BinnedDensity binned(const PhaseBox& box) const;

 private:
  Vec center_;
  Vec half_width_;
  double peak_ = 0.0;
};

using InitialDensity = SmoothedDelta;
using TargetDensity = SmoothedDelta;

// Monte Carlo occupancy counts N_pass per time node.
struct DensityField {
  TimeGrid grid;
  PhaseBox box;
  int trackmax = 0;
  std::vector<std::unordered_map<CellKey, std::uint32_t>> counts;
  std::vector<int> exited;            // samples outside the box by node i
  std::vector<Vec> terminal_states;   // x(T) of samples that stayed inside

  double fraction(int node, CellKey key) const;
  double mass(int node) const;
  double exited_fraction(int node) const;
  int occupied_count(int node, CellKey key) const;
};

struct DensityOptions {
  int trackmax = 2000;
  std::uint64_t seed = 1;
  int workers = 0;                    // 0: hardware concurrency
  RolloutOptions rollout;
};

// Rejection-samples trackmax initial states from rho0's support, rolls each
// through the closed loop, and counts the cell it occupies at every node.
// Sample k draws from its own stream derived from (seed, k), so the result is
// independent of the worker count.
DensityField estimate_density(const System& system, const ControlLaw& law,
                              const InitialDensity& rho0, const PhaseBox& box,
                              const DensityOptions& options);

// Cell fraction / cell volume for the cell holding x; zero outside the box.
double density_at(const DensityField& field, const Vec& x, int node);

// Value of the binned density for the cell holding x; zero if unlisted.
double binned_at(const BinnedDensity& binned, const PhaseBox& box,
                 const Vec& x);

// Sum over cells of (rho_T - psi)^2 * cell volume.
double terminal_mismatch(const DensityField& field, const BinnedDensity& psi);
double terminal_mismatch(const DensityField& field, const TargetDensity& psi);

// Rows t_index, dim, bin, fraction.
void write_marginals_csv(std::ostream& os, const DensityField& field);
// Rows t_index, i_0..i_{n-1}, fraction in key order.
void write_field_csv(std::ostream& os, const DensityField& field);

}  // namespace minatt
