#pragma once

#include <map>
#include <string>

#include "minatt/config.hpp"
#include "minatt/optimizer.hpp"

namespace minatt {

// File name -> CSV text for every output of a run. Each file opens with a
// "# config_hash=... seed=..." stamp followed by its header row.
std::map<std::string, std::string> render_artifacts(const SolverConfig& config,
                                                    const ArmSystem& arm,
                                                    const SolveResult& result);

std::string stamp(const SolverConfig& config);

// Writes every entry under dir (created if missing).
void write_artifacts(const std::string& dir,
                     const std::map<std::string, std::string>& files);

}  // namespace minatt
