#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hfc/report.hpp"

namespace hfc {

/// Contour nodes per decade and log-grid density of a quadrature preset.
struct QuadProfile {
  std::string name = "default";
  int contour_nodes = 16;
  int grid_per_decade = 32;
};

/// fast, default or strict; throws SchemaError otherwise.
QuadProfile quad_profile(const std::string& name);

struct RunOptions {
  std::optional<std::uint64_t> seed;  ///< overrides the problem's seed
  int jobs = 1;
  QuadProfile profile;
  // contour overrides
  std::vector<double> nu;
  std::optional<int> nodes_per_decade;
  std::optional<double> r_min;
  std::optional<double> r_max;
};

const std::vector<std::string>& verbs();

/// Validates the problem for `verb` (SchemaError on any defect, before any
/// numeric work), runs its checks and returns the report.
Report run_suite(const std::string& verb, const io::json& problem, const RunOptions& options = {});

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hfc
