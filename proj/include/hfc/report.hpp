#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hfc/io.hpp"

namespace hfc {

/// value <relation> target within tolerance:
///   le:  value <= target + tolerance
///   ge:  value >= target - tolerance
///   abs: |value - target| <= tolerance
///   rel: |value - target| <= tolerance * |target|
struct Check {
  std::string name;
  double value = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  std::string relation = "le";
  bool pass = false;
  std::optional<std::string> error;
};

Check make_check(std::string name, double value, std::string relation, double target, double tolerance = 0.0);

struct Series {
  std::string name;
  std::string x_label = "x";
  std::string y_label = "y";
  std::vector<double> x;
  std::vector<double> y;
};

struct Report {
  std::string suite;
  std::string input_digest;
  std::optional<std::uint64_t> seed;
  std::string version;
  std::string quad_profile;
  std::vector<Check> checks;   ///< sorted by name
  std::vector<Series> series;  ///< sorted by name
  io::json data = io::json::object();

  bool pass() const;
};

io::json to_json(const Report& report);

enum class Format { json, csv, plotdata };

Format parse_format(const std::string& s);
std::string extension(Format f);
std::string render(const Report& report, Format f);
/// Writes <dir>/<suite>.<ext>; throws IoError.
std::filesystem::path emit(const Report& report, Format f, const std::filesystem::path& dir);

/// Collects the output of one named task.
struct TaskSink {
  std::vector<Check> checks;
  std::vector<Series> series;
  io::json data;

  void check(std::string name, double value, std::string relation, double target, double tolerance = 0.0) {
    checks.push_back(make_check(std::move(name), value, std::move(relation), target, tolerance));
  }
  void add_series(Series s) { series.push_back(std::move(s)); }
};

struct Task {
  std::string name;
  std::function<void(TaskSink&)> run;
};

/// Runs the tasks on up to `jobs` threads. A throwing task contributes a
/// failed check named after it carrying the error; its siblings still run.
/// Output is merged in name order, independent of completion order.
void run_tasks(const std::vector<Task>& tasks, int jobs, Report& report);

}  // namespace hfc
