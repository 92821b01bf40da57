#include "hfc/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

namespace hfc {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

Check make_check(std::string name, double value, std::string relation, double target, double tolerance) {
  Check c{std::move(name), value, target, tolerance, std::move(relation), false, std::nullopt};
  const double gap = value - target;
  if (c.relation == "le") c.pass = gap <= tolerance;
  else if (c.relation == "ge") c.pass = -gap <= tolerance;
  else if (c.relation == "abs") c.pass = std::abs(gap) <= tolerance;
  else if (c.relation == "rel") c.pass = std::abs(gap) <= tolerance * std::abs(target);
  else throw InvalidArgument("unknown check relation " + c.relation);
  return c;  // NaN fails every relation
}

bool Report::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

io::json to_json(const Report& report) {
  io::json checks = io::json::array();
  for (const auto& c : report.checks) {
    io::json j{{"name", c.name},     {"value", c.value},       {"target", c.target},
               {"tolerance", c.tolerance}, {"relation", c.relation}, {"pass", c.pass}};
    if (c.error) j["error"] = *c.error;
    checks.push_back(std::move(j));
  }
  io::json series = io::json::object();
  for (const auto& s : report.series)
    series[s.name] = {{"x_label", s.x_label}, {"y_label", s.y_label}, {"x", s.x}, {"y", s.y}};
  return {{"suite", report.suite},
          {"input_digest", report.input_digest},
          {"seed", report.seed ? io::json(*report.seed) : io::json(nullptr)},
          {"environment", {{"version", report.version}, {"quad_profile", report.quad_profile}}},
          {"pass", report.pass()},
          {"checks", checks},
          {"series", series},
          {"data", report.data}};
}

Format parse_format(const std::string& s) {
  if (s == "json") return Format::json;
  if (s == "csv") return Format::csv;
  if (s == "plotdata") return Format::plotdata;
  throw SchemaError("unknown format \"" + s + "\"");
}

std::string extension(Format f) {
  switch (f) {
    case Format::json: return "json";
    case Format::csv: return "csv";
    case Format::plotdata: return "tsv";
  }
  return "";
}

std::string render(const Report& report, Format f) {
  if (f == Format::json) return io::canonical_dump(to_json(report));
  std::string out;
  if (f == Format::csv) {
    out = "suite,name,value,target,tolerance,relation,pass,error\n";
    for (const auto& c : report.checks)
      out += csv_field(report.suite) + "," + csv_field(c.name) + "," + num(c.value) + "," + num(c.target) + "," +
             num(c.tolerance) + "," + c.relation + "," + (c.pass ? "true" : "false") + "," +
             csv_field(c.error.value_or("")) + "\n";
    return out;
  }
  out = "# suite: " + report.suite + "\n# input_digest: " + report.input_digest + "\n";
  for (const auto& s : report.series) {
    out += "\n# series: " + s.name + "\n# " + s.x_label + "\t" + s.y_label + "\n";
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) out += num(s.x[i]) + "\t" + num(s.y[i]) + "\n";
  }
  return out;
}

std::filesystem::path emit(const Report& report, Format f, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const auto path = dir / (report.suite + "." + extension(f));
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string());
  os << render(report, f);
  if (!os) throw IoError("write failed for " + path.string());
  return path;
}

void run_tasks(const std::vector<Task>& tasks, int jobs, Report& report) {
  std::vector<TaskSink> sinks(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
      try {
        tasks[i].run(sinks[i]);
      } catch (const std::exception& e) {
        Check c{tasks[i].name, NAN, 0.0, 0.0, "le", false, std::string(e.what())};
        sinks[i].checks.push_back(std::move(c));
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    for (auto& c : sinks[i].checks) report.checks.push_back(std::move(c));
    for (auto& s : sinks[i].series) report.series.push_back(std::move(s));
    if (!sinks[i].data.is_null()) report.data[tasks[i].name] = std::move(sinks[i].data);
  }
  auto by_name = [](const auto& a, const auto& b) { return a.name < b.name; };
  std::stable_sort(report.checks.begin(), report.checks.end(), by_name);
  std::stable_sort(report.series.begin(), report.series.end(), by_name);
}

}  // namespace hfc
