#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "hfc/suites.hpp"

namespace {

hfc::io::json read_problem(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw hfc::IoError("cannot read " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return hfc::io::json::parse(ss.str());
  } catch (const hfc::io::json::parse_error& e) {
    throw hfc::SchemaError(path + ": malformed JSON: " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hfc: joint functional calculus of commuting sectorial matrices"};
  app.require_subcommand(1);

  std::string problem_path, out_dir, format = "json";
  int jobs = 1;
  std::uint64_t seed = 0;
  std::vector<double> nu;
  int nodes_per_decade = 0;
  double rmin = 0.0, rmax = 0.0;

  const std::map<std::string, std::string> about{
      {"analyze", "commutation, types, joint spectrum and R-sectoriality of a tuple"},
      {"fc", "f(A) by contour quadrature against the spectral oracle"},
      {"fc-constant", "lower bound for the joint calculus constant"},
      {"angle-profile", "calculus constant along a ladder of sector angles"},
      {"phi-check", "phi_m(A) x -> x and its rate"},
      {"integral-check", "semigroup integral identity for phi_m(A)"},
      {"sqfn", "square function norms and their refinement curve"},
      {"quad-check", "quadratic estimate for a family of functions"},
      {"reproduce", "calibrated reproducing formula"},
      {"schatten", "calculus constant growth on S^p_n"},
      {"dilate", "dilation of the semigroups to shift groups"},
      {"transfer", "norm transfer through the dilation"},
      {"multiplier", "Fourier multiplier norm against its symbol"},
      {"group-equiv", "multiplier and calculus constants of a group tuple"},
      {"verify-all", "built-in regression checks over every module"},
  };
  for (const auto& verb : hfc::verbs()) {
    auto* sub = app.add_subcommand(verb, about.count(verb) ? about.at(verb) : "");
    auto* problem = sub->add_option("--problem", problem_path, "problem file (JSON)");
    if (verb != "verify-all") problem->required();
    sub->add_option("--out", out_dir, "output directory (stdout when omitted)");
    sub->add_option("--format", format, "json, csv or plotdata")->check(CLI::IsMember({"json", "csv", "plotdata"}));
    sub->add_option("--jobs", jobs, "concurrent checks")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "seed (overrides the problem file)");
    sub->add_option("--nu", nu, "contour angles, one per coordinate");
    sub->add_option("--nodes-per-decade", nodes_per_decade, "contour nodes per decade");
    sub->add_option("--rmin", rmin, "contour radial range start");
    sub->add_option("--rmax", rmax, "contour radial range end");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string verb = sub->get_name();
  try {
    hfc::RunOptions opt;
    const char* profile = std::getenv("HFC_QUAD_PROFILE");
    opt.profile = hfc::quad_profile(profile ? profile : "default");
    opt.jobs = jobs;
    if (sub->count("--seed")) opt.seed = seed;
    opt.nu = nu;
    if (sub->count("--nodes-per-decade")) opt.nodes_per_decade = nodes_per_decade;
    if (sub->count("--rmin")) opt.r_min = rmin;
    if (sub->count("--rmax")) opt.r_max = rmax;

    const hfc::io::json problem = problem_path.empty() ? hfc::io::json::object() : read_problem(problem_path);
    const hfc::Report report = hfc::run_suite(verb, problem, opt);
    const hfc::Format f = hfc::parse_format(format);
    if (out_dir.empty()) {
      std::cout << hfc::render(report, f);
    } else {
      const auto path = hfc::emit(report, f, out_dir);
      for (const auto& c : report.checks)
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << c.value << " target=" << c.target
                  << " tol=" << c.tolerance << (c.error ? " error=" + *c.error : "") << "\n";
      std::cout << "wrote " << path.string() << "\n";
    }
    return report.pass() ? 0 : 1;
  } catch (const hfc::SchemaError& e) {
    std::cerr << "hfc: " << e.what() << "\n";
    return 2;
  } catch (const hfc::IoError& e) {
    std::cerr << "hfc: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "hfc: " << e.what() << "\n";
    return 2;
  }
}
