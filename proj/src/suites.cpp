#include "hfc/suites.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "hfc/corpus.hpp"
#include "hfc/square_functions.hpp"
#include "hfc/stochastic.hpp"
#include "hfc/unit_decomposition.hpp"

namespace hfc {

using io::json;

namespace {

struct Context {
  const json& p;
  const RunOptions& opt;
  std::string verb;
  std::vector<Task> tasks;

  std::optional<std::uint64_t> seed() const {
    if (opt.seed) return opt.seed;
    if (p.contains("seed")) {
      const auto& s = p["seed"];
      if (!(s.is_number_unsigned() || (s.is_number_integer() && s.get<std::int64_t>() >= 0)))
        throw SchemaError(verb + ": \"seed\" must be a non-negative integer");
      return p["seed"].get<std::uint64_t>();
    }
    return std::nullopt;
  }
  std::uint64_t require_seed() const {
    auto s = seed();
    if (!s) throw SchemaError(verb + ": randomized suite needs an explicit \"seed\" (or --seed)");
    return *s;
  }
  double number(const char* key, double fallback) const {
    return p.contains(key) ? io::get_double(p, key, verb) : fallback;
  }
  int integer(const char* key, int fallback) const { return p.contains(key) ? io::get_int(p, key, verb) : fallback; }
  bool flag(const char* key, bool fallback) const {
    if (!p.contains(key)) return fallback;
    if (!p[key].is_boolean()) throw SchemaError(verb + ": \"" + std::string(key) + "\" must be a boolean");
    return p[key].get<bool>();
  }
  std::vector<double> numbers(const char* key) const {
    const json& j = p[key];
    if (!j.is_array() || j.empty()) throw SchemaError(verb + ": \"" + std::string(key) + "\" must be a non-empty array");
    std::vector<double> out;
    for (const auto& v : j) {
      if (!v.is_number()) throw SchemaError(verb + ": \"" + std::string(key) + "\" must hold numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }
  std::vector<int> integers(const char* key) const {
    std::vector<int> out;
    for (double v : numbers(key)) {
      if (v != std::floor(v)) throw SchemaError(verb + ": \"" + std::string(key) + "\" must hold integers");
      out.push_back(static_cast<int>(v));
    }
    return out;
  }

  FcOptions fc_options() const {
    FcOptions o;
    o.contour.nodes_per_decade = opt.profile.contour_nodes;
    if (p.contains("quadrature")) {
      const json& q = p["quadrature"];
      io::expect_keys(q, {}, {"nu", "nodes_per_decade", "rmin", "rmax"}, verb + ".quadrature");
      if (q.contains("nu")) {
        if (!q["nu"].is_array()) throw SchemaError(verb + ".quadrature: \"nu\" must be an array");
        o.contour.nu.clear();
        for (const auto& v : q["nu"]) o.contour.nu.push_back(v.get<double>());
      }
      if (q.contains("nodes_per_decade")) o.contour.nodes_per_decade = io::get_int(q, "nodes_per_decade", verb);
      if (q.contains("rmin")) o.contour.r_min = io::get_double(q, "rmin", verb);
      if (q.contains("rmax")) o.contour.r_max = io::get_double(q, "rmax", verb);
    }
    if (!opt.nu.empty()) o.contour.nu = opt.nu;
    if (opt.nodes_per_decade) o.contour.nodes_per_decade = *opt.nodes_per_decade;
    if (opt.r_min) o.contour.r_min = opt.r_min;
    if (opt.r_max) o.contour.r_max = opt.r_max;
    return o;
  }
  LogGrid log_grid() const {
    if (p.contains("grid")) return io::log_grid_from_json(p["grid"]);
    LogGrid g;
    g.per_decade = opt.profile.grid_per_decade;
    return g;
  }
  EnsembleOptions ensemble(std::uint64_t s) const {
    return p.contains("ensemble") ? io::ensemble_from_json(p["ensemble"], s) : EnsembleOptions{.seed = s};
  }

  void add(std::string name, std::function<void(TaskSink&)> run) { tasks.push_back({std::move(name), std::move(run)}); }
};

using Builder = void (*)(Context&);

bool normal_euclidean(const CommutingTuple& t) {
  if (t.space().kind != SpaceModel::Kind::euclidean) return false;
  for (const Matrix& A : t.operators()) {
    const double scale = std::max(A.squaredNorm(), 1e-300);
    if ((A * A.adjoint() - A.adjoint() * A).norm() > 1e-10 * scale) return false;
  }
  return true;
}

std::optional<JointSpectrum> try_spectrum(const CommutingTuple& t) {
  try {
    return joint_spectral_decompose(t);
  } catch (const NotSimultaneouslyDiagonalizable&) {
    return std::nullopt;
  }
}

double rel_diff(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

SectorDomain domain_from(const json& j, int d, const std::string& ctx) {
  if (j.is_number()) return SectorDomain::uniform(d, j.get<double>());
  if (j.is_array() && static_cast<int>(j.size()) == d) {
    std::vector<double> a;
    for (const auto& v : j) a.push_back(v.get<double>());
    return SectorDomain(a);
  }
  throw SchemaError(ctx + ": \"domain\" must be an angle or one angle per coordinate");
}

Vector vector_for(const Context& c, const CommutingTuple& t, const char* key, std::uint64_t fallback_seed) {
  const int n = t.space().vector_dim();
  if (!c.p.contains(key)) return random_unit_vector(n, fallback_seed);
  Vector x = io::vector_from_json(c.p[key], c.verb + "." + key);
  if (x.size() != n) throw SchemaError(c.verb + ": \"" + std::string(key) + "\" has the wrong dimension");
  return x;
}

std::vector<SampledKernel> kernels_from(const Context& c) {
  std::vector<SampledKernel> out;
  if (c.p.contains("kernels")) {
    if (!c.p["kernels"].is_array()) throw SchemaError(c.verb + ": \"kernels\" must be an array");
    for (const auto& k : c.p["kernels"]) out.push_back(io::kernel_from_json(k));
  }
  if (c.p.contains("family")) {
    const json& f = c.p["family"];
    io::expect_keys(f, {"d", "R", "count"}, {}, c.verb + ".family");
    const auto fam = kernel_family(io::get_int(f, "d", "family"), io::get_int(f, "R", "family"),
                                   io::get_int(f, "count", "family"), c.require_seed());
    out.insert(out.end(), fam.begin(), fam.end());
  }
  if (out.empty()) throw SchemaError(c.verb + ": needs \"kernels\" or \"family\"");
  return out;
}

std::string index_name(const std::string& base, std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02zu", i);
  return base + "[" + buf + "]";
}

json complex_list(const std::vector<Complex>& v) {
  json out = json::array();
  for (Complex z : v) out.push_back(io::to_json(z));
  return out;
}

// ---------------------------------------------------------------------------

void build_analyze(Context& c) {
  io::expect_keys(c.p, {"tuple"}, {"angles", "seed"}, c.verb);
  auto t = std::make_shared<CommutingTuple>(io::tuple_from_json(c.p["tuple"]));
  std::optional<std::vector<double>> angles;
  if (c.p.contains("angles")) angles = c.numbers("angles");

  c.add("commutation", [t](TaskSink& s) { s.check("commutation", commutation_defect(*t), "le", t->tolerance()); });
  c.add("spectrum", [t](TaskSink& s) {
    const auto types = estimated_types(*t);
    s.data = {{"types", types}, {"normal_euclidean", normal_euclidean(*t)}};
    if (auto js = try_spectrum(*t)) {
      json eig = json::array();
      for (const auto& row : js->eigenvalues) eig.push_back(complex_list(row));
      Eigen::JacobiSVD<Matrix> sv(js->basis);
      const auto& sig = sv.singularValues();
      s.data["diagonalizable"] = true;
      s.data["eigenvalues"] = eig;
      s.data["basis_condition"] = sig(0) / sig(sig.size() - 1);
      const ErgodicSplit split = ergodic_split(*t, *js);
      json ranks = json::object();
      for (const auto& [mask, P] : split.projections)
        ranks[std::to_string(mask)] = static_cast<int>(std::lround(P.trace().real()));
      s.data["ergodic_ranks"] = ranks;
    } else {
      s.data["diagonalizable"] = false;
    }
  });
  for (int k = 0; k < t->d(); ++k) {
    const std::string name = "profile.A" + std::to_string(k + 1);
    c.add(name, [t, k, angles, name](TaskSink& s) {
      const double type = spectral_angle(t->op(k));
      std::vector<double> a;
      if (angles) a = *angles;
      else
        for (double f : {0.1, 0.25, 0.5, 0.75}) a.push_back(type + f * (kPi - type));
      const SectorialProfile prof = sectorial_profile(t->op(k), t->space(), a);
      const double top = *std::max_element(prof.constants.begin(), prof.constants.end());
      s.check(name + ".finite", top, "le", 1e12);
      s.add_series({name, "angle", "constant", prof.angles, prof.constants});
      s.data = {{"inferred_type", prof.inferred_type ? json(*prof.inferred_type) : json(nullptr)}};
    });
  }
}

void build_fc(Context& c) {
  io::expect_keys(c.p, {"tuple", "function"}, {"g", "ladders", "quadrature", "tolerance", "seed"}, c.verb);
  auto t = std::make_shared<CommutingTuple>(io::tuple_from_json(c.p["tuple"]));
  auto f = std::make_shared<H01Form>(io::h01_from_json(c.p["function"], t->d()));
  const FcOptions o = c.fc_options();
  const double tol = c.number("tolerance", 1e-6);

  c.add("oracle_equivalence", [t, f, o, tol](TaskSink& s) {
    const FCResult r = contour_fc(*f, *t, o.contour);
    s.data = {{"value", io::to_json(r.value)}, {"tail_estimate", r.tail_estimate},
              {"nu", r.meta.nu}, {"r_min", r.meta.r_min}, {"r_max", r.meta.r_max},
              {"nodes", r.meta.nodes}, {"separable", r.meta.separable}};
    if (auto js = try_spectrum(*t)) {
      const Matrix oracle = spectral_oracle_fc(*f, *js);
      const double scale = std::max(oracle.norm(), 1e-300);
      s.check("oracle_equivalence", (r.value - oracle).norm() / scale, "le", 0.0, tol + r.tail_estimate / scale);
    } else {
      s.data["oracle"] = "unavailable: tuple is not diagonalizable";
    }
  });
  if (c.p.contains("g")) {
    auto g = std::make_shared<H01Form>(io::h01_from_json(c.p["g"], t->d()));
    c.add("homomorphism", [t, f, g, o](TaskSink& s) {
      const Matrix fg = contour_fc(f->product(*g), *t, o.contour).value;
      const Matrix prod = contour_fc(*f, *t, o.contour).value * contour_fc(*g, *t, o.contour).value;
      s.check("homomorphism", rel_diff(fg, prod), "le", 0.0, 1e-7);
    });
  }
  if (c.p.contains("ladders")) {
    const json& L = c.p["ladders"];
    if (!L.is_array() || L.size() != 2) throw SchemaError("fc: \"ladders\" must hold two nu vectors");
    std::vector<std::vector<double>> ladders;
    for (const auto& l : L) ladders.push_back(l.get<std::vector<double>>());
    c.add("angle_independence", [t, f, o, ladders](TaskSink& s) {
      ContourOptions a = o.contour, b = o.contour;
      a.nu = ladders[0];
      b.nu = ladders[1];
      s.check("angle_independence", rel_diff(contour_fc(*f, *t, a).value, contour_fc(*f, *t, b).value), "le", 0.0,
              1e-7);
    });
  }
}

void build_fc_constant(Context& c) {
  io::expect_keys(c.p, {"tuple", "domain", "seed"}, {"ensemble", "upper_bound", "quadrature"}, c.verb);
  auto t = std::make_shared<CommutingTuple>(io::tuple_from_json(c.p["tuple"]));
  const SectorDomain dom = domain_from(c.p["domain"], t->d(), c.verb);
  const EnsembleOptions ens = c.ensemble(c.require_seed());
  const FcOptions o = c.fc_options();
  std::optional<double> upper;
  if (c.p.contains("upper_bound")) upper = c.number("upper_bound", 0.0);

  c.add("estimate", [=](TaskSink& s) {
    const FcConstantReport r = fc_constant_estimate(*t, dom, ens, o);
    s.data = {{"estimate", r.estimate}, {"best", r.best}, {"best_description", r.best_description},
              {"ratios", r.ratios}};
    if (ens.include_constant) s.check("estimate.lower_bound", r.estimate, "ge", 1.0, 1e-9);
    if (normal_euclidean(*t)) s.check("estimate.spectral_bound", r.estimate, "le", 1.0, 0.02);
    if (upper) s.check("estimate.upper_bound", r.estimate, "le", *upper);
    std::vector<double> idx(r.ratios.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<double>(i);
    s.add_series({"ratios", "member", "ratio", idx, r.ratios});
  });
}

void build_angle_profile(Context& c) {
  io::expect_keys(c.p, {"tuple", "angles", "seed"}, {"ensemble", "flag_multiple", "flatness", "quadrature"}, c.verb);
  auto t = std::make_shared<CommutingTuple>(io::tuple_from_json(c.p["tuple"]));
  const std::vector<double> angles = c.numbers("angles");
  const EnsembleOptions ens = c.ensemble(c.require_seed());
  const FcOptions o = c.fc_options();
  const double flag = c.number("flag_multiple", 2.0);
  std::optional<double> flatness;
  if (c.p.contains("flatness")) flatness = c.number("flatness", 0.05);

  c.add("profile", [=](TaskSink& s) {
    const AngleProfile prof = angle_dependence_profile(*t, angles, ens, o, flag);
    const double flagged = static_cast<double>(std::count(prof.flagged.begin(), prof.flagged.end(), true));
    s.check("profile.flagged_rungs", flagged, "le", 0.0);
    const double lo = *std::min_element(prof.estimates.begin(), prof.estimates.end());
    const double hi = *std::max_element(prof.estimates.begin(), prof.estimates.end());
    s.check("profile.finite", hi, "le", 1e12);
    if (flatness) s.check("profile.flatness", hi / lo - 1.0, "le", *flatness);
    s.add_series({"angle_profile", "angle", "estimate", prof.angles, prof.estimates});
  });
}

void build_phi_check(Context& c) {
  io::expect_keys(c.p, {"operator", "m"}, {"space", "x", "expect", "exponent_range", "tolerance"}, c.verb);
  const Matrix A = io::matrix_from_json(c.p["operator"], "phi-check.operator");
  const SpaceModel space = c.p.contains("space") ? io::space_from_json(c.p["space"])
                                                 : SpaceModel::euclidean(static_cast<int>(A.rows()));
  if (space.vector_dim() != A.rows()) throw SchemaError("phi-check: space does not match the operator");
  std::optional<Vector> x;
  if (c.p.contains("x")) x = io::vector_from_json(c.p["x"], "phi-check.x");
  const std::vector<int> ladder = c.integers("m");
  const std::string expect = c.p.contains("expect") ? c.p["expect"].get<std::string>() : (x ? "bound" : "match");
  if (expect != "match" && expect != "bound" && expect != "none")
    throw SchemaError("phi-check: \"expect\" must be match, bound or none");
  std::vector<double> range{0.9, 1.1};
  if (c.p.contains("exponent_range")) range = c.numbers("exponent_range");
  if (range.size() != 2) throw SchemaError("phi-check: \"exponent_range\" needs two numbers");
  const double tol = c.number("tolerance", 1e-9);

  c.add("phi", [=](TaskSink& s) {
    const PhiApproximationReport r = phi_approximation_check(A, space, x, ladder);
    double worst = 0.0;
    for (std::size_t i = 0; i < r.errors.size(); ++i) {
      const double p = std::max(r.predicted[i], 1e-300);
      worst = std::max(worst, expect == "match" ? std::abs(r.errors[i] - r.predicted[i]) / p : r.errors[i] / p - 1.0);
    }
    if (expect != "none") s.check("phi.prediction", worst, "le", 0.0, tol);
    s.check("phi.rate", r.fitted_exponent, "abs", 0.5 * (range[0] + range[1]), 0.5 * (range[1] - range[0]));
    std::vector<double> m(r.m.begin(), r.m.end());
    s.add_series({"phi_error", "m", "error", m, r.errors});
    s.add_series({"phi_predicted", "m", "predicted", m, r.predicted});
    s.data = {{"fitted_exponent", r.fitted_exponent}, {"monotone_from", r.monotone_from}};
  });
}

void build_integral_check(Context& c) {
  io::expect_keys(c.p, {"operator", "m"}, {"s_min", "s_max", "nodes", "tolerance"}, c.verb);
  const Matrix A = io::matrix_from_json(c.p["operator"], "integral-check.operator");
  const int m = c.integer("m", 1);
  const double s0 = c.number("s_min", 1e-6), s1 = c.number("s_max", 1e3);
  const int nodes = c.integer("nodes", 400);
  const double tol = c.number("tolerance", 1e-6);
  c.add("integral_identity", [=](TaskSink& s) {
    const IntegralIdentityReport r = integral_identity_check(A, m, s0, s1, nodes);
    s.check("integral_identity", r.defect, "le", tol);
    s.data = {{"value", io::to_json(r.value)}};
  });
}

void build_sqfn(Context& c) {
  io::expect_keys(c.p, {"tuple", "function"},
                  {"x", "grid", "expect", "tolerance", "seed", "probes", "expect_constant", "refinements"}, c.verb);
  auto t = std::make_shared<CommutingTuple>(io::tuple_from_json(c.p["tuple"]));
  const SectorFunction F = io::function_from_json(c.p["function"], t->d());
  const bool hilbert = t->space().is_hilbert();
  const std::uint64_t seed = hilbert ? c.seed().value_or(1) : c.require_seed();
  const Vector x = vector_for(c, *t, "x", seed);
  const LogGrid grid = c.log_grid();
  std::optional<double> expect, expect_constant;
  if (c.p.contains("expect")) expect = c.number("expect", 0.0);
  if (c.p.contains("expect_constant")) expect_constant = c.number("expect_constant", 0.0);
  const double tol = c.number("tolerance", 1e-6);
  SquareFunctionOptions so;
  so.refinements = c.integer("refinements", 2);
  so.mc.seed = seed;
  const int probes = c.integer("probes", 0);

  c.add("norm", [=](TaskSink& s) {
    const SFEReport r = square_function_norm({*t, F, grid, x}, so);
    s.check("norm.cauchy", r.cauchy ? 1.0 : 0.0, "ge", 1.0);
    if (expect) s.check("norm.value", r.norm_F, "rel", *expect, tol);
    std::vector<double> density;
    for (int i = 0; i < static_cast<int>(r.refinement_curve.size()); ++i)
      density.push_back(grid.per_decade * std::pow(2.0, i));
    s.add_series({"refinement_curve", "per_decade", "norm", density, r.refinement_curve});
    s.data = {{"norm", r.norm_F}, {"constant_estimate", r.constant_estimate}, {"mode", r.mode}};
  });
  if (probes > 0) {
    c.add("constant", [=](TaskSink& s) {
      const SFEConstantReport r = sfe_constant(*t, F, sfe_probes(*t, probes, seed), grid, so);
      s.data = {{"constant_estimate", r.constant_estimate}, {"best", r.best}};
      s.check("constant.finite", r.constant_estimate, "le", 1e12);
      if (expect_constant) s.check("constant.value", r.constant_estimate, "rel", *expect_constant, 0.02);
    });
  }
}

void build_quad_check(Context& c) {
  io::expect_keys(c.p, {"tuple", "functions", "seed"}, {"x", "bound", "quadrature"}, c.verb);
  auto t = std::make_shared<CommutingTuple>(io::tuple_from_json(c.p["tuple"]));
  if (!c.p["functions"].is_array() || c.p["functions"].empty())
    throw SchemaError("quad-check: \"functions\" must be a non-empty array");
  std::vector<SectorFunction> F;
  for (const auto& f : c.p["functions"]) F.push_back(io::function_from_json(f, t->d()));
  const std::uint64_t seed = c.require_seed();
  const Vector x = vector_for(c, *t, "x", seed);
  const FcOptions o = c.fc_options();
  std::optional<double> bound;
  if (c.p.contains("bound")) bound = c.number("bound", 0.0);
  else if (normal_euclidean(*t)) bound = 1.02;
  c.add("quadratic", [=](TaskSink& s) {
    const QuadInequalityReport r = quad_inequality_check(*t, F, x, seed, o);
    s.data = {{"lhs", r.lhs}, {"rhs", r.rhs}, {"ratio", r.ratio}};
    s.check("quadratic.finite", r.ratio, "le", 1e12);
    if (bound) s.check("quadratic.bound", r.ratio, "le", *bound);
  });
}

void build_reproduce(Context& c) {
  io::expect_keys(c.p, {"tuple", "f", "Psi", "F1", "F2"}, {"grid", "tolerance", "refinements", "halving"}, c.verb);
  auto t = std::make_shared<CommutingTuple>(io::tuple_from_json(c.p["tuple"]));
  const int d = t->d();
  auto f = std::make_shared<H01Form>(io::h01_from_json(c.p["f"], d));
  const SectorFunction Psi = io::function_from_json(c.p["Psi"], d);
  const SectorFunction F1 = io::function_from_json(c.p["F1"], d);
  const SectorFunction F2 = io::function_from_json(c.p["F2"], d);
  const LogGrid grid = c.log_grid();
  const double tol = c.number("tolerance", 1e-6);
  const int refinements = c.integer("refinements", 2);
  const bool halving = c.flag("halving", false);
  c.add("reproducing", [=](TaskSink& s) {
    const ReproducingReport r = reproducing_formula_check(*t, *f, Psi, F1, F2, grid, refinements);
    s.check("reproducing.defect", r.defect, "le", tol);
    if (halving)
      for (std::size_t i = 1; i < r.defect_curve.size(); ++i)
        s.check(index_name("reproducing.halving", i), r.defect_curve[i] / r.defect_curve[i - 1], "abs", 0.5, 0.1);
    std::vector<double> pd(r.per_decade.begin(), r.per_decade.end());
    s.add_series({"defect_curve", "per_decade", "defect", pd, r.defect_curve});
    s.data = {{"calibration", io::to_json(r.calibration)}, {"defect", r.defect}};
  });
}

void build_schatten(Context& c) {
  io::expect_keys(c.p, {"p", "ladder", "seed"}, {"domain_angle", "ensemble", "tolerance"}, c.verb);
  const double p = c.number("p", 4.0);
  const std::vector<int> ladder = c.integers("ladder");
  const std::uint64_t seed = c.require_seed();
  SchattenOptions so;
  so.domain_angle = c.number("domain_angle", so.domain_angle);
  so.ensemble = c.ensemble(seed);
  const double tol = c.number("tolerance", 0.05);
  c.add("growth", [=](TaskSink& s) {
    const SchattenGrowthReport r = schatten_growth_experiment(p, ladder, seed, so);
    if (std::abs(p - 2.0) < 1e-12) {
      double worst = 0.0;
      for (double k : r.K) worst = std::max(worst, std::abs(k - 1.0));
      s.check("growth.hilbert_control", worst, "le", tol);
    } else {
      double drop = 0.0;
      for (std::size_t i = 1; i < r.K.size(); ++i) drop = std::max(drop, (r.K[i - 1] - r.K[i]) / r.K[i - 1]);
      s.check("growth.nondecreasing", drop, "le", tol);
    }
    std::vector<double> n(r.n.begin(), r.n.end());
    s.add_series({"K_of_n", "n", "K", n, r.K});
    s.data = {{"expectation", r.expectation}, {"sups", r.sups}};
  });
}

json persist_dilation(const CommutingTuple& t, const DilationSystem& sys) {
  json j{{"grid", {{"h", sys.grid.h}, {"S", sys.grid.S}, {"d", sys.grid.d}}},
         {"shift", "index"},
         {"norm_J", sys.norm_J},
         {"norm_Q", sys.norm_Q},
         {"J", nullptr},
         {"Q", nullptr}};
  if (t.d() == 1 && (2 * sys.grid.half_nodes() + 1) * t.n() <= 1024) {
    const DenseDilation D = dense_dilation(t, sys.grid);
    j["J"] = io::to_json(D.J);
    j["Q"] = io::to_json(D.Q);
  }
  return j;
}

std::vector<std::vector<double>> times_from(const Context& c, int d) {
  std::vector<std::vector<double>> times;
  if (!c.p.contains("times")) return {std::vector<double>(d, 0.5)};
  for (const auto& v : c.p["times"]) {
    auto t = v.get<std::vector<double>>();
    if (static_cast<int>(t.size()) != d) throw SchemaError(c.verb + ": each time needs one entry per coordinate");
    times.push_back(t);
  }
  if (times.empty()) throw SchemaError(c.verb + ": \"times\" is empty");
  return times;
}

void build_dilate(Context& c) {
  io::expect_keys(c.p, {"tuple"}, {"grid", "times", "tolerance", "refinement_steps"}, c.verb);
  auto t = std::make_shared<CommutingTuple>(io::tuple_from_json(c.p["tuple"]));
  const LineGrid grid = c.p.contains("grid") ? io::line_grid_from_json(c.p["grid"], t->d()) : default_line_grid(*t);
  const auto times = times_from(c, t->d());
  const double tol = c.number("tolerance", 5e-3);
  const int steps = c.integer("refinement_steps", 1);
  c.add("system", [=](TaskSink& s) { s.data = persist_dilation(*t, build_dilation(*t, grid)); });
  for (std::size_t i = 0; i < times.size(); ++i) {
    const std::string name = index_name("factorization", i);
    c.add(name, [=](TaskSink& s) {
      const auto curve = dilation_refinement_curve(*t, grid, times[i], steps);
      s.check(name + ".defect", curve.front().defect, "le", tol);
      double ratio = 0.0;
      std::vector<double> hs, defects;
      for (int k = 0; k <= steps; ++k) {
        hs.push_back(curve[k].h);
        defects.push_back(curve[k].defect);
        if (k > 0) ratio = std::max(ratio, curve[k].defect / curve[k - 1].defect);
      }
      if (steps > 0) s.check(name + ".h_halving", ratio, "le", 1.0 - 1e-12);
      s.add_series({name, "h", "defect", hs, defects});
      json rec = json::array();
      for (const auto& r : curve) rec.push_back({{"h", r.h}, {"S", r.S}, {"defect", r.defect}});
      s.data = {{"t", times[i]}, {"curve", rec}};
    });
  }
}

void build_transfer(Context& c) {
  io::expect_keys(c.p, {"tuple", "function"}, {"grid", "times", "quadrature"}, c.verb);
  auto t = std::make_shared<CommutingTuple>(io::tuple_from_json(c.p["tuple"]));
  auto f = std::make_shared<H01Form>(io::h01_from_json(c.p["function"], t->d()));
  const LineGrid grid = c.p.contains("grid") ? io::line_grid_from_json(c.p["grid"], t->d()) : default_line_grid(*t);
  const auto times = times_from(c, t->d());
  const FcOptions o = c.fc_options();
  c.add("transfer", [=](TaskSink& s) {
    const DilationSystem sys = build_dilation(*t, grid);
    const TransferReport r = transfer_fc(*f, *t, sys, times, o);
    s.check("transfer.slack", r.slack, "ge", 0.0);
    s.data = {{"norm_fA", r.norm_fA}, {"norm_fB", r.norm_fB}, {"norm_J", r.norm_J},
              {"norm_Q", r.norm_Q},   {"defect", r.defect},   {"slack", r.slack}};
  });
}

void build_multiplier(Context& c) {
  io::expect_keys(c.p, {"N", "mode"}, {"kernels", "family", "seed", "tolerance"}, c.verb);
  const int N = c.integer("N", 0);
  const std::string mode_s = c.p["mode"].is_string() ? c.p["mode"].get<std::string>() : "";
  if (mode_s != "circulant" && mode_s != "zero_padded")
    throw SchemaError("multiplier: \"mode\" must be circulant or zero_padded");
  const MultiplierMode mode = mode_s == "circulant" ? MultiplierMode::circulant : MultiplierMode::zero_padded;
  const auto kernels = kernels_from(c);
  const double tol = c.number("tolerance", mode == MultiplierMode::circulant ? 1e-10 : 0.02);
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    const std::string name = index_name("kernel", i);
    c.add(name, [=](TaskSink& s) {
      const MultiplierReport r = multiplier_norm(kernels[i], N, mode);
      s.check(name + ".relative_gap", r.relative_gap, "abs", 0.0, tol);
      s.data = {{"R", kernels[i].R},
                {"d", kernels[i].d},
                {"operator_norm", r.operator_norm},
                {"symbol_sup", r.symbol_sup}};
    });
  }
}

void build_group_equiv(Context& c) {
  io::expect_keys(c.p, {"group", "seed"},
                  {"kernels", "family", "ensemble", "angle_margin", "power_range", "band", "quadrature"}, c.verb);
  const GroupTuple g = io::group_from_json(c.p["group"]);
  const auto kernels = kernels_from(c);
  const EnsembleOptions ens = c.ensemble(c.require_seed());
  const double margin = c.number("angle_margin", 0.1);
  const int range = c.integer("power_range", 16);
  std::vector<double> band{0.25, 4.0};
  if (c.p.contains("band")) band = c.numbers("band");
  if (band.size() != 2) throw SchemaError("group-equiv: \"band\" needs two numbers");
  const FcOptions o = c.fc_options();
  c.add("equivalence", [=](TaskSink& s) {
    const GroupEquivalenceReport r = group_calculus_equivalence_check(g, kernels, ens, margin, range, o);
    s.check("equivalence.ratio_low", r.ratio, "ge", band[0]);
    s.check("equivalence.ratio_high", r.ratio, "le", band[1]);
    s.check("equivalence.power_bound", r.power_bound, "le", 1e12);
    s.data = {{"K_multiplier", r.K_multiplier}, {"K_fc", r.K_fc},   {"ratio", r.ratio},
              {"power_bound", r.power_bound},   {"angle", r.angle}, {"kernel_ratios", r.kernel_ratios}};
  });
}

// Built-in light regression suite over every module.
void build_verify_all(Context& c) {
  io::expect_keys(c.p, {}, {"seed"}, c.verb);
  const std::uint64_t seed = c.require_seed();
  FcOptions o = c.fc_options();
  o.sup.per_decade = 24;
  o.sup.per_decade_multi = 6;
  LogGrid grid = c.log_grid();

  for (int d = 1; d <= 3; ++d) {
    const std::string name = "oracle.d" + std::to_string(d);
    c.add(name, [=](TaskSink& s) {
      const CommutingTuple t = random_tuple({.d = d, .n = 3, .normal = d != 2}, seed + d);
      EnsembleOptions eo{.size = 4, .seed = seed + 10 + d, .max_atoms = 2};
      double worst = 0.0;
      for (const auto& m : fc_ensemble(d, SectorDomain::uniform(d, kPi / 2), eo)) {
        const FCResult r = contour_fc(m.f, t, o.contour);
        const Matrix oracle = spectral_oracle_fc(m.f, t);
        const double scale = std::max(oracle.norm(), 1e-300);
        worst = std::max(worst, ((r.value - oracle).norm() / scale) / (1e-6 + r.tail_estimate / scale));
      }
      s.check(name, worst, "le", 1.0);
    });
  }
  c.add("homomorphism", [=](TaskSink& s) {
    const CommutingTuple t = random_tuple({.d = 2, .n = 3}, seed + 20);
    const auto ens = fc_ensemble(2, SectorDomain::uniform(2, kPi / 2), {.size = 3, .seed = seed + 21, .max_atoms = 2});
    const Matrix fg = contour_fc(ens[1].f.product(ens[2].f), t, o.contour).value;
    const Matrix prod = contour_fc(ens[1].f, t, o.contour).value * contour_fc(ens[2].f, t, o.contour).value;
    s.check("homomorphism", rel_diff(fg, prod), "le", 0.0, 1e-7);
  });
  c.add("phi_rate", [](TaskSink& s) {
    Matrix A = Matrix::Zero(2, 2);
    A(0, 0) = 1.0;
    A(1, 1) = 2.0;
    const auto r = phi_approximation_check(A, SpaceModel::euclidean(2), std::nullopt, {4, 8, 16, 32, 64, 128});
    s.check("phi_rate", r.fitted_exponent, "abs", 1.0, 0.1);
  });
  c.add("integral_identity", [](TaskSink& s) {
    Matrix A = Matrix::Zero(2, 2);
    A(0, 0) = 1.0;
    A(1, 1) = 2.0;
    s.check("integral_identity", integral_identity_check(A, 2).defect, "le", 1e-6);
  });
  c.add("unit_decomposition", [](TaskSink& s) {
    const auto r = unit_decomposition_check(dyadic_unit_surrogate(48, kPi / 4), kPi / 4, kPi / 8);
    s.check("unit_decomposition", r.defect, "le", 1e-3);
  });
  c.add("sqfn_scalar", [=](TaskSink& s) {
    Matrix a(1, 1);
    a(0, 0) = 2.0;
    Vector x(1);
    x(0) = 1.0;
    const SFEReport r =
        square_function_norm({CommutingTuple({a}, SpaceModel::euclidean(1)), power_exp(0.5), grid, x}, {.refinements = 1});
    s.check("sqfn_scalar", r.norm_F, "rel", 1.0 / std::sqrt(2.0), 1e-6);
  });
  c.add("reproduce_scalar", [=](TaskSink& s) {
    Matrix a(1, 1);
    a(0, 0) = 1.5;
    const CommutingTuple t({a}, SpaceModel::euclidean(1));
    const auto r = reproducing_formula_check(t, as_h01(phi_m(1), 1), phi_m(1, kPi / 2), power_exp(0.5),
                                             power_exp(0.5), grid, 0);
    s.check("reproduce_scalar", r.defect, "le", 1e-6);
  });
  c.add("dilation_scalar", [](TaskSink& s) {
    Matrix a(1, 1);
    a(0, 0) = 1.0;
    const auto sys = build_dilation(CommutingTuple({a}, SpaceModel::euclidean(1)), LineGrid{1, 1e-3, 20});
    s.check("dilation_scalar", verify_factorization(sys, {1.0}), "le", 1e-3);
  });
  c.add("transfer", [=](TaskSink& s) {
    const CommutingTuple t = random_tuple({.d = 1, .n = 3}, seed + 30);
    H01Form f(1, 0.5);
    f.add_component(1, phi_m(1, 2.0));
    const TransferReport r = transfer_fc(f, t, build_dilation(t, LineGrid{1, 1e-2, 20}), {{}}, o);
    s.check("transfer", r.slack, "ge", 0.0);
  });
  c.add("multiplier_circulant", [=](TaskSink& s) {
    double worst = 0.0;
    for (const auto& k : kernel_family(1, 4, 4, seed + 40))
      worst = std::max(worst, std::abs(multiplier_norm(k, 32, MultiplierMode::circulant).relative_gap));
    s.check("multiplier_circulant", worst, "le", 1e-10);
  });
  c.add("gamma_hilbert_schmidt", [=](TaskSink& s) {
    Matrix V(4, 7);
    for (int j = 0; j < 7; ++j) V.col(j) = (j + 1.0) * random_unit_vector(4, seed + 80 + j);
    const GammaElement u = make_gamma_element(SpaceModel::euclidean(4), V, std::vector<double>(7, 0.5));
    s.check("gamma_hilbert_schmidt", gamma_norm(u).estimate, "rel", std::sqrt(0.5) * V.norm(), 1e-10);
  });
  c.add("r_bound_hilbert", [=](TaskSink& s) {
    const CommutingTuple t = random_tuple({.d = 3, .n = 3, .normal = false}, seed + 50);
    double top = 0.0;
    for (const auto& A : t.operators()) top = std::max(top, operator_norm(A, t.space()).value);
    s.check("r_bound_hilbert", r_bound_estimate(t.operators(), t.space(), 16, seed).estimate, "rel", top, 0.01);
  });
  c.add("schatten_hilbert_control", [=](TaskSink& s) {
    SchattenOptions so;
    so.ensemble = {.size = 8, .seed = seed + 60};
    const auto r = schatten_growth_experiment(2.0, {2, 4}, seed + 60, so);
    double worst = 0.0;
    for (double k : r.K) worst = std::max(worst, std::abs(k - 1.0));
    s.check("schatten_hilbert_control", worst, "le", 0.05);
  });
  c.add("angle_profile_flat", [=](TaskSink& s) {
    const CommutingTuple t = random_tuple({.d = 1, .n = 3, .max_angle = 0.3}, seed + 70);
    const auto prof = angle_dependence_profile(t, {0.6, 1.0, 1.6, 2.2}, {.size = 8, .seed = seed + 71}, o);
    const double lo = *std::min_element(prof.estimates.begin(), prof.estimates.end());
    const double hi = *std::max_element(prof.estimates.begin(), prof.estimates.end());
    s.check("angle_profile_flat", hi / lo - 1.0, "le", 0.05);
  });
}

const std::vector<std::pair<std::string, Builder>>& registry() {
  static const std::vector<std::pair<std::string, Builder>> r{
      {"analyze", build_analyze},
      {"fc", build_fc},
      {"fc-constant", build_fc_constant},
      {"angle-profile", build_angle_profile},
      {"phi-check", build_phi_check},
      {"integral-check", build_integral_check},
      {"sqfn", build_sqfn},
      {"quad-check", build_quad_check},
      {"reproduce", build_reproduce},
      {"schatten", build_schatten},
      {"dilate", build_dilate},
      {"transfer", build_transfer},
      {"multiplier", build_multiplier},
      {"group-equiv", build_group_equiv},
      {"verify-all", build_verify_all},
  };
  return r;
}

}  // namespace

QuadProfile quad_profile(const std::string& name) {
  if (name == "fast") return {"fast", 8, 16};
  if (name == "default" || name.empty()) return {"default", 16, 32};
  if (name == "strict") return {"strict", 32, 64};
  throw SchemaError("unknown quadrature profile \"" + name + "\"");
}

const std::vector<std::string>& verbs() {
  static const std::vector<std::string> v = [] {
    std::vector<std::string> out;
    for (const auto& [name, b] : registry()) out.push_back(name);
    return out;
  }();
  return v;
}

Report run_suite(const std::string& verb, const json& problem, const RunOptions& options) {
  const auto& reg = registry();
  const auto it = std::find_if(reg.begin(), reg.end(), [&](const auto& e) { return e.first == verb; });
  if (it == reg.end()) throw SchemaError("unknown verb \"" + verb + "\"");
  if (!problem.is_object()) throw SchemaError(verb + ": problem must be a JSON object");

  Context ctx{problem, options, verb, {}};
  try {
    it->second(ctx);
  } catch (const SchemaError&) {
    throw;
  } catch (const json::exception& e) {
    throw SchemaError(verb + ": " + e.what());
  } catch (const Error& e) {
    // the problem was well formed JSON but describes an invalid object
    throw SchemaError(verb + ": " + e.what());
  }

  Report report;
  report.suite = verb;
  report.input_digest = io::digest({{"verb", verb}, {"problem", problem}});
  report.seed = ctx.seed();
  report.version = kVersion;
  report.quad_profile = options.profile.name;
  run_tasks(ctx.tasks, options.jobs, report);
  return report;
}

}  // namespace hfc
