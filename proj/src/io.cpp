#include "hfc/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <set>

namespace hfc::io {

namespace {

void dump(const json& j, std::string& out) {
  switch (j.type()) {
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map: sorted
        if (!first) out += ',';
        first = false;
        out += json(it.key()).dump();
        out += ':';
        dump(it.value(), out);
      }
      out += '}';
      break;
    }
    case json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        dump(j[i], out);
      }
      out += ']';
      break;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        break;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      std::string s(buf);
      // keep floats recognisable as floats on re-parse
      if (s.find_first_of(".eE") == std::string::npos) s += ".0";
      out += s;
      break;
    }
    default: out += j.dump(); break;
  }
}

[[noreturn]] void fail(const std::string& context, const std::string& what) {
  throw SchemaError(context + ": " + what);
}

Mask mask_from_list(const json& j, int d, const std::string& context) {
  if (!j.is_array()) fail(context, "expected a list of 1-based coordinates");
  Mask m = 0;
  for (const auto& v : j) {
    if (!v.is_number_integer()) fail(context, "coordinates must be integers");
    const int k = v.get<int>();
    if (k < 1 || k > d) fail(context, "coordinate " + std::to_string(k) + " out of range");
    m |= Mask{1} << (k - 1);
  }
  return m;
}

SectorFunction pad(const SectorFunction& f, int d) {
  if (f.arity() >= d) return f;
  std::vector<double> a = f.domain().angles;
  a.resize(d, kPi);
  return f.with_domain(SectorDomain(a));
}

int coord_of(const json& j, const std::string& context) {
  if (!j.contains("coord") || !j["coord"].is_number_integer()) fail(context, "missing integer \"coord\"");
  const int k = j["coord"].get<int>();
  if (k < 1 || k > 31) fail(context, "coord must lie in 1..31");
  return k - 1;
}

}  // namespace

std::string canonical_dump(const json& j) {
  std::string out;
  dump(j, out);
  out += '\n';
  return out;
}

std::string digest(const json& j) {
  const std::string s = canonical_dump(j);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

void expect_keys(const json& j, std::initializer_list<const char*> required,
                 std::initializer_list<const char*> optional, const std::string& context) {
  if (!j.is_object()) fail(context, "expected an object");
  std::set<std::string> allowed;
  for (const char* k : required) {
    allowed.insert(k);
    if (!j.contains(k)) fail(context, std::string("missing key \"") + k + "\"");
  }
  for (const char* k : optional) allowed.insert(k);
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) fail(context, "unknown key \"" + it.key() + "\"");
}

double get_double(const json& j, const char* key, const std::string& context) {
  if (!j.contains(key) || !j[key].is_number()) fail(context, std::string("\"") + key + "\" must be a number");
  return j[key].get<double>();
}

int get_int(const json& j, const char* key, const std::string& context) {
  if (!j.contains(key) || !j[key].is_number_integer())
    fail(context, std::string("\"") + key + "\" must be an integer");
  return j[key].get<int>();
}

Complex complex_from_json(const json& j, const std::string& context) {
  if (j.is_number()) return j.get<double>();
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  fail(context, "expected a number or an [re, im] pair");
}

json to_json(Complex z) { return json::array({z.real(), z.imag()}); }

Matrix matrix_from_json(const json& j, const std::string& context) {
  if (!j.is_array() || j.empty()) fail(context, "expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) fail(context, "rows must be non-empty arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix A(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != cols) fail(context, "ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) A(r, c) = complex_from_json(j[r][c], context);
  }
  return A;
}

json to_json(const Matrix& A) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < A.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < A.cols(); ++c) row.push_back(to_json(A(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Vector vector_from_json(const json& j, const std::string& context) {
  if (!j.is_array() || j.empty()) fail(context, "expected a non-empty array");
  Vector x(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) x[static_cast<Eigen::Index>(i)] = complex_from_json(j[i], context);
  return x;
}

json to_json(const Vector& x) {
  json out = json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) out.push_back(to_json(x[i]));
  return out;
}

SpaceModel space_from_json(const json& j) {
  expect_keys(j, {"kind", "dim"}, {"p"}, "space");
  if (!j["kind"].is_string()) fail("space", "\"kind\" must be a string");
  const std::string kind = j["kind"];
  const int dim = get_int(j, "dim", "space");
  if (dim < 1) fail("space", "dim must be positive");
  const double p = j.contains("p") ? (j["p"].is_null() ? INFINITY : get_double(j, "p", "space")) : 2.0;
  if (kind == "euclidean") return SpaceModel::euclidean(dim);
  if (kind == "lp") return SpaceModel::lp(p, dim);
  if (kind == "schatten") return SpaceModel::schatten(p, dim);
  fail("space", "unknown kind \"" + kind + "\"");
}

json to_json(const SpaceModel& s) {
  json j{{"kind", to_string(s.kind)}, {"dim", s.dim}};
  if (s.kind != SpaceModel::Kind::euclidean) j["p"] = std::isinf(s.p) ? json(nullptr) : json(s.p);
  return j;
}

CommutingTuple tuple_from_json(const json& j) {
  expect_keys(j, {"space", "operators"}, {"tolerance"}, "tuple");
  const SpaceModel space = space_from_json(j["space"]);
  if (!j["operators"].is_array() || j["operators"].empty()) fail("tuple", "operators must be a non-empty array");
  std::vector<Matrix> ops;
  for (std::size_t k = 0; k < j["operators"].size(); ++k)
    ops.push_back(matrix_from_json(j["operators"][k], "tuple.operators[" + std::to_string(k) + "]"));
  const double tol = j.contains("tolerance") ? get_double(j, "tolerance", "tuple") : 1e-10;
  return CommutingTuple(std::move(ops), space, tol);
}

json to_json(const CommutingTuple& t) {
  json ops = json::array();
  for (const auto& A : t.operators()) ops.push_back(to_json(A));
  return {{"space", to_json(t.space())}, {"operators", ops}, {"tolerance", t.tolerance()}};
}

DecayCertificate certificate_from_json(const json& j, int d) {
  expect_keys(j, {"active", "s", "C"}, {}, "certificate");
  DecayCertificate c;
  c.active = mask_from_list(j["active"], d, "certificate.active");
  if (!j["s"].is_array() || static_cast<int>(j["s"].size()) != d)
    fail("certificate", "\"s\" needs one exponent per coordinate");
  for (const auto& v : j["s"]) {
    if (!v.is_number()) fail("certificate", "exponents must be numbers");
    c.s.push_back(v.get<double>());
  }
  c.C = get_double(j, "C", "certificate");
  return c;
}

json to_json(const DecayCertificate& c) {
  json active = json::array();
  for (int k = 0; k < 32; ++k)
    if (c.active >> k & 1u) active.push_back(k + 1);
  return {{"active", active}, {"s", c.s}, {"C", c.C}};
}

SectorFunction ast_from_json(const json& j, const std::string& context) {
  if (!j.is_object() || !j.contains("op") || !j["op"].is_string()) fail(context, "node needs a string \"op\"");
  const std::string op = j["op"];
  auto args = [&](std::size_t min_count) {
    if (!j.contains("args") || !j["args"].is_array() || j["args"].size() < min_count)
      fail(context, "\"" + op + "\" needs at least " + std::to_string(min_count) + " args");
    std::vector<SectorFunction> out;
    for (std::size_t i = 0; i < j["args"].size(); ++i)
      out.push_back(ast_from_json(j["args"][i], context + "." + op + "[" + std::to_string(i) + "]"));
    return out;
  };
  if (op == "const") {
    expect_keys(j, {"op", "a"}, {}, context);
    return SectorFunction::constant(1, complex_from_json(j["a"], context));
  }
  if (op == "pow") {
    expect_keys(j, {"op", "coord", "s"}, {}, context);
    const int k = coord_of(j, context);
    return SectorFunction::coordinate_power(k + 1, k, get_double(j, "s", context));
  }
  if (op == "exp") {
    expect_keys(j, {"op", "coord"}, {}, context);
    const int k = coord_of(j, context);
    return SectorFunction::exp_neg(k + 1, k);
  }
  if (op == "shift_recip") {
    expect_keys(j, {"op", "coord", "a"}, {}, context);
    const int k = coord_of(j, context);
    return SectorFunction::shift_recip(k + 1, k, complex_from_json(j["a"], context));
  }
  if (op == "dilate") {
    expect_keys(j, {"op", "coord", "t", "args"}, {}, context);
    const int k = coord_of(j, context);
    auto a = args(1);
    if (a.size() != 1) fail(context, "dilate takes one argument");
    return pad(a[0], k + 1).dilate(k, get_double(j, "t", context));
  }
  if (op == "recip") {
    expect_keys(j, {"op", "args"}, {}, context);
    auto a = args(1);
    if (a.size() != 1) fail(context, "recip takes one argument");
    return a[0].reciprocal();
  }
  if (op == "add" || op == "mul" || op == "tensor") {
    expect_keys(j, {"op", "args"}, {}, context);
    auto a = args(1);
    SectorFunction acc = a[0];
    for (std::size_t i = 1; i < a.size(); ++i) {
      if (op == "add") acc = acc + a[i];
      else if (op == "mul") acc = acc * a[i];
      else acc = tensor(acc, a[i]);
    }
    return acc;
  }
  fail(context, "unknown op \"" + op + "\"");
}

json ast_to_json(const ast::Node& node) {
  using ast::Op;
  json args = json::array();
  for (const auto& a : node.args) args.push_back(ast_to_json(*a));
  switch (node.op) {
    case Op::constant: return {{"op", "const"}, {"a", to_json(node.value)}};
    case Op::pow: return {{"op", "pow"}, {"coord", node.coord + 1}, {"s", node.s}};
    case Op::exp: return {{"op", "exp"}, {"coord", node.coord + 1}};
    case Op::shift_recip: return {{"op", "shift_recip"}, {"coord", node.coord + 1}, {"a", to_json(node.value)}};
    case Op::dilate: return {{"op", "dilate"}, {"coord", node.coord + 1}, {"t", node.t}, {"args", args}};
    case Op::add: return {{"op", "add"}, {"args", args}};
    case Op::mul: return {{"op", "mul"}, {"args", args}};
    case Op::recip: return {{"op", "recip"}, {"args", args}};
  }
  return nullptr;
}

SectorFunction function_from_json(const json& j, int d) {
  if (!j.is_object()) fail("function", "expected an object");
  if (j.contains("preset")) {
    if (!j["preset"].is_string()) fail("function", "\"preset\" must be a string");
    const std::string p = j["preset"];
    const std::string ctx = "function(" + p + ")";
    SectorFunction f;
    if (p == "phi_m") {
      expect_keys(j, {"preset", "m"}, {"theta", "coord"}, ctx);
      const double theta = j.contains("theta") ? get_double(j, "theta", ctx) : kPi / 2;
      f = phi_m(get_int(j, "m", ctx), theta);
    } else if (p == "phi_m_tensor") {
      expect_keys(j, {"preset", "m"}, {"theta"}, ctx);
      const double theta = j.contains("theta") ? get_double(j, "theta", ctx) : kPi / 2;
      return pad(phi_m_tensor(get_int(j, "m", ctx), d, theta), d);
    } else if (p == "power_exp") {
      expect_keys(j, {"preset", "a"}, {"theta", "t", "coord"}, ctx);
      f = power_exp(get_double(j, "a", ctx), j.contains("theta") ? get_double(j, "theta", ctx) : kPi / 4,
                    j.contains("t") ? get_double(j, "t", ctx) : 1.0);
    } else if (p == "power_exp_tensor") {
      expect_keys(j, {"preset", "a"}, {"theta"}, ctx);
      const SectorFunction g =
          power_exp(get_double(j, "a", ctx), j.contains("theta") ? get_double(j, "theta", ctx) : kPi / 4);
      f = g;
      for (int k = 1; k < d; ++k) f = tensor(f, g);
      return f;
    } else if (p == "sigma_k") {
      expect_keys(j, {"preset", "k", "rho", "gamma", "mu"}, {}, ctx);
      f = sigma_k(get_int(j, "k", ctx), get_double(j, "rho", ctx), get_double(j, "gamma", ctx),
                  get_double(j, "mu", ctx));
    } else {
      fail("function", "unknown preset \"" + p + "\"");
    }
    // one-variable presets act on "coord" (default 1)
    const int k = j.contains("coord") ? coord_of(j, ctx) : 0;
    if (k >= d) fail(ctx, "coord out of range");
    if (k == 0) return pad(f, d);
    SectorFunction lead = SectorFunction::constant(k, 1.0);
    return pad(tensor(lead, f), d).with_certificate([&] {
      DecayCertificate c = *f.certificate();
      DecayCertificate out{c.active << k, std::vector<double>(d, 0.0), c.C};
      out.s[k] = c.s[0];
      return out;
    }());
  }
  expect_keys(j, {"ast"}, {"arity", "domain", "certificate"}, "function");
  const int arity = j.contains("arity") ? get_int(j, "arity", "function") : d;
  SectorFunction f = ast_from_json(j["ast"]);
  if (f.arity() > arity) fail("function", "AST uses coordinates beyond the arity");
  f = pad(f, arity);
  if (j.contains("domain")) {
    if (!j["domain"].is_array() || static_cast<int>(j["domain"].size()) != arity)
      fail("function", "\"domain\" needs one angle per coordinate");
    std::vector<double> a;
    for (const auto& v : j["domain"]) {
      if (!v.is_number()) fail("function", "domain angles must be numbers");
      a.push_back(v.get<double>());
    }
    for (int k = 0; k < arity; ++k)
      if (a[k] > f.domain().angles[k] + 1e-15)
        fail("function", "declared domain exceeds the domain of the expression");
    f = f.with_domain(SectorDomain(a));
  }
  if (j.contains("certificate")) {
    const DecayCertificate c = certificate_from_json(j["certificate"], arity);
    const DecayReport r = decay_check(f, c);
    if (!r.pass) throw DomainViolation("declared certificate fails verification (ratio " +
                                       std::to_string(r.worst_ratio) + ")");
    f = f.with_certificate(c);
  } else if (!f.certificate()) {
    const Mask active = ast::coordinates(*f.root());
    std::vector<double> s(arity, 0.0);
    for (int k = 0; k < arity; ++k)
      if (active >> k & 1u) s[k] = 0.25;
    f = f.with_certificate(certify_by_sampling(f, active, s));
  }
  return f;
}

json to_json(const SectorFunction& f) {
  json j{{"ast", ast_to_json(*f.root())}, {"arity", f.arity()}, {"domain", f.domain().angles}};
  if (f.certificate()) j["certificate"] = to_json(*f.certificate());
  return j;
}

H01Form h01_from_json(const json& j, int d) {
  if (j.is_object() && j.contains("components")) {
    expect_keys(j, {"components"}, {"constant"}, "form");
    H01Form form(d, j.contains("constant") ? complex_from_json(j["constant"], "form.constant") : Complex(0.0));
    if (!j["components"].is_array()) fail("form", "components must be an array");
    for (const auto& c : j["components"]) {
      const SectorFunction f = function_from_json(c, d);
      form.add_component(f.certificate()->active, f);
    }
    return form;
  }
  return as_h01(function_from_json(j, d), d);
}

LogGrid log_grid_from_json(const json& j) {
  expect_keys(j, {}, {"t_min", "t_max", "per_decade"}, "grid");
  LogGrid g;
  if (j.contains("t_min")) g.t_min = get_double(j, "t_min", "grid");
  if (j.contains("t_max")) g.t_max = get_double(j, "t_max", "grid");
  if (j.contains("per_decade")) g.per_decade = get_int(j, "per_decade", "grid");
  g.size();
  return g;
}

json to_json(const LogGrid& g) { return {{"t_min", g.t_min}, {"t_max", g.t_max}, {"per_decade", g.per_decade}}; }

LineGrid line_grid_from_json(const json& j, int d) {
  expect_keys(j, {"h", "S"}, {}, "line_grid");
  LineGrid g{d, get_double(j, "h", "line_grid"), get_double(j, "S", "line_grid")};
  g.validate();
  return g;
}

SampledKernel kernel_from_json(const json& j) {
  expect_keys(j, {"d", "R", "values"}, {"h"}, "kernel");
  SampledKernel k;
  k.d = get_int(j, "d", "kernel");
  k.R = get_int(j, "R", "kernel");
  k.h = j.contains("h") ? get_double(j, "h", "kernel") : 1.0;
  k.values.clear();
  if (!j["values"].is_array()) fail("kernel", "values must be an array");
  for (const auto& v : j["values"]) k.values.push_back(complex_from_json(v, "kernel.values"));
  k.validate();
  return k;
}

json to_json(const SampledKernel& k) {
  json values = json::array();
  for (const Complex& v : k.values) values.push_back(to_json(v));
  return {{"d", k.d}, {"R", k.R}, {"h", k.h}, {"values", values}};
}

GroupTuple group_from_json(const json& j) {
  expect_keys(j, {"space", "operators"}, {}, "group");
  GroupTuple g;
  g.space = space_from_json(j["space"]);
  if (!j["operators"].is_array() || j["operators"].empty()) fail("group", "operators must be a non-empty array");
  for (const auto& m : j["operators"]) g.U.push_back(matrix_from_json(m, "group.operators"));
  return g;
}

EnsembleOptions ensemble_from_json(const json& j, std::uint64_t seed) {
  expect_keys(j, {}, {"size", "max_atoms", "t_min", "t_max", "include_constant", "allow_exp"}, "ensemble");
  EnsembleOptions e;
  e.seed = seed;
  if (j.contains("size")) e.size = get_int(j, "size", "ensemble");
  if (j.contains("max_atoms")) e.max_atoms = get_int(j, "max_atoms", "ensemble");
  if (j.contains("t_min")) e.t_min = get_double(j, "t_min", "ensemble");
  if (j.contains("t_max")) e.t_max = get_double(j, "t_max", "ensemble");
  if (j.contains("include_constant")) e.include_constant = j["include_constant"].get<bool>();
  if (j.contains("allow_exp")) e.allow_exp = j["allow_exp"].get<bool>();
  return e;
}

}  // namespace hfc::io
