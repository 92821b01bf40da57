#include "hfc/contour_calculus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "hfc/detail/separable.hpp"

namespace hfc {

namespace {

bool has(Mask m, int k) { return (m & (Mask{1} << k)) != 0; }

double beta_ss(double s) { return std::tgamma(s) * std::tgamma(s) / std::tgamma(2 * s); }

/// Per-coordinate contour data shared by all components.
struct CoordinateRule {
  std::optional<ContourQuadrature> rule;
  std::vector<Matrix> resolvents;  ///< R(z_i, A_k)
  double M = 1.0;                  ///< bound for |z| ||R(z, A_k)|| on the nodes
  Matrix q_one;                    ///< rule applied to R alone
};

Matrix apply_rule(const CoordinateRule& c, const std::function<Complex(Complex)>& g) {
  const auto& nodes = c.rule->nodes();
  const auto& w = c.rule->weights();
  Matrix acc = Matrix::Zero(c.resolvents[0].rows(), c.resolvents[0].cols());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Complex v = w[i] * g(nodes[i]);
    if (v != Complex(0.0)) acc += v * c.resolvents[i];
  }
  return acc;
}

}  // namespace

H01Form as_h01(const SectorFunction& f, int d) {
  if (f.arity() > d) throw InvalidArgument("function arity exceeds the tuple size");
  const Mask deps = ast::coordinates(*f.root());
  if (deps == 0) return H01Form(d, f.eval_unchecked(std::vector<Complex>(f.arity(), 1.0)));
  if (!f.certificate()) throw InvalidArgument("function needs a decay certificate");
  H01Form form(d);
  form.add_component(f.certificate()->active, f);
  return form;
}

std::vector<double> estimated_types(const CommutingTuple& tuple) {
  std::vector<double> out;
  for (const auto& A : tuple.operators()) out.push_back(spectral_angle(A));
  return out;
}

FCResult contour_fc(const H01Form& f, const CommutingTuple& tuple, const ContourOptions& options) {
  const int d = tuple.d();
  const int n = tuple.n();
  if (f.d() != d) throw InvalidArgument("function arity does not match the tuple");
  FCResult result;
  result.value = f.constant() * Matrix::Identity(n, n);
  result.meta.nodes_per_decade = options.nodes_per_decade;
  result.meta.nu.assign(d, 0.0);
  result.meta.r_min.assign(d, 0.0);
  result.meta.r_max.assign(d, 0.0);
  result.meta.nodes.assign(d, 0);
  if (f.components().empty()) return result;
  if (!options.nu.empty() && static_cast<int>(options.nu.size()) != d)
    throw InvalidArgument("one contour angle per coordinate is required");

  const std::vector<double> types = estimated_types(tuple);
  std::vector<double> theta(d, kPi), s_min(d, INFINITY);
  Mask used = 0;
  for (const auto& [mask, g] : f.components()) {
    used |= mask;
    for (int k = 0; k < d; ++k) {
      if (!has(mask, k)) continue;
      theta[k] = std::min(theta[k], g.domain().angles[k]);
      s_min[k] = std::min(s_min[k], g.certificate()->s[k]);
    }
  }

  const double equiv = euclidean_equivalence_factor(tuple.space());
  std::vector<CoordinateRule> coords(d);
  for (int k = 0; k < d; ++k) {
    if (!has(used, k)) continue;
    const double nu = options.nu.empty() ? 0.5 * (types[k] + theta[k]) : options.nu[k];
    if (!(nu > types[k] && nu < theta[k]) || !(nu < kPi))
      throw AngleOrderViolation("contour angle " + std::to_string(nu) + " for coordinate " +
                                std::to_string(k + 1) + " must lie strictly between the type " +
                                std::to_string(types[k]) + " and the function angle " +
                                std::to_string(theta[k]));
    const double s = s_min[k];
    if (!(s > 0.0)) throw InvalidArgument("decay exponents must be positive");
    double r_min = std::min(1e-10, std::pow(options.truncation_eps * s, 1.0 / s));
    r_min = std::max(r_min, 1e-60);
    double r_max = 1.0 / r_min;
    if (options.r_min) r_min = *options.r_min;
    if (options.r_max) r_max = *options.r_max;

    CoordinateRule& c = coords[k];
    c.rule.emplace(nu, r_min, r_max, options.nodes_per_decade,
                   std::min(nu - types[k], theta[k] - nu));
    c.resolvents.reserve(c.rule->size());
    double M = 1.0;
    for (const Complex z : c.rule->nodes()) {
      c.resolvents.push_back(resolvent(tuple.op(k), z, 1e300));
      // Frobenius norm bounds the spectral norm from above.
      M = std::max(M, std::abs(z) * c.resolvents.back().norm());
    }
    c.M = M * equiv;
    c.q_one = apply_rule(c, [](Complex) { return Complex(1.0); });
    result.meta.nu[k] = nu;
    result.meta.r_min[k] = r_min;
    result.meta.r_max[k] = r_max;
    result.meta.nodes[k] = c.rule->size();
  }

  for (const auto& [mask, g] : f.components()) {
    const DecayCertificate& cert = *g.certificate();
    // certified tails: C prod M_k/(2pi) [prod full_k - prod (full_k - tail_k)]
    double full = 1.0, kept = 1.0, scale = cert.C;
    for (int k = 0; k < d; ++k) {
      if (!has(mask, k)) continue;
      const double s = cert.s[k];
      const auto& rule = *coords[k].rule;
      const double fk = 2.0 * beta_ss(s);
      const double tk = 2.0 * (std::pow(rule.r_min(), s) / s + std::pow(rule.r_max(), -s) / s);
      full *= fk;
      kept *= std::max(0.0, fk - tk);
      scale *= coords[k].M / (2.0 * kPi);
    }
    result.tail_estimate += scale * (full - kept);

    const auto terms = detail::separate(*g.root());
    if (terms) {
      for (const auto& term : *terms) {
        Matrix prod = Matrix::Identity(n, n);
        for (int k = 0; k < d; ++k) {
          if (!has(mask, k)) continue;
          auto it = term.factors.find(k);
          if (it == term.factors.end()) {
            prod = prod * coords[k].q_one;
          } else {
            const ast::Node& factor = *it->second;
            prod = prod * apply_rule(coords[k], [&](Complex z) { return detail::eval_factor(factor, z); });
          }
        }
        result.value += term.coef * prod;
      }
      continue;
    }

    std::vector<int> active;
    for (int k = 0; k < d; ++k)
      if (has(mask, k)) active.push_back(k);
    if (active.size() > 2)
      throw NonSeparable("component couples more than two variables through a reciprocal");
    result.meta.separable = false;
    std::vector<Complex> z(d, 1.0);
    if (active.size() == 1) {
      const int k = active[0];
      result.value += apply_rule(coords[k], [&](Complex w) {
        z[k] = w;
        return g.eval_unchecked(z);
      });
    } else {
      const int a = active[0], b = active[1];
      const auto& ra = *coords[a].rule;
      for (int i = 0; i < ra.size(); ++i) {
        z[a] = ra.nodes()[i];
        const Matrix inner = apply_rule(coords[b], [&](Complex w) {
          z[b] = w;
          return g.eval_unchecked(z);
        });
        result.value += ra.weights()[i] * coords[a].resolvents[i] * inner;
      }
    }
  }
  return result;
}

FCResult contour_fc(const SectorFunction& f, const CommutingTuple& tuple,
                    const ContourOptions& options) {
  return contour_fc(as_h01(f, tuple.d()), tuple, options);
}

namespace {

/// Joint eigenvalues with entries below the kernel threshold set to 0.
std::vector<std::vector<Complex>> snapped(JointSpectrum js) {
  snap_zero_eigenvalues(js);
  return js.eigenvalues;
}

Matrix from_diagonal(const JointSpectrum& js, const Vector& diag) {
  return js.basis * diag.asDiagonal() * js.basis_inverse;
}

}  // namespace

Matrix spectral_oracle_fc(const SectorFunction& f, const JointSpectrum& js) {
  const auto ev = snapped(js);
  Vector diag(static_cast<Eigen::Index>(ev.size()));
  for (std::size_t c = 0; c < ev.size(); ++c) diag[c] = f(ev[c]);
  return from_diagonal(js, diag);
}

Matrix spectral_oracle_fc(const SectorFunction& f, const CommutingTuple& tuple) {
  if (f.arity() != tuple.d()) throw InvalidArgument("function arity does not match the tuple");
  return spectral_oracle_fc(f, joint_spectral_decompose(tuple));
}

Matrix spectral_oracle_fc(const H01Form& f, const JointSpectrum& js) {
  const auto ev = snapped(js);
  Vector diag(static_cast<Eigen::Index>(ev.size()));
  for (std::size_t c = 0; c < ev.size(); ++c) diag[c] = f.eval(ev[c]);
  return from_diagonal(js, diag);
}

Matrix spectral_oracle_fc(const H01Form& f, const CommutingTuple& tuple) {
  if (f.d() != tuple.d()) throw InvalidArgument("function arity does not match the tuple");
  return spectral_oracle_fc(f, joint_spectral_decompose(tuple));
}

Matrix evaluate_fc(const H01Form& f, const CommutingTuple& tuple, const FcOptions& options,
                   const JointSpectrum* js) {
  if (options.method == FcMethod::contour) return contour_fc(f, tuple, options.contour).value;
  std::optional<JointSpectrum> local;
  if (!js) {
    try {
      local = joint_spectral_decompose(tuple);
      js = &*local;
    } catch (const NotSimultaneouslyDiagonalizable&) {
      if (options.method == FcMethod::oracle) throw;
    }
  }
  if (js) {
    const double cond = js->basis.norm() * js->basis_inverse.norm();
    if (options.method == FcMethod::oracle || cond <= options.oracle_condition_limit)
      return spectral_oracle_fc(f, *js);
  }
  return contour_fc(f, tuple, options.contour).value;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string fmt(Complex c) { return "(" + fmt(c.real()) + (c.imag() < 0 ? "" : "+") + fmt(c.imag()) + "i)"; }

/// One-variable f placed at coordinate k of a d-variable function.
SectorFunction embed(const SectorFunction& f, int d, int k) {
  std::vector<double> angles(d, kPi);
  angles[k] = f.domain().angles[0];
  std::optional<DecayCertificate> cert;
  if (f.certificate()) {
    DecayCertificate c;
    c.active = f.certificate()->active << k;
    c.s.assign(d, 0.0);
    c.s[k] = f.certificate()->s[0];
    c.C = f.certificate()->C;
    cert = c;
  }
  return SectorFunction(ast::shift_coordinates(f.root(), k), SectorDomain(angles), cert);
}

Complex unit_disc(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = std::sqrt(u(rng));
  const double a = 2 * kPi * u(rng);
  return std::polar(r, a);
}

}  // namespace

std::vector<EnsembleMember> fc_ensemble(int d, const SectorDomain& domain,
                                        const EnsembleOptions& options) {
  if (domain.d() != d) throw InvalidArgument("ensemble domain arity mismatch");
  for (double a : domain.angles)
    if (!(a < kPi)) throw InvalidArgument("ensemble domain angles must be below pi");
  const bool allow_exp =
      options.allow_exp.value_or(std::all_of(domain.angles.begin(), domain.angles.end(),
                                             [](double a) { return a < kPi / 2; }));
  if (allow_exp)
    for (double a : domain.angles)
      if (!(a < kPi / 2)) throw InvalidArgument("exponential atoms need angles below pi/2");

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<EnsembleMember> out;
  const double lt0 = std::log(options.t_min), lt1 = std::log(options.t_max);
  for (int i = 0; i < options.size; ++i) {
    if (options.include_constant && i == 0) {
      out.push_back({H01Form(d, 1.0), "1"});
      continue;
    }
    const int atoms = 1 + static_cast<int>(u(rng) * options.max_atoms) % options.max_atoms;
    Complex constant = 0.0;
    const double draw_const = u(rng);
    const Complex c_value = unit_disc(rng);
    if (options.include_constant && draw_const < 0.5) constant = c_value;
    H01Form form(d, constant);
    std::string desc = constant != Complex(0.0) ? fmt(constant) : "";
    for (int a = 0; a < atoms; ++a) {
      const Mask mask = 1 + static_cast<Mask>(u(rng) * ((Mask{1} << d) - 1)) % ((Mask{1} << d) - 1);
      const Complex coef = unit_disc(rng);
      SectorFunction atom = SectorFunction::constant(d, coef);
      std::string term = fmt(coef);
      for (int k = 0; k < d; ++k) {
        const double kind = u(rng);
        const double t = std::exp(lt0 + (lt1 - lt0) * u(rng));
        if (!has(mask, k)) continue;
        const bool use_exp = allow_exp && kind < 0.5;
        SectorFunction g = use_exp ? power_exp(0.5, domain.angles[k], t)
                                   : phi_m(1, domain.angles[k]).dilate(0, t);
        atom = atom * embed(g, d, k);
        term += (use_exp ? "*sqrt_exp(" : "*phi1(") + fmt(t) + "*z" + std::to_string(k + 1) + ")";
      }
      form.add_component(mask, atom);
      desc += (desc.empty() ? "" : " + ") + term;
    }
    out.push_back({std::move(form), desc});
  }
  return out;
}

FcConstantReport fc_constant_estimate(const CommutingTuple& tuple, const SectorDomain& domain,
                                      const std::vector<EnsembleMember>& ensemble,
                                      const FcOptions& options) {
  FcConstantReport rep;
  std::optional<JointSpectrum> js;
  if (options.method != FcMethod::contour) {
    try {
      js = joint_spectral_decompose(tuple);
    } catch (const NotSimultaneouslyDiagonalizable&) {
      if (options.method == FcMethod::oracle) throw;
    }
  }
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const Matrix value = evaluate_fc(ensemble[i].f, tuple, options, js ? &*js : nullptr);
    const double norm = operator_norm(value, tuple.space(), options.norm).value;
    const double sup = sup_norm_estimate(ensemble[i].f.total(), domain, options.sup).value;
    const double ratio = sup > 0.0 ? norm / sup : 0.0;
    rep.norms.push_back(norm);
    rep.sups.push_back(sup);
    rep.ratios.push_back(ratio);
    if (ratio > rep.estimate || rep.best < 0) {
      rep.estimate = std::max(rep.estimate, ratio);
      rep.best = static_cast<int>(i);
      rep.best_description = ensemble[i].description;
    }
  }
  return rep;
}

FcConstantReport fc_constant_estimate(const CommutingTuple& tuple, const SectorDomain& domain,
                                      const EnsembleOptions& ensemble, const FcOptions& options) {
  return fc_constant_estimate(tuple, domain, fc_ensemble(tuple.d(), domain, ensemble), options);
}

AngleProfile angle_dependence_profile(const CommutingTuple& tuple, std::vector<double> angles,
                                      const EnsembleOptions& ensemble, const FcOptions& options,
                                      double flag_multiple) {
  AngleProfile prof;
  prof.flag_multiple = flag_multiple;
  if (angles.empty() || ensemble.size == 0) return prof;
  std::sort(angles.begin(), angles.end());
  const auto types = estimated_types(tuple);
  const double type = *std::max_element(types.begin(), types.end());
  if (!(angles.front() > type))
    throw AngleOrderViolation("ladder rung " + std::to_string(angles.front()) +
                              " is not above the type " + std::to_string(type));
  EnsembleOptions recipe = ensemble;
  if (!recipe.allow_exp) recipe.allow_exp = angles.back() < kPi / 2;

  std::vector<double> running_sup;
  for (double theta : angles) {
    const SectorDomain dom = SectorDomain::uniform(tuple.d(), theta);
    const auto members = fc_ensemble(tuple.d(), dom, recipe);
    FcConstantReport rep = fc_constant_estimate(tuple, dom, members, options);
    if (running_sup.empty()) running_sup.assign(rep.sups.size(), 0.0);
    double est = 0.0;
    for (std::size_t i = 0; i < rep.sups.size(); ++i) {
      running_sup[i] = std::max(running_sup[i], rep.sups[i]);
      if (running_sup[i] > 0.0) est = std::max(est, rep.norms[i] / running_sup[i]);
    }
    prof.angles.push_back(theta);
    prof.estimates.push_back(est);
  }
  const double top = prof.estimates.back();
  for (double e : prof.estimates) prof.flagged.push_back(e > flag_multiple * top);
  return prof;
}

Matrix phi_m_matrix(const Matrix& A, int m) {
  check_matrix(A);
  if (m < 1) throw InvalidArgument("phi_m needs m >= 1");
  const auto n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  const double md = m;
  const Matrix left = resolvent(-A, md);                 // (m + A)^{-1}
  const Matrix right = resolvent(-md * A, 1.0);          // (1 + m A)^{-1}
  return md * md * A * left * right;
}

PhiApproximationReport phi_approximation_check(const Matrix& A, const SpaceModel& space,
                                               const std::optional<Vector>& x,
                                               const std::vector<int>& m_ladder) {
  check_matrix(A);
  const auto n = A.rows();
  Matrix P = Matrix::Identity(n, n);
  const Eigen::VectorXcd ev = Eigen::ComplexEigenSolver<Matrix>(A, false).eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  const bool invertible = Eigen::PartialPivLU<Matrix>(A).rcond() > 1e-12;
  if (!invertible) {
    const CommutingTuple t({A}, space);
    P = ergodic_split(t).projection(1);
  }
  double xnorm = 1.0;
  if (x) {
    if (x->size() != n) throw InvalidArgument("vector dimension mismatch");
    xnorm = space.norm(*x);
    if (space.norm(*x - P * *x) > 1e-10 * std::max(xnorm, 1e-300))
      throw PreconditionViolation("x has a component in the kernel of A");
  }

  PhiApproximationReport rep;
  for (int m : m_ladder) {
    const Matrix E = (phi_m_matrix(A, m) - Matrix::Identity(n, n)) * P;
    const double err = x ? space.norm(E * *x) : operator_norm(E, space).value;
    double pred = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      const Complex l = ev[i];
      if (std::abs(l) < kZeroEigenvalueThreshold * scale) continue;
      const double md = m;
      pred = std::max(pred, std::abs(1.0 - md * md * l / ((md + l) * (1.0 + md * l))));
    }
    rep.m.push_back(m);
    rep.errors.push_back(err);
    rep.predicted.push_back(pred * xnorm);
  }
  const int len = static_cast<int>(rep.errors.size());
  rep.monotone_from = len > 0 ? len - 1 : 0;
  while (rep.monotone_from > 0 &&
         rep.errors[rep.monotone_from] <= rep.errors[rep.monotone_from - 1] * (1 + 1e-12))
    --rep.monotone_from;
  const int from = std::max(rep.monotone_from, len / 2);
  if (len - from >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int i = from; i < len; ++i) {
      if (!(rep.errors[i] > 0.0)) continue;
      const double lx = std::log(static_cast<double>(rep.m[i])), ly = std::log(rep.errors[i]);
      sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
      ++cnt;
    }
    if (cnt >= 2) rep.fitted_exponent = -(cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  }
  return rep;
}

IntegralIdentityReport integral_identity_check(const Matrix& A, int m, double s_min,
                                               double s_max, int nodes) {
  check_matrix(A);
  if (!(s_min > 0.0 && s_max > s_min) || nodes < 1)
    throw InvalidArgument("integral grid needs 0 < s_min < s_max and nodes >= 1");
  if (!(spectral_angle(A) < kPi / 2))
    throw PreconditionViolation("the semigroup identity needs type below pi/2");
  const auto n = A.rows();
  const Matrix phi = phi_m_matrix(A, m);
  const double u0 = std::log(s_min), h = std::log(s_max / s_min) / nodes;
  Matrix acc = Matrix::Zero(n, n);
  for (int i = 0; i < nodes; ++i) {
    const double s = std::exp(u0 + (i + 0.5) * h);
    const Matrix E = (-s * A).exp();
    acc += (h * s) * (A * E);
  }
  IntegralIdentityReport rep;
  rep.value = acc * phi;
  rep.defect = (rep.value - phi).operatorNorm();
  return rep;
}

}  // namespace hfc
