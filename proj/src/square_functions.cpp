#include "hfc/square_functions.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hfc/detail/separable.hpp"

namespace hfc {

namespace {

constexpr std::size_t kMaxSeparableTerms = 64;
constexpr double kMaxBruteNodes = 4e6;

Mask active_mask(const SectorFunction& F) {
  if (F.certificate()) return F.certificate()->active;
  return ast::coordinates(*F.root());
}

/// Rows with a zero coordinate on which F is active are killed.
std::vector<bool> killed_rows(const SectorFunction& F,
                              const std::vector<std::vector<Complex>>& lambdas) {
  const Mask active = active_mask(F);
  std::vector<bool> out(lambdas.size(), false);
  for (std::size_t j = 0; j < lambdas.size(); ++j)
    for (int k = 0; k < F.arity(); ++k)
      if ((active >> k & 1u) && lambdas[j][k] == Complex(0.0)) out[j] = true;
  return out;
}

void check_rows(const SectorFunction& F, const std::vector<std::vector<Complex>>& lambdas) {
  for (const auto& l : lambdas)
    if (static_cast<int>(l.size()) != F.arity())
      throw InvalidArgument("eigenvalue rows must have one entry per coordinate");
}

/// Calls visit(z, weight) for every node of grid^d evaluated at t * lambda.
template <class Visit>
void for_each_node(int d, const std::vector<double>& t, double w, Visit&& visit) {
  const std::size_t N = t.size();
  if (std::pow(static_cast<double>(N), d) > kMaxBruteNodes)
    throw NonSeparable("product grid too large for a non-separable function");
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> node(d);
  const double wd = std::pow(w, d);
  while (true) {
    for (int k = 0; k < d; ++k) node[k] = t[idx[k]];
    visit(node, wd);
    int k = d - 1;
    while (k >= 0 && ++idx[k] == N) idx[k--] = 0;
    if (k < 0) break;
  }
}

/// Values of each one-variable factor at t lambda_jk: n x N, ones where a
/// term has no factor in coordinate k.
Matrix factor_values(const detail::SeparableTerm& term, int k,
                     const std::vector<std::vector<Complex>>& lambdas,
                     const std::vector<bool>& killed, const std::vector<double>& t) {
  const auto n = static_cast<Eigen::Index>(lambdas.size());
  const auto N = static_cast<Eigen::Index>(t.size());
  Matrix V = Matrix::Ones(n, N);
  const auto it = term.factors.find(k);
  if (it == term.factors.end()) return V;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (killed[j]) {
      V.row(j).setZero();
      continue;
    }
    for (Eigen::Index i = 0; i < N; ++i) V(j, i) = detail::eval_factor(*it->second, t[i] * lambdas[j][k]);
  }
  return V;
}

std::vector<std::vector<Complex>> rows_of(const JointSpectrum& js) { return js.eigenvalues; }

JointSpectrum decompose_or_throw(const CommutingTuple& tuple) {
  JointSpectrum js = joint_spectral_decompose(tuple);
  snap_zero_eigenvalues(js);
  return js;
}

void check_active_everywhere(const SectorFunction& F) {
  const Mask all = F.arity() >= 32 ? ~Mask{0} : ((Mask{1} << F.arity()) - 1);
  if (active_mask(F) != all)
    throw InvalidArgument("square functions need F to decay in every coordinate");
}

}  // namespace

Matrix zeta_gram(const SectorFunction& F, const std::vector<std::vector<Complex>>& lambdas,
                 const LogGrid& grid) {
  check_rows(F, lambdas);
  const int d = F.arity();
  const auto n = static_cast<Eigen::Index>(lambdas.size());
  const std::vector<double> t = grid.nodes();
  const double w = grid.weights().front();
  const auto killed = killed_rows(F, lambdas);

  Matrix G = Matrix::Zero(n, n);
  const auto terms = detail::separate(*F.root(), kMaxSeparableTerms);
  if (terms) {
    // values[a][k]
    std::vector<std::vector<Matrix>> values(terms->size());
    for (std::size_t a = 0; a < terms->size(); ++a)
      for (int k = 0; k < d; ++k) values[a].push_back(factor_values((*terms)[a], k, lambdas, killed, t));
    for (std::size_t a = 0; a < terms->size(); ++a) {
      for (std::size_t b = 0; b < terms->size(); ++b) {
        Matrix H = Matrix::Constant(n, n, (*terms)[a].coef * std::conj((*terms)[b].coef));
        for (int k = 0; k < d; ++k) H = H.cwiseProduct(w * values[a][k] * values[b][k].adjoint());
        G += H;
      }
    }
    return G;
  }

  Vector v(n);
  std::vector<Complex> z(d);
  for_each_node(d, t, w, [&](const std::vector<double>& node, double wd) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (killed[j]) {
        v[j] = 0.0;
        continue;
      }
      for (int k = 0; k < d; ++k) z[k] = node[k] * lambdas[j][k];
      v[j] = F.eval_unchecked(z);
    }
    G.noalias() += wd * v * v.adjoint();
  });
  return G;
}

std::vector<Complex> grid_integral(const SectorFunction& P,
                                   const std::vector<std::vector<Complex>>& lambdas,
                                   const LogGrid& grid) {
  check_rows(P, lambdas);
  const int d = P.arity();
  const std::vector<double> t = grid.nodes();
  const double w = grid.weights().front();
  const auto killed = killed_rows(P, lambdas);
  std::vector<Complex> out(lambdas.size(), 0.0);

  const auto terms = detail::separate(*P.root(), kMaxSeparableTerms);
  if (terms) {
    for (const auto& term : *terms) {
      Eigen::VectorXcd acc = Eigen::VectorXcd::Constant(static_cast<Eigen::Index>(lambdas.size()), term.coef);
      for (int k = 0; k < d; ++k)
        acc = acc.cwiseProduct(w * factor_values(term, k, lambdas, killed, t).rowwise().sum());
      for (std::size_t j = 0; j < lambdas.size(); ++j) out[j] += acc[static_cast<Eigen::Index>(j)];
    }
    return out;
  }
  std::vector<Complex> z(d);
  for_each_node(d, t, w, [&](const std::vector<double>& node, double wd) {
    for (std::size_t j = 0; j < lambdas.size(); ++j) {
      if (killed[j]) continue;
      for (int k = 0; k < d; ++k) z[k] = node[k] * lambdas[j][k];
      out[j] += wd * P.eval_unchecked(z);
    }
  });
  return out;
}

GammaElement sample_zeta(const SquareFunctionJob& job) {
  const CommutingTuple& tuple = job.tuple;
  const int d = tuple.d();
  if (job.F.arity() != d) throw InvalidArgument("F arity does not match the tuple");
  if (job.x.size() != tuple.n()) throw InvalidArgument("vector dimension mismatch");
  const std::vector<double> t = job.grid.nodes();
  const double w = job.grid.weights().front();
  const double total = std::pow(static_cast<double>(t.size()), d);

  std::optional<JointSpectrum> js;
  try {
    js = decompose_or_throw(tuple);
  } catch (const NotSimultaneouslyDiagonalizable&) {
  }

  std::vector<Vector> cols;
  if (js) {
    if (total * tuple.n() > 4e7) throw InvalidArgument("sample too large to materialise");
    const Vector y = js->basis_inverse * job.x;
    const auto killed = killed_rows(job.F, js->eigenvalues);
    std::vector<Complex> z(d);
    Vector v(tuple.n());
    for_each_node(d, t, w, [&](const std::vector<double>& node, double wd) {
      for (int j = 0; j < tuple.n(); ++j) {
        if (killed[j]) {
          v[j] = 0.0;
          continue;
        }
        for (int k = 0; k < d; ++k) z[k] = node[k] * js->eigenvalues[j][k];
        v[j] = job.F.eval_unchecked(z) * y[j];
      }
      cols.push_back(std::sqrt(wd) * (js->basis * v));
    });
  } else {
    if (total > 4096) throw InvalidArgument("contour sampling is limited to 4096 grid nodes");
    FcOptions opt;
    opt.method = FcMethod::contour;
    for_each_node(d, t, w, [&](const std::vector<double>& node, double wd) {
      SectorFunction Ft = job.F;
      for (int k = 0; k < d; ++k) Ft = Ft.dilate(k, node[k]);
      cols.push_back(std::sqrt(wd) * (evaluate_fc(as_h01(Ft, d), tuple, opt) * job.x));
    });
  }
  GammaElement u{tuple.space(), Matrix(tuple.space().vector_dim(), static_cast<Eigen::Index>(cols.size()))};
  for (std::size_t i = 0; i < cols.size(); ++i) u.columns.col(static_cast<Eigen::Index>(i)) = cols[i];
  return u;
}

namespace {

double norm_on_grid(const SquareFunctionJob& job, const LogGrid& grid, const JointSpectrum* js,
                    const SquareFunctionOptions& options, std::string& mode) {
  if (job.x.isZero(0.0)) {
    mode = "exact";
    return 0.0;
  }
  AverageEstimate est;
  if (js) {
    const Vector y = js->basis_inverse * job.x;
    const Matrix G = zeta_gram(job.F, js->eigenvalues, grid);
    const Matrix M = G.cwiseProduct(y * y.adjoint());
    const Matrix K = js->basis * M * js->basis.adjoint();
    est = gaussian_average_covariance(K, job.tuple.space(), options.mode, options.mc);
  } else {
    SquareFunctionJob sub = job;
    sub.grid = grid;
    est = gamma_norm(sample_zeta(sub), options.mode, options.mc);
  }
  mode = est.mode;
  return est.estimate;
}

}  // namespace

SFEReport square_function_norm(const SquareFunctionJob& job, const SquareFunctionOptions& options) {
  const CommutingTuple& tuple = job.tuple;
  if (job.F.arity() != tuple.d()) throw InvalidArgument("F arity does not match the tuple");
  if (job.x.size() != tuple.n()) throw InvalidArgument("vector dimension mismatch");
  check_active_everywhere(job.F);
  const auto types = estimated_types(tuple);
  for (int k = 0; k < tuple.d(); ++k)
    if (!(job.F.domain().angles[k] > types[k]))
      throw AngleOrderViolation("F's sector must contain the spectrum of A_" + std::to_string(k + 1));

  std::optional<JointSpectrum> js;
  try {
    js = decompose_or_throw(tuple);
  } catch (const NotSimultaneouslyDiagonalizable&) {
  }

  SFEReport rep;
  LogGrid g = job.grid;
  for (int r = 0; r <= options.refinements; ++r) {
    rep.refinement_curve.push_back(norm_on_grid(job, g, js ? &*js : nullptr, options, rep.mode));
    g = g.refined();
  }
  const auto& c = rep.refinement_curve;
  for (std::size_t i = 2; i < c.size(); ++i) {
    const double prev = std::abs(c[i - 1] - c[i - 2]);
    const double cur = std::abs(c[i] - c[i - 1]);
    const double floor = 1e-12 * std::max(1.0, std::abs(c[i]));
    if (cur > floor && cur > options.cauchy_factor * prev) rep.cauchy = false;
  }
  rep.norm_F = c.back();
  const double xn = tuple.space().norm(job.x);
  rep.constant_estimate = xn > 0.0 ? rep.norm_F / xn : 0.0;
  return rep;
}

std::vector<Vector> sfe_probes(const CommutingTuple& tuple, int count, std::uint64_t seed) {
  std::vector<Vector> out;
  const SpaceModel& space = tuple.space();
  try {
    const JointSpectrum js = decompose_or_throw(tuple);
    for (Eigen::Index j = 0; j < js.basis.cols() && static_cast<int>(out.size()) < count; ++j) {
      const double nv = space.norm(js.basis.col(j));
      if (nv > 0.0) out.push_back(js.basis.col(j) / nv);
    }
  } catch (const NotSimultaneouslyDiagonalizable&) {
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  while (static_cast<int>(out.size()) < count) {
    Vector v(tuple.n());
    for (int i = 0; i < tuple.n(); ++i) v[i] = Complex(g(rng), g(rng));
    out.push_back(v / space.norm(v));
  }
  return out;
}

SFEConstantReport sfe_constant(const CommutingTuple& tuple, const SectorFunction& F,
                               const std::vector<Vector>& probes, const LogGrid& grid,
                               const SquareFunctionOptions& options) {
  SFEConstantReport rep;
  if (probes.empty()) return rep;
  SquareFunctionOptions single = options;
  single.refinements = 0;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const SFEReport r = square_function_norm(SquareFunctionJob{tuple, F, grid, probes[i]}, single);
    rep.ratios.push_back(r.constant_estimate);
    if (r.constant_estimate > rep.constant_estimate || rep.best < 0) {
      rep.constant_estimate = std::max(rep.constant_estimate, r.constant_estimate);
      rep.best = static_cast<int>(i);
    }
  }
  return rep;
}

QuadInequalityReport quad_inequality_check(const CommutingTuple& tuple,
                                           const std::vector<SectorFunction>& F, const Vector& x,
                                           std::uint64_t seed, const FcOptions& options) {
  if (F.empty()) throw InvalidArgument("quadratic inequality needs at least one function");
  if (x.size() != tuple.n()) throw InvalidArgument("vector dimension mismatch");
  const int d = tuple.d();
  SectorDomain dom = F.front().domain();
  for (const auto& f : F) {
    if (f.arity() != d) throw InvalidArgument("function arity does not match the tuple");
    dom = SectorDomain::intersect(dom, f.domain());
  }
  const auto types = estimated_types(tuple);
  for (int k = 0; k < d; ++k)
    if (!(dom.angles[k] > types[k]))
      throw AngleOrderViolation("common domain must strictly contain the type angles");

  std::optional<JointSpectrum> js;
  if (options.method != FcMethod::contour) {
    try {
      js = decompose_or_throw(tuple);
    } catch (const NotSimultaneouslyDiagonalizable&) {
    }
  }
  VectorFamily fam{tuple.space(), {}};
  for (const auto& f : F) fam.vectors.push_back(evaluate_fc(as_h01(f, d), tuple, options, js ? &*js : nullptr) * x);
  MonteCarloOptions mc;
  mc.seed = seed;
  QuadInequalityReport rep;
  rep.lhs = rademacher_average(fam, AverageMode::automatic, mc).estimate;
  const auto sq = [&](std::span<const Complex> z) {
    double s = 0.0;
    for (const auto& f : F) s += std::norm(f.eval_unchecked(z));
    return std::sqrt(s);
  };
  rep.rhs = sup_sampled(sq, dom, options.sup).value * tuple.space().norm(x);
  rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : 0.0;
  return rep;
}

Complex calibrate_resolution(const SectorFunction& Psi, const SectorFunction& F1,
                             const SectorFunction& F2t, const LogGrid& grid, double threshold) {
  if (Psi.arity() != F1.arity() || F1.arity() != F2t.arity())
    throw InvalidArgument("calibration functions must share an arity");
  const SectorFunction P = Psi * F1 * F2t;
  const std::vector<std::vector<Complex>> diag{std::vector<Complex>(P.arity(), Complex(1.0))};
  const Complex I = grid_integral(P, diag, grid).front();
  if (!(std::abs(I) > threshold))
    throw DegenerateCalibration("grid integral " + std::to_string(std::abs(I)) + " is below threshold");
  return 1.0 / I;
}

ReproducingReport reproducing_formula_check(const CommutingTuple& tuple, const H01Form& f,
                                            const SectorFunction& Psi, const SectorFunction& F1,
                                            const SectorFunction& F2, const LogGrid& grid,
                                            int refinements) {
  const int d = tuple.d();
  if (f.d() != d || Psi.arity() != d) throw InvalidArgument("arity does not match the tuple");
  const SectorFunction F2t = conjugate_reflect(F2);
  ReproducingReport rep;
  rep.calibration = calibrate_resolution(Psi, F1, F2t, grid);
  const SectorFunction P = Psi * F1 * F2t;

  const JointSpectrum js = decompose_or_throw(tuple);
  const auto lambdas = rows_of(js);
  const auto n = static_cast<Eigen::Index>(lambdas.size());
  Eigen::VectorXcd target(n), fval(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    bool injective = true;
    for (int k = 0; k < d; ++k) injective = injective && lambdas[j][k] != Complex(0.0);
    fval[j] = f.eval(lambdas[j]);
    target[j] = injective ? fval[j] : Complex(0.0);
  }
  LogGrid g = grid;
  for (int r = 0; r <= refinements; ++r) {
    // recalibrated per grid, so the curve tracks the quadrature error
    const Complex c = r == 0 ? rep.calibration : calibrate_resolution(Psi, F1, F2t, g);
    const auto I = grid_integral(P, lambdas, g);
    Eigen::VectorXcd diff(n);
    for (Eigen::Index j = 0; j < n; ++j) diff[j] = c * I[j] * fval[j] - target[j];
    const Matrix D = js.basis * diff.asDiagonal() * js.basis_inverse;
    rep.defect_curve.push_back(operator_norm(D, tuple.space()).value);
    rep.per_decade.push_back(g.per_decade);
    g = g.refined();
  }
  rep.defect = rep.defect_curve.front();
  return rep;
}

CommutingTuple schatten_pair(double p, int n) {
  if (n < 1) throw InvalidArgument("schatten pair needs n >= 1");
  const int N = n * n;
  Matrix L = Matrix::Zero(N, N), R = Matrix::Zero(N, N);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      L(i + j * n, i + j * n) = std::ldexp(1.0, -i);
      R(i + j * n, i + j * n) = std::ldexp(1.0, -j);
    }
  return CommutingTuple({L, R}, SpaceModel::schatten(p, n));
}

SchattenGrowthReport schatten_growth_experiment(double p, const std::vector<int>& ladder,
                                                std::uint64_t seed, const SchattenOptions& options) {
  if (!(p > 1.0) || std::isinf(p)) throw InvalidArgument("schatten exponent must lie in (1, inf)");
  SchattenGrowthReport rep;
  rep.p = p;
  rep.expectation = p == 2.0
                        ? "Hilbert-Schmidt control: the pair is normal, K(n) stays at 1"
                        : "no bounded joint calculus on the full space: K(n) is expected to grow with n";
  const SectorDomain dom = SectorDomain::uniform(2, options.domain_angle);
  EnsembleOptions eo = options.ensemble;
  eo.seed = seed;
  if (!eo.allow_exp) eo.allow_exp = options.domain_angle < kPi / 2;
  auto members = fc_ensemble(2, dom, eo);
  if (options.triangular_witness) {
    // q theta <= 0.8 keeps z1^q + z2^q away from 0, with |z1^q + z2^q| >= cos(q theta)(|z1|^q + |z2|^q)
    const double th = options.domain_angle;
    const double q = std::clamp(std::floor(0.8 / th), 1.0, 8.0);
    const SectorFunction z1 = SectorFunction::coordinate_power(2, 0, q).with_domain(dom);
    const SectorFunction z2 = SectorFunction::coordinate_power(2, 1, q).with_domain(dom);
    const SectorFunction cut = phi_m_tensor(1 << 24, 2, th);
    const SectorFunction f = (z1 * (z1 + z2).reciprocal() * cut)
                                 .with_certificate(DecayCertificate{3, {1.0, 1.0}, cut.certificate()->C / std::cos(q * th)});
    members.push_back({as_h01(f, 2), "triangular truncation symbol"});
  }
  for (const auto& m : members) rep.sups.push_back(sup_norm_estimate(m.f.total(), dom).value);

  std::vector<int> sorted = ladder;
  std::sort(sorted.begin(), sorted.end());
  std::vector<Vector> witness(members.size());
  int prev_n = 0;
  for (int n : sorted) {
    const SpaceModel space = SpaceModel::schatten(p, n);
    double K = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (!(rep.sups[i] > 0.0)) continue;
      Vector m(n * n);
      for (int j = 0; j < n; ++j)
        for (int r = 0; r < n; ++r) {
          const std::vector<Complex> z{std::ldexp(1.0, -r), std::ldexp(1.0, -j)};
          m[r + j * n] = members[i].f.eval(z);
        }
      NormOptions nopt;
      nopt.seed = seed + i;
      nopt.restarts = options.norm_restarts;
      nopt.max_iterations = options.norm_iterations;
      nopt.tolerance = 1e-10;
      if (prev_n > 0 && witness[i].size() == prev_n * prev_n) {
        Vector padded = Vector::Zero(n * n);
        for (int j = 0; j < prev_n; ++j)
          for (int r = 0; r < prev_n; ++r) padded[r + j * n] = witness[i][r + j * prev_n];
        nopt.warm_starts.push_back(padded);
      }
      const NormEstimate ne = operator_norm(Matrix(m.asDiagonal()), space, nopt);
      witness[i] = ne.witness;
      K = std::max(K, ne.value / rep.sups[i]);
    }
    rep.n.push_back(n);
    rep.K.push_back(K);
    prev_n = n;
  }
  return rep;
}

}  // namespace hfc
