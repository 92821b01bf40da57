// One PASS/FAIL line per acceptance criterion. Expected values come from
// closed forms and eigendecompositions computed here, not from the library.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "hfc/corpus.hpp"
#include "hfc/dilation.hpp"
#include "hfc/square_functions.hpp"
#include "hfc/suites.hpp"
#include "hfc/unit_decomposition.hpp"

using namespace hfc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Matrix diag(std::initializer_list<Complex> v) {
  Vector d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (auto z : v) d[i++] = z;
  return d.asDiagonal();
}

// Independent joint eigenbasis: eigenvectors of a generic combination.
struct Eig {
  Matrix S, Si;
  std::vector<std::vector<Complex>> lambda;  // [column][k]
};

Eig eig(const CommutingTuple& t) {
  Matrix C = Matrix::Zero(t.n(), t.n());
  for (int k = 0; k < t.d(); ++k) C += std::pow(1.618, k + 1) * std::polar(1.0, 0.37 * k) * t.op(k);
  Eigen::ComplexEigenSolver<Matrix> es(C);
  Eig e{es.eigenvectors(), Matrix(), {}};
  e.Si = e.S.inverse();
  for (int j = 0; j < t.n(); ++j) {
    std::vector<Complex> row;
    for (int k = 0; k < t.d(); ++k) row.push_back((e.Si * t.op(k) * e.S)(j, j));
    e.lambda.push_back(row);
  }
  return e;
}

Matrix oracle(const H01Form& f, const Eig& e) {
  Vector v(e.S.cols());
  for (int j = 0; j < v.size(); ++j) v[j] = f.eval(e.lambda[j]);
  return e.S * v.asDiagonal() * e.Si;
}

double rel(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

double spectral_norm(const Matrix& A) { return Eigen::JacobiSVD<Matrix>(A).singularValues()(0); }

// Shared corpus: 20 seeded diagonalizable tuples, 10 certified functions each.
struct Instance {
  CommutingTuple tuple;
  std::vector<EnsembleMember> functions;
};

const std::vector<Instance>& corpus() {
  static const std::vector<Instance> c = [] {
    std::vector<Instance> out;
    for (int i = 0; i < 20; ++i) {
      const int d = 1 + i % 3;
      const int n = 2 + i % 5;
      const CommutingTuple t = random_tuple({.d = d, .n = n, .normal = i % 2 == 0}, 1000 + i);
      EnsembleOptions eo{.size = 10, .seed = 2000ULL + i, .max_atoms = 3};
      out.push_back({t, fc_ensemble(d, SectorDomain::uniform(d, kPi / 2), eo)});
    }
    return out;
  }();
  return c;
}

Outcome oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  int count = 0;
  for (const auto& inst : corpus()) {
    const Eig e = eig(inst.tuple);
    for (const auto& m : inst.functions) {
      const FCResult r = contour_fc(m.f, inst.tuple);
      const Matrix o = oracle(m.f, e);
      const double scale = std::max(o.norm(), 1e-300);
      worst = std::max(worst, rel(r.value, o) / (1e-6 + r.tail_estimate / scale));
      ++count;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst <= 1.0 && secs < 60.0 && count == 200,
          fmt("%.0f pairs, worst error / (1e-6 + tail) = %.3g, %.1f s", count, worst, secs)};
}

Outcome homomorphism_and_angles() {
  double hom = 0.0, ang = 0.0;
  for (const auto& inst : corpus()) {
    const auto& t = inst.tuple;
    const auto types = estimated_types(t);
    ContourOptions lo, hi;
    for (double w : types) {
      lo.nu.push_back(w + 0.25 * (kPi / 2 - w));
      hi.nu.push_back(w + 0.75 * (kPi / 2 - w));
    }
    const auto& fs = inst.functions;
    for (std::size_t i = 1; i + 1 < fs.size(); i += 2) {
      const Matrix fg = contour_fc(fs[i].f.product(fs[i + 1].f), t).value;
      const Matrix prod = contour_fc(fs[i].f, t).value * contour_fc(fs[i + 1].f, t).value;
      hom = std::max(hom, rel(fg, prod));
    }
    for (const auto& m : fs) ang = std::max(ang, rel(contour_fc(m.f, t, lo).value, contour_fc(m.f, t, hi).value));
  }
  return {hom <= 1e-7 && ang <= 1e-7, fmt("homomorphism %.3g, two contour ladders %.3g", hom, ang)};
}

Outcome phi_approximation() {
  double match = 0.0, exponent_lo = INFINITY, exponent_hi = -INFINITY;
  const std::vector<int> ladder{8, 16, 32, 64, 128, 256, 512, 1024};
  for (int s = 0; s < 5; ++s) {
    const CommutingTuple t = random_tuple({.d = 1, .n = 4, .max_angle = 1.0}, 3000 + s);
    const Eig e = eig(t);
    const auto r = phi_approximation_check(t.op(0), t.space(), std::nullopt, ladder);
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < ladder.size(); ++i) {
      const double m = ladder[i];
      double expect = 0.0;
      for (const auto& row : e.lambda) {
        const Complex l = row[0];
        expect = std::max(expect, std::abs(1.0 - m * m * l / ((m + l) * (1.0 + m * l))));
      }
      match = std::max(match, std::abs(r.errors[i] - expect));
      lx.push_back(std::log(m));
      ly.push_back(std::log(r.errors[i]));
    }
    // least squares slope over the ladder
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
    exponent_lo = std::min(exponent_lo, -sxy / sxx);
    exponent_hi = std::max(exponent_hi, -sxy / sxx);
  }
  return {match <= 1e-9 && exponent_lo >= 0.9 && exponent_hi <= 1.1,
          fmt("max |error - scalar formula| %.3g, fitted exponents in [%.4f, %.4f]", match, exponent_lo, exponent_hi)};
}

Outcome sigma_band() {
  const double rho = 2.0, gamma = kPi / 2, mu = kPi / 4;
  double lo = INFINITY, hi = 0.0, formula = 0.0;
  for (int k = -8; k <= 8; ++k) {
    const SectorFunction s = sigma_k(k, rho, gamma, mu);
    for (int n = -8; n <= 8; ++n)
      for (double f : {-0.99, -0.5, 0.0, 0.5, 0.99}) {
        const Complex z = std::polar(std::pow(rho, n), f * mu);
        const Complex v = s({z});
        const Complex direct = std::pow(rho, k / 4.0) * std::pow(z, 0.25) /
                               (std::sqrt(std::polar(std::pow(rho, k), gamma)) - std::sqrt(z));
        formula = std::max(formula, std::abs(v - direct) / std::abs(direct));
        const double w = std::abs(v) * std::pow(rho, std::abs(k - n) / 4.0);
        lo = std::min(lo, w);
        hi = std::max(hi, w);
      }
  }
  return {lo > 0 && hi / lo <= 50.0 && formula <= 1e-12,
          fmt("band [%.4g, %.4g], ratio %.3g", lo, hi, hi / lo) + fmt(", formula mismatch %.2g", formula)};
}

Outcome unit_decomposition() {
  const double mu = kPi / 4, nu = kPi / 8;
  const int N = 48;
  const UnitTriple tr = dyadic_unit_surrogate(N, mu);
  const auto r = unit_decomposition_check(tr, mu, nu);
  // off-grid samples of the sector
  double defect = 0.0, sum_psi = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double lr = std::log(std::pow(2.0, -8)) + i * (16 * std::log(2.0)) / 400 + 1e-3;
    for (double f : {-0.999, -0.37, 0.0, 0.61, 0.999}) {
      const Complex z = std::polar(std::exp(std::min(lr, 8 * std::log(2.0))), f * mu);
      Complex s = 0.0;
      double p = 0.0;
      for (int j = 1; j <= N; ++j) {
        s += tr.delta(j, z) * tr.psi(j, z) * tr.psi_tilde(j, z);
        p += std::abs(tr.psi(j, z));
      }
      defect = std::max(defect, std::abs(1.0 - s));
      sum_psi = std::max(sum_psi, p);
    }
  }
  // ray integrals of |Delta_i| |dz/z| on the boundary of the smaller sector,
  // recomputed with a coarser midpoint rule
  double ray = 0.0;
  for (int j : {1, N / 2, N}) {
    double acc = 0.0;
    const int per = 16;
    const double a = std::log(1e-25), b = std::log(1e25), hstep = std::log(10.0) / per;
    for (double x = a + hstep / 2; x < b; x += hstep)
      for (double sgn : {-1.0, 1.0}) acc += std::abs(tr.delta(j, std::polar(std::exp(x), sgn * nu))) * hstep;
    ray = std::max(ray, acc);
  }
  const bool pass = r.defect <= 1e-3 && defect <= 1e-3 && sum_psi <= r.C && ray <= r.K * 1.01 &&
                    std::isfinite(r.K);
  return {pass, fmt("defect %.3g (off-grid %.3g), ", r.defect, defect) +
                    fmt("sum|psi| %.4g <= C %.4g, ray integrals <= %.4g", sum_psi, r.C, r.K)};
}

Outcome scalar_square_function() {
  double worst = 0.0;
  for (double a : {0.01, 0.5, 1.0, 7.0, 50.0}) {
    Vector x(1);
    x << Complex(0.3, -1.2);
    Matrix A(1, 1);
    A << a;
    const auto r = square_function_norm({CommutingTuple({A}, SpaceModel::euclidean(1)), power_exp(0.5), {}, x});
    worst = std::max(worst, std::abs(r.norm_F - std::abs(x[0]) / std::sqrt(2.0)) / (std::abs(x[0]) / std::sqrt(2.0)));
  }
  // d = 2: each coordinate contributes a factor 1/sqrt(2)
  const CommutingTuple t({diag({0.5, 4.0}), diag({3.0, 0.2})}, SpaceModel::euclidean(2));
  Vector x(2);
  x << 0.6, Complex(0.0, 0.8);
  const auto r2 = square_function_norm({t, tensor(power_exp(0.5), power_exp(0.5)), {}, x});
  const double tensor_err = std::abs(r2.norm_F - 0.5) / 0.5;
  return {worst <= 1e-6 && tensor_err <= 1e-6, fmt("scalar %.3g, tensor %.3g relative", worst, tensor_err)};
}

Outcome square_function_constant() {
  double worst = 0.0;
  for (int s = 0; s < 6; ++s) {
    const int d = 1 + s % 2;
    const CommutingTuple t = random_tuple({.d = d, .n = 2 + s % 3, .max_angle = 1.0}, 4000 + s);
    SectorFunction F = power_exp(0.5, 1.3);
    for (int k = 1; k < d; ++k) F = tensor(F, power_exp(0.5, 1.3));
    const Eig e = eig(t);
    // orthonormal eigenbasis: ||x||_F^2 = sum_j |c_j|^2 prod_k 1 / (2 cos arg lambda_jk)
    double expect = 0.0;
    for (const auto& row : e.lambda) {
      double v = 1.0;
      for (Complex l : row) v /= std::sqrt(2.0 * std::cos(std::arg(l)));
      expect = std::max(expect, v);
    }
    const auto r = sfe_constant(t, F, sfe_probes(t, 16, 5000 + s));
    worst = std::max(worst, std::abs(r.constant_estimate - expect) / expect);
  }
  // kernel: the zero eigenvector of a normal operator
  const Matrix U = Eigen::HouseholderQR<Matrix>(Matrix::Random(3, 3)).householderQ();
  const CommutingTuple k({U * diag({0.0, 1.0, 2.0}) * U.adjoint()}, SpaceModel::euclidean(3));
  const Vector x0 = U.col(0);
  const double kernel = square_function_norm({k, power_exp(0.5), {}, x0}).norm_F;
  const CommutingTuple kd({diag({0.0, 1.0})}, SpaceModel::euclidean(2));
  Vector e0 = Vector::Zero(2);
  e0[0] = 1.0;
  const double kernel_diag = square_function_norm({kd, power_exp(0.5), {}, e0}).norm_F;
  // exact on an exact kernel; a rotated kernel vector keeps rounding-level overlap
  return {worst <= 0.02 && kernel <= 1e-14 && kernel_diag == 0.0,
          fmt("max relative gap %.3g, kernel norms %.3g and %.3g", worst, kernel, kernel_diag)};
}

Outcome reproducing_formula() {
  const SectorFunction g = power_exp(0.5);
  const std::vector<CommutingTuple> cases{
      CommutingTuple({diag({1.5})}, SpaceModel::euclidean(1)),
      CommutingTuple({diag({0.3, 1.0, Complex(2.0, 1.0)})}, SpaceModel::euclidean(3)),
      CommutingTuple({diag({0.5, 2.0}), diag({1.0, 3.0})}, SpaceModel::euclidean(2)),
  };
  double defect = 0.0, ratio_lo = INFINITY, ratio_hi = 0.0;
  for (const auto& t : cases) {
    const H01Form f = as_h01(t.d() == 1 ? phi_m(1) : phi_m_tensor(1, 2), t.d());
    SectorFunction G = g;
    for (int k = 1; k < t.d(); ++k) G = tensor(G, g);
    const auto r = reproducing_formula_check(t, f, G, G, G, LogGrid{1e-8, 1e8, 4}, 3);
    defect = std::max(defect, reproducing_formula_check(t, f, G, G, G).defect);
    for (std::size_t i = 1; i < r.defect_curve.size(); ++i) {
      const double q = r.defect_curve[i] / r.defect_curve[i - 1];
      ratio_lo = std::min(ratio_lo, q);
      ratio_hi = std::max(ratio_hi, q);
    }
  }
  const bool halves = ratio_lo >= 0.4 && ratio_hi <= 0.6;
  return {defect <= 1e-6 && halves,
          fmt("defect %.3g at the default grid, refinement ratios in [%.3g, %.3g]", defect, ratio_lo, ratio_hi)};
}

// Dilation instances shared by the transfer criterion.
struct DilationInstance {
  CommutingTuple tuple;
  DilationSystem system;
};

std::vector<DilationInstance>& dilation_corpus() {
  static std::vector<DilationInstance> c;
  return c;
}

Outcome dilation() {
  // closed form per eigenvalue: 2 h l e^{-t l} sum_{m <= (S-t)/h} e^{-2 m h l}
  const CommutingTuple a({diag({1.0})}, SpaceModel::euclidean(1));
  const LineGrid g{1, 1e-3, 20};
  const DilationSystem sys = build_dilation(a, g);
  double scalar = 0.0, formula = 0.0;
  for (double t : {0.5, 1.0, 2.0, 5.0}) {
    const double q = std::exp(-2 * g.h);
    const int M = static_cast<int>(std::llround((g.S - t) / g.h));
    const double closed = 2 * g.h * std::exp(-t) * (1 - std::pow(q, M + 1)) / (1 - q);
    const double defect = verify_factorization(sys, {t});
    formula = std::max(formula, std::abs(std::abs(closed - std::exp(-t)) - defect));
    scalar = std::max(scalar, defect);
  }
  dilation_corpus().push_back({a, sys});

  double tuples = 0.0;
  bool decreasing = true;
  for (int s = 0; s < 6; ++s) {
    const int d = 1 + s % 2;
    const CommutingTuple t = random_tuple({.d = d, .n = 2 + s % 3, .max_angle = 0.8}, 6000 + s);
    // the default horizon makes the e^{-2 S Re(lambda)} truncation negligible
    const double S = default_line_grid(t).S;
    const LineGrid lg{d, 1e-3, S};
    const std::vector<double> times(d, 0.5);
    const auto curve = dilation_refinement_curve(t, LineGrid{d, 4e-3, S}, times, 2);
    // the h-halving leg: records with the base horizon
    for (std::size_t i = 1; i < curve.size() && curve[i].S == S; ++i)
      decreasing = decreasing && curve[i].defect < curve[i - 1].defect;
    const DilationSystem ds = build_dilation(t, lg);
    tuples = std::max(tuples, verify_factorization(ds, times));
    dilation_corpus().push_back({t, ds});
  }
  return {scalar <= 1e-3 && formula <= 1e-12 && tuples <= 5e-3 && decreasing,
          fmt("scalar %.3g (closed-form mismatch %.2g), tuples %.3g", scalar, formula, tuples) +
              (decreasing ? ", decreasing under halving" : ", NOT decreasing under halving")};
}

Outcome transfer() {
  if (dilation_corpus().empty()) dilation();
  int checked = 0, violations = 0;
  double min_slack = INFINITY;
  for (const auto& inst : dilation_corpus()) {
    const int d = inst.tuple.d();
    EnsembleOptions eo{.size = 6, .seed = 7000ULL + checked, .max_atoms = 2};
    // f must extend past the imaginary axes, where ||f(B)|| is measured
    for (const auto& m : fc_ensemble(d, SectorDomain::uniform(d, 0.75 * kPi), eo)) {
      const TransferReport r = transfer_fc(m.f, inst.tuple, inst.system);
      ++checked;
      if (!r.holds || r.slack < 0) ++violations;
      min_slack = std::min(min_slack, r.slack);
    }
  }
  return {violations == 0, fmt("%.0f checks, %.0f violations, smallest slack %.3g", checked, violations, min_slack)};
}

Outcome multiplier() {
  const int N = 128;
  double circ = 0.0;
  std::string zp;
  bool zp_ok = true;
  for (int R : {0, 2, 8, 32}) {
    double gap = 0.0;
    for (const auto& k : kernel_family(1, R, 6, 8000 + R)) {
      const auto c = multiplier_norm(k, N, MultiplierMode::circulant);
      // circulant: eigenvalues are the symbol on the DFT frequencies
      double sup = 0.0;
      for (int j = 0; j < N; ++j) {
        const double xi = 2 * kPi * j / (N * k.h);
        sup = std::max(sup, std::abs(k.symbol(std::span<const double>(&xi, 1))));
      }
      circ = std::max({circ, std::abs(c.operator_norm - sup) / sup, std::abs(c.relative_gap)});
      const auto z = multiplier_norm(k, N, MultiplierMode::zero_padded);
      gap = std::max(gap, std::abs(z.relative_gap));
    }
    zp += fmt(" R=%.0f:%.3g", R, gap);
    zp_ok = zp_ok && gap <= 0.02;
  }
  for (const auto& k : kernel_family(2, 3, 4, 8100)) {
    const auto c = multiplier_norm(k, 16, MultiplierMode::circulant);
    circ = std::max(circ, std::abs(c.relative_gap));
  }
  return {circ <= 1e-10 && zp_ok, fmt("circulant %.3g; zero-padded gaps at N=%.0f:", circ, N) + zp};
}

Outcome hilbert_reductions() {
  double rb = 0.0, gamma = 0.0;
  bool iterated = true;
  std::string it;
  for (int s = 0; s < 4; ++s) {
    const CommutingTuple t = random_tuple({.d = 3, .n = 3 + s, .normal = false}, 9000 + s);
    double top = 0.0;
    for (const auto& A : t.operators()) top = std::max(top, spectral_norm(A));
    rb = std::max(rb, std::abs(r_bound_estimate(t.operators(), t.space(), 32, 9100 + s).estimate - top) / top);

    const int m = 5 + s;
    Matrix V(t.n(), m);
    std::vector<double> w;
    for (int j = 0; j < m; ++j) {
      V.col(j) = (1.0 + j) * random_unit_vector(t.n(), 9200 + 10 * s + j);
      w.push_back(0.1 + j);
    }
    double hs = 0.0;
    for (int j = 0; j < m; ++j) hs += w[j] * V.col(j).squaredNorm();
    const auto g = gamma_norm(make_gamma_element(t.space(), V, w));
    gamma = std::max(gamma, std::abs(g.estimate - std::sqrt(hs)) / std::sqrt(hs));

    std::vector<Matrix> tensor;
    for (int i = 0; i < 3; ++i) {
      Matrix X(t.n(), 4);
      for (int j = 0; j < 4; ++j) X.col(j) = random_unit_vector(t.n(), 9300 + 100 * s + 10 * i + j);
      tensor.push_back(X);
    }
    const auto r = iterated_gamma_compare(tensor, t.space(), AverageMode::montecarlo, {.seed = 9400ULL + s});
    iterated = iterated && r.ratio_low <= 1.0 && 1.0 <= r.ratio_high;
    it += fmt(" %.4f [%.4f, %.4f]", r.ratio, r.ratio_low, r.ratio_high);
  }
  return {rb <= 0.01 && gamma <= 1e-10 && iterated,
          fmt("R-bound gap %.3g, gamma vs Hilbert-Schmidt %.3g, iterated ratios", rb, gamma) + it};
}

Outcome schatten() {
  SchattenOptions o;
  o.ensemble.size = 16;
  o.ensemble.seed = 11;
  const auto four = schatten_growth_experiment(4.0, {2, 4, 8, 16}, 11, o);
  const auto two = schatten_growth_experiment(2.0, {2, 4, 8, 16}, 11, o);
  bool monotone = true;
  std::string k4, k2;
  for (std::size_t i = 0; i < four.K.size(); ++i) {
    if (i > 0) monotone = monotone && four.K[i] >= 0.95 * four.K[i - 1];
    k4 += fmt(" %.4f", four.K[i]);
  }
  double control = 0.0;
  for (double k : two.K) {
    control = std::max(control, std::abs(k - 1.0));
    k2 += fmt(" %.4f", k);
  }
  return {monotone && control <= 0.05, "p=4 K(n):" + k4 + "; p=2 K(n):" + k2};
}

Outcome angle_profile() {
  const std::vector<double> ladder{0.9, 1.2, 1.6, 2.2, 2.8};
  double flat = 0.0;
  for (int s = 0; s < 4; ++s) {
    const CommutingTuple t = random_tuple({.d = 1 + s % 2, .n = 3, .max_angle = 0.6}, 10000 + s);
    const auto p = angle_dependence_profile(t, ladder, {.size = 12, .seed = 10100ULL + s});
    const auto [lo, hi] = std::minmax_element(p.estimates.begin(), p.estimates.end());
    flat = std::max(flat, *hi / *lo - 1.0);
  }
  bool finite = true;
  for (int s = 0; s < 3; ++s) {
    Matrix A(2, 2);
    A << std::polar(1.0, 0.3 + 0.2 * s), 2.0 + s, 0.0, std::polar(3.0, -0.5);
    const CommutingTuple t({A}, SpaceModel::euclidean(2));
    const double type = spectral_angle(A);
    std::vector<double> rungs;
    for (double a : ladder)
      if (a > type) rungs.push_back(a);
    const auto p = angle_dependence_profile(t, rungs, {.size = 12, .seed = 10200ULL + s});
    for (double e : p.estimates) finite = finite && std::isfinite(e) && e > 0;
    finite = finite && p.estimates.size() == rungs.size() && !rungs.empty();
  }
  return {flat <= 0.05 && finite, fmt("normal profiles flat to %.3g, non-normal profiles ", flat) +
                                      (finite ? "finite" : "NOT finite")};
}

Outcome determinism() {
  const io::json problem = {{"seed", 17}};
  std::vector<std::string> runs;
  for (int jobs : {1, 4, 1}) {
    RunOptions o;
    o.jobs = jobs;
    runs.push_back(render(run_suite("verify-all", problem, o), Format::json));
  }
  bool same = runs[0] == runs[1] && runs[1] == runs[2];
  std::string cli = "CLI not built";
#ifdef HFC_CLI_PATH
  std::vector<std::string> out;
  for (const char* jobs : {"1", "4"}) {
    const std::string cmd = std::string(HFC_CLI_PATH) + " verify-all --seed 17 --jobs " + jobs;
    FILE* p = popen(cmd.c_str(), "r");
    std::string s;
    if (p) {
      std::array<char, 4096> buf;
      for (std::size_t n; (n = std::fread(buf.data(), 1, buf.size(), p)) > 0;) s.append(buf.data(), n);
      pclose(p);
    }
    out.push_back(s);
  }
  const bool cli_same = !out[0].empty() && out[0] == out[1];
  same = same && cli_same;
  cli = cli_same ? "CLI runs identical" : "CLI runs differ";
#endif
  return {same, fmt("%.0f in-process reports of %.0f bytes, ", runs.size(), runs[0].size()) + cli};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle_equivalence", oracle_equivalence},
      {"homomorphism_and_angle_independence", homomorphism_and_angles},
      {"phi_m_approximation", phi_approximation},
      {"sigma_k_band", sigma_band},
      {"unit_decomposition", unit_decomposition},
      {"scalar_square_function", scalar_square_function},
      {"square_function_constant", square_function_constant},
      {"reproducing_formula", reproducing_formula},
      {"dilation", dilation},
      {"transfer_inequality", transfer},
      {"multiplier_equality", multiplier},
      {"hilbert_reductions", hilbert_reductions},
      {"schatten_growth", schatten},
      {"angle_profile", angle_profile},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %2zu %-36s %s  %s\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
