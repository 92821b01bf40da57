#include "hfc/dilation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

namespace hfc {

namespace {

/// Iterates over {0..N-1}^d, last coordinate fastest.
template <class Visit>
void for_each_index(int d, int N, Visit&& visit) {
  std::vector<int> idx(d, 0);
  while (true) {
    visit(idx);
    int k = d - 1;
    while (k >= 0 && ++idx[k] == N) idx[k--] = 0;
    if (k < 0) break;
  }
}

int ipow(int b, int e) {
  int r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

/// Largest eigenvalue of C^* C, square-rooted.
double spectral_norm(const Matrix& C) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(C.adjoint() * C, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
}

/// Sup of g over the box [-a, a]^d (d <= 2) by sampling and zooming.
double box_sup(const std::function<double(std::span<const double>)>& g, int d, double a, int samples) {
  if (d > 2) throw InvalidArgument("frequency sup is implemented for d <= 2");
  std::vector<double> best(d, 0.0), xi(d);
  double top = -1.0;
  const double step = 2 * a / samples;
  for_each_index(d, samples + 1, [&](const std::vector<int>& idx) {
    for (int k = 0; k < d; ++k) xi[k] = -a + idx[k] * step;
    const double v = g(xi);
    if (v > top) {
      top = v;
      best = xi;
    }
  });
  double half = step;
  for (int round = 0; round < 30 && half > 1e-15 * a; ++round) {
    const std::vector<double> centre = best;
    for_each_index(d, 9, [&](const std::vector<int>& idx) {
      for (int k = 0; k < d; ++k) xi[k] = centre[k] + half * (idx[k] - 4) / 4.0;
      const double v = g(xi);
      if (v > top) {
        top = v;
        best = xi;
      }
    });
    half /= 4.0;
  }
  return top;
}

Matrix restricted_diagonal(const DilationSystem& sys, const std::function<Complex(int)>& value) {
  const auto n = sys.spectrum.basis.cols();
  Eigen::VectorXcd diag(n);
  for (Eigen::Index j = 0; j < n; ++j) diag[j] = sys.full[j] ? value(static_cast<int>(j)) : Complex(0.0);
  return sys.spectrum.basis * diag.asDiagonal() * sys.spectrum.basis_inverse;
}

/// ||J||^2 from the Gram matrix y^* Omega y of the sampled eigencolumns.
double sampled_norm(const Matrix& basis, const Matrix& basis_inverse,
                    const std::vector<std::vector<Complex>>& lambdas, const LineGrid& grid) {
  const auto n = basis.cols();
  const int M = grid.half_nodes();
  const Matrix SS = basis.adjoint() * basis;
  Matrix Omega(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index l = 0; l < n; ++l) {
      Complex v = SS(j, l);
      for (std::size_t k = 0; k < lambdas[j].size(); ++k) {
        const Complex a = lambdas[j][k], b = lambdas[l][k];
        const Complex q = std::exp(-grid.h * (std::conj(a) + b));
        const Complex geo = std::abs(1.0 - q) < 1e-14 ? Complex(M + 1.0)
                                                      : (1.0 - std::pow(q, M + 1)) / (1.0 - q);
        v *= grid.h * std::conj(std::sqrt(a)) * std::sqrt(b) * geo;
      }
      Omega(j, l) = v;
    }
  const Matrix G = basis_inverse.adjoint() * Omega * basis_inverse;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (G + G.adjoint()), Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
}

std::vector<double> pad_times(const std::vector<double>& t, int d) {
  if (t.empty()) return std::vector<double>(d, 0.0);
  if (static_cast<int>(t.size()) != d) throw InvalidArgument("need one time per coordinate");
  return t;
}

}  // namespace

int LineGrid::half_nodes() const {
  validate();
  return static_cast<int>(std::llround(S / h));
}

void LineGrid::validate() const {
  if (d < 1 || !(h > 0.0) || !(S > 0.0)) throw InvalidArgument("line grid needs d >= 1, h > 0, S > 0");
  const double r = S / h;
  if (std::abs(r - std::round(r)) > 1e-9 * r) throw InvalidArgument("S/h must be an integer");
}

LineGrid default_line_grid(const CommutingTuple& tuple) {
  double sigma = INFINITY;
  for (const auto& A : tuple.operators()) {
    const Eigen::VectorXcd ev = Eigen::ComplexEigenSolver<Matrix>(A, false).eigenvalues();
    const double scale = ev.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      if (std::abs(ev[i]) > kZeroEigenvalueThreshold * scale) sigma = std::min(sigma, ev[i].real());
  }
  LineGrid g{tuple.d(), 1e-2, 30.0};
  if (sigma > 0.0 && sigma < 0.5) g.S = std::ceil(15.0 / sigma);
  return g;
}

DilationSystem build_dilation(const CommutingTuple& tuple, const LineGrid& grid) {
  grid.validate();
  if (grid.d != tuple.d()) throw InvalidArgument("grid dimension must match the tuple");
  if (!tuple.space().is_hilbert())
    throw InvalidArgument("the dilation is built on euclidean payloads");
  const auto types = estimated_types(tuple);
  for (int k = 0; k < tuple.d(); ++k)
    if (!(types[k] < kPi / 2))
      throw TypeTooLarge("A_" + std::to_string(k + 1) + " has type " + std::to_string(types[k]) +
                         " >= pi/2");
  DilationSystem sys;
  sys.grid = grid;
  sys.d = tuple.d();
  sys.space = tuple.space();
  sys.spectrum = joint_spectral_decompose(tuple);
  const auto n = sys.spectrum.basis.cols();
  sys.full.assign(n, true);
  for (Eigen::Index j = 0; j < n; ++j)
    for (const Complex l : sys.spectrum.eigenvalues[j])
      if (l == Complex(0.0)) sys.full[j] = false;
  for (Eigen::Index j = 0; j < n; ++j)
    for (const Complex l : sys.spectrum.eigenvalues[j])
      if (l != Complex(0.0) && l.real() <= 0.0)
        throw BranchCutViolation("eigenvalue on the closed left half-plane");

  sys.norm_J = sampled_norm(sys.spectrum.basis, sys.spectrum.basis_inverse, sys.spectrum.eigenvalues, grid);
  std::vector<std::vector<Complex>> conj_l = sys.spectrum.eigenvalues;
  for (auto& row : conj_l)
    for (auto& l : row) l = std::conj(l);
  const Matrix adj_basis = sys.spectrum.basis_inverse.adjoint();
  sys.norm_Q = std::ldexp(1.0, sys.d) *
               sampled_norm(adj_basis, sys.spectrum.basis.adjoint(), conj_l, grid);
  return sys;
}

Matrix dilated_semigroup(const DilationSystem& sys, const std::vector<double>& t_in) {
  const auto t = pad_times(t_in, sys.d);
  const double h = sys.grid.h;
  std::vector<int> M(sys.d);
  for (int k = 0; k < sys.d; ++k) {
    const double steps = t[k] / h;
    if (t[k] < 0.0 || std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
      throw InvalidArgument("times must be nonnegative multiples of h");
    M[k] = sys.grid.half_nodes() - static_cast<int>(std::llround(steps));
    if (M[k] < 0) throw InvalidArgument("time exceeds the grid extent");
  }
  return restricted_diagonal(sys, [&](int j) {
    Complex v = 1.0;
    for (int k = 0; k < sys.d; ++k) {
      const Complex l = sys.spectrum.eigenvalues[j][k];
      const Complex q = std::exp(-2.0 * h * l);
      v *= 2.0 * h * l * std::exp(-t[k] * l) * (1.0 - std::pow(q, M[k] + 1)) / (1.0 - q);
    }
    return v;
  });
}

Matrix semigroup(const DilationSystem& sys, const std::vector<double>& t_in) {
  const auto t = pad_times(t_in, sys.d);
  return restricted_diagonal(sys, [&](int j) {
    Complex v = 1.0;
    for (int k = 0; k < sys.d; ++k) v *= std::exp(-t[k] * sys.spectrum.eigenvalues[j][k]);
    return v;
  });
}

double verify_factorization(const DilationSystem& sys, const std::vector<double>& t) {
  return operator_norm(semigroup(sys, t) - dilated_semigroup(sys, t), sys.space).value;
}

DenseDilation dense_dilation(const CommutingTuple& tuple, const LineGrid& grid) {
  if (tuple.d() != 1 || grid.d != 1) throw InvalidArgument("dense dilation is one-dimensional");
  const int M = grid.half_nodes();
  if (2 * M + 1 > 20001) throw InvalidArgument("grid too large for the dense dilation");
  const Matrix& A = tuple.op(0);
  const auto n = A.rows();
  const Matrix root = fractional_sqrt(A);
  const Matrix root_adj = fractional_sqrt(Matrix(A.adjoint()));
  const Matrix step = (-grid.h * A).exp();
  const Matrix step_adj = (-grid.h * Matrix(A.adjoint())).exp();
  // Blocks of J and of J-tilde at nodes i h, i = -M..M; zero for i < 0.
  const double sh = std::sqrt(grid.h);
  DenseDilation out{Matrix::Zero((2 * M + 1) * n, n), Matrix::Zero(n, (2 * M + 1) * n), M};
  Matrix E = Matrix::Identity(n, n), Et = Matrix::Identity(n, n);
  for (int i = 0; i <= M; ++i) {
    out.J.middleRows((M + i) * n, n) = sh * root * E;
    out.Q.middleCols((M + i) * n, n) = 2.0 * (sh * root_adj * Et).adjoint();
    E = E * step;
    Et = Et * step_adj;
  }
  return out;
}

Matrix dense_dilated_semigroup(const CommutingTuple& tuple, const LineGrid& grid, double t) {
  const DenseDilation D = dense_dilation(tuple, grid);
  const auto n = tuple.n();
  const int nodes = 2 * D.M + 1;
  const int shift = static_cast<int>(std::llround(t / grid.h));
  // (U_t v)_i = v_{i - shift} with zero fill
  Matrix out = Matrix::Zero(n, n);
  for (int i = 0; i < nodes; ++i) {
    const int src = i - shift;
    if (src < 0 || src >= nodes) continue;
    out += D.Q.middleCols(i * n, n) * D.J.middleRows(src * n, n);
  }
  return out;
}

std::vector<DilationRecord> dilation_refinement_curve(const CommutingTuple& tuple, const LineGrid& grid,
                                                      const std::vector<double>& t, int steps) {
  std::vector<DilationRecord> out;
  LineGrid g = grid;
  for (int i = 0; i <= steps; ++i) {
    out.push_back({g.h, g.S, t, verify_factorization(build_dilation(tuple, g), t)});
    g.h /= 2;
  }
  g = grid;
  for (int i = 1; i <= steps; ++i) {
    g.S *= 2;
    out.push_back({g.h, g.S, t, verify_factorization(build_dilation(tuple, g), t)});
  }
  return out;
}

double group_power_bound(const GroupTuple& group, int M) {
  double top = 0.0;
  for (const auto& U : group.U) {
    check_matrix(U);
    Eigen::PartialPivLU<Matrix> lu(U);
    if (!(lu.rcond() > 1e-14)) throw InvalidArgument("group matrices must be invertible");
    const Matrix Uinv = lu.inverse();
    Matrix P = Matrix::Identity(U.rows(), U.cols()), N = P;
    top = std::max(top, operator_norm(P, group.space).value);
    for (int m = 1; m <= M; ++m) {
      P = P * U;
      N = N * Uinv;
      top = std::max({top, operator_norm(P, group.space).value, operator_norm(N, group.space).value});
    }
  }
  return top;
}

Complex SampledKernel::at(std::span<const int> m) const {
  int idx = 0;
  for (int k = 0; k < d; ++k) {
    if (std::abs(m[k]) > R) return 0.0;
    idx = idx * (2 * R + 1) + (m[k] + R);
  }
  return values[idx];
}

void SampledKernel::validate() const {
  if (d < 1 || R < 0 || !(h > 0.0)) throw InvalidArgument("kernel needs d >= 1, R >= 0, h > 0");
  if (static_cast<int>(values.size()) != ipow(2 * R + 1, d))
    throw InvalidArgument("kernel needs (2R+1)^d samples");
}

Complex SampledKernel::symbol(std::span<const double> xi) const {
  Complex acc = 0.0;
  std::vector<int> m(d);
  for_each_index(d, 2 * R + 1, [&](const std::vector<int>& idx) {
    double phase = 0.0;
    for (int k = 0; k < d; ++k) {
      m[k] = idx[k] - R;
      phase += xi[k] * m[k] * h;
    }
    acc += at(m) * std::polar(1.0, -phase);
  });
  return std::pow(h, d) * acc;
}

MultiplierReport multiplier_norm(const SampledKernel& b, int N, MultiplierMode mode) {
  b.validate();
  if (N < 1) throw InvalidArgument("multiplier grid needs N >= 1");
  const int total = ipow(N, b.d);
  if (total > 4096) throw InvalidArgument("multiplier grid too large for an explicit SVD");
  if (mode == MultiplierMode::zero_padded && 4 * b.R > N)
    throw InvalidArgument("zero-padded mode needs the kernel in the inner half of the grid");
  if (mode == MultiplierMode::circulant && 2 * b.R + 1 > N)
    throw InvalidArgument("kernel wraps around the circulant grid");

  const double hd = std::pow(b.h, b.d);
  Matrix C = Matrix::Zero(total, total);
  std::vector<int> m(b.d);
  for_each_index(b.d, N, [&](const std::vector<int>& row) {
    int r = 0;
    for (int k = 0; k < b.d; ++k) r = r * N + row[k];
    for_each_index(b.d, 2 * b.R + 1, [&](const std::vector<int>& off) {
      int c = 0;
      for (int k = 0; k < b.d; ++k) {
        m[k] = off[k] - b.R;
        int src = row[k] - m[k];
        if (mode == MultiplierMode::circulant) {
          src = ((src % N) + N) % N;
        } else if (src < 0 || src >= N) {
          return;
        }
        c = c * N + src;
      }
      C(r, c) += hd * b.at(m);
    });
  });

  MultiplierReport rep;
  rep.mode = mode;
  rep.N = N;
  rep.operator_norm = spectral_norm(C);
  std::vector<double> xi(b.d);
  if (mode == MultiplierMode::circulant) {
    for_each_index(b.d, N, [&](const std::vector<int>& k) {
      for (int i = 0; i < b.d; ++i) xi[i] = 2 * kPi * k[i] / (N * b.h);
      rep.symbol_sup = std::max(rep.symbol_sup, std::abs(b.symbol(xi)));
    });
  } else {
    const int samples = b.d == 1 ? 16 * N : 4 * N;
    rep.symbol_sup = box_sup([&](std::span<const double> x) { return std::abs(b.symbol(x)); }, b.d,
                             kPi / b.h, samples);
  }
  rep.relative_gap = rep.symbol_sup > 0.0 ? (rep.symbol_sup - rep.operator_norm) / rep.symbol_sup : 0.0;
  return rep;
}

MultiplierReport group_multiplier_norm(const SampledKernel& b, const GroupTuple& group) {
  b.validate();
  if (static_cast<int>(group.U.size()) != b.d) throw InvalidArgument("kernel and group dimensions differ");
  const auto n = group.U.front().rows();
  // powers[k][m + R] = U_k^m
  std::vector<std::vector<Matrix>> powers(b.d);
  for (int k = 0; k < b.d; ++k) {
    const Matrix& U = group.U[k];
    const Matrix Uinv = Eigen::PartialPivLU<Matrix>(U).inverse();
    powers[k].assign(2 * b.R + 1, Matrix::Identity(n, n));
    for (int m = 1; m <= b.R; ++m) {
      powers[k][b.R + m] = powers[k][b.R + m - 1] * U;
      powers[k][b.R - m] = powers[k][b.R - m + 1] * Uinv;
    }
  }
  Matrix T = Matrix::Zero(n, n);
  std::vector<int> m(b.d);
  for_each_index(b.d, 2 * b.R + 1, [&](const std::vector<int>& off) {
    Matrix P = Matrix::Identity(n, n);
    for (int k = 0; k < b.d; ++k) {
      m[k] = off[k] - b.R;
      P = P * powers[k][off[k]];
    }
    T += b.at(m) * P;
  });
  MultiplierReport rep;
  rep.N = static_cast<int>(n);
  rep.operator_norm = operator_norm(T, group.space).value;
  SampledKernel unit = b;
  unit.h = 1.0;
  rep.symbol_sup = box_sup([&](std::span<const double> x) { return std::abs(unit.symbol(x)); }, b.d, kPi,
                           b.d == 1 ? 64 * (2 * b.R + 1) : 8 * (2 * b.R + 1));
  rep.relative_gap = rep.symbol_sup > 0.0 ? (rep.symbol_sup - rep.operator_norm) / rep.symbol_sup : 0.0;
  return rep;
}

TransferReport transfer_fc(const H01Form& f, const CommutingTuple& tuple, const DilationSystem& sys,
                           const std::vector<std::vector<double>>& times, const FcOptions& options) {
  if (f.d() != tuple.d() || sys.d != tuple.d()) throw InvalidArgument("arity does not match the tuple");
  const SectorDomain dom = f.domain();
  for (double a : dom.angles)
    if (!(a > kPi / 2)) throw AngleOrderViolation("f must be holomorphic beyond the imaginary axes");
  TransferReport rep;
  const Matrix P = restricted_diagonal(sys, [](int) { return Complex(1.0); });
  rep.norm_fA = operator_norm(evaluate_fc(f, tuple, options, &sys.spectrum) * P, tuple.space()).value;
  rep.norm_fB = sup_norm_estimate(f.total(), SectorDomain::uniform(tuple.d(), kPi / 2), options.sup).value;
  rep.norm_J = sys.norm_J;
  rep.norm_Q = sys.norm_Q;
  for (const auto& t : times) rep.defect = std::max(rep.defect, verify_factorization(sys, t));
  const double bound = rep.norm_Q * rep.norm_J * rep.norm_fB + rep.defect * rep.norm_fB;
  rep.slack = bound - rep.norm_fA;
  rep.holds = rep.norm_fA <= bound * (1.0 + 1e-12);
  return rep;
}

Complex laplace_transform(const std::vector<Complex>& beta, int d, double h, std::span<const Complex> z) {
  if (d < 1 || static_cast<int>(z.size()) != d) throw InvalidArgument("need one Laplace variable per coordinate");
  for (const Complex& zk : z)
    if (zk.real() < 0.0) throw InvalidArgument("Laplace variables need nonnegative real parts");
  const int M1 = static_cast<int>(std::llround(std::pow(static_cast<double>(beta.size()), 1.0 / d)));
  if (ipow(M1, d) != static_cast<int>(beta.size())) throw InvalidArgument("kernel is not a full grid");
  Complex acc = 0.0;
  int flat = 0;
  for_each_index(d, M1, [&](const std::vector<int>& m) {
    Complex w = 1.0;
    for (int k = 0; k < d; ++k) w *= std::exp(-z[k] * (m[k] * h));
    acc += beta[flat++] * w;
  });
  return std::pow(h, d) * acc;
}

Matrix yosida_regularize(const Matrix& B, double eps) {
  check_matrix(B);
  if (!(eps > 0.0)) throw InvalidArgument("Yosida parameter must be positive");
  const auto n = B.rows();
  return eps * Matrix::Identity(n, n) + B * resolvent(-eps * B, 1.0);
}

std::vector<Matrix> group_generators(const GroupTuple& group) {
  std::vector<Matrix> out;
  for (const auto& U : group.U) {
    check_matrix(U);
    const Eigen::VectorXcd ev = Eigen::ComplexEigenSolver<Matrix>(U, false).eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      if (std::abs(ev[i]) < 1e-14 || (std::abs(ev[i].imag()) <= 1e-12 * std::abs(ev[i]) && ev[i].real() < 0.0))
        throw BranchCutViolation("unit-step matrix has an eigenvalue on (-inf, 0]");
    out.push_back(-Matrix(U.log()));
  }
  return out;
}

Matrix cyclic_shift(int N) {
  if (N < 1) throw InvalidArgument("shift needs N >= 1");
  Matrix U = Matrix::Zero(N, N);
  for (int i = 0; i < N; ++i) U((i + 1) % N, i) = 1.0;
  return U;
}

GroupEquivalenceReport group_calculus_equivalence_check(const GroupTuple& group,
                                                        const std::vector<SampledKernel>& kernels,
                                                        const EnsembleOptions& ensemble,
                                                        double angle_margin, int power_range,
                                                        const FcOptions& options) {
  GroupEquivalenceReport rep;
  rep.power_bound = group_power_bound(group, power_range);
  if (!std::isfinite(rep.power_bound)) throw InvalidArgument("group powers are unbounded");
  for (const auto& b : kernels) {
    const MultiplierReport m = group_multiplier_norm(b, group);
    const double r = m.symbol_sup > 0.0 ? m.operator_norm / m.symbol_sup : 0.0;
    rep.kernel_ratios.push_back(r);
    rep.K_multiplier = std::max(rep.K_multiplier, r);
  }
  const auto B = group_generators(group);
  const CommutingTuple gen(B, group.space, 1e-8);
  const auto types = estimated_types(gen);
  const double type = *std::max_element(types.begin(), types.end());
  rep.angle = std::max(kPi / 2, type) + angle_margin;
  if (!(rep.angle < kPi)) throw AngleOrderViolation("generator type leaves no room below pi");
  rep.K_fc = fc_constant_estimate(gen, SectorDomain::uniform(gen.d(), rep.angle), ensemble, options).estimate;
  rep.ratio = rep.K_multiplier > 0.0 ? rep.K_fc / rep.K_multiplier : 0.0;
  return rep;
}

std::vector<SampledKernel> kernel_family(int d, int R, int count, std::uint64_t seed) {
  std::vector<SampledKernel> out;
  const int size = ipow(2 * R + 1, d);
  auto blank = [&] { return SampledKernel{d, R, 1.0, std::vector<Complex>(size, 0.0)}; };
  SampledKernel delta = blank();
  delta.values[size / 2] = 1.0;
  out.push_back(delta);
  if (R >= 1) {
    SampledKernel shifted = blank();
    shifted.values[size / 2 + ipow(2 * R + 1, d - 1)] = 1.0;
    out.push_back(shifted);
    SampledKernel expo = blank();
    const double scale = std::max(1.0, R / 3.0);
    for_each_index(d, 2 * R + 1, [&](const std::vector<int>& idx) {
      bool positive = true;
      double s = 0.0;
      int flat = 0;
      for (int k = 0; k < d; ++k) {
        positive = positive && idx[k] >= R;
        s += idx[k] - R;
        flat = flat * (2 * R + 1) + idx[k];
      }
      if (positive) expo.values[flat] = std::exp(-s / scale);
    });
    out.push_back(expo);
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  while (static_cast<int>(out.size()) < count) {
    SampledKernel k = blank();
    for (auto& v : k.values) v = Complex(g(rng), g(rng));
    out.push_back(k);
  }
  out.resize(std::min<std::size_t>(out.size(), static_cast<std::size_t>(std::max(count, 1))));
  return out;
}

}  // namespace hfc
