#include "hfc/operator_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "hfc/detail/maximize.hpp"

namespace hfc {

namespace {

bool is_infinite(double p) { return std::isinf(p); }

Matrix unvec(const Vector& x, int dim) {
  return Eigen::Map<const Matrix>(x.data(), dim, dim);
}

/// Singular values (descending). For p >= 2 the small ones barely enter
/// the norm, so the much cheaper eigenvalues of X^* X are good enough.
Eigen::VectorXd singular_values(const Matrix& X, double p) {
  if (p < 2.0) return Eigen::JacobiSVD<Matrix>(X).singularValues();
  Eigen::SelfAdjointEigenSolver<Matrix> es(X.adjoint() * X, Eigen::EigenvaluesOnly);
  Eigen::VectorXd sv = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().reverse();
  return sv;
}

Vector vec(const Matrix& X) {
  return Eigen::Map<const Vector>(X.data(), X.size());
}

/// Norming functional up to a positive factor, used only to steer the power
/// iteration. For Schatten models it skips the SVD: the direction
/// X (X^* X)^{(p-2)/2} comes from the Gram eigenbasis.
Vector search_direction(const SpaceModel& space, const Vector& x) {
  if (space.kind != SpaceModel::Kind::schatten || space.p == 2.0 || std::isinf(space.p) ||
      space.p == 1.0)
    return space.norming_functional(x);
  const Matrix X = Eigen::Map<const Matrix>(x.data(), space.dim, space.dim);
  Eigen::SelfAdjointEigenSolver<Matrix> es(X.adjoint() * X);
  const Eigen::VectorXd sv = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const double top = sv.maxCoeff();
  if (!(top > 0.0)) return Vector::Zero(x.size());
  Eigen::VectorXd w(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    w[i] = std::pow(std::max(sv[i], 1e-8 * top) / top, space.p - 2.0);
  const Matrix& V = es.eigenvectors();
  return vec(X * V * w.cast<Complex>().asDiagonal() * V.adjoint());
}

Vector random_unit(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = Complex(g(rng), g(rng));
  return v / v.norm();
}

}  // namespace

SpaceModel SpaceModel::euclidean(int dim) {
  if (dim < 1) throw InvalidArgument("space dimension must be >= 1");
  return {Kind::euclidean, 2.0, dim};
}

SpaceModel SpaceModel::lp(double p, int dim) {
  if (dim < 1) throw InvalidArgument("space dimension must be >= 1");
  if (!(p >= 1.0)) throw InvalidArgument("lp exponent must lie in [1, inf]");
  return {Kind::lp, p, dim};
}

SpaceModel SpaceModel::schatten(double p, int dim) {
  if (dim < 1) throw InvalidArgument("space dimension must be >= 1");
  if (!(p >= 1.0)) throw InvalidArgument("schatten exponent must lie in [1, inf]");
  return {Kind::schatten, p, dim};
}

int SpaceModel::vector_dim() const { return kind == Kind::schatten ? dim * dim : dim; }

bool SpaceModel::is_hilbert() const { return kind == Kind::euclidean || p == 2.0; }

std::string to_string(SpaceModel::Kind kind) {
  switch (kind) {
    case SpaceModel::Kind::euclidean: return "euclidean";
    case SpaceModel::Kind::lp: return "lp";
    case SpaceModel::Kind::schatten: return "schatten";
  }
  return "?";
}

double conjugate_exponent(double p) {
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  if (is_infinite(p)) return 1.0;
  return p / (p - 1.0);
}

double SpaceModel::norm(const Vector& x) const {
  if (x.size() != vector_dim()) throw InvalidArgument("vector dimension does not match the space model");
  switch (kind) {
    case Kind::euclidean: return x.norm();
    case Kind::lp: {
      if (is_infinite(p)) return x.cwiseAbs().maxCoeff();
      if (p == 1.0) return x.cwiseAbs().sum();
      if (p == 2.0) return x.norm();
      const double m = x.cwiseAbs().maxCoeff();
      if (m == 0.0) return 0.0;
      double s = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) s += std::pow(std::abs(x[i]) / m, p);
      return m * std::pow(s, 1.0 / p);
    }
    case Kind::schatten: {
      if (p == 2.0) return x.norm();
      const Eigen::VectorXd sv = singular_values(unvec(x, dim), p);
      if (is_infinite(p)) return sv.size() ? sv[0] : 0.0;
      if (p == 1.0) return sv.sum();
      const double m = sv.size() ? sv[0] : 0.0;
      if (m == 0.0) return 0.0;
      double s = 0.0;
      for (Eigen::Index i = 0; i < sv.size(); ++i) s += std::pow(sv[i] / m, p);
      return m * std::pow(s, 1.0 / p);
    }
  }
  return 0.0;
}

Vector SpaceModel::norming_functional(const Vector& x) const {
  const double nx = norm(x);
  Vector y = Vector::Zero(x.size());
  if (nx == 0.0) return y;
  if (is_hilbert() && kind != Kind::schatten) return x / nx;
  if (kind == Kind::lp) {
    if (is_infinite(p)) {
      Eigen::Index i = 0;
      x.cwiseAbs().maxCoeff(&i);
      y[i] = x[i] / std::abs(x[i]);
      return y;
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double a = std::abs(x[i]);
      if (a == 0.0) continue;
      y[i] = x[i] / a * std::pow(a / nx, p - 1.0);
    }
    return y;
  }
  if (p == 2.0) return x / nx;
  const Matrix X = unvec(x, dim);
  if (p < 2.0) {
    Eigen::JacobiSVD<Matrix> svd(X, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd sv = svd.singularValues();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (!(sv[i] > 1e-14 * sv[0])) continue;
      w[i] = p == 1.0 ? 1.0 : std::pow(sv[i] / nx, p - 1.0);
    }
    return vec(svd.matrixU() * w.cast<Complex>().asDiagonal() * svd.matrixV().adjoint());
  }
  // U w V^* written as X V diag(w / sigma) V^* from the Gram eigenbasis
  Eigen::SelfAdjointEigenSolver<Matrix> es(X.adjoint() * X);
  const Eigen::VectorXd sv = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const double top = sv.maxCoeff();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (!(sv[i] > 1e-14 * top)) continue;
    if (is_infinite(p)) w[i] = sv[i] >= top * (1.0 - 1e-12) ? 1.0 / sv[i] : 0.0;
    else w[i] = std::pow(sv[i] / nx, p - 1.0) / sv[i];
  }
  const Matrix& V = es.eigenvectors();
  const Matrix Y = X * V * w.cast<Complex>().asDiagonal() * V.adjoint();
  return vec(Y);
}

SpaceModel SpaceModel::dual() const {
  if (kind == Kind::euclidean) return *this;
  return {kind, conjugate_exponent(p), dim};
}

double euclidean_equivalence_factor(const SpaceModel& space) {
  if (space.is_hilbert()) return 1.0;
  // ||x||_p <= a ||x||_2 and ||x||_2 <= b ||x||_p with a*b = n^{|1/2-1/p|}.
  const double n = space.kind == SpaceModel::Kind::schatten ? space.dim : space.vector_dim();
  const double q = is_infinite(space.p) ? 0.0 : 1.0 / space.p;
  return std::pow(n, std::abs(0.5 - q));
}

namespace {

bool is_diagonal(const Matrix& A) {
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    for (Eigen::Index i = 0; i < A.rows(); ++i)
      if (i != j && A(i, j) != Complex(0.0)) return false;
  return true;
}

/// Largest singular value, with a shortcut for diagonal matrices.
double spectral_norm(const Matrix& A) {
  if (is_diagonal(A)) return A.rows() ? A.diagonal().cwiseAbs().maxCoeff() : 0.0;
  return A.operatorNorm();
}

}  // namespace

void check_matrix(const Matrix& A, const char* what) {
  if (A.rows() < 1 || A.rows() != A.cols())
    throw InvalidArgument(std::string(what) + " must be square with dim >= 1");
  if (!A.allFinite()) throw InvalidArgument(std::string(what) + " has non-finite entries");
}

double commutation_defect(std::span<const Matrix> operators) {
  double worst = 0.0;
  for (std::size_t a = 0; a < operators.size(); ++a) {
    for (std::size_t b = a + 1; b < operators.size(); ++b) {
      const Matrix& A = operators[a];
      const Matrix& B = operators[b];
      const double c = spectral_norm(A * B - B * A);
      const double scale = spectral_norm(A) * spectral_norm(B);
      if (scale == 0.0) continue;
      worst = std::max(worst, c / scale);
    }
  }
  return worst;
}

CommutingTuple::CommutingTuple(std::vector<Matrix> operators, SpaceModel space,
                               double tolerance)
    : operators_(std::move(operators)), space_(space), tolerance_(tolerance) {
  if (operators_.empty()) throw InvalidArgument("a tuple needs at least one operator");
  if (!(tolerance_ >= 0.0)) throw InvalidArgument("tolerance must be nonnegative");
  const auto n = operators_.front().rows();
  for (const auto& A : operators_) {
    check_matrix(A, "tuple operator");
    if (A.rows() != n) throw InvalidArgument("tuple operators must share one dimension");
  }
  if (space_.vector_dim() != n)
    throw InvalidArgument("space model dimension does not match the operators");
  const double defect = commutation_defect(std::span<const Matrix>(operators_));
  if (defect > tolerance_)
    throw CommutationViolation("commutation defect " + std::to_string(defect) +
                               " exceeds tolerance " + std::to_string(tolerance_));
}

double commutation_defect(const CommutingTuple& tuple) {
  return commutation_defect(std::span<const Matrix>(tuple.operators()));
}

Matrix resolvent(const Matrix& A, Complex z, double cond_ceiling) {
  check_matrix(A);
  const auto n = A.rows();
  const Matrix M = z * Matrix::Identity(n, n) - A;
  Eigen::PartialPivLU<Matrix> lu(M);
  // rcond() misses exactly zero pivots, so check them too
  const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
  const double rcond = pivots.minCoeff() > 0.0 ? lu.rcond() : 0.0;
  if (!(rcond > 1.0 / cond_ceiling))
    throw SingularResolvent("zI - A is numerically singular near z = (" +
                            std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")");
  Matrix R = lu.solve(Matrix::Identity(n, n));
  // One step of iterative refinement keeps the residual at working precision.
  R += lu.solve(Matrix::Identity(n, n) - M * R);
  return R;
}

double spectral_angle(const Matrix& A) {
  check_matrix(A);
  const Eigen::VectorXcd ev = Eigen::ComplexEigenSolver<Matrix>(A, false).eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  double omega = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i]) <= kZeroEigenvalueThreshold * scale || scale == 0.0) continue;
    omega = std::max(omega, std::abs(std::arg(ev[i])));
  }
  return omega;
}

NormEstimate operator_norm(const Matrix& A, const SpaceModel& space,
                           const NormOptions& options) {
  check_matrix(A, "operator");
  const int n = space.vector_dim();
  if (A.rows() != n) throw InvalidArgument("operator dimension does not match the space model");

  if (space.is_hilbert()) {
    Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullV);
    return {svd.singularValues()[0], svd.matrixV().col(0)};
  }
  if (space.kind == SpaceModel::Kind::lp && space.p == 1.0) {
    Eigen::Index j = 0;
    const double v = A.cwiseAbs().colwise().sum().maxCoeff(&j);
    return {v, Vector::Unit(n, j)};
  }
  if (space.kind == SpaceModel::Kind::lp && is_infinite(space.p)) {
    Eigen::Index i = 0;
    const double v = A.cwiseAbs().rowwise().sum().maxCoeff(&i);
    Vector x(n);
    for (int j = 0; j < n; ++j) {
      const double a = std::abs(A(i, j));
      x[j] = a > 0.0 ? std::conj(A(i, j)) / a : Complex(1.0);
    }
    return {v, x};
  }

  const SpaceModel dual = space.dual();
  const Matrix AH = A.adjoint();
  std::mt19937_64 rng(options.seed);

  NormEstimate best{0.0, Vector::Unit(n, 0)};
  auto climb = [&](Vector x) {
    const double nx = space.norm(x);
    if (nx == 0.0) return;
    x /= nx;
    double value = space.norm(A * x);
    for (int it = 0; it < options.max_iterations; ++it) {
      const Vector y = A * x;
      if (space.norm(y) == 0.0) break;
      const Vector w = AH * search_direction(space, y);
      if (w.isZero(0.0)) break;
      Vector next = search_direction(dual, w);
      next /= space.norm(next);
      const double next_value = space.norm(A * next);
      if (next_value <= value * (1.0 + options.tolerance)) {
        if (next_value > value) { x = next; value = next_value; }
        break;
      }
      x = next;
      value = next_value;
    }
    if (value > best.value) best = {value, x};
  };

  for (const auto& w : options.warm_starts) {
    if (w.size() == n) climb(w);
  }
  for (int j = 0; j < n && j < options.restarts; ++j) climb(Vector::Unit(n, j));
  for (int r = 0; r < options.restarts; ++r) climb(random_unit(n, rng));
  return best;
}

SectorialProfile sectorial_profile(const Matrix& A, const SpaceModel& space,
                                   std::vector<double> angles,
                                   const ProfileOptions& options) {
  check_matrix(A);
  for (double t : angles)
    if (!(t > 0.0 && t < kPi)) throw InvalidArgument("profile angles must lie in (0, pi)");
  std::sort(angles.begin(), angles.end());
  SectorialProfile profile;
  profile.angles = angles;
  profile.constants.assign(angles.size(), 0.0);
  for (std::size_t i = 0; i < angles.size(); ++i) {
    double sup = 0.0;
    for (double sign : {1.0, -1.0}) {
      const Complex dir = std::polar(1.0, sign * angles[i]);
      auto f = [&](double r) {
        const Complex z = r * dir;
        return operator_norm(z * resolvent(A, z), space, options.norm).value;
      };
      sup = std::max(sup, detail::maximize_log(f, options.r_min, options.r_max,
                                               options.per_decade, options.refine_rounds)
                              .value);
    }
    profile.constants[i] = sup;
  }
  for (std::size_t i = angles.size(); i-- > 1;)
    profile.constants[i - 1] = std::max(profile.constants[i - 1], profile.constants[i]);
  for (std::size_t i = 0; i < angles.size(); ++i) {
    if (profile.constants[i] < options.type_threshold) {
      profile.inferred_type = angles[i];
      break;
    }
  }
  return profile;
}

namespace {

/// Orthonormal basis of the (numerical) null space of M with expected
/// dimension m; empty when the gap is not clear.
std::optional<Matrix> null_space(const Matrix& M, int m, double tol) {
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  const auto n = M.cols();
  const double scale = std::max(1.0, sv.size() ? sv[0] : 0.0);
  if (sv[n - m] > tol * scale) return std::nullopt;
  if (n - m - 1 >= 0 && sv[n - m - 1] <= tol * scale) return std::nullopt;
  return svd.matrixV().rightCols(m);
}

std::optional<JointSpectrum> try_decompose(const CommutingTuple& tuple, std::mt19937_64& rng) {
  const int n = tuple.n();
  const int d = tuple.d();
  std::uniform_real_distribution<double> u(0.5, 1.5);
  std::uniform_real_distribution<double> ph(0.0, 2 * kPi);

  Matrix C = Matrix::Zero(n, n);
  for (int k = 0; k < d; ++k) {
    const double s = tuple.op(k).operatorNorm();
    if (s == 0.0) continue;
    C += std::polar(u(rng), ph(rng)) / s * tuple.op(k);
  }
  const Eigen::VectorXcd ev = Eigen::ComplexEigenSolver<Matrix>(C, false).eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  const double cluster_tol = 1e-6 * scale;

  std::vector<bool> used(n, false);
  Matrix S(n, n);
  int col = 0;
  for (int i = 0; i < n; ++i) {
    if (used[i]) continue;
    std::vector<int> members;
    Complex centre = 0.0;
    for (int j = i; j < n; ++j) {
      if (!used[j] && std::abs(ev[j] - ev[i]) <= cluster_tol) {
        used[j] = true;
        members.push_back(j);
        centre += ev[j];
      }
    }
    centre /= static_cast<double>(members.size());
    const int m = static_cast<int>(members.size());
    const auto basis = null_space(C - centre * Matrix::Identity(n, n), m, 1e-7);
    if (!basis) return std::nullopt;
    S.middleCols(col, m) = *basis;
    col += m;
  }

  Eigen::FullPivLU<Matrix> lu(S);
  if (!lu.isInvertible() || lu.rcond() < 1e-12) return std::nullopt;
  const Matrix S_inv = lu.inverse();

  JointSpectrum js;
  js.basis = S;
  js.basis_inverse = S_inv;
  js.eigenvalues.assign(n, std::vector<Complex>(d));
  for (int k = 0; k < d; ++k) {
    const Matrix D = S_inv * tuple.op(k) * S;
    const double a = std::max(tuple.op(k).operatorNorm(), 1e-300);
    Matrix off = D;
    off.diagonal().setZero();
    if (off.operatorNorm() > 1e-8 * a * std::max(1.0, S.operatorNorm() * S_inv.operatorNorm()))
      return std::nullopt;
    for (int c = 0; c < n; ++c) js.eigenvalues[c][k] = D(c, c);
  }
  return js;
}

}  // namespace

JointSpectrum joint_spectral_decompose(const CommutingTuple& tuple, std::uint64_t seed) {
  if (std::all_of(tuple.operators().begin(), tuple.operators().end(), is_diagonal)) {
    const int n = tuple.n();
    JointSpectrum js;
    js.basis = Matrix::Identity(n, n);
    js.basis_inverse = js.basis;
    js.eigenvalues.assign(n, std::vector<Complex>(tuple.d()));
    for (int k = 0; k < tuple.d(); ++k)
      for (int c = 0; c < n; ++c) js.eigenvalues[c][k] = tuple.op(k)(c, c);
    return js;
  }
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 4; ++attempt) {
    if (auto js = try_decompose(tuple, rng)) return *js;
  }
  throw NotSimultaneouslyDiagonalizable("no common eigenbasis found within tolerance");
}

void snap_zero_eigenvalues(JointSpectrum& js) {
  auto& ev = js.eigenvalues;
  if (ev.empty()) return;
  for (std::size_t k = 0; k < ev[0].size(); ++k) {
    double scale = 0.0;
    for (const auto& e : ev) scale = std::max(scale, std::abs(e[k]));
    for (auto& e : ev)
      if (std::abs(e[k]) < kZeroEigenvalueThreshold * scale) e[k] = 0.0;
  }
}

Matrix fractional_sqrt(const Matrix& A) {
  check_matrix(A);
  const Eigen::VectorXcd ev = Eigen::ComplexEigenSolver<Matrix>(A, false).eigenvalues();
  const double scale = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const Complex l = ev[i];
    if (std::abs(l) <= 1e-14 * scale ||
        (l.real() <= 0.0 && std::abs(l.imag()) <= 1e-14 * scale))
      throw BranchCutViolation("eigenvalue on (-inf, 0]");
  }
  return A.sqrt();
}

ErgodicSplit ergodic_split(const CommutingTuple& tuple, const JointSpectrum& js) {
  const int n = tuple.n();
  const int d = tuple.d();
  std::vector<double> scale(d, 0.0);
  for (int c = 0; c < n; ++c)
    for (int k = 0; k < d; ++k) scale[k] = std::max(scale[k], std::abs(js.eigenvalues[c][k]));

  ErgodicSplit split;
  split.d = d;
  std::vector<Mask> pattern(n, 0);
  for (int c = 0; c < n; ++c)
    for (int k = 0; k < d; ++k)
      if (scale[k] > 0.0 && std::abs(js.eigenvalues[c][k]) >= kZeroEigenvalueThreshold * scale[k])
        pattern[c] |= Mask{1} << k;

  for (Mask mask = 0; mask < (Mask{1} << d); ++mask) {
    Eigen::VectorXcd sel = Eigen::VectorXcd::Zero(n);
    for (int c = 0; c < n; ++c)
      if (pattern[c] == mask) sel[c] = 1.0;
    split.projections[mask] = js.basis * sel.asDiagonal() * js.basis_inverse;
  }
  return split;
}

ErgodicSplit ergodic_split(const CommutingTuple& tuple) {
  return ergodic_split(tuple, joint_spectral_decompose(tuple));
}

CommutingTuple adjoint_tuple(const CommutingTuple& tuple) {
  std::vector<Matrix> ops;
  ops.reserve(tuple.d());
  for (const auto& A : tuple.operators()) ops.push_back(A.adjoint());
  return CommutingTuple(std::move(ops), tuple.space().dual(), tuple.tolerance());
}

}  // namespace hfc
