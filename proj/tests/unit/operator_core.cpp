#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "hfc/corpus.hpp"

using namespace hfc;
using namespace testing;

TEST_CASE("space norms") {
  Vector x(3);
  x << Complex(1, 1), -2.0, Complex(0, 3);
  const double e = std::sqrt(2.0 + 4 + 9);
  CHECK(SpaceModel::euclidean(3).norm(x) == doctest::Approx(e).epsilon(1e-14));
  CHECK(std::abs(SpaceModel::lp(2, 3).norm(x) - e) <= 1e-12 * e);
  CHECK(SpaceModel::lp(1, 3).norm(x) == doctest::Approx(std::sqrt(2.0) + 5));

  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (const SpaceModel& s : {SpaceModel::lp(1.5, 4), SpaceModel::lp(4, 4), SpaceModel::schatten(3, 2)}) {
    for (int trial = 0; trial < 10; ++trial) {
      Vector a(4), b(4);
      for (int i = 0; i < 4; ++i) a[i] = Complex(g(rng), g(rng)), b[i] = Complex(g(rng), g(rng));
      CHECK(s.norm(a + b) <= s.norm(a) + s.norm(b) + 1e-12);
      CHECK(s.norm(Complex(0, -2.5) * a) == doctest::Approx(2.5 * s.norm(a)));
      const Vector y = s.norming_functional(a);
      CHECK(std::abs(a.dot(y)) == doctest::Approx(s.norm(a)).epsilon(1e-10));
      CHECK(s.dual().norm(y) == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
  CHECK(SpaceModel::euclidean(2).norm(Vector::Zero(2)) == 0.0);
}

TEST_CASE("commutation defect") {
  const std::vector<Matrix> d12{diag({1, 2}), diag({3, 4})};
  CHECK(commutation_defect(d12) == 0.0);
  const Matrix A = mat2(1, 2, 3, 4);
  const std::vector<Matrix> poly{A, A * A};
  CHECK(commutation_defect(poly) < 1e-15);
  const Matrix E = mat2(0, 1, 0, 0), F = mat2(0, 0, 1, 0);
  const std::vector<Matrix> ef{E, F};
  // [E, F] = diag(1, -1): spectral norm 1, norms of E and F are 1
  CHECK(commutation_defect(ef) == doctest::Approx(1.0));
  CHECK_THROWS_AS(CommutingTuple(ef, SpaceModel::euclidean(2)), CommutationViolation);
}

TEST_CASE("resolvent") {
  CHECK(resolvent(scalar(1), -1.0)(0, 0) == Complex(-0.5));
  CHECK(rel(resolvent(diag({1, 2}), 3.0), diag({0.5, 1})) < 1e-15);
  CHECK(rel(resolvent(mat2(1, 1, 0, 1), 0.0), mat2(-1, 1, 0, -1)) < 1e-15);
  CHECK_THROWS_AS(resolvent(diag({1, 2}), 2.0), SingularResolvent);
}

TEST_CASE("sectorial profile against a scalar maximization") {
  // sup over the rays of Sigma_theta of |z| / |z - lambda|, by dense sampling in log r
  auto oracle = [](Complex lambda, double theta) {
    double best = 0.0;
    for (int i = -4000; i <= 4000; ++i) {
      const double r = std::pow(10.0, i / 500.0);
      for (double s : {-1.0, 1.0}) {
        const Complex z = std::polar(r, s * theta);
        best = std::max(best, r / std::abs(z - lambda));
      }
    }
    return best;
  };
  const std::vector<double> angles{0.5, 1.0, 1.4};
  const SectorialProfile pI = sectorial_profile(Matrix::Identity(2, 2), SpaceModel::euclidean(2), angles);
  const SectorialProfile p12 = sectorial_profile(diag({1, 2}), SpaceModel::euclidean(2), angles);
  for (std::size_t i = 0; i < angles.size(); ++i) {
    CHECK(pI.constants[i] == doctest::Approx(1.0 / std::sin(angles[i])).epsilon(0.05));
    CHECK(p12.constants[i] == doctest::Approx(pI.constants[i]).epsilon(0.05));
    if (i > 0) CHECK(pI.constants[i] <= pI.constants[i - 1] * (1 + 1e-12));
  }
  const Complex w = std::polar(1.0, kPi / 4);
  const SectorialProfile pw = sectorial_profile(diag({w}), SpaceModel::euclidean(1), {3 * kPi / 4});
  CHECK(pw.constants[0] == doctest::Approx(1.0).epsilon(0.05));
  // normal matrix with spectrum on the ray of argument 0.3
  const Complex a = std::polar(1.0, 0.3), b = std::polar(3.0, 0.3);
  const SectorialProfile pr = sectorial_profile(diag({a, b}), SpaceModel::euclidean(2), {1.0});
  CHECK(pr.constants[0] == doctest::Approx(1.0 / std::sin(1.0 - 0.3)).epsilon(0.05));
  CHECK(pr.constants[0] == doctest::Approx(std::max(oracle(a, 1.0), oracle(b, 1.0))).epsilon(0.05));
}

TEST_CASE("joint spectral decomposition") {
  const CommutingTuple t({diag({1, 2}), diag({3, 4})}, SpaceModel::euclidean(2));
  const JointSpectrum js = joint_spectral_decompose(t);
  std::vector<std::pair<double, double>> pairs;
  for (const auto& row : js.eigenvalues) pairs.emplace_back(row[0].real(), row[1].real());
  std::sort(pairs.begin(), pairs.end());
  CHECK(pairs[0] == std::pair{1.0, 3.0});
  CHECK(pairs[1] == std::pair{2.0, 4.0});

  // construct-then-recover round trip
  const CommutingTuple r = random_tuple({.d = 2, .n = 4, .normal = false}, 17);
  const JointSpectrum jr = joint_spectral_decompose(r);
  for (int k = 0; k < 2; ++k) {
    Vector lk(4);
    for (int j = 0; j < 4; ++j) lk[j] = jr.eigenvalues[j][k];
    CHECK(rel(jr.basis * lk.asDiagonal() * jr.basis_inverse, r.op(k)) < 1e-8);
  }
  const Matrix A = mat2(2, 1, 0, 3);
  const JointSpectrum ja = joint_spectral_decompose(CommutingTuple({A, Matrix::Identity(2, 2)}, SpaceModel::euclidean(2)));
  for (const auto& row : ja.eigenvalues) CHECK(std::abs(row[1] - 1.0) < 1e-12);
  CHECK_THROWS_AS(joint_spectral_decompose(CommutingTuple({mat2(1, 1, 0, 1)}, SpaceModel::euclidean(2))),
                  NotSimultaneouslyDiagonalizable);
}

TEST_CASE("fractional square root") {
  CHECK(rel(fractional_sqrt(diag({4, 9})), diag({2, 3})) < 1e-14);
  CHECK(std::abs(fractional_sqrt(diag({kI}))(0, 0) - std::polar(1.0, kPi / 4)) < 1e-14);
  const Matrix J = mat2(2, 1, 0, 2);
  const Matrix R = fractional_sqrt(J);
  CHECK(rel(R * R, J) < 1e-10);
  CHECK_THROWS_AS(fractional_sqrt(diag({-1.0})), BranchCutViolation);
}

TEST_CASE("ergodic split") {
  const ErgodicSplit inv = ergodic_split(CommutingTuple({diag({1, 2})}, SpaceModel::euclidean(2)));
  CHECK(rel(inv.projection(1), Matrix::Identity(2, 2)) < 1e-12);
  CHECK(inv.projection(0).norm() < 1e-12);
  const ErgodicSplit one = ergodic_split(CommutingTuple({diag({0, 1})}, SpaceModel::euclidean(2)));
  CHECK(rel(one.projection(1), diag({0, 1})) < 1e-12);
  CHECK(rel(one.projection(0), diag({1, 0})) < 1e-12);

  const CommutingTuple t({diag({0, 1, 1}), diag({1, 0, 1})}, SpaceModel::euclidean(3));
  const ErgodicSplit s = ergodic_split(t);
  CHECK(s.projection(0).norm() < 1e-12);
  CHECK(rel(s.projection(2), diag({1, 0, 0})) < 1e-12);  // active on coordinate 2 only
  CHECK(rel(s.projection(1), diag({0, 1, 0})) < 1e-12);
  CHECK(rel(s.projection(3), diag({0, 0, 1})) < 1e-12);

  const CommutingTuple r = random_tuple({.d = 2, .n = 4, .normal = false}, 5);
  const ErgodicSplit sr = ergodic_split(r);
  Matrix sum = Matrix::Zero(4, 4);
  for (const auto& [mask, Pm] : sr.projections) {
    sum += Pm;
    for (const Matrix& A : r.operators()) CHECK((Pm * A - A * Pm).norm() <= 1e-10 * A.norm());
    for (const auto& [mask2, Q] : sr.projections)
      if (mask2 != mask) CHECK((Pm * Q).norm() < 1e-10);
  }
  CHECK(rel(sum, Matrix::Identity(4, 4)) < 1e-10);
}

TEST_CASE("adjoint tuple") {
  const CommutingTuple t({diag({Complex(1, 1)})}, SpaceModel::lp(3, 1));
  const CommutingTuple a = adjoint_tuple(t);
  CHECK(a.op(0)(0, 0) == Complex(1, -1));
  CHECK(a.space().p == doctest::Approx(1.5));
  const CommutingTuple aa = adjoint_tuple(a);
  CHECK(aa.op(0) == t.op(0));
  CHECK(aa.space().p == doctest::Approx(3.0));
  const Matrix H = mat2(2, Complex(1, -1), Complex(1, 1), 3);
  CHECK(adjoint_tuple(CommutingTuple({H}, SpaceModel::euclidean(2))).op(0) == H);
}

TEST_CASE("operator norms") {
  for (const SpaceModel& s : {SpaceModel::euclidean(2), SpaceModel::lp(1, 2), SpaceModel::lp(3, 2)})
    CHECK(operator_norm(Matrix::Identity(2, 2), s).value == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(operator_norm(diag({3, -4}), SpaceModel::euclidean(2)).value == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(operator_norm(mat2(0, 2, 0, 0), SpaceModel::euclidean(2)).value == doctest::Approx(2.0).epsilon(1e-12));
  // l1 norm is the largest column sum, exact
  CHECK(operator_norm(mat2(1, -2, 3, 1), SpaceModel::lp(1, 2)).value == doctest::Approx(4.0));
  // adjoint duality on lp
  const Matrix A = mat2(Complex(1, 0.5), -2, 0.3, Complex(0, 1));
  for (double p : {1.5, 3.0}) {
    const double n1 = operator_norm(A, SpaceModel::lp(p, 2)).value;
    const double n2 = operator_norm(A.adjoint(), SpaceModel::lp(p, 2).dual()).value;
    CHECK(n1 == doctest::Approx(n2).epsilon(0.01));
  }
  const double e1 = operator_norm(A, SpaceModel::euclidean(2)).value;
  CHECK(std::abs(e1 - operator_norm(A.adjoint(), SpaceModel::euclidean(2)).value) < 1e-10);
  // deterministic under a fixed seed
  CHECK(operator_norm(A, SpaceModel::lp(3, 2)).value == operator_norm(A, SpaceModel::lp(3, 2)).value);
}
