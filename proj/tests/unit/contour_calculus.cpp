#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "hfc/contour_calculus.hpp"
#include "hfc/corpus.hpp"

using namespace hfc;
using namespace testing;

TEST_CASE("contour quadrature self test") {
  const ContourQuadrature q(kPi / 4, 1e-10, 1e10);
  CHECK(q.cauchy_self_test_error() < 1e-8);
  // (2 pi i)^{-1} contour integral of phi_1(z)/(z - a) = phi_1(a)
  for (double a : {0.5, 1.0, 3.0}) {
    const Complex v = q.integrate([a](Complex z) { return z / ((1.0 + z) * (1.0 + z)) / (z - a); });
    CHECK(std::abs(v - a / ((1 + a) * (1 + a))) < 1e-8);
  }
}

TEST_CASE("log grid") {
  const LogGrid g{1e-6, 1e6, 32};
  double sum = 0.0, integral = 0.0;
  const auto t = g.nodes();
  const auto w = g.weights();
  for (std::size_t i = 0; i < t.size(); ++i) {
    sum += w[i];
    integral += w[i] * t[i] / ((1 + t[i]) * (1 + t[i]));
  }
  CHECK(sum == doctest::Approx(std::log(1e12)).epsilon(1e-12));
  CHECK(std::abs(integral - 1.0) < 1e-5);  // tails of the range cost about 2e-6
  CHECK(g.refined().size() == 2 * g.size());
}

TEST_CASE("contour calculus against closed forms") {
  const CommutingTuple a({diag({1, 2})}, SpaceModel::euclidean(2));
  CHECK(rel(contour_fc(phi_m(1), a).value, diag({0.25, 2.0 / 9})) < 1e-8);
  const CommutingTuple b({diag({1, 2}), diag({3, 4})}, SpaceModel::euclidean(2));
  CHECK(rel(contour_fc(phi_m_tensor(1, 2), b).value, diag({0.25 * 3 / 16, 2.0 / 9 * 4 / 25})) < 1e-8);
  H01Form c(2, Complex(0.3, -1));
  CHECK(contour_fc(c, b).value == Complex(0.3, -1) * Matrix::Identity(2, 2));
  // z^{1/2} e^{-z} through the contour
  CHECK(rel(contour_fc(power_exp(0.5), a).value, diag({std::exp(-1.0), std::sqrt(2.0) * std::exp(-2.0)})) < 1e-8);
}

TEST_CASE("spectral oracle") {
  const CommutingTuple t = random_tuple({.d = 1, .n = 4, .normal = false}, 3);
  const SectorFunction z = SectorFunction::coordinate_power(1, 0, 1.0);
  CHECK(rel(spectral_oracle_fc(z, t), t.op(0)) < 1e-10);
  const Matrix p = spectral_oracle_fc(phi_m(1), t);
  CHECK(rel(spectral_oracle_fc(phi_m(1) * phi_m(1), t), p * p) < 1e-10);
}

TEST_CASE("oracle equivalence, homomorphism and angle independence") {
  for (int d = 1; d <= 3; ++d)
    for (std::uint64_t seed = 1; seed <= 2; ++seed) {
      const CommutingTuple t = random_tuple({.d = d, .n = 4, .normal = seed == 1}, 100 * d + seed);
      const auto ens = fc_ensemble(d, SectorDomain::uniform(d, kPi / 2), {.size = 4, .seed = seed, .max_atoms = 3});
      for (std::size_t i = 1; i < ens.size(); ++i) {
        const FCResult r = contour_fc(ens[i].f, t);
        const Matrix o = spectral_oracle_fc(ens[i].f, t);
        CHECK((r.value - o).norm() <= r.tail_estimate + 1e-7 * o.norm());
      }
      const Matrix fg = contour_fc(ens[1].f.product(ens[2].f), t).value;
      CHECK(rel(fg, contour_fc(ens[1].f, t).value * contour_fc(ens[2].f, t).value) < 1e-7);
      ContourOptions lo, hi;
      lo.nu.assign(d, 0.9);
      hi.nu.assign(d, 1.3);
      CHECK(rel(contour_fc(ens[3].f, t, lo).value, contour_fc(ens[3].f, t, hi).value) < 1e-7);
    }
}

TEST_CASE("adjoint identity") {
  const CommutingTuple t = random_tuple({.d = 2, .n = 3, .normal = false}, 9);
  const auto ens = fc_ensemble(2, SectorDomain::uniform(2, kPi / 2), {.size = 2, .seed = 4});
  const H01Form& f = ens[1].f;
  const Matrix lhs = contour_fc(f.conjugate_reflect(), adjoint_tuple(t)).value;
  CHECK(rel(lhs, contour_fc(f, t).value.adjoint()) < 1e-8);
}

TEST_CASE("angle order is enforced") {
  const CommutingTuple t({diag({std::polar(1.0, 1.0)})}, SpaceModel::euclidean(1));
  CHECK_THROWS_AS(contour_fc(phi_m(1, 0.8), t), AngleOrderViolation);
  ContourOptions o;
  o.nu = {1.5};
  CHECK_THROWS_AS(contour_fc(phi_m(1, 1.4), t, o), AngleOrderViolation);
}

TEST_CASE("calculus constant estimates") {
  const CommutingTuple n = random_tuple({.d = 2, .n = 3}, 21);
  const FcConstantReport rn = fc_constant_estimate(n, SectorDomain::uniform(2, 1.2), {.size = 12, .seed = 2});
  CHECK(rn.estimate <= 1.02);
  CHECK(rn.estimate >= 1.0 - 1e-12);  // the constant 1 is in the ensemble

  double previous = 0.0;
  for (double M : {1.0, 10.0, 100.0}) {
    const CommutingTuple j({mat2(1, M, 0, 1.5)}, SpaceModel::euclidean(2));
    const double e = fc_constant_estimate(j, SectorDomain::uniform(1, 1.2), {.size = 12, .seed = 2}).estimate;
    CHECK(e > previous);
    previous = e;
  }

  // f(A, A) = g(A) with g(z) = f(z, z): the doubled tuple sees the diagonal restriction
  const CommutingTuple single = random_tuple({.d = 1, .n = 3}, 8);
  const CommutingTuple twice({single.op(0), single.op(0)}, single.space());
  const auto ens = fc_ensemble(2, SectorDomain::uniform(2, 1.2), {.size = 6, .seed = 5});
  for (const auto& m : ens) {
    const Matrix lhs = spectral_oracle_fc(m.f, twice);
    const JointSpectrum js = joint_spectral_decompose(single);
    Vector dvals(3);
    for (int j = 0; j < 3; ++j) {
      const std::vector<Complex> zz{js.eigenvalues[j][0], js.eigenvalues[j][0]};
      dvals[j] = m.f.eval(zz);
    }
    CHECK(rel(lhs, js.basis * dvals.asDiagonal() * js.basis_inverse) < 1e-10);
  }
}

TEST_CASE("angle dependence profile") {
  const CommutingTuple n = random_tuple({.d = 1, .n = 3, .max_angle = 0.3}, 4);
  const AngleProfile p = angle_dependence_profile(n, {0.5, 1.0, 1.5, 2.0}, {.size = 10, .seed = 3});
  for (double e : p.estimates) CHECK(e == doctest::Approx(1.0).epsilon(0.05));
  const CommutingTuple j({mat2(1, 3, 0, 1.2)}, SpaceModel::euclidean(2));
  const AngleProfile q = angle_dependence_profile(j, {0.3, 0.8, 1.4, 2.2}, {.size = 10, .seed = 3});
  for (std::size_t i = 0; i < q.estimates.size(); ++i) {
    CHECK(std::isfinite(q.estimates[i]));
    if (i > 0) CHECK(q.estimates[i] <= q.estimates[i - 1] * (1 + 1e-12));
  }
  CHECK(angle_dependence_profile(n, {1.0}, {.size = 0}).estimates.empty());
}

TEST_CASE("phi_m approximation") {
  Vector x(2);
  x << Complex(1, 2), -0.5;
  const auto r = phi_approximation_check(Matrix::Identity(2, 2), SpaceModel::euclidean(2), x, {1, 2, 5});
  for (std::size_t i = 0; i < r.m.size(); ++i) {
    const double m = r.m[i];
    CHECK(r.errors[i] == doctest::Approx(std::abs(1 - m * m / ((m + 1) * (m + 1))) * x.norm()).epsilon(1e-12));
  }
  const auto q = phi_approximation_check(diag({1, 2, 0.5}), SpaceModel::euclidean(3), std::nullopt, {8, 16, 32, 64, 128});
  for (std::size_t i = 0; i < q.m.size(); ++i) CHECK(std::abs(q.errors[i] - q.predicted[i]) <= 1e-9 * q.predicted[i]);
  CHECK(q.fitted_exponent == doctest::Approx(1.0).epsilon(0.1));
  Vector k(2);
  k << 1.0, 0.0;
  CHECK_THROWS_AS(phi_approximation_check(diag({0, 1}), SpaceModel::euclidean(2), k, {1}), PreconditionViolation);
}

TEST_CASE("integral identity") {
  CHECK(integral_identity_check(scalar(1), 1, 1e-8, 1e3, 2000).defect < 1e-6);
  CHECK(integral_identity_check(diag({1, 2}), 2).defect <= 1e-6);
  CHECK_THROWS_AS(integral_identity_check(diag({std::polar(1.0, kPi / 1.9)}), 1), PreconditionViolation);
}
