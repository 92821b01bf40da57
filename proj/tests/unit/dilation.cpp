#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "hfc/corpus.hpp"
#include "hfc/dilation.hpp"

using namespace hfc;
using namespace testing;

TEST_CASE("scalar dilation") {
  const CommutingTuple a({scalar(1)}, SpaceModel::euclidean(1));
  const DilationSystem sys = build_dilation(a, LineGrid{1, 1e-3, 20});
  CHECK(verify_factorization(sys, {1.0}) <= 1e-3);
  CHECK(verify_factorization(sys, {0.0}) <= 2e-3);
  // dense operators agree with the closed form
  const LineGrid small{1, 1e-2, 5};
  CHECK(std::abs(dense_dilated_semigroup(a, small, 1.0)(0, 0) - dilated_semigroup(build_dilation(a, small), {1.0})(0, 0)) <
        1e-12);
  // O(h): halving h halves the defect
  const double d1 = verify_factorization(build_dilation(a, LineGrid{1, 2e-3, 20}), {1.0});
  const double d2 = verify_factorization(build_dilation(a, LineGrid{1, 1e-3, 20}), {1.0});
  CHECK(d2 / d1 == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("separable defect for a diagonal pair") {
  const CommutingTuple t({diag({1, 2}), diag({0.5, 3})}, SpaceModel::euclidean(2));
  const LineGrid g{2, 1e-2, 20};
  const DilationSystem sys = build_dilation(t, g);
  const std::vector<double> times{0.5, 1.0};
  const Matrix D = dilated_semigroup(sys, times);
  // per coordinate: 2 h lambda e^{-t lambda} sum_m e^{-2 m h lambda}
  auto scalar_part = [&](double l, double t) {
    const double q = std::exp(-2 * g.h * l);
    const int M = static_cast<int>(std::llround((g.S - t) / g.h));
    return 2 * g.h * l * std::exp(-t * l) * (1 - std::pow(q, M + 1)) / (1 - q);
  };
  CHECK(std::abs(D(0, 0) - scalar_part(1, 0.5) * scalar_part(0.5, 1.0)) < 1e-12);
  CHECK(std::abs(D(1, 1) - scalar_part(2, 0.5) * scalar_part(3, 1.0)) < 1e-12);
}

TEST_CASE("normal tuples and refinement") {
  for (int d = 1; d <= 2; ++d) {
    const CommutingTuple t = random_tuple({.d = d, .n = 3, .max_angle = 0.8}, 50 + d);
    const std::vector<double> times(d, 0.5);
    const auto curve = dilation_refinement_curve(t, LineGrid{d, 1e-3, 20}, times, 2);
    CHECK(curve[0].defect <= 5e-3);
    CHECK(curve[1].defect < curve[0].defect);
    CHECK(curve[2].defect < curve[1].defect);
  }
}

TEST_CASE("transfer inequality") {
  const CommutingTuple t = random_tuple({.d = 1, .n = 3, .normal = false}, 4);
  const DilationSystem sys = build_dilation(t, LineGrid{1, 1e-2, 20});
  const TransferReport one = transfer_fc(H01Form(1, 1.0), t, sys);
  CHECK(one.norm_fA == doctest::Approx(1.0));
  CHECK(one.holds);
  H01Form f(1, 0.0);
  f.add_component(1, phi_m(1, 2.0));
  CHECK(transfer_fc(f, t, sys).holds);
}

TEST_CASE("group power bounds") {
  const GroupTuple rot{{diag({std::polar(1.0, 0.4), std::polar(1.0, -1.0)})}, SpaceModel::euclidean(2)};
  CHECK(group_power_bound(rot, 10) == doctest::Approx(1.0).epsilon(1e-12));
  const GroupTuple two{{diag({2.0})}, SpaceModel::euclidean(1)};
  CHECK(group_power_bound(two, 5) == doctest::Approx(32.0).epsilon(1e-12));
  CHECK(shift_power_bound() == 1.0);
}

TEST_CASE("Fourier multipliers") {
  SampledKernel delta{1, 2, 0.1, std::vector<Complex>(5, 0.0)};
  delta.values[2] = 1.0;
  const auto r = multiplier_norm(delta, 32, MultiplierMode::circulant);
  CHECK(r.operator_norm == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(r.symbol_sup == doctest::Approx(0.1).epsilon(1e-12));
  for (const auto& k : kernel_family(1, 6, 6, 3)) {
    const auto c = multiplier_norm(k, 64, MultiplierMode::circulant);
    CHECK(std::abs(c.operator_norm - c.symbol_sup) <= 1e-10 * c.symbol_sup);
    const auto z = multiplier_norm(k, 64, MultiplierMode::zero_padded);
    CHECK(z.operator_norm <= z.symbol_sup * (1 + 1e-10));
  }
  for (const auto& k : kernel_family(2, 2, 3, 3)) {
    const auto c = multiplier_norm(k, 16, MultiplierMode::circulant);
    CHECK(std::abs(c.operator_norm - c.symbol_sup) <= 1e-10 * c.symbol_sup);
  }
  // one-sided exponential: the symbol at 0 is the Riemann sum of e^{-t}
  const double h = 0.05;
  SampledKernel e{1, 40, h, std::vector<Complex>(81, 0.0)};
  for (int m = 0; m <= 40; ++m) e.values[40 + m] = std::exp(-m * h);
  const auto c = multiplier_norm(e, 128, MultiplierMode::circulant);
  const double riemann = h * (1 - std::exp(-41 * h)) / (1 - std::exp(-h));
  CHECK(c.symbol_sup == doctest::Approx(riemann).epsilon(1e-12));
  CHECK(c.operator_norm == doctest::Approx(riemann).epsilon(1e-10));
}

TEST_CASE("Laplace transform and Yosida regularisation") {
  const double h = 1e-3;
  std::vector<Complex> beta;
  for (int m = 0; m <= 20000; ++m) beta.push_back(std::exp(-m * h));
  const Complex one = 1.0, zero = 0.0;
  CHECK(std::abs(laplace_transform(beta, 1, h, std::span<const Complex>(&one, 1)) - 0.5) < 1e-3);
  double mass = 0.0;
  for (Complex b : beta) mass += h * b.real();
  CHECK(std::abs(laplace_transform(beta, 1, h, std::span<const Complex>(&zero, 1)) - mass) < 1e-12);
  // product kernel on a 2-D grid
  const int M = 50;
  const double h2 = 0.1;
  std::vector<Complex> b1, b2, prod;
  for (int i = 0; i <= M; ++i) b1.push_back(std::exp(-i * h2)), b2.push_back(1.0 / (1.0 + i * h2));
  for (int i = 0; i <= M; ++i)
    for (int j = 0; j <= M; ++j) prod.push_back(b1[i] * b2[j]);
  const std::vector<Complex> z{Complex(0.5, 1.0), Complex(1.0, -2.0)};
  const Complex l1 = laplace_transform(b1, 1, h2, std::span<const Complex>(&z[0], 1));
  const Complex l2 = laplace_transform(b2, 1, h2, std::span<const Complex>(&z[1], 1));
  CHECK(std::abs(laplace_transform(prod, 2, h2, z) - l1 * l2) < 1e-10 * std::abs(l1 * l2));

  CHECK(yosida_regularize(scalar(1), 0.1)(0, 0).real() == doctest::Approx(0.1 + 1 / 1.1).epsilon(1e-14));
  CHECK(rel(yosida_regularize(Matrix::Zero(2, 2), 0.3), 0.3 * Matrix::Identity(2, 2)) < 1e-15);
  std::vector<double> eps, err;
  for (double e : {1e-2, 5e-3, 2.5e-3, 1.25e-3}) {
    eps.push_back(std::log(e));
    err.push_back(std::log((yosida_regularize(diag({1, 2}), e) - diag({1, 2})).norm()));
  }
  const double slope = (err.back() - err.front()) / (eps.back() - eps.front());
  CHECK(slope == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("group and calculus constants") {
  EnsembleOptions eo;
  eo.size = 12;
  const GroupTuple shift{{cyclic_shift(9)}, SpaceModel::euclidean(9)};
  const auto s = group_calculus_equivalence_check(shift, kernel_family(1, 3, 6, 1), eo);
  CHECK(s.K_multiplier == doctest::Approx(1.0).epsilon(0.05));
  CHECK(s.K_fc == doctest::Approx(1.0).epsilon(0.05));
  const GroupTuple unitary{{diag({std::polar(1.0, -0.3), std::polar(1.0, -2.0)})}, SpaceModel::euclidean(2)};
  const auto u = group_calculus_equivalence_check(unitary, kernel_family(1, 3, 6, 1), eo);
  CHECK(u.K_multiplier == doctest::Approx(1.0).epsilon(0.05));
  CHECK(u.K_fc == doctest::Approx(1.0).epsilon(0.05));

  Matrix S = Matrix::Identity(3, 3);
  S(0, 1) = 2;
  S(1, 2) = -1;
  const Matrix U = S * diag({std::polar(1.0, -0.3), std::polar(1.0, -1.2), std::polar(1.0, 2.0)}) * S.inverse();
  Eigen::JacobiSVD<Matrix> sv(S);
  const double cond = sv.singularValues()(0) / sv.singularValues()(2);
  const auto c = group_calculus_equivalence_check(GroupTuple{{U}, SpaceModel::euclidean(3)}, kernel_family(1, 3, 6, 1), eo);
  CHECK(c.K_multiplier <= cond);
  CHECK(c.K_fc <= cond);
  CHECK(c.ratio >= 0.25);
  CHECK(c.ratio <= 4.0);
}
