#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "hfc/sector_function.hpp"
#include "hfc/unit_decomposition.hpp"

using namespace hfc;

TEST_CASE("evaluation") {
  CHECK(std::abs(phi_m(1)({1.0}) - 0.25) < 1e-15);
  CHECK(std::abs(phi_m(2)({1.0}) - 4.0 / 9) < 1e-15);
  CHECK(std::abs(phi_m(10)({1.0}) - 100.0 / 121) < 1e-15);
  CHECK(std::abs(SectorFunction::exp_neg(1, 0)({1.0}) - std::exp(-1.0)) < 1e-15);
  const SectorFunction g = power_exp(0.5);
  CHECK(std::abs(tensor(g, g)({1.0, 1.0}) - std::exp(-2.0)) < 1e-15);
  CHECK(std::abs(phi_m_tensor(1, 2)({1.0, 1.0}) - 1.0 / 16) < 1e-15);
  CHECK(std::abs(phi_m_tensor(3, 1)({0.7}) - phi_m(3)({0.7})) < 1e-15);
  CHECK_THROWS_AS(phi_m(1, 1.0)({Complex(-1.0, 0.1)}), DomainViolation);
}

TEST_CASE("sigma_k") {
  const SectorFunction s = sigma_k(0, 2.0, kPi / 2, kPi / 4);
  const Complex v = s({1.0});
  CHECK(std::abs(v - 1.0 / (std::polar(1.0, kPi / 4) - 1.0)) < 1e-14);
  CHECK(std::abs(v) == doctest::Approx(1.0 / (2 * std::sin(kPi / 8))).epsilon(1e-12));
  // |z|^{1/4} behaviour at 0
  const double a = std::abs(s({1e-8})), b = std::abs(s({1e-12}));
  CHECK(a / b == doctest::Approx(std::pow(1e4, 0.25)).epsilon(1e-3));
}

TEST_CASE("sigma_k band across scales") {
  const double rho = 2.0;
  double lo = INFINITY, hi = 0.0;
  for (int k = -8; k <= 8; ++k) {
    const SectorFunction s = sigma_k(k, rho, kPi / 2, kPi / 4);
    for (int n = -8; n <= 8; ++n)
      for (double f : {-0.95, 0.0, 0.95}) {
        const double v = std::abs(s({std::polar(std::pow(rho, n), f * kPi / 4)})) * std::pow(rho, std::abs(k - n) / 4.0);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  }
  CHECK(lo > 0.0);
  CHECK(hi / lo <= 50.0);
}

TEST_CASE("decay certificates") {
  const SectorFunction p = phi_m(1);
  // |z|/|1+z|^2 <= 2 |z|/(1+|z|)^2 on the right half plane, with equality at z = i
  CHECK(decay_check(p, DecayCertificate{1, {1.0}, 2.01}).pass);
  CHECK_FALSE(decay_check(p, DecayCertificate{1, {1.0}, 1.5}).pass);
  CHECK_FALSE(decay_check(SectorFunction::constant(1, 1.0), DecayCertificate{1, {0.5}, 10.0}).pass);
  const SectorFunction g = power_exp(0.5, kPi / 4);
  CHECK(decay_check(g, *g.certificate()).pass);
  const DecayCertificate c = certify_by_sampling(g, 1, {0.5});
  CHECK(decay_check(g, c).pass);
  CHECK(c.bound(std::vector<Complex>{1.0}) >= std::abs(g({1.0})));
}

TEST_CASE("sup norms") {
  const Complex c(0.6, -0.8);
  CHECK(sup_norm_estimate(SectorFunction::constant(1, c), SectorDomain::uniform(1, 1.0)).value ==
        doctest::Approx(1.0).epsilon(1e-12));
  // |it| / |1 + it|^2 = t / (1 + t^2) peaks at t = 1
  CHECK(sup_norm_estimate(phi_m(1), SectorDomain::uniform(1, kPi / 2)).value == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(sup_norm_estimate(SectorFunction::exp_neg(1, 0), SectorDomain::uniform(1, 1.2)).value ==
        doctest::Approx(1.0).epsilon(1e-5));
  // uniform in m on the tensor
  double top = 0.0;
  for (int m : {1, 4, 16, 64}) top = std::max(top, sup_norm_estimate(phi_m_tensor(m, 2), SectorDomain::uniform(2, 1.2)).value);
  CHECK(top < 10.0);
}

TEST_CASE("conjugate reflection") {
  const SectorFunction r = phi_m(2) + phi_m(1).scaled(3.0);
  const SectorFunction iz = SectorFunction::coordinate_power(1, 0, 1.0).scaled(kI);
  const SectorFunction rr = conjugate_reflect(conjugate_reflect(iz * r));
  for (Complex z : {Complex(1, 0.3), Complex(0.2, -0.1), Complex(5, 2)}) {
    CHECK(std::abs(conjugate_reflect(r)({z}) - r({z})) < 1e-14);
    CHECK(std::abs(conjugate_reflect(iz)({z}) + iz({z})) < 1e-14);
    CHECK(std::abs(rr({z}) - (iz * r)({z})) < 1e-14);
  }
}

TEST_CASE("holomorphy probe") {
  const SectorFunction f = tensor(power_exp(0.5), phi_m(3)) + tensor(phi_m(1), SectorFunction::shift_recip(1, 0, 2.0));
  const double h = 1e-5;
  for (Complex z1 : {Complex(1, 0.2), Complex(0.3, -0.1)})
    for (Complex z2 : {Complex(2, 1), Complex(0.5, 0.0)}) {
      // Cauchy-Riemann in each variable: df/dx = -i df/dy
      auto at = [&](Complex a, Complex b) { return f({a, b}); };
      const Complex dx = (at(z1 + h, z2) - at(z1 - h, z2)) / (2 * h);
      const Complex dy = (at(z1 + kI * h, z2) - at(z1 - kI * h, z2)) / (2 * h);
      CHECK(std::abs(dx + kI * dy) < 1e-6);
      const Complex ex = (at(z1, z2 + h) - at(z1, z2 - h)) / (2 * h);
      const Complex ey = (at(z1, z2 + kI * h) - at(z1, z2 - kI * h)) / (2 * h);
      CHECK(std::abs(ex + kI * ey) < 1e-6);
    }
}

TEST_CASE("H01 forms") {
  H01Form f(2, 0.5);
  f.add_component(1, tensor(phi_m(1), SectorFunction::constant(1, 1.0)).with_certificate(DecayCertificate{1, {1, 0}, 1}));
  f.add_component(3, phi_m_tensor(1, 2));
  const std::vector<Complex> z{1.0, 1.0};
  CHECK(std::abs(f.eval(z) - (0.5 + 0.25 + 1.0 / 16)) < 1e-14);
  CHECK(std::abs(f.total()(std::span<const Complex>(z)) - f.eval(z)) < 1e-14);
  const std::vector<Complex> z0{1.0, 1e-13};
  CHECK(std::abs(f.eval(z0) - 0.75) < 1e-12);
  CHECK(std::abs(f.product(f).eval(z) - f.eval(z) * f.eval(z)) < 1e-14);
}

TEST_CASE("unit decomposition surrogate") {
  const UnitDecompositionReport r = unit_decomposition_check(dyadic_unit_surrogate(64, kPi / 4), kPi / 4, kPi / 8);
  CHECK(r.defect < 1e-3);
  CHECK(r.sum_psi <= r.C);
  CHECK(r.sum_psi_tilde <= r.C);
  CHECK(r.K < INFINITY);
  const double first = r.ray_integrals.front();
  for (double v : r.ray_integrals) CHECK(v == doctest::Approx(first).epsilon(0.05));

  // a single Phi_1 pair is not a unit decomposition
  UnitTriple single{1, [](int, Complex) { return Complex(1.0); },
                    [](int, Complex z) { return z / ((1.0 + z) * (1.0 + z)); },
                    [](int, Complex z) { return z / ((1.0 + z) * (1.0 + z)); }};
  CHECK(unit_decomposition_check(single, kPi / 4, kPi / 8).defect > 0.9);
}
