#include "hfc/unit_decomposition.hpp"

#include <algorithm>
#include <cmath>

namespace hfc {

namespace {

Complex half_power(Complex w) { return std::sqrt(w); }

Complex dyadic_psi(Complex w) { return half_power(w) / (1.0 + w); }

}  // namespace

Complex dyadic_normaliser(Complex z) {
  const int m = static_cast<int>(std::floor(std::log2(std::abs(z))));
  Complex acc = 0.0;
  for (int j = -m - 50; j <= -m + 50; ++j) {
    const Complex p = dyadic_psi(std::ldexp(1.0, j) * z);
    acc += p * p * p;
  }
  return acc;
}

UnitTriple dyadic_unit_surrogate(int N, double mu) {
  if (N < 2 || N % 2 != 0) throw InvalidArgument("surrogate needs an even N >= 2");
  if (!(mu > 0.0 && mu < kPi / 2)) throw InvalidArgument("surrogate needs mu in (0, pi/2)");
  // H(2z) = H(z): one octave on each ray covers the closed sector.
  double h_min = INFINITY;
  for (int a = -8; a <= 8; ++a) {
    const double phi = mu * a / 8.0;
    for (int i = 0; i < 64; ++i)
      h_min = std::min(h_min, std::abs(dyadic_normaliser(std::polar(std::pow(2.0, i / 64.0), phi))));
  }
  if (!(h_min > 1e-8)) throw DomainViolation("dyadic normaliser vanishes on the sector");

  UnitTriple t;
  t.N = N;
  auto psi = [N](int i, Complex z) { return dyadic_psi(std::ldexp(1.0, i - N / 2) * z); };
  t.psi = psi;
  t.psi_tilde = psi;
  t.delta = [psi](int i, Complex z) { return psi(i, z) / dyadic_normaliser(z); };
  return t;
}

double ray_integral(const std::function<Complex(Complex)>& g, double nu, double r_min,
                    double r_max, int per_decade) {
  const double u0 = std::log(r_min), u1 = std::log(r_max);
  const int n = std::max(1, static_cast<int>(std::ceil((u1 - u0) / std::log(10.0) * per_decade)));
  const double h = (u1 - u0) / n;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = std::exp(u0 + (i + 0.5) * h);
    acc += h * (std::abs(g(std::polar(r, nu))) + std::abs(g(std::polar(r, -nu))));
  }
  return acc;
}

UnitDecompositionReport unit_decomposition_check(const UnitTriple& triple, double mu, double nu,
                                                 const UnitDecompositionGrid& grid) {
  if (triple.N < 1) throw InvalidArgument("empty candidate triple");
  if (!(nu > 0.0 && nu < mu)) throw AngleOrderViolation("unit decomposition needs 0 < nu < mu");
  UnitDecompositionReport rep;
  const double u0 = std::log2(grid.r_min), u1 = std::log2(grid.r_max);
  const int steps = std::max(1, static_cast<int>(std::ceil((u1 - u0) * grid.per_octave)));
  for (int a = -grid.rays + 1; a < grid.rays; ++a) {
    // the open sector: boundary rays pulled in by a hair
    const double phi = mu * (1.0 - 1e-12) * a / (grid.rays - 1);
    for (int i = 0; i <= steps; ++i) {
      const Complex z = std::polar(std::exp2(u0 + (u1 - u0) * i / steps), phi);
      double s1 = 0.0, s2 = 0.0;
      Complex unit = 0.0;
      for (int k = 1; k <= triple.N; ++k) {
        const Complex p = triple.psi(k, z), q = triple.psi_tilde(k, z), dl = triple.delta(k, z);
        s1 += std::abs(p);
        s2 += std::abs(q);
        rep.delta_sup = std::max(rep.delta_sup, std::abs(dl));
        unit += dl * p * q;
      }
      rep.sum_psi = std::max(rep.sum_psi, s1);
      rep.sum_psi_tilde = std::max(rep.sum_psi_tilde, s2);
      rep.defect = std::max(rep.defect, std::abs(1.0 - unit));
      ++rep.points;
    }
  }
  rep.C = std::max({rep.sum_psi, rep.sum_psi_tilde, rep.delta_sup});
  for (int k = 1; k <= triple.N; ++k) {
    const double v = ray_integral([&](Complex z) { return triple.delta(k, z); }, nu,
                                  grid.integral_r_min, grid.integral_r_max,
                                  grid.integral_per_decade);
    rep.ray_integrals.push_back(v);
    rep.K = std::max(rep.K, v);
  }
  return rep;
}

}  // namespace hfc
