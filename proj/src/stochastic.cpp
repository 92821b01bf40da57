#include "hfc/stochastic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <random>

#include "hfc/detail/maximize.hpp"

namespace hfc {

namespace {

/// Two-sided 95% Student quantile (Cornish-Fisher expansion in 1/nu).
double t_quantile_975(int nu) {
  const double z = 1.959963984540054;
  const double v = nu;
  const double z3 = z * z * z, z5 = z3 * z * z, z7 = z5 * z * z;
  return z + (z3 + z) / (4 * v) + (5 * z5 + 16 * z3 + 3 * z) / (96 * v * v) +
         (3 * z7 + 19 * z5 + 17 * z3 - 15 * z) / (384 * v * v * v);
}

std::mt19937_64 batch_stream(std::uint64_t seed, int batch) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(batch), 0x9e3779b9u};
  return std::mt19937_64(seq);
}

/// Batch means over squared norms; `draw` returns one squared norm.
AverageEstimate monte_carlo(const MonteCarloOptions& mc, const std::string& mode,
                            const std::function<double(std::mt19937_64&)>& draw) {
  if (mc.samples < 2 || mc.batches < 2 || mc.samples < mc.batches)
    throw InvalidArgument("Monte Carlo needs samples >= batches >= 2");
  const int per = mc.samples / mc.batches;
  std::vector<double> means(mc.batches, 0.0);
  for (int b = 0; b < mc.batches; ++b) {
    auto rng = batch_stream(mc.seed, b);
    double acc = 0.0;
    for (int i = 0; i < per; ++i) acc += draw(rng);
    means[b] = acc / per;
  }
  double mean = 0.0;
  for (double m : means) mean += m;
  mean /= mc.batches;
  double var = 0.0;
  for (double m : means) var += (m - mean) * (m - mean);
  var /= (mc.batches - 1);
  const double half = t_quantile_975(mc.batches - 1) * std::sqrt(var / mc.batches);
  AverageEstimate est;
  est.estimate = std::sqrt(std::max(mean, 0.0));
  est.ci_low = std::sqrt(std::max(mean - half, 0.0));
  est.ci_high = std::sqrt(std::max(mean + half, 0.0));
  est.mode = mode;
  est.seed = mc.seed;
  est.samples = per * mc.batches;
  return est;
}

AverageEstimate exact(double value, const std::string& mode) {
  AverageEstimate est;
  est.estimate = est.ci_low = est.ci_high = value;
  est.mode = mode;
  return est;
}

void check_family(const VectorFamily& f) {
  for (const auto& x : f.vectors)
    if (x.size() != f.space.vector_dim())
      throw InvalidArgument("family vectors must match the model dimension");
}

Vector complex_gaussian(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = Complex(g(rng), g(rng));
  return v;
}

/// Hermitian PSD square root.
Matrix psd_sqrt(const Matrix& K) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (K + K.adjoint()));
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal();
}

Matrix as_matrix(const std::vector<Vector>& xs, Eigen::Index n) {
  Matrix X(n, static_cast<Eigen::Index>(xs.size()));
  for (std::size_t j = 0; j < xs.size(); ++j) X.col(static_cast<Eigen::Index>(j)) = xs[j];
  return X;
}

}  // namespace

AverageEstimate rademacher_average(const VectorFamily& family, AverageMode mode,
                                   const MonteCarloOptions& mc) {
  check_family(family);
  const int J = static_cast<int>(family.vectors.size());
  const auto n = family.space.vector_dim();
  if (J == 0) return exact(0.0, "exact");
  if (mode == AverageMode::exact && J > 20)
    throw InvalidArgument("exact Rademacher averages need at most 20 vectors");
  if (mode == AverageMode::exact || (mode == AverageMode::automatic && J <= 20)) {
    if (family.space.is_hilbert()) {
      double s = 0.0;
      for (const auto& x : family.vectors) s += x.squaredNorm();
      return exact(std::sqrt(s), "exact");
    }
    // Gray-code walk over sign patterns; the pattern and its negation have
    // the same norm, so half of them suffice.
    Vector sum = Vector::Zero(n);
    for (const auto& x : family.vectors) sum += x;
    std::vector<int> sign(J, 1);
    const std::uint64_t count = std::uint64_t{1} << (J - 1);
    double acc = 0.0;
    for (std::uint64_t i = 0; i < count; ++i) {
      const double v = family.space.norm(sum);
      acc += v * v;
      if (i + 1 == count) break;
      const int bit = std::countr_zero(i + 1);
      sum -= 2.0 * sign[bit] * family.vectors[bit];
      sign[bit] = -sign[bit];
    }
    return exact(std::sqrt(acc / static_cast<double>(count)), "exact");
  }
  const Matrix X = as_matrix(family.vectors, n);
  return monte_carlo(mc, "montecarlo", [&](std::mt19937_64& rng) {
    Vector eps(J);
    for (int j = 0; j < J; ++j) eps[j] = (rng() & 1) ? 1.0 : -1.0;
    const double v = family.space.norm(X * eps);
    return v * v;
  });
}

AverageEstimate gaussian_average_covariance(const Matrix& K, const SpaceModel& space,
                                            AverageMode mode, const MonteCarloOptions& mc) {
  if (K.rows() != space.vector_dim() || K.cols() != K.rows())
    throw InvalidArgument("covariance must match the model dimension");
  if (mode == AverageMode::exact && !space.is_hilbert())
    throw InvalidArgument("exact Gaussian averages need a Hilbert model");
  if (space.is_hilbert() && mode != AverageMode::montecarlo)
    return exact(std::sqrt(std::max(K.trace().real(), 0.0)), "exact-hilbert");
  const Matrix L = psd_sqrt(K);
  return monte_carlo(mc, "montecarlo", [&](std::mt19937_64& rng) {
    const double v = space.norm(L * complex_gaussian(rng, L.cols()));
    return v * v;
  });
}

AverageEstimate gaussian_average(const VectorFamily& family, AverageMode mode,
                                 const MonteCarloOptions& mc) {
  check_family(family);
  const auto n = family.space.vector_dim();
  if (family.vectors.empty()) return exact(0.0, "exact");
  const Matrix X = as_matrix(family.vectors, n);
  if (mode == AverageMode::exact && !family.space.is_hilbert())
    throw InvalidArgument("exact Gaussian averages need a Hilbert model");
  if (family.space.is_hilbert() && mode != AverageMode::montecarlo)
    return exact(X.norm(), "exact-hilbert");
  return monte_carlo(mc, "montecarlo", [&](std::mt19937_64& rng) {
    const double v = family.space.norm(X * complex_gaussian(rng, X.cols()));
    return v * v;
  });
}

RBoundEstimate r_bound_estimate(const std::vector<Matrix>& operators, const SpaceModel& space,
                                int probe_budget, std::uint64_t seed) {
  RBoundEstimate best;
  if (operators.empty()) return best;
  const auto n = space.vector_dim();
  for (const auto& T : operators)
    if (T.rows() != n || T.cols() != n) throw InvalidArgument("operator dimension mismatch");

  auto ratio = [&](const std::vector<int>& idx, const std::vector<Vector>& xs) {
    VectorFamily in{space, xs}, out{space, {}};
    for (std::size_t j = 0; j < idx.size(); ++j) out.vectors.push_back(operators[idx[j]] * xs[j]);
    const double den = rademacher_average(in, AverageMode::exact).estimate;
    return den > 0.0 ? rademacher_average(out, AverageMode::exact).estimate / den : 0.0;
  };
  auto consider = [&](std::vector<int> idx, std::vector<Vector> xs) {
    const double r = ratio(idx, xs);
    if (r > best.estimate || best.indices.empty()) {
      best.estimate = std::max(best.estimate, r);
      best.indices = std::move(idx);
      best.vectors = std::move(xs);
    }
  };

  NormOptions nopt;
  nopt.seed = seed;
  for (int j = 0; j < static_cast<int>(operators.size()); ++j) {
    const NormEstimate ne = operator_norm(operators[j], space, nopt);
    consider({j}, {ne.witness});
  }
  std::mt19937_64 rng(seed ^ 0xa5a5a5a5ULL);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(operators.size()) - 1);
  std::uniform_int_distribution<int> size(2, 8);
  for (int p = 0; p < probe_budget; ++p) {
    const int J = size(rng);
    std::vector<int> idx(J);
    std::vector<Vector> xs(J);
    for (int j = 0; j < J; ++j) {
      idx[j] = pick(rng);
      xs[j] = complex_gaussian(rng, n);
    }
    consider(std::move(idx), std::move(xs));
  }
  return best;
}

RSectorialityProfile r_sectoriality_profile(const Matrix& A, const SpaceModel& space,
                                            std::vector<double> angles,
                                            const RSectorialityOptions& options) {
  check_matrix(A);
  std::sort(angles.begin(), angles.end());
  RSectorialityProfile prof;
  std::vector<Matrix> pool;
  std::vector<std::vector<Matrix>> per_angle(angles.size());
  NormOptions nopt;
  nopt.seed = options.seed;
  nopt.restarts = 8;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    const double theta = angles[i];
    if (!(theta > 0.0 && theta < kPi)) throw InvalidArgument("angles must lie in (0, pi)");
    for (double sign : {1.0, -1.0}) {
      const double a = sign * theta;
      auto g = [&](double r) {
        const Complex z = std::polar(r, a);
        return operator_norm(z * resolvent(A, z), space, nopt).value;
      };
      const auto best = detail::maximize_log(g, options.r_min, options.r_max,
                                             options.per_decade, 4);
      const Complex zb = std::polar(best.r, a);
      per_angle[i].push_back(zb * resolvent(A, zb));
      const double u0 = std::log10(options.r_min), u1 = std::log10(options.r_max);
      const int steps = std::max(1, static_cast<int>(std::ceil((u1 - u0) * options.per_decade)));
      for (int s = 0; s <= steps; ++s) {
        const Complex z = std::polar(std::pow(10.0, u0 + (u1 - u0) * s / steps), a);
        per_angle[i].push_back(z * resolvent(A, z));
      }
    }
  }
  // boundary points of larger sectors lie outside the smaller ones too
  for (std::size_t i = angles.size(); i-- > 0;) {
    pool.insert(pool.end(), per_angle[i].begin(), per_angle[i].end());
    const RBoundEstimate est = r_bound_estimate(pool, space, options.probe_budget, options.seed);
    prof.constants.insert(prof.constants.begin(), est.estimate);
    prof.family_sizes.insert(prof.family_sizes.begin(), static_cast<int>(pool.size()));
  }
  prof.angles = angles;
  return prof;
}

GammaElement make_gamma_element(const SpaceModel& space, const Matrix& values,
                                const std::vector<double>& weights) {
  if (values.rows() != space.vector_dim() || values.cols() != static_cast<Eigen::Index>(weights.size()))
    throw InvalidArgument("gamma element shape mismatch");
  GammaElement u{space, values};
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (!(weights[j] >= 0.0)) throw InvalidArgument("grid weights must be nonnegative");
    u.columns.col(static_cast<Eigen::Index>(j)) *= std::sqrt(weights[j]);
  }
  return u;
}

AverageEstimate gamma_norm(const GammaElement& u, AverageMode mode, const MonteCarloOptions& mc) {
  if (u.columns.cols() == 0) return exact(0.0, "exact");
  return gaussian_average_covariance(u.columns * u.columns.adjoint(), u.space, mode, mc);
}

GammaElement tensor_extend(const Matrix& S, const GammaElement& u) {
  if (S.rows() != u.columns.cols() || S.cols() != u.columns.cols())
    throw InvalidArgument("grid operator dimension mismatch");
  return GammaElement{u.space, u.columns * S.transpose()};
}

IteratedGammaReport iterated_gamma_compare(const std::vector<Matrix>& tensor,
                                           const SpaceModel& space, AverageMode mode,
                                           const MonteCarloOptions& mc) {
  IteratedGammaReport rep;
  const auto n = space.vector_dim();
  if (tensor.empty()) {
    rep.iterated = rep.flat = exact(0.0, "exact");
    return rep;
  }
  const auto m2 = tensor[0].cols();
  Matrix K = Matrix::Zero(n, n);
  for (const auto& X : tensor) {
    if (X.rows() != n || X.cols() != m2) throw InvalidArgument("tensor slices must share a shape");
    K += X * X.adjoint();
  }
  rep.flat = gaussian_average_covariance(K, space, mode, mc);

  const bool inner_exact = space.is_hilbert() && mode != AverageMode::montecarlo;
  if (inner_exact) {
    rep.iterated = rep.flat;
  } else {
    MonteCarloOptions inner = mc;
    inner.samples = std::max(mc.batches * 2, mc.samples / 16);
    rep.iterated = monte_carlo(mc, "montecarlo", [&](std::mt19937_64& rng) {
      const Vector g = complex_gaussian(rng, static_cast<Eigen::Index>(tensor.size()));
      Matrix V = Matrix::Zero(n, m2);
      for (std::size_t i = 0; i < tensor.size(); ++i) V += g[static_cast<Eigen::Index>(i)] * tensor[i];
      if (space.is_hilbert()) return V.squaredNorm();
      inner.seed = rng();
      const double v = gaussian_average_covariance(V * V.adjoint(), space, AverageMode::montecarlo, inner).estimate;
      return v * v;
    });
  }
  if (rep.flat.estimate > 0.0) {
    rep.ratio = rep.iterated.estimate / rep.flat.estimate;
    rep.ratio_low = rep.flat.ci_high > 0.0 ? rep.iterated.ci_low / rep.flat.ci_high : 0.0;
    rep.ratio_high = rep.flat.ci_low > 0.0 ? rep.iterated.ci_high / rep.flat.ci_low : INFINITY;
  }
  return rep;
}

}  // namespace hfc
