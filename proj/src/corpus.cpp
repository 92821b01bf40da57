#include "hfc/corpus.hpp"

#include <cmath>
#include <random>

namespace hfc {

namespace {

Matrix gaussian_matrix(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = Complex(g(rng), g(rng));
  return G;
}

}  // namespace

CommutingTuple random_tuple(const TupleRecipe& recipe, std::uint64_t seed) {
  if (recipe.d < 1 || recipe.n < 1) throw InvalidArgument("random_tuple: d and n must be positive");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(recipe.d), static_cast<std::uint32_t>(recipe.n)};
  std::mt19937_64 rng(seq);
  const int n = recipe.n;
  Matrix S;
  if (recipe.normal) {
    S = Eigen::HouseholderQR<Matrix>(gaussian_matrix(n, rng)).householderQ();
  } else {
    S = Matrix::Identity(n, n) + 0.3 * gaussian_matrix(n, rng) / std::sqrt(double(n));
  }
  const Matrix Si = S.inverse();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double l0 = std::log(recipe.r_min), l1 = std::log(recipe.r_max);
  std::vector<Matrix> ops;
  for (int k = 0; k < recipe.d; ++k) {
    Vector lambda(n);
    for (int i = 0; i < n; ++i)
      lambda[i] = std::polar(std::exp(l0 + (l1 - l0) * u(rng)), recipe.max_angle * (2 * u(rng) - 1));
    ops.push_back(S * lambda.asDiagonal() * Si);
  }
  return CommutingTuple(std::move(ops), SpaceModel::euclidean(n), 1e-8);
}

Vector random_unit_vector(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> g(0.0, 1.0);
  Vector x(n);
  for (int i = 0; i < n; ++i) x[i] = Complex(g(rng), g(rng));
  return x / x.norm();
}

}  // namespace hfc
