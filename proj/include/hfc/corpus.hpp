#pragma once

#include <cstdint>

#include "hfc/operator_core.hpp"

namespace hfc {

struct TupleRecipe {
  int d = 1;
  int n = 3;
  /// unitary eigenbasis when set, otherwise I + 0.3 G for Gaussian G
  bool normal = true;
  /// eigenvalue arguments are uniform in [-max_angle, max_angle]
  double max_angle = kPi / 4;
  double r_min = 0.2;
  double r_max = 5.0;
};

/// Seeded jointly diagonalizable tuple S diag(lambda_k) S^{-1} on euclidean C^n.
CommutingTuple random_tuple(const TupleRecipe& recipe, std::uint64_t seed);

/// Seeded complex vector with unit euclidean norm.
Vector random_unit_vector(int n, std::uint64_t seed);

}  // namespace hfc
