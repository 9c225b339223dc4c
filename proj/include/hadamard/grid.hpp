#pragma once

#include <vector>

namespace hadamard {

inline constexpr int kPointsPerDecade = 64;

// Geometric grid on [lo, hi] with both endpoints included.
std::vector<double> geometric_grid(double lo, double hi, int per_decade = kPointsPerDecade);

std::vector<double> linear_grid(double lo, double hi, int n);

}  // namespace hadamard
