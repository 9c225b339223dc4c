#include "hadamard/grid.hpp"

#include <cmath>

#include "hadamard/errors.hpp"

namespace hadamard {

std::vector<double> geometric_grid(double lo, double hi, int per_decade) {
  if (!(lo > 0.0) || !(hi >= lo) || per_decade < 1)
    throw DomainError("geometric grid needs 0 < lo <= hi");
  if (hi == lo) return {lo};
  const double decades = std::log10(hi / lo);
  const int n = std::max(2, static_cast<int>(std::ceil(decades * per_decade)) + 1);
  std::vector<double> out(n);
  const double step = std::log(hi / lo) / (n - 1);
  for (int i = 0; i < n; ++i) out[i] = lo * std::exp(step * i);
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> linear_grid(double lo, double hi, int n) {
  if (n < 2 || !(hi >= lo)) throw DomainError("linear grid needs n >= 2 and lo <= hi");
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
  out.back() = hi;
  return out;
}

}  // namespace hadamard
