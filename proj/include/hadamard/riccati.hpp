#pragma once

#include <functional>
#include <vector>

namespace hadamard::ode {

// y' = p(s) + q(s) y - y^2
struct RiccatiCoefficients {
  double p;
  double q;
};
using CoefficientFn = std::function<RiccatiCoefficients(double)>;

struct RiccatiOptions {
  double rtol = 1e-8;
  double atol = 1e-12;
  double max_step_rel = 0.1;  // max step is max_step_rel * max(1, |s|)
  double first_step = 1e-3;
  double min_step = 1e-13;
  std::size_t max_steps = 2'000'000;
  std::vector<double> breakpoints;  // steps land exactly on these
  bool keep_positive = true;        // reject steps whose stages leave y > 0
};

struct RiccatiNode {
  double s;
  double y;
  double integral;  // integral of y from the start
};

// Accepted steps of a 3-stage Radau IIA integration, with dense output obtained
// by re-stepping from the nearest node.
class RiccatiTrajectory {
 public:
  RiccatiTrajectory(CoefficientFn coeff, std::vector<RiccatiNode> nodes, bool keep_positive);

  struct Value {
    double y;
    double integral;
  };
  Value at(double s) const;

  const std::vector<RiccatiNode>& nodes() const { return nodes_; }
  double s_begin() const { return nodes_.front().s; }
  double s_end() const { return nodes_.back().s; }

 private:
  CoefficientFn coeff_;
  std::vector<RiccatiNode> nodes_;
  bool keep_positive_;
};

RiccatiTrajectory integrate_riccati(CoefficientFn coeff, double s0, double y0, double s1,
                                    const RiccatiOptions& opts);

}  // namespace hadamard::ode
