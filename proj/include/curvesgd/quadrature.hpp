#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace curvesgd {

struct QuadratureOptions {
  double abs_tolerance = 1e-8;
  std::size_t max_subintervals = std::size_t{1} << 24;
  std::size_t initial_subintervals = 16;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Nodes x_k = shift * (exp(u_k) - 1) with u_k uniform on [0, log(1 + t/shift)],
/// plus the Jacobian dx/du = x + shift. Clusters nodes near 0.
struct LogSubstitutedGrid {
  std::vector<double> x;
  std::vector<double> jacobian;
  double du = 0.0;
};

LogSubstitutedGrid log_substituted_grid(double t, double shift, std::size_t subintervals);

/// Running integral of f dx over the grid (trapezoid in u); out[0] = 0.
std::vector<double> cumulative_trapezoid(const LogSubstitutedGrid& grid, std::span<const double> f);

/// Integral of f over [0, t] by composite trapezoid on log-substituted nodes,
/// doubling the subinterval count until successive estimates differ by at
/// most the absolute tolerance.
double integrate(const std::function<double(double)>& f, double t, double shift,
                 const QuadratureOptions& options = {});

}  // namespace curvesgd
