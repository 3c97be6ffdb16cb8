#include "curvesgd/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace curvesgd {

LogSubstitutedGrid log_substituted_grid(double t, double shift, std::size_t subintervals) {
  if (!(t >= 0.0) || std::isinf(t)) throw std::invalid_argument("quadrature: t must be finite and nonnegative");
  if (!(shift > 0.0)) throw std::invalid_argument("quadrature: shift must be positive");
  if (subintervals == 0) throw std::invalid_argument("quadrature: need at least one subinterval");
  LogSubstitutedGrid g;
  g.du = std::log1p(t / shift) / static_cast<double>(subintervals);
  g.x.resize(subintervals + 1);
  g.jacobian.resize(subintervals + 1);
  for (std::size_t k = 0; k <= subintervals; ++k) {
    const double u = g.du * static_cast<double>(k);
    g.x[k] = shift * std::expm1(u);
    g.jacobian[k] = shift * std::exp(u);
  }
  g.x.back() = t;
  return g;
}

std::vector<double> cumulative_trapezoid(const LogSubstitutedGrid& grid, std::span<const double> f) {
  if (f.size() != grid.x.size()) throw std::invalid_argument("cumulative_trapezoid: size mismatch");
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t k = 1; k < f.size(); ++k)
    out[k] = out[k - 1] + 0.5 * grid.du * (f[k] * grid.jacobian[k] + f[k - 1] * grid.jacobian[k - 1]);
  return out;
}

double integrate(const std::function<double(double)>& f, double t, double shift, const QuadratureOptions& options) {
  if (t == 0.0) return 0.0;
  std::size_t n = std::max<std::size_t>(options.initial_subintervals, 1);
  double previous = std::nan("");
  while (n <= options.max_subintervals) {
    const auto grid = log_substituted_grid(t, shift, n);
    std::vector<double> fx(grid.x.size());
    for (std::size_t k = 0; k < fx.size(); ++k) fx[k] = f(grid.x[k]);
    const double estimate = cumulative_trapezoid(grid, fx).back();
    if (!std::isfinite(estimate)) throw QuadratureError("quadrature: integrand is not finite");
    if (std::abs(estimate - previous) <= options.abs_tolerance) return estimate;
    previous = estimate;
    n *= 2;
  }
  throw QuadratureError("quadrature: no convergence within " + std::to_string(options.max_subintervals) +
                        " subintervals");
}

}  // namespace curvesgd
