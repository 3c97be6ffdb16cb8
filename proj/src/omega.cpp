#include "curvesgd/omega.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "curvesgd/random.hpp"

namespace curvesgd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// offset-form coefficients: w(x) = tau + k (x/r)^h, k = 2/mu'
struct OffsetCoeffs {
  double h, r, k, tau;
};

OffsetCoeffs coeffs(const OmegaSpec& spec) {
  spec.validate();
  const OmegaSpec o = spec.as_offset();
  return {o.h, o.r, 2.0 / o.mu, o.tau};
}

// (x/r)^h with r = inf meaning r^h absorbed
double scaled_power(const OffsetCoeffs& c, double x) {
  return std::isinf(c.r) ? std::pow(x, c.h) : std::pow(x / c.r, c.h);
}

}  // namespace

OmegaSpec OmegaSpec::main_text(double h, double r, double mu) {
  OmegaSpec s{h, r, mu, 0.0, OmegaForm::main_text};
  s.validate();
  return s;
}

OmegaSpec OmegaSpec::offset(double h, double r, double mu, double tau) {
  OmegaSpec s{h, r, mu, tau, OmegaForm::offset};
  s.validate();
  return s;
}

void OmegaSpec::validate() const {
  if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("omega: h must be in (0, 1]");
  if (!(r > 0.0)) throw std::invalid_argument("omega: r must be positive or +inf");
  if (!(mu > 0.0) || std::isinf(mu)) throw std::invalid_argument("omega: mu must be positive and finite");
  if (!(tau >= 0.0) || std::isinf(tau)) throw std::invalid_argument("omega: tau must be nonnegative and finite");
  if (form == OmegaForm::main_text && tau != 0.0)
    throw std::invalid_argument("omega: main-text form has no offset; use the offset form");
}

OmegaSpec OmegaSpec::as_offset() const {
  if (form == OmegaForm::offset) return *this;
  return OmegaSpec{h, r, mu * h, 0.0, OmegaForm::offset};
}

double OmegaSpec::beta() const {
  validate();
  if (tau != 0.0) throw std::invalid_argument("omega: beta is defined for tau = 0 only");
  const double mu_main = form == OmegaForm::main_text ? mu : mu / h;
  const double r_pow = std::isinf(r) ? 1.0 : std::pow(r, h);
  const double tail = h == 1.0 ? 1.0 : std::pow(1.0 - h, -(1.0 - h));
  return 0.5 * mu_main * std::pow(h, -h) * tail * r_pow;
}

double omega_eval(const OmegaSpec& spec, double x) {
  if (!(x >= 0.0)) throw std::domain_error("omega_eval: x must be nonnegative");
  const OffsetCoeffs c = coeffs(spec);
  if (std::isinf(c.r) || x <= c.r) return c.tau + c.k * scaled_power(c, x);
  return c.tau + c.k + c.k * c.h * (x / c.r - 1.0);
}

double omega_derivative(const OmegaSpec& spec, double x) {
  if (!(x > 0.0)) throw std::domain_error("omega_derivative: x must be positive");
  const OffsetCoeffs c = coeffs(spec);
  if (std::isinf(c.r)) return c.k * c.h * std::pow(x, c.h - 1.0);
  if (x <= c.r) return c.k * c.h / c.r * std::pow(x / c.r, c.h - 1.0);
  return c.k * c.h / c.r;
}

double v_power_law_limit(const OmegaSpec& spec) {
  spec.validate();
  if (spec.tau != 0.0) throw std::invalid_argument("v: power law needs tau = 0");
  if (std::isinf(spec.r)) return kInf;
  return spec.r * (1.0 - spec.h) / spec.h;
}

double v_closed_form(const OmegaSpec& spec, double eta) {
  spec.validate();
  if (spec.tau != 0.0) throw std::invalid_argument("v_closed_form: tau > 0 has no closed form, use v_numeric");
  if (!(eta > 0.0) || eta > spec.r) throw std::domain_error("v_closed_form: eta must be in (0, r]");
  if (eta > v_power_law_limit(spec)) return 1.0 / omega_derivative(spec, spec.r);
  return spec.beta() * spec.h * std::pow(eta, 1.0 - spec.h);
}

double v_numeric(const OmegaSpec& spec, double eta) {
  if (!(eta > 0.0)) throw std::domain_error("v_numeric: eta must be positive");
  spec.validate();
  auto g = [&](double x) { return omega_eval(spec, x) / omega_derivative(spec, x) - x; };

  if (std::isinf(spec.r) && spec.h == 1.0) {
    // w is affine: g is the constant tau / w'
    if (g(1.0) > eta) throw std::domain_error("v_numeric: root outside bracket");
    return 1.0 / omega_derivative(spec, 1.0);
  }
  // g is constant on the linear branch, so beyond g(r) the supremum is 1/w'(r)
  if (spec.has_breakpoint() && g(spec.r) <= eta) return 1.0 / omega_derivative(spec, spec.r);

  double lo = spec.has_breakpoint() ? spec.r : 1.0;
  double hi = lo;
  constexpr int kExpansionCap = 1000;
  int steps = 0;
  while (g(lo) > eta) {
    lo *= 0.5;
    if (++steps > kExpansionCap || lo == 0.0) throw std::domain_error("v_numeric: root outside bracket");
  }
  steps = 0;
  while (g(hi) < eta) {
    if (spec.has_breakpoint()) break;  // g(r) > eta already established
    hi *= 2.0;
    if (++steps > kExpansionCap || std::isinf(hi)) throw std::domain_error("v_numeric: root outside bracket");
  }
  // bisect in log-x; the map x -> g(x) is increasing
  for (int i = 0; i < 400 && hi / lo > 1.0 + 4e-16; ++i) {
    const double mid = std::sqrt(lo * hi);
    if (mid <= lo || mid >= hi) break;
    if (g(mid) < eta)
      lo = mid;
    else
      hi = mid;
  }
  return 1.0 / omega_derivative(spec, 0.5 * (lo + hi));
}

double c_alpha(const OmegaSpec& spec, double alpha) {
  spec.validate();
  if (!(alpha > 0.0) || (spec.has_breakpoint() && alpha > spec.r / 2.0))
    throw std::domain_error("c_alpha: alpha must be in (0, r/2]");
  const OmegaSpec o = spec.as_offset();
  const double ratio_pow = std::isinf(o.r) ? std::pow(alpha, -o.h) : std::pow(o.r / alpha, o.h);
  return 1.0 + (std::pow(2.0, o.h) - 1.0) / (0.5 * o.mu * o.tau * ratio_pow + 1.0);
}

double c_alpha_brute_force(const OmegaSpec& spec, double alpha, std::size_t points) {
  spec.validate();
  if (!(alpha > 0.0) || points < 2) throw std::domain_error("c_alpha_brute_force: bad arguments");
  const double upper = std::max(1e4 * alpha, spec.has_breakpoint() ? 1e4 * spec.r : 0.0);
  const double log_lo = std::log(alpha);
  const double step = (std::log(upper) - log_lo) / static_cast<double>(points - 1);
  double best = kInf;
  for (std::size_t i = 0; i < points; ++i) {
    const double x = std::exp(log_lo + step * static_cast<double>(i));
    best = std::min(best, omega_eval(spec, 2.0 * x) / omega_eval(spec, x));
  }
  return best;
}

// --- delta estimation --------------------------------------------------------

GapFunctions gap_functions(const Objective& objective, const ReferenceSolution& reference) {
  if (reference.w_star.size() != objective.dimension())
    throw std::invalid_argument("gap_functions: reference dimension mismatch");
  GapFunctions gap;
  gap.a = [objective, f_min = reference.f_min](std::span<const double> w) { return objective.value(w) - f_min; };
  gap.b = [w_star = reference.w_star](std::span<const double> w) { return squared_distance(w, w_star); };
  return gap;
}

std::vector<double> log_grid(double lo, double hi, std::size_t per_decade) {
  if (!(lo > 0.0) || !(hi > lo) || per_decade == 0) throw std::invalid_argument("log_grid: need 0 < lo < hi");
  const double decades = std::log10(hi / lo);
  const auto count = static_cast<std::size_t>(std::ceil(decades * static_cast<double>(per_decade) - 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i)
    grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(count - 1));
  grid.back() = hi;
  return grid;
}

namespace {

struct GapSample {
  double a;
  double b;
};

std::vector<GapSample> sample_gaps(const GapFunctions& gap, const SampleRegion& region) {
  if (region.center.empty()) throw std::invalid_argument("estimate_delta: empty center");
  if (!(region.radius > 0.0) || std::isinf(region.radius))
    throw std::invalid_argument("estimate_delta: region must be bounded");
  if (region.samples == 0) throw std::invalid_argument("estimate_delta: no samples");
  if (!(region.min_relative_radius > 0.0 && region.min_relative_radius < 1.0))
    throw std::invalid_argument("estimate_delta: min_relative_radius must be in (0, 1)");

  const std::size_t d = region.center.size();
  Rng rng(region.seed);
  const double log_span = std::log(region.min_relative_radius);
  std::vector<GapSample> out;
  out.reserve(region.samples);
  Vector w(d), u(d);
  for (std::size_t s = 0; s < region.samples; ++s) {
    double norm_u = 0.0;
    do {
      for (auto& ui : u) ui = rng.normal();
      norm_u = norm(u);
    } while (norm_u == 0.0);
    const double rho = region.radius * std::exp(log_span * rng.uniform());
    for (std::size_t i = 0; i < d; ++i) {
      const double step = std::clamp(rho * u[i] / norm_u, -region.radius, region.radius);
      w[i] = region.center[i] + step;
    }
    out.push_back({gap.a(w), gap.b(w)});
  }
  std::sort(out.begin(), out.end(), [](const GapSample& x, const GapSample& y) { return x.a < y.a; });
  return out;
}

DeltaEstimate estimate_from_samples(const std::vector<GapSample>& samples, std::span<const double> grid,
                                    const DeltaOptions& options) {
  if (grid.empty()) throw std::invalid_argument("estimate_delta: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || std::isinf(grid[i])) throw std::invalid_argument("estimate_delta: grid must be positive");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw std::invalid_argument("estimate_delta: grid must be increasing");
  }
  if (!(options.band > 0.0 && options.band < 1.0)) throw std::invalid_argument("estimate_delta: band must be in (0, 1)");

  DeltaEstimate est;
  est.epsilon_grid.assign(grid.begin(), grid.end());
  const std::size_t m = grid.size();
  est.rho_values.assign(m, std::numeric_limits<double>::quiet_NaN());
  est.empty_band.assign(m, true);

  auto by_a = [](const GapSample& s, double v) { return s.a < v; };
  for (std::size_t k = 0; k < m; ++k) {
    const double lo = grid[k] * (1.0 - options.band);
    const double hi = grid[k] * (1.0 + options.band);
    auto first = std::lower_bound(samples.begin(), samples.end(), lo, by_a);
    double best = -kInf;
    for (auto it = first; it != samples.end() && it->a <= hi; ++it) best = std::max(best, it->b);
    if (best > -kInf) {
      est.rho_values[k] = best;
      est.empty_band[k] = false;
    }
  }

  std::vector<double> xs{0.0}, ys{0.0};
  for (std::size_t k = 0; k < m; ++k) {
    if (est.empty_band[k]) continue;
    xs.push_back(grid[k]);
    ys.push_back(est.rho_values[k]);
  }
  est.delta_values = upper_concave_envelope(xs, ys, grid);
  for (std::size_t k = 1; k < m; ++k) est.delta_values[k] = std::max(est.delta_values[k], est.delta_values[k - 1]);

  // slope over the lowest decade of populated grid points, widened to min_fit_points
  std::vector<double> fx, fy;
  double decade_end = -1.0;
  for (std::size_t k = 0; k < m; ++k) {
    if (est.empty_band[k] || !(est.delta_values[k] > 0.0)) continue;
    if (decade_end < 0.0) decade_end = 10.0 * grid[k] * (1.0 + 1e-9);
    if (grid[k] > decade_end && fx.size() >= options.min_fit_points) break;
    fx.push_back(grid[k]);
    fy.push_back(est.delta_values[k]);
  }
  est.fit_points = fx.size();
  est.fitted_h = fx.size() >= 2 ? log_log_slope(fx, fy) : std::numeric_limits<double>::quiet_NaN();
  return est;
}

}  // namespace

DeltaEstimate estimate_delta(const GapFunctions& gap, const SampleRegion& region, std::span<const double> grid,
                             const DeltaOptions& options) {
  return estimate_from_samples(sample_gaps(gap, region), grid, options);
}

DeltaEstimate estimate_delta_auto(const GapFunctions& gap, const SampleRegion& region, double decades,
                                  std::size_t per_decade, const DeltaOptions& options) {
  if (!(decades > 0.0)) throw std::invalid_argument("estimate_delta: decades must be positive");
  const auto samples = sample_gaps(gap, region);
  const double a_max = samples.back().a;
  if (!(a_max > 0.0)) throw std::domain_error("estimate_delta: objective gap is zero on the whole region");
  const double hi = 0.25 * a_max;
  const auto grid = log_grid(hi * std::pow(10.0, -decades), hi, per_decade);
  return estimate_from_samples(samples, grid, options);
}

double fit_curvature(const Objective& objective, const ReferenceSolution& reference,
                     const CurvatureFitOptions& options) {
  SampleRegion region{reference.w_star, options.region_radius, options.samples, options.seed};
  const DeltaEstimate est = estimate_delta_auto(gap_functions(objective, reference), region);
  if (std::isnan(est.fitted_h)) throw std::domain_error("fit_curvature: too few populated level-set bands");
  return std::clamp(est.fitted_h, 0.0, 1.0);
}

std::vector<double> upper_concave_envelope(std::span<const double> x, std::span<const double> y,
                                           std::span<const double> xs) {
  require_same_size(x.size(), y.size(), "upper_concave_envelope");
  if (x.empty()) throw std::invalid_argument("upper_concave_envelope: no points");
  // monotone chain, upper hull
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i > 0 && !(x[i] > x[i - 1])) throw std::invalid_argument("upper_concave_envelope: x must be increasing");
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2], b = hull.back();
      const double cross = (x[b] - x[a]) * (y[i] - y[a]) - (y[b] - y[a]) * (x[i] - x[a]);
      if (cross >= 0.0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(i);
  }
  std::vector<double> hx(hull.size());
  for (std::size_t j = 0; j < hull.size(); ++j) hx[j] = x[hull[j]];
  std::vector<double> out(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double q = xs[k];
    if (q <= hx.front()) {
      out[k] = y[hull.front()];
    } else if (q >= hx.back()) {
      out[k] = y[hull.back()];
    } else {
      const auto j = static_cast<std::size_t>(std::upper_bound(hx.begin(), hx.end(), q) - hx.begin());
      const std::size_t a = hull[j - 1], b = hull[j];
      out[k] = y[a] + (q - x[a]) / (x[b] - x[a]) * (y[b] - y[a]);
    }
  }
  return out;
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  require_same_size(x.size(), y.size(), "log_log_slope");
  if (x.size() < 2) throw std::invalid_argument("log_log_slope: need at least two points");
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::domain_error("log_log_slope: values must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) throw std::domain_error("log_log_slope: x values are all equal");
  return sxy / sxx;
}

}  // namespace curvesgd
