#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "curvesgd/objectives.hpp"
#include "curvesgd/vector.hpp"

namespace curvesgd {

/// Which constant convention an OmegaSpec uses.
///
/// main_text: w(x) = (2/(mu h)) (x/r)^h for x <= r, tangent line beyond.
/// offset:    w(x) = tau + (2/mu) (x/r)^h for x <= r, tangent line beyond.
/// main_text(h, r, mu) is offset(h, r, mu * h, tau = 0).
enum class OmegaForm { main_text, offset };

/// Parameters of the concave comparison function omega_{h,r,mu[,tau]}.
///
/// r = +inf means the breakpoint is gone and r^h has been absorbed into mu,
/// i.e. omega(x) = (2/(mu h)) x^h (main_text) on all of [0, inf).
struct OmegaSpec {
  double h = 1.0;
  double r = std::numeric_limits<double>::infinity();
  double mu = 1.0;
  double tau = 0.0;
  OmegaForm form = OmegaForm::main_text;

  static OmegaSpec main_text(double h, double r, double mu);
  static OmegaSpec offset(double h, double r, double mu, double tau);

  void validate() const;
  bool has_breakpoint() const { return r < std::numeric_limits<double>::infinity(); }
  /// Same function written in the offset convention.
  OmegaSpec as_offset() const;
  /// beta = (mu/2) h^-h (1-h)^-(1-h) r^h in the main-text convention (tau = 0).
  double beta() const;
};

double omega_eval(const OmegaSpec& spec, double x);
double omega_derivative(const OmegaSpec& spec, double x);

/// Largest eta for which v(eta) follows the power law (r (1-h)/h when tau = 0).
double v_power_law_limit(const OmegaSpec& spec);

/// v(eta) = beta h eta^(1-h) up to v_power_law_limit, then 1/omega'(r).
/// Requires tau = 0 and 0 < eta <= r. As h -> 0 this tends to (mu/2) eta.
double v_closed_form(const OmegaSpec& spec, double eta);

/// v(eta) = 1/omega'(x) where eta = omega(x)/omega'(x) - x, by bisection.
double v_numeric(const OmegaSpec& spec, double eta);

/// c_alpha = 1 + (2^h - 1) / ((mu tau / 2)(r/alpha)^h + 1), offset convention.
double c_alpha(const OmegaSpec& spec, double alpha);

/// inf of omega(2x)/omega(x) over a log grid x in [alpha, max(1e4 alpha, 1e4 r)].
double c_alpha_brute_force(const OmegaSpec& spec, double alpha, std::size_t points = 20000);

// --- minimal omega (delta) estimation ----------------------------------------

/// a(w) = F(w) - F_min and b(w) = squared distance to the minimizer set.
struct GapFunctions {
  std::function<double(std::span<const double>)> a;
  std::function<double(std::span<const double>)> b;
};

GapFunctions gap_functions(const Objective& objective, const ReferenceSolution& reference);

/// Box {w : ||w - center||_inf <= radius} sampled radially around center.
struct SampleRegion {
  Vector center;
  double radius = 1.0;
  std::size_t samples = 100'000;
  std::uint64_t seed = 1;
  /// Smallest sampled radius, relative to radius.
  double min_relative_radius = 1e-6;
};

struct DeltaOptions {
  /// Half-width of the level-set band, relative to the target epsilon.
  double band = 0.02;
  /// Minimum number of points in the slope window.
  std::size_t min_fit_points = 8;
};

struct DeltaEstimate {
  std::vector<double> epsilon_grid;
  /// Level-set supremum of b; NaN where the band was empty.
  std::vector<double> rho_values;
  std::vector<bool> empty_band;
  /// Least concave nondecreasing majorant of rho through (0, 0).
  std::vector<double> delta_values;
  double fitted_h = 0.0;
  std::size_t fit_points = 0;
};

std::vector<double> log_grid(double lo, double hi, std::size_t per_decade);

DeltaEstimate estimate_delta(const GapFunctions& gap, const SampleRegion& region,
                             std::span<const double> grid, const DeltaOptions& options = {});

/// Grid from 0.25 max(a) over the samples down `decades` decades.
DeltaEstimate estimate_delta_auto(const GapFunctions& gap, const SampleRegion& region, double decades = 3.0,
                                  std::size_t per_decade = 10, const DeltaOptions& options = {});

struct CurvatureFitOptions {
  double region_radius = 3.0;
  std::size_t samples = 100'000;
  std::uint64_t seed = 1;
};

/// Empirical curvature h in [0, 1] from the log-log slope of delta near 0.
double fit_curvature(const Objective& objective, const ReferenceSolution& reference,
                     const CurvatureFitOptions& options = {});

/// Upper concave hull of (x, y) points sorted by x, evaluated at xs.
/// Exposed for tests.
std::vector<double> upper_concave_envelope(std::span<const double> x, std::span<const double> y,
                                           std::span<const double> xs);

/// Least-squares slope of log(y) against log(x).
double log_log_slope(std::span<const double> x, std::span<const double> y);

}  // namespace curvesgd
