#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "curvesgd/quadrature.hpp"

namespace curvesgd {

enum class ScheduleKind { constant, power_law, paper_optimal };

/// How the paper-optimal shift Delta is chosen.
///   paper: Delta = 2 max{2L, 1/r} / (beta (2-h)), so eta_0 = min{1/(2L), r}^(1/(2-h))
///   cap:   Delta = 2 max{2L, 1/r}^(2-h) / (beta (2-h)), so eta_0 = min{1/(2L), r}
/// The two agree at h = 1.
enum class ShiftRule { paper, cap };

/// Step-size rule.
///   constant:      eta_t = eta
///   power_law:     eta_t = scale / t^(1/(2-h)), t >= 1
///   paper_optimal: eta_t = (2/(beta (2-h)))^(1/(2-h)) (t + Delta)^(-1/(2-h)), t >= 0
struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::constant;
  double eta = 0.01;
  double scale = 0.1;
  double h = 1.0;
  double beta = 1.0;
  double L = 1.0;
  double r = std::numeric_limits<double>::infinity();
  ShiftRule shift = ShiftRule::paper;

  static ScheduleSpec constant(double eta);
  static ScheduleSpec power_law(double scale, double h);
  static ScheduleSpec paper_optimal(double h, double beta, double L,
                                    double r = std::numeric_limits<double>::infinity(),
                                    ShiftRule shift = ShiftRule::paper);

  void validate() const;
};

/// Text forms: `const:0.01`, `power:scale=0.1,h=0.25`,
/// `paper-opt:h=0.5,beta=1,L=2,r=inf[,shift=cap]`. Numbers round-trip exactly.
ScheduleSpec parse_schedule(const std::string& text);
std::string to_string(const ScheduleSpec& spec);

double eta(const ScheduleSpec& spec, double t);

/// Step used at 0-based iteration `index` (power_law maps index to t = index + 1).
double step_size(const ScheduleSpec& spec, double index);

double delta(const ScheduleSpec& spec);

/// c in C_bar(t) = c (t + Delta)^(-h/(2-h)), the exact solution of the step-size ODE:
/// c = (1/h) [1/(2-h)]^(h/(2-h)) (2/beta)^(2/(2-h)).
double envelope_constant(const ScheduleSpec& spec);
/// [1/(2-h)]^(h/(2-h)) (2/beta)^(2/(2-h)); equals h * envelope_constant(spec).
double envelope_constant_as_printed(const ScheduleSpec& spec);

using RateFunction = std::function<double(double)>;

/// v(eta) = beta h eta^(1-h)
RateFunction power_law_rate(double beta, double h);
/// v(eta) = c eta
RateFunction linear_rate(double c);
/// The power-law rate matching a paper_optimal spec.
RateFunction schedule_rate(const ScheduleSpec& spec);

/// M(t) = (2h/(2-h)) ln((t + Delta)/Delta), paper_optimal only.
double M_closed_form(const ScheduleSpec& spec, double t);

struct EnvelopeIntegrals {
  double M = 0.0;
  double C = 0.0;
  std::size_t subintervals = 0;
};

/// M(t) = int_0^t n(x) v(n(x)) dx and C(t) = exp(-M(t)) int_0^t exp(M(x)) n(x)^2 dx
/// by doubling trapezoid with n(x) = step_size(spec, x).
EnvelopeIntegrals envelope_integrals(const ScheduleSpec& spec, const RateFunction& v, double t,
                                     const QuadratureOptions& options = {});

double M_of_t(const ScheduleSpec& spec, const RateFunction& v, double t, const QuadratureOptions& options = {});
double C_of_t(const ScheduleSpec& spec, const RateFunction& v, double t, const QuadratureOptions& options = {});

double c_bar(const ScheduleSpec& spec, double t);
double c_bar_derivative(const ScheduleSpec& spec, double t);

struct OdeResidual {
  /// |C_bar - 2 n / v(n)| / C_bar with n = sqrt(-C_bar')
  double relative_residual = 0.0;
  /// |sqrt(-C_bar') - eta_t| / eta_t
  double step_mismatch = 0.0;
};

OdeResidual ode_residual(const ScheduleSpec& spec, double t);

struct SolutionConstants {
  double A = 0.0;
  double B = 0.0;
};

/// A = (2N + 1) exp(eta_0), B = (2N + 1) exp(M(1)) eta_0^2 + E[Y_0].
SolutionConstants solution_constants(double noise, double eta0, double M1, double Y0);
SolutionConstants solution_constants(const ScheduleSpec& spec, double noise, double Y0);

/// A C_bar(t) + B exp(-M(t)).
double rate_bound(const ScheduleSpec& spec, double A, double B, double t);

/// First t in the grid with C(t) >= C_bar(t)/2, or NaN if none.
double half_envelope_crossover(const ScheduleSpec& spec, const std::vector<double>& t_grid,
                               const QuadratureOptions& options = {});

}  // namespace curvesgd
