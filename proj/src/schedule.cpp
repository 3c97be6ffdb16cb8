#include "curvesgd/schedule.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string_view>

namespace curvesgd {

namespace {

double parse_number(std::string_view text, std::string_view what) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw std::invalid_argument("schedule: bad number for " + std::string(what) + ": '" + std::string(text) + "'");
  return value;
}

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw std::runtime_error("schedule: cannot format number");
  return std::string(buf, ptr);
}

std::map<std::string, std::string> parse_pairs(std::string_view body) {
  std::map<std::string, std::string> out;
  while (!body.empty()) {
    const auto comma = body.find(',');
    const std::string_view item = body.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0) throw std::invalid_argument("schedule: expected key=value, got '" + std::string(item) + "'");
    std::string key(item.substr(0, eq));
    if (!out.emplace(key, std::string(item.substr(eq + 1))).second)
      throw std::invalid_argument("schedule: duplicate key '" + key + "'");
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
    if (body.empty()) throw std::invalid_argument("schedule: trailing comma");
  }
  return out;
}

double take(std::map<std::string, std::string>& pairs, const std::string& key, bool required, double fallback) {
  auto it = pairs.find(key);
  if (it == pairs.end()) {
    if (required) throw std::invalid_argument("schedule: missing key '" + key + "'");
    return fallback;
  }
  const double v = parse_number(it->second, key);
  pairs.erase(it);
  return v;
}

void reject_leftovers(const std::map<std::string, std::string>& pairs) {
  if (!pairs.empty()) throw std::invalid_argument("schedule: unknown key '" + pairs.begin()->first + "'");
}

void require_paper_optimal(const ScheduleSpec& spec, const char* what) {
  spec.validate();
  if (spec.kind != ScheduleKind::paper_optimal)
    throw std::invalid_argument(std::string(what) + ": needs a paper-opt schedule");
}

}  // namespace

ScheduleSpec ScheduleSpec::constant(double eta) {
  ScheduleSpec s;
  s.kind = ScheduleKind::constant;
  s.eta = eta;
  s.validate();
  return s;
}

ScheduleSpec ScheduleSpec::power_law(double scale, double h) {
  ScheduleSpec s;
  s.kind = ScheduleKind::power_law;
  s.scale = scale;
  s.h = h;
  s.validate();
  return s;
}

ScheduleSpec ScheduleSpec::paper_optimal(double h, double beta, double L, double r, ShiftRule shift) {
  ScheduleSpec s;
  s.kind = ScheduleKind::paper_optimal;
  s.h = h;
  s.beta = beta;
  s.L = L;
  s.r = r;
  s.shift = shift;
  s.validate();
  return s;
}

void ScheduleSpec::validate() const {
  switch (kind) {
    case ScheduleKind::constant:
      if (!(eta > 0.0) || std::isinf(eta)) throw std::invalid_argument("schedule: constant step must be positive");
      return;
    case ScheduleKind::power_law:
      if (!(scale > 0.0) || std::isinf(scale)) throw std::invalid_argument("schedule: scale must be positive");
      if (!(h >= 0.0 && h <= 1.0)) throw std::invalid_argument("schedule: power-law h must be in [0, 1]");
      return;
    case ScheduleKind::paper_optimal:
      if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("schedule: h must be in (0, 1]");
      if (!(beta > 0.0) || std::isinf(beta)) throw std::invalid_argument("schedule: beta must be positive");
      if (!(L > 0.0) || std::isinf(L)) throw std::invalid_argument("schedule: L must be positive and finite");
      if (!(r > 0.0)) throw std::invalid_argument("schedule: r must be positive or inf");
      return;
  }
}

ScheduleSpec parse_schedule(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("schedule: missing ':' in '" + text + "'");
  const std::string kind = text.substr(0, colon);
  const std::string_view body = std::string_view(text).substr(colon + 1);
  if (kind == "const") return ScheduleSpec::constant(parse_number(body, "const"));
  auto pairs = parse_pairs(body);
  if (kind == "power") {
    const double scale = take(pairs, "scale", true, 0.0);
    const double h = take(pairs, "h", true, 0.0);
    reject_leftovers(pairs);
    return ScheduleSpec::power_law(scale, h);
  }
  if (kind == "paper-opt") {
    const double h = take(pairs, "h", true, 0.0);
    const double beta = take(pairs, "beta", true, 0.0);
    const double L = take(pairs, "L", true, 0.0);
    const double r = take(pairs, "r", false, std::numeric_limits<double>::infinity());
    ShiftRule shift = ShiftRule::paper;
    if (auto it = pairs.find("shift"); it != pairs.end()) {
      if (it->second == "cap")
        shift = ShiftRule::cap;
      else if (it->second != "paper")
        throw std::invalid_argument("schedule: shift must be paper or cap");
      pairs.erase(it);
    }
    reject_leftovers(pairs);
    return ScheduleSpec::paper_optimal(h, beta, L, r, shift);
  }
  throw std::invalid_argument("schedule: unknown kind '" + kind + "'");
}

std::string to_string(const ScheduleSpec& spec) {
  switch (spec.kind) {
    case ScheduleKind::constant:
      return "const:" + format_number(spec.eta);
    case ScheduleKind::power_law:
      return "power:scale=" + format_number(spec.scale) + ",h=" + format_number(spec.h);
    case ScheduleKind::paper_optimal: {
      std::string s = "paper-opt:h=" + format_number(spec.h) + ",beta=" + format_number(spec.beta) +
                      ",L=" + format_number(spec.L) + ",r=" + format_number(spec.r);
      if (spec.shift == ShiftRule::cap) s += ",shift=cap";
      return s;
    }
  }
  return {};
}

double eta(const ScheduleSpec& spec, double t) {
  spec.validate();
  if (!(t >= 0.0) || std::isinf(t)) throw std::domain_error("eta: t must be finite and nonnegative");
  switch (spec.kind) {
    case ScheduleKind::constant:
      return spec.eta;
    case ScheduleKind::power_law:
      if (t < 1.0) throw std::domain_error("eta: power-law schedule starts at t = 1");
      return spec.scale * std::pow(t, -1.0 / (2.0 - spec.h));
    case ScheduleKind::paper_optimal: {
      const double p = 1.0 / (2.0 - spec.h);
      return std::pow(2.0 / (spec.beta * (2.0 - spec.h)), p) * std::pow(t + delta(spec), -p);
    }
  }
  return 0.0;
}

double step_size(const ScheduleSpec& spec, double index) {
  return spec.kind == ScheduleKind::power_law ? eta(spec, index + 1.0) : eta(spec, index);
}

double delta(const ScheduleSpec& spec) {
  require_paper_optimal(spec, "delta");
  const double m = std::max(2.0 * spec.L, 1.0 / spec.r);
  const double top = spec.shift == ShiftRule::cap ? std::pow(m, 2.0 - spec.h) : m;
  return 2.0 * top / (spec.beta * (2.0 - spec.h));
}

double envelope_constant_as_printed(const ScheduleSpec& spec) {
  require_paper_optimal(spec, "envelope_constant");
  const double q = 2.0 - spec.h;
  return std::pow(1.0 / q, spec.h / q) * std::pow(2.0 / spec.beta, 2.0 / q);
}

double envelope_constant(const ScheduleSpec& spec) { return envelope_constant_as_printed(spec) / spec.h; }

RateFunction power_law_rate(double beta, double h) {
  if (!(beta > 0.0) || !(h > 0.0 && h <= 1.0)) throw std::invalid_argument("power_law_rate: bad parameters");
  return [beta, h](double e) { return beta * h * std::pow(e, 1.0 - h); };
}

RateFunction linear_rate(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("linear_rate: c must be positive");
  return [c](double e) { return c * e; };
}

RateFunction schedule_rate(const ScheduleSpec& spec) {
  require_paper_optimal(spec, "schedule_rate");
  return power_law_rate(spec.beta, spec.h);
}

double M_closed_form(const ScheduleSpec& spec, double t) {
  require_paper_optimal(spec, "M_closed_form");
  if (!(t >= 0.0)) throw std::domain_error("M: t must be nonnegative");
  return 2.0 * spec.h / (2.0 - spec.h) * std::log1p(t / delta(spec));
}

EnvelopeIntegrals envelope_integrals(const ScheduleSpec& spec, const RateFunction& v, double t,
                                     const QuadratureOptions& options) {
  spec.validate();
  if (!(t >= 0.0) || std::isinf(t)) throw std::domain_error("envelope_integrals: t must be finite and nonnegative");
  if (t == 0.0) return {};
  const double shift = spec.kind == ScheduleKind::paper_optimal ? delta(spec) : 1.0;

  EnvelopeIntegrals previous{std::nan(""), std::nan(""), 0};
  std::size_t n = std::max<std::size_t>(options.initial_subintervals, 1);
  while (n <= options.max_subintervals) {
    const auto grid = log_substituted_grid(t, shift, n);
    std::vector<double> steps(grid.x.size()), rate(grid.x.size());
    for (std::size_t k = 0; k < steps.size(); ++k) {
      steps[k] = step_size(spec, grid.x[k]);
      rate[k] = steps[k] * v(steps[k]);
    }
    const auto M = cumulative_trapezoid(grid, rate);
    std::vector<double> weighted(steps.size());
    for (std::size_t k = 0; k < steps.size(); ++k) weighted[k] = std::exp(M[k] - M.back()) * steps[k] * steps[k];
    const EnvelopeIntegrals current{M.back(), cumulative_trapezoid(grid, weighted).back(), n};
    if (!std::isfinite(current.M) || !std::isfinite(current.C))
      throw QuadratureError("envelope_integrals: integrand is not finite");
    if (std::abs(current.M - previous.M) <= options.abs_tolerance &&
        std::abs(current.C - previous.C) <= options.abs_tolerance)
      return current;
    previous = current;
    n *= 2;
  }
  throw QuadratureError("envelope_integrals: no convergence within the subinterval cap");
}

double M_of_t(const ScheduleSpec& spec, const RateFunction& v, double t, const QuadratureOptions& options) {
  return envelope_integrals(spec, v, t, options).M;
}

double C_of_t(const ScheduleSpec& spec, const RateFunction& v, double t, const QuadratureOptions& options) {
  return envelope_integrals(spec, v, t, options).C;
}

double c_bar(const ScheduleSpec& spec, double t) {
  require_paper_optimal(spec, "c_bar");
  if (!(t >= 0.0)) throw std::domain_error("c_bar: t must be nonnegative");
  return envelope_constant(spec) * std::pow(t + delta(spec), -spec.h / (2.0 - spec.h));
}

double c_bar_derivative(const ScheduleSpec& spec, double t) {
  require_paper_optimal(spec, "c_bar_derivative");
  if (!(t >= 0.0)) throw std::domain_error("c_bar: t must be nonnegative");
  const double p = spec.h / (2.0 - spec.h);
  return -p * envelope_constant(spec) * std::pow(t + delta(spec), -p - 1.0);
}

OdeResidual ode_residual(const ScheduleSpec& spec, double t) {
  require_paper_optimal(spec, "ode_residual");
  if (!(t > 0.0)) throw std::domain_error("ode_residual: t must be positive");
  const double cb = c_bar(spec, t);
  const double n = std::sqrt(-c_bar_derivative(spec, t));
  const double v = schedule_rate(spec)(n);
  const double e = eta(spec, t);
  return {std::abs(cb - 2.0 * n / v) / cb, std::abs(n - e) / e};
}

SolutionConstants solution_constants(double noise, double eta0, double M1, double Y0) {
  if (!(noise >= 0.0) || !(eta0 > 0.0) || !(M1 >= 0.0) || !(Y0 >= 0.0))
    throw std::invalid_argument("solution_constants: arguments must be nonnegative");
  const double k = 2.0 * noise + 1.0;
  return {k * std::exp(eta0), k * std::exp(M1) * eta0 * eta0 + Y0};
}

SolutionConstants solution_constants(const ScheduleSpec& spec, double noise, double Y0) {
  require_paper_optimal(spec, "solution_constants");
  return solution_constants(noise, eta(spec, 0.0), M_closed_form(spec, 1.0), Y0);
}

double rate_bound(const ScheduleSpec& spec, double A, double B, double t) {
  if (!(A >= 0.0) || !(B >= 0.0)) throw std::invalid_argument("rate_bound: A and B must be nonnegative");
  return A * c_bar(spec, t) + B * std::exp(-M_closed_form(spec, t));
}

double half_envelope_crossover(const ScheduleSpec& spec, const std::vector<double>& t_grid,
                               const QuadratureOptions& options) {
  const RateFunction v = schedule_rate(spec);
  for (double t : t_grid)
    if (C_of_t(spec, v, t, options) >= 0.5 * c_bar(spec, t)) return t;
  return std::nan("");
}

}  // namespace curvesgd
