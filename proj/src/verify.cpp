#include "curvesgd/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "curvesgd/engine.hpp"
#include "curvesgd/omega.hpp"
#include "curvesgd/random.hpp"
#include "curvesgd/synthetic.hpp"

namespace curvesgd {

namespace {

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

Vector random_box(Rng& rng, std::size_t d, double radius) {
  Vector w(d);
  for (auto& x : w) x = rng.uniform(-radius, radius);
  return w;
}

/// Convex L-smooth test objectives used by the property checks, with L valid on ||w||_inf <= 3.
std::vector<std::pair<std::string, Objective>> convex_zoo(std::uint64_t seed) {
  auto blobs = std::make_shared<const Dataset>(synthesize_dataset({SyntheticKind::blobs, 20, 3, seed, 2.0, 1.0}));
  auto lin = std::make_shared<const Dataset>(synthesize_dataset({SyntheticKind::linear, 20, 3, seed, 0.0, 1.0}));
  auto noise =
      std::make_shared<const Dataset>(synthesize_dataset({SyntheticKind::centered_noise, 20, 3, seed, 0.0, 2.0}));
  return {
      {"logistic", Objective::logistic(blobs)},
      {"logistic+ridge", Objective::logistic(blobs).with_regularizer(Regularizer::norm2_squared, 0.1)},
      {"least_squares", Objective::least_squares(lin)},
      {"logistic+G", Objective::logistic(blobs).with_regularizer(Regularizer::exp_cosh, 0.01)},
      {"linear+G", Objective::linear(noise).with_regularizer(Regularizer::exp_cosh, 1.0)},
  };
}

constexpr double kZooRadius = 3.0;

}  // namespace

CheckResult timed_check(const std::string& name, const std::function<CheckResult()>& fn) {
  const auto start = std::chrono::steady_clock::now();
  CheckResult r;
  try {
    r = fn();
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.name = name;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

// --- benchmarks ----------------------------------------------------------------

Benchmark ridge_benchmark(std::uint64_t data_seed) {
  const double lambda = 10.0;
  auto data = std::make_shared<const Dataset>(synthesize_dataset({SyntheticKind::linear, 1000, 10, data_seed, 0.0, 1.0}));
  auto obj = std::make_shared<const Objective>(
      Objective::least_squares(data).with_regularizer(Regularizer::norm2_squared, lambda));
  Benchmark b;
  b.name = "ridge";
  b.objective = obj;
  b.reference = solve_reference(*obj, 1e-12);
  b.h = 1.0;
  b.mu = lambda;
  b.beta = lambda / 2.0;
  b.L = obj->smoothness_bound(b.region_radius);
  return b;
}

double exp_cosh_mu(double lambda, std::size_t d) { return lambda / (9.0 * static_cast<double>(d)); }

Benchmark exp_cosh_benchmark(std::uint64_t data_seed) {
  const double lambda = 1.0;
  const std::size_t d = 2;
  auto data =
      std::make_shared<const Dataset>(synthesize_dataset({SyntheticKind::centered_noise, 100, d, data_seed, 0.0, 7.0}));
  auto obj = std::make_shared<const Objective>(Objective::linear(data).with_regularizer(Regularizer::exp_cosh, lambda));
  Benchmark b;
  b.name = "exp_cosh";
  b.objective = obj;
  b.reference = solve_reference(*obj, 1e-12);
  b.h = 0.5;
  b.mu = exp_cosh_mu(lambda, d);
  b.beta = b.mu;
  b.region_radius = 3.0;
  b.L = obj->smoothness_bound(b.region_radius);
  return b;
}

// --- checks --------------------------------------------------------------------

CheckResult check_gradients(std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  std::string where;
  for (const auto& [name, obj] : convex_zoo(seed)) {
    for (int trial = 0; trial < 20; ++trial) {
      Vector w = random_box(rng, obj.dimension(), kZooRadius);
      const std::size_t i = rng.index(obj.component_count());
      const Vector g = obj.component_gradient(i, w);
      for (std::size_t j = 0; j < w.size(); ++j) {
        const double step = 1e-5;
        Vector wp = w, wm = w;
        wp[j] += step;
        wm[j] -= step;
        const double fd = (obj.component_value(i, wp) - obj.component_value(i, wm)) / (2.0 * step);
        const double err = std::abs(fd - g[j]) / std::max(1.0, std::abs(g[j]));
        if (err > worst) worst = err, where = name;
      }
    }
  }
  return {"", worst <= 1e-5, fmt("max relative error %.3g", worst) + (where.empty() ? "" : " (" + where + ")")};
}

CheckResult check_cocoercivity(std::size_t pairs, std::uint64_t seed) {
  Rng rng(seed);
  std::size_t violations = 0, total = 0;
  double worst = -INFINITY;
  for (const auto& [name, obj] : convex_zoo(seed)) {
    const double L = obj.smoothness_bound(kZooRadius);
    for (std::size_t k = 0; k < pairs; ++k) {
      const Vector w = random_box(rng, obj.dimension(), kZooRadius);
      const Vector v = random_box(rng, obj.dimension(), kZooRadius);
      const std::size_t i = rng.index(obj.component_count());
      const Vector gw = obj.component_gradient(i, w), gv = obj.component_gradient(i, v);
      Vector dg(gw.size()), dw(w.size());
      for (std::size_t j = 0; j < w.size(); ++j) dg[j] = gw[j] - gv[j], dw[j] = w[j] - v[j];
      const double lhs = squared_norm(dg);
      const double rhs = L * dot(dg, dw);
      worst = std::max(worst, lhs - rhs);
      if (lhs > rhs + 1e-10) ++violations;
      ++total;
    }
  }
  return {"", violations == 0,
          fmt("%.0f pairs, %.0f violations, max excess %.3g", static_cast<double>(total),
              static_cast<double>(violations), worst)};
}

CheckResult check_convexity(std::size_t pairs, std::uint64_t seed) {
  Rng rng(seed + 1);
  std::size_t violations = 0, total = 0;
  for (const auto& [name, obj] : convex_zoo(seed)) {
    for (std::size_t k = 0; k < pairs; ++k) {
      const Vector w = random_box(rng, obj.dimension(), kZooRadius);
      const Vector v = random_box(rng, obj.dimension(), kZooRadius);
      const std::size_t i = rng.index(obj.component_count());
      Vector dw(w.size());
      for (std::size_t j = 0; j < w.size(); ++j) dw[j] = w[j] - v[j];
      const double gap = obj.component_value(i, w) - obj.component_value(i, v) - dot(obj.component_gradient(i, v), dw);
      if (gap < -1e-10) ++violations;
      ++total;
    }
  }
  return {"", violations == 0,
          fmt("%.0f pairs, %.0f violations", static_cast<double>(total), static_cast<double>(violations))};
}

CheckResult check_g_inequality(std::size_t pairs, std::uint64_t seed) {
  Rng rng(seed);
  std::size_t violations = 0;
  double min_ratio = INFINITY;
  std::ostringstream detail;
  for (std::size_t d : {1u, 2u, 5u, 10u}) {
    const double gamma = 1.0 / (36.0 * static_cast<double>(d));
    std::size_t local = 0;
    for (std::size_t k = 0; k < pairs; ++k) {
      const Vector w = random_box(rng, d, 3.0);
      const Vector v = random_box(rng, d, 3.0);
      Vector dw(d);
      for (std::size_t j = 0; j < d; ++j) dw[j] = w[j] - v[j];
      const double lhs = regularizer_G_value(w) - regularizer_G_value(v) - dot(regularizer_G_gradient(v), dw);
      const double dist2 = squared_norm(dw);
      const double rhs = gamma * dist2 * dist2;
      if (lhs < rhs - 1e-12) ++local;
      if (rhs > 1e-8) min_ratio = std::min(min_ratio, lhs / rhs);
    }
    violations += local;
    detail << "d=" << d << ": " << local << " violations; ";
  }
  detail << "min lhs/rhs " << min_ratio;
  return {"", violations == 0, detail.str()};
}

CheckResult check_omega_shape(std::uint64_t seed) {
  Rng rng(seed);
  std::size_t failures = 0;
  double worst_jump = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double h = rng.uniform(0.05, 1.0);
    const double r = std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
    const double mu = std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
    const OmegaSpec spec = k % 2 == 0 ? OmegaSpec::main_text(h, r, mu) : OmegaSpec::offset(h, r, mu, rng.uniform(0, 2));
    // continuity of value and slope at r
    const double below = omega_eval(spec, r * (1 - 1e-13)), above = omega_eval(spec, r * (1 + 1e-13));
    const double jump = std::abs(above - below);
    const double slope_jump = std::abs(omega_derivative(spec, r) - omega_derivative(spec, std::nextafter(r, INFINITY)));
    worst_jump = std::max({worst_jump, jump, slope_jump});
    if (jump > 1e-12 * std::max(1.0, below) || slope_jump > 1e-12 * omega_derivative(spec, r)) ++failures;
    for (int s = 0; s < 50; ++s) {
      double x = rng.uniform(0, 3 * r), y = rng.uniform(0, 3 * r);
      if (x > y) std::swap(x, y);
      if (y - x < 1e-9) continue;
      const double fx = omega_eval(spec, x), fy = omega_eval(spec, y);
      if (!(fy > fx)) ++failures;
      if (omega_eval(spec, 0.5 * (x + y)) < 0.5 * (fx + fy) - 1e-12) ++failures;
    }
  }
  return {"", failures == 0, fmt("%.0f failures, max breakpoint jump %.3g", static_cast<double>(failures), worst_jump)};
}

CheckResult check_omega_separability(std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  std::size_t violations = 0, total = 0;
  for (std::size_t d : {1u, 2u, 5u, 10u}) {
    for (double lambda : {1e-3, 1.0, 10.0}) {
      const Objective obj = Objective::zero(d).with_regularizer(Regularizer::exp_cosh, lambda);
      const OmegaSpec omega = OmegaSpec::main_text(0.5, INFINITY, exp_cosh_mu(lambda, d));
      for (std::size_t k = 0; k < samples / 12 + 1; ++k) {
        const Vector w = random_box(rng, d, 3.0);
        const double a = obj.value(w);
        const double b = squared_norm(w);
        if (omega_eval(omega, a) < b * (1 - 1e-12)) ++violations;
        ++total;
      }
    }
  }
  // the benchmark with a nonzero linear part
  const Benchmark bench = exp_cosh_benchmark();
  const OmegaSpec omega = OmegaSpec::main_text(0.5, INFINITY, bench.mu);
  for (std::size_t k = 0; k < samples; ++k) {
    const Vector w = random_box(rng, bench.objective->dimension(), 3.0);
    const double a = std::max(0.0, bench.objective->value(w) - bench.reference.f_min);
    const double b = squared_distance(w, bench.reference.w_star);
    if (omega_eval(omega, a) < b - 1e-10) ++violations;
    ++total;
  }
  return {"", violations == 0, fmt("%.0f samples, %.0f violations", static_cast<double>(total), static_cast<double>(violations))};
}

CheckResult check_v_closed_vs_numeric() {
  double worst = 0.0;
  std::size_t count = 0;
  for (int hi = 1; hi <= 9; ++hi) {
    const double h = hi / 10.0;
    for (double mu : {0.1, 1.0, 10.0}) {
      for (double r : {1.0, 10.0}) {
        const OmegaSpec spec = OmegaSpec::main_text(h, r, mu);
        for (int k = 0; k < 20; ++k) {
          const double eta = r * std::pow(10.0, -4.0 + 4.0 * k / 19.0);
          const double closed = v_closed_form(spec, eta);
          const double numeric = v_numeric(spec, eta);
          worst = std::max(worst, std::abs(closed - numeric) / closed);
          ++count;
        }
      }
    }
  }
  return {"", worst <= 1e-8, fmt("%.0f points, max relative error %.3g", static_cast<double>(count), worst)};
}

CheckResult check_c_alpha(std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const double h = rng.uniform(0.05, 1.0);
    const double tau = k % 5 == 0 ? 0.0 : rng.uniform(0.0, 5.0);
    const double r = std::exp(rng.uniform(std::log(0.5), std::log(20.0)));
    const double mu = std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
    const double alpha = r / 2.0 * std::exp(rng.uniform(std::log(1e-3), 0.0));
    const OmegaSpec spec = OmegaSpec::offset(h, r, mu, tau);
    worst = std::max(worst, std::abs(c_alpha(spec, alpha) - c_alpha_brute_force(spec, alpha)));
  }
  return {"", worst <= 1e-4, fmt("%.0f samples, max |closed - brute force| %.3g", static_cast<double>(samples), worst)};
}

CheckResult check_ode_residual() {
  double worst_residual = 0.0, worst_step = 0.0;
  for (double h : {0.25, 0.5, 0.75, 1.0}) {
    for (double beta : {0.1, 1.0, 10.0}) {
      for (double L : {0.5, 5.0}) {
        for (ShiftRule rule : {ShiftRule::paper, ShiftRule::cap}) {
          const ScheduleSpec spec = ScheduleSpec::paper_optimal(h, beta, L, INFINITY, rule);
          for (double t : {1.0, 10.0, 1e3}) {
            const OdeResidual res = ode_residual(spec, t);
            worst_residual = std::max(worst_residual, res.relative_residual);
            worst_step = std::max(worst_step, res.step_mismatch);
          }
        }
      }
    }
  }
  return {"", worst_residual <= 1e-9 && worst_step <= 1e-10,
          fmt("max relative residual %.3g, max |sqrt(-C_bar') - eta|/eta %.3g", worst_residual, worst_step)};
}

CheckResult check_envelope_quadrature() {
  double worst_M = 0.0, worst_ratio = 0.0;
  std::size_t violations = 0;
  for (double h : {0.25, 0.5, 0.75, 1.0}) {
    for (double beta : {0.5, 2.0}) {
      const ScheduleSpec spec = ScheduleSpec::paper_optimal(h, beta, 1.0);
      const RateFunction v = schedule_rate(spec);
      for (double t : {1.0, 10.0, 1e2, 1e3, 1e4}) {
        const EnvelopeIntegrals q = envelope_integrals(spec, v, t);
        worst_M = std::max(worst_M, std::abs(q.M - M_closed_form(spec, t)));
        const double ratio = q.C / c_bar(spec, t);
        worst_ratio = std::max(worst_ratio, ratio);
        if (q.C > c_bar(spec, t)) ++violations;
      }
    }
  }
  return {"", violations == 0 && worst_M <= 1e-6,
          fmt("C > C_bar at %.0f points (max C/C_bar %.4f); max |M_quad - M| %.3g", static_cast<double>(violations),
              worst_ratio, worst_M)};
}

CheckResult check_recurrence(std::size_t steps, std::uint64_t seed) {
  auto data = std::make_shared<const Dataset>(synthesize_dataset({SyntheticKind::blobs, 10, 5, seed, 2.0, 1.0}));
  auto obj = std::make_shared<const Objective>(Objective::logistic(data).with_regularizer(Regularizer::norm2_squared, 0.1));
  const ReferenceSolution ref = solve_reference(*obj, 1e-10);
  const double L = obj->smoothness_bound(kZooRadius);
  RunConfig config;
  config.objective = obj;
  config.schedule = ScheduleSpec::paper_optimal(1.0, 0.05, L);
  config.seed = seed;
  config.iterations = steps;
  config.w0 = Vector(obj->dimension(), 2.0);
  config.keep_iterates = true;
  const RunTrace trace = sgd_run(config);
  std::vector<Vector> traj(trace.iterates.begin(), trace.iterates.end() - 1);
  const RecurrenceReport rep = recurrence_check(*obj, config.schedule, ref, L, traj);
  return {"", rep.violations == 0,
          fmt("%.0f steps, %.0f violations, worst margin %.3g", static_cast<double>(rep.checked),
              static_cast<double>(rep.violations), rep.worst_margin)};
}

CheckResult check_delta_envelope(std::size_t samples, std::uint64_t seed) {
  std::size_t failures = 0;
  std::ostringstream detail;
  const std::vector<std::pair<std::string, std::function<double(double)>>> cases = {
      {"quadratic", [](double w) { return w * w; }},
      {"quartic", [](double w) { return w * w * w * w; }},
      {"quartic+quadratic", [](double w) { return w * w * w * w + w * w; }},
      {"G", [](double w) { const double x[1] = {w}; return regularizer_G_value(x); }},
  };
  for (const auto& [name, f] : cases) {
    GapFunctions gap{[f](std::span<const double> w) { return f(w[0]); },
                     [](std::span<const double> w) { return w[0] * w[0]; }};
    const DeltaEstimate est = estimate_delta_auto(gap, {{0.0}, 1.0, samples, seed});
    std::size_t local = 0;
    const auto& e = est.epsilon_grid;
    const auto& dl = est.delta_values;
    for (std::size_t k = 0; k < dl.size(); ++k) {
      if (!est.empty_band[k] && dl[k] < est.rho_values[k] - 1e-12) ++local;
      if (k > 0 && dl[k] < dl[k - 1] - 1e-12) ++local;
      if (k > 1) {
        const double s1 = (dl[k - 1] - dl[k - 2]) / (e[k - 1] - e[k - 2]);
        const double s2 = (dl[k] - dl[k - 1]) / (e[k] - e[k - 1]);
        if (s2 > s1 + 1e-12 * std::max(1.0, std::abs(s1))) ++local;
      }
    }
    failures += local;
    detail << name << ": h=" << est.fitted_h << " ";
  }
  return {"", failures == 0, std::to_string(failures) + " envelope failures; " + detail.str()};
}

CheckResult check_determinism() {
  auto data = std::make_shared<const Dataset>(synthesize_dataset({SyntheticKind::blobs, 50, 4, 9, 3.0, 1.0}));
  auto obj = std::make_shared<const Objective>(Objective::logistic(data).with_regularizer(Regularizer::norm2_squared, 0.01));
  const ReferenceSolution r1 = solve_reference(*obj, 1e-10), r2 = solve_reference(*obj, 1e-10);
  bool same = r1.w_star == r2.w_star && r1.f_min == r2.f_min && r1.noise_constant == r2.noise_constant;
  RunConfig config;
  config.objective = obj;
  config.schedule = ScheduleSpec::power_law(0.1, 0.5);
  config.iterations = 2000;
  config.record_stride = 100;
  config.reference = r1;
  config.seed = 42;
  const RunTrace a = sgd_run(config), b = sgd_run(config);
  for (std::size_t k = 0; k < a.records.size(); ++k)
    same = same && a.records[k].F == b.records[k].F && a.records[k].Y == b.records[k].Y;
  same = same && a.final_w == b.final_w;
  return {"", same, same ? "bit-identical reference and traces" : "outputs differ between identical calls"};
}

std::vector<CheckResult> run_verification(const VerifyOptions& options) {
  const bool q = options.quick;
  const std::uint64_t s = options.seed;
  std::vector<CheckResult> out;
  out.push_back(timed_check("gradient finite differences", [&] { return check_gradients(s); }));
  out.push_back(timed_check("co-coercivity", [&] { return check_cocoercivity(q ? 2000 : 10000, s); }));
  out.push_back(timed_check("component convexity", [&] { return check_convexity(q ? 2000 : 10000, s); }));
  out.push_back(timed_check("G curvature inequality", [&] { return check_g_inequality(q ? 10000 : 100000, s); }));
  out.push_back(timed_check("omega shape and breakpoint", [&] { return check_omega_shape(s); }));
  out.push_back(timed_check("omega separability for lambda G", [&] { return check_omega_separability(10000, s); }));
  out.push_back(timed_check("v closed form vs numeric", [] { return check_v_closed_vs_numeric(); }));
  out.push_back(timed_check("c_alpha closed form vs brute force", [&] { return check_c_alpha(50, s); }));
  out.push_back(timed_check("ODE residual of C_bar", [] { return check_ode_residual(); }));
  out.push_back(timed_check("C <= C_bar and quadrature M", [] { return check_envelope_quadrature(); }));
  out.push_back(timed_check("exact recurrence oracle", [&] { return check_recurrence(q ? 2000 : 10000, s); }));
  out.push_back(timed_check("delta envelope monotone and concave", [&] { return check_delta_envelope(q ? 20000 : 100000, s); }));
  out.push_back(timed_check("determinism", [] { return check_determinism(); }));
  return out;
}

}  // namespace curvesgd
