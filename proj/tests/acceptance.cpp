// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "curvesgd/engine.hpp"
#include "curvesgd/libsvm.hpp"
#include "curvesgd/omega.hpp"
#include "curvesgd/results.hpp"
#include "curvesgd/schedule.hpp"
#include "curvesgd/synthetic.hpp"
#include "curvesgd/verify.hpp"

using namespace curvesgd;
namespace fs = std::filesystem;

namespace {

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<CheckResult()> body;
};

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> s(count);
  for (std::size_t k = 0; k < count; ++k) s[k] = first + k;
  return s;
}

// 0 plus round(10^(k/per_decade)) up to `last`, deduplicated
std::vector<std::size_t> log_records(std::size_t last, int per_decade) {
  std::vector<std::size_t> t{0};
  for (int k = 0;; ++k) {
    const double x = std::round(std::pow(10.0, static_cast<double>(k) / per_decade));
    if (x > static_cast<double>(last)) break;
    t.push_back(static_cast<std::size_t>(x));
  }
  t.push_back(last);
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

struct RateRun {
  Benchmark bench;
  ScheduleSpec schedule;
  SweepResult sweep;
  double slope = 0.0;
};

RateRun rate_run(Benchmark bench, std::size_t iterations, std::size_t seeds) {
  RateRun out{std::move(bench), {}, {}, 0.0};
  out.schedule = out.bench.paper_schedule();
  RunConfig c;
  c.objective = out.bench.objective;
  c.schedule = out.schedule;
  c.iterations = iterations;
  c.record_at = log_records(iterations, 20);
  c.region_radius = out.bench.region_radius;
  c.reference = out.bench.reference;
  out.sweep = multi_seed_sweep(c, seed_range(1, seeds));
  std::vector<double> t, y;
  for (const TraceRecord& r : out.sweep.mean) {
    t.push_back(static_cast<double>(r.t));
    y.push_back(r.Y);
  }
  out.slope = rate_slope_fit(t, y, 1e3, 1e5);
  return out;
}

std::size_t total_violations(const SweepResult& s) {
  std::size_t v = 0;
  for (const RunTrace& r : s.runs) v += r.violations;
  return v;
}

// strongly convex h = 1 run shared by criteria 7 and 10
const RateRun& ridge_rate_run() {
  static const RateRun run = rate_run(ridge_benchmark(), 100'000, 32);
  return run;
}

CheckResult criterion_rates() {
  const RateRun& ridge = ridge_rate_run();
  const RateRun g = rate_run(exp_cosh_benchmark(), 100'000, 32);
  const bool ok1 = std::abs(ridge.slope + 1.0) <= 0.15;
  const bool ok2 = std::abs(g.slope + 1.0 / 3.0) <= 0.15;
  return {"", ok1 && ok2,
          fmt("ridge h=1 slope %.4f (target -1 +- 0.15); G h=1/2 slope %.4f (target -0.3333 +- 0.15); "
              "region violations %.0f",
              ridge.slope, g.slope, static_cast<double>(total_violations(ridge.sweep) + total_violations(g.sweep)))};
}

// Mean final smoothed epoch F for each power-law h, in h order.
std::vector<double> final_losses(const Benchmark& bench, std::size_t epochs, const std::vector<double>& hs) {
  std::vector<double> out;
  const std::size_t n = bench.objective->component_count();
  for (double h : hs) {
    RunConfig c;
    c.objective = bench.objective;
    c.schedule = ScheduleSpec::power_law(0.1, h);
    c.iterations = epochs * n;
    c.record_stride = c.iterations;
    c.region_radius = bench.region_radius;
    c.record_epoch_values = true;
    const SweepResult s = multi_seed_sweep(c, seed_range(1, 10));
    out.push_back(s.smoothed_epoch_F.back());
  }
  return out;
}

std::size_t rank_of(const std::vector<double>& values, std::size_t index) {
  std::size_t r = 1;
  for (std::size_t k = 0; k < values.size(); ++k)
    if (k != index && values[k] < values[index]) ++r;
  return r;
}

CheckResult criterion_step_sizes() {
  const std::vector<double> hs{0.0, 0.25, 0.5, 0.75, 1.0};
  const Benchmark ridge = ridge_benchmark();
  const Benchmark g = exp_cosh_benchmark();
  const std::vector<double> fr = final_losses(ridge, 30, hs);
  const std::vector<double> fg = final_losses(g, 100, hs);
  std::ostringstream detail;
  detail.precision(6);
  detail << "ridge final F:";
  for (std::size_t k = 0; k < hs.size(); ++k) detail << " h=" << hs[k] << ":" << fr[k];
  detail << "; G final F:";
  for (std::size_t k = 0; k < hs.size(); ++k) detail << " h=" << hs[k] << ":" << fg[k];
  const std::size_t ridge_rank = rank_of(fr, 4), g_rank = rank_of(fg, 2);
  detail << "; rank of h=1 on ridge " << ridge_rank << ", rank of h=0.5 on G " << g_rank;
  return {"", ridge_rank == 1 && g_rank <= 2, detail.str()};
}

CheckResult criterion_delta() {
  SampleRegion region;
  region.center = {0.0};
  region.radius = 1.0;
  const double mu = 2.0;
  GapFunctions quad{[mu](std::span<const double> w) { return 0.5 * mu * w[0] * w[0]; },
                    [](std::span<const double> w) { return w[0] * w[0]; }};
  const DeltaEstimate q = estimate_delta_auto(quad, region);
  // grid resolution: the level-set band is +-2% of epsilon
  double worst = 0.0;
  bool quad_ok = true;
  for (std::size_t k = 0; k < q.epsilon_grid.size(); ++k) {
    if (q.empty_band[k]) {
      quad_ok = false;
      continue;
    }
    const double exact = 2.0 / mu * q.epsilon_grid[k];
    worst = std::max(worst, std::abs(q.delta_values[k] - exact) / exact);
  }
  quad_ok = quad_ok && worst <= 0.02 + 1e-12;

  GapFunctions quartic{[](std::span<const double> w) { return std::pow(w[0], 4); },
                       [](std::span<const double> w) { return w[0] * w[0]; }};
  const double h4 = estimate_delta_auto(quartic, region).fitted_h;

  const Objective g = Objective::zero(1).with_regularizer(Regularizer::exp_cosh, 1.0);
  const double hg = fit_curvature(g, solve_reference(g, 1e-10));
  const bool ok = quad_ok && std::abs(h4 - 0.5) <= 0.02 && std::abs(hg - 0.5) <= 0.05;
  return {"", ok,
          fmt("quadratic max relative deviation %.4f (band 0.02); w^4 h=%.4f; lambda G h=%.4f", worst, h4, hg)};
}

CheckResult criterion_envelope() {
  const RateRun& run = ridge_rate_run();
  const Benchmark& b = run.bench;
  const double Y0 = squared_norm(b.reference.w_star);  // w0 = 0
  const SolutionConstants k = solution_constants(run.schedule, b.reference.noise_constant, Y0);
  std::size_t violations = 0;
  double worst_ratio = 0.0;
  for (const TraceRecord& r : run.sweep.mean) {
    const double bound = rate_bound(run.schedule, k.A, k.B, static_cast<double>(r.t));
    worst_ratio = std::max(worst_ratio, r.Y / bound);
    if (r.Y > bound) ++violations;
  }
  return {"", violations == 0,
          fmt("%.0f records, %.0f above the bound, max mean-Y/bound %.4g (A=%.4g)",
              static_cast<double>(run.sweep.mean.size()), static_cast<double>(violations), worst_ratio, k.A)};
}

CheckResult criterion_plumbing() {
  std::vector<std::string> failures;
  // LIBSVM golden parse
  const Dataset d = parse_libsvm_text("+1 1:0.5 3:-2\n-1 2:1.25\n\n+1 1:1e-3 2:4 4:7\n");
  const bool golden = d.size() == 3 && d.dimension() == 4 && d[0].to_dense() == Vector{0.5, 0.0, -2.0, 0.0} &&
                      d[1].to_dense() == Vector{0.0, 1.25, 0.0, 0.0} && d[2].to_dense() == Vector{1e-3, 4.0, 0.0, 7.0} &&
                      d[0].label == 1.0 && d[1].label == -1.0 && d[2].label == 1.0;
  if (!golden) failures.push_back("libsvm golden");
  const Dataset m = parse_libsvm_text("2 1:1\n1 1:0\n");
  if (!(m[0].label == -1.0 && m[1].label == 1.0)) failures.push_back("label mapping");
  bool line_reported = false;
  try {
    parse_libsvm_text("+1 1:1\n+1 3:1 2:1\n");
  } catch (const ParseError& e) {
    line_reported = e.line() == 2;
  }
  if (!line_reported) failures.push_back("parse error line");

  // CSV round trip and deterministic re-run
  auto data = std::make_shared<const Dataset>(synthesize_dataset({SyntheticKind::blobs, 30, 3, 5, 3.0, 1.0}));
  RunConfig c;
  c.objective = std::make_shared<const Objective>(Objective::logistic(data).with_regularizer(Regularizer::norm2_squared, 0.01));
  c.schedule = ScheduleSpec::power_law(0.1, 0.5);
  c.reference = solve_reference(*c.objective, 1e-10);
  c.iterations = 300;
  c.record_stride = 30;
  c.record_epoch_values = true;
  const SweepResult s1 = multi_seed_sweep(c, {1, 2, 3});
  const SweepResult s2 = multi_seed_sweep(c, {1, 2, 3});
  const std::string t1 = format_results(result_rows("accept_0", s1, 30));
  const std::string t2 = format_results(result_rows("accept_0", s2, 30));
  if (t1 != t2) failures.push_back("re-run differs");
  const fs::path path = fs::temp_directory_path() / "curvesgd_acceptance" / "roundtrip.csv";
  write_results(result_rows("accept_0", s1, 30), path);
  if (format_results(read_results(path)) != t1) failures.push_back("CSV round trip");
  std::string joined;
  for (const auto& f : failures) joined += (joined.empty() ? "" : ", ") + f;
  return {"", failures.empty(), failures.empty() ? "libsvm golden, CSV round trip, re-run equality exact" : joined};
}

}  // namespace

int main() {
  const std::uint64_t seed = 1;
  const std::vector<Criterion> criteria = {
      {1, "G curvature inequality", 10, [&] { return check_g_inequality(100'000, seed); }},
      {2, "v closed form vs numeric inversion", 5, [] { return check_v_closed_vs_numeric(); }},
      {3, "c_alpha closed form vs brute force", 10, [&] { return check_c_alpha(50, seed); }},
      {4, "ODE residual of C_bar", 1, [] { return check_ode_residual(); }},
      {5, "C <= C_bar and quadrature M", 30, [] { return check_envelope_quadrature(); }},
      {6, "exact recurrence oracle", 30, [&] { return check_recurrence(10'000, seed); }},
      {7, "rate slopes", 300, criterion_rates},
      {8, "step-size cross-check", 300, criterion_step_sizes},
      {9, "delta estimator oracles", 60, criterion_delta},
      {10, "envelope dominance", 300, criterion_envelope},
      {11, "plumbing", 60, criterion_plumbing},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    CheckResult r = timed_check(c.name, c.body);
    const bool in_time = r.seconds <= c.budget_seconds;
    const bool pass = r.passed && in_time;
    if (!in_time) r.detail += fmt(" [over the %.0f s budget]", c.budget_seconds);
    std::printf("%s  criterion %2d  %-38s %8.2fs  %s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), r.seconds,
                r.detail.c_str());
    std::fflush(stdout);
    failed += !pass;
  }
  std::printf("%s: %d of %zu criteria passed\n", failed ? "FAILED" : "OK", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed ? 1 : 0;
}
