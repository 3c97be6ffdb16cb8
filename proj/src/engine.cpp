#include "curvesgd/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "curvesgd/random.hpp"

namespace curvesgd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_finite(std::span<const double> w, std::size_t t) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i]))
      throw NumericalError("sgd: non-finite iterate at t=" + std::to_string(t) + ", coordinate " + std::to_string(i));
  }
}

}  // namespace

void RunConfig::validate() const {
  if (!objective) throw std::invalid_argument("run: no objective");
  schedule.validate();
  if (iterations < 1) throw std::invalid_argument("run: iterations must be >= 1");
  if (record_stride < 1) throw std::invalid_argument("run: record_stride must be >= 1");
  if (!(region_radius > 0.0)) throw std::invalid_argument("run: region_radius must be positive");
  if (!w0.empty() && w0.size() != objective->dimension()) throw std::invalid_argument("run: w0 dimension mismatch");
  if (reference && reference->w_star.size() != objective->dimension())
    throw std::invalid_argument("run: reference dimension mismatch");
}

std::vector<std::size_t> RunConfig::record_grid() const {
  std::vector<std::size_t> grid;
  if (!record_at.empty()) {
    for (std::size_t t : record_at)
      if (t <= iterations) grid.push_back(t);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
  }
  for (std::size_t t = 0; t <= iterations; t += record_stride) grid.push_back(t);
  if (grid.back() != iterations) grid.push_back(iterations);
  return grid;
}

RunTrace sgd_run(const RunConfig& config) {
  config.validate();
  const Objective& obj = *config.objective;
  const std::size_t n = obj.component_count();
  const std::size_t d = obj.dimension();
  const std::vector<std::size_t> grid = config.record_grid();

  RunTrace trace;
  trace.seed = config.seed;
  trace.records.reserve(grid.size());
  Vector w = config.w0.empty() ? Vector(d, 0.0) : config.w0;
  Vector g(d);
  Rng rng(config.seed);

  auto record = [&](std::size_t t, double step) {
    TraceRecord r;
    r.t = t;
    r.eta = step;
    r.F = obj.value(w);
    if (config.reference) {
      r.E = r.F - config.reference->f_min;
      r.Y = squared_distance(w, config.reference->w_star);
    } else {
      r.E = kNaN;
      r.Y = kNaN;
    }
    r.violation = max_abs(w) > config.region_radius;
    trace.records.push_back(r);
    if (config.keep_iterates) trace.iterates.push_back(w);
  };

  std::size_t next = 0;
  if (config.record_epoch_values) trace.epoch_F.push_back(obj.value(w));
  for (std::size_t t = 0;; ++t) {
    if (max_abs(w) > config.region_radius) ++trace.violations;
    const double step = step_size(config.schedule, static_cast<double>(t));
    if (next < grid.size() && grid[next] == t) {
      record(t, step);
      ++next;
    }
    if (t == config.iterations) break;
    const std::size_t i = rng.index(n);
    obj.component_gradient(i, w, g);
    axpy(-step, g, w);
    check_finite(w, t + 1);
    if (config.record_epoch_values && (t + 1) % n == 0) trace.epoch_F.push_back(obj.value(w));
  }
  trace.final_w = std::move(w);
  return trace;
}

std::size_t sweep_threads() {
  std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CURVESGD_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("CURVESGD_THREADS must be a positive integer");
  }
  return hw;
}

std::vector<double> moving_mean(std::span<const double> series, std::size_t window) {
  if (window == 0) throw std::invalid_argument("moving_mean: window must be >= 1");
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::size_t lo = i + 1 >= window ? i + 1 - window : 0;
    double sum = 0.0;
    for (std::size_t j = lo; j <= i; ++j) sum += series[j];
    out[i] = sum / static_cast<double>(i + 1 - lo);
  }
  return out;
}

std::vector<TraceRecord> mean_trace(const std::vector<RunTrace>& runs) {
  if (runs.empty()) throw std::invalid_argument("mean_trace: no runs");
  const std::size_t m = runs.front().records.size();
  std::vector<TraceRecord> mean(runs.front().records);
  for (auto& r : mean) r.F = r.E = r.Y = 0.0, r.violation = false;
  for (const RunTrace& run : runs) {
    if (run.records.size() != m) throw std::invalid_argument("mean_trace: record grids differ");
    for (std::size_t k = 0; k < m; ++k) {
      if (run.records[k].t != mean[k].t) throw std::invalid_argument("mean_trace: record grids differ");
      mean[k].F += run.records[k].F;
      mean[k].E += run.records[k].E;
      mean[k].Y += run.records[k].Y;
      mean[k].violation = mean[k].violation || run.records[k].violation;
    }
  }
  const double s = static_cast<double>(runs.size());
  for (auto& r : mean) r.F /= s, r.E /= s, r.Y /= s;
  return mean;
}

SweepResult multi_seed_sweep(const RunConfig& config, const std::vector<std::uint64_t>& seeds) {
  return multi_seed_sweep(config, seeds, sweep_threads());
}

SweepResult multi_seed_sweep(const RunConfig& config, const std::vector<std::uint64_t>& seeds, std::size_t threads) {
  if (seeds.empty()) throw std::invalid_argument("sweep: need at least one seed");
  config.validate();
  SweepResult result;
  result.runs.resize(seeds.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < seeds.size(); k = next++) {
      try {
        RunConfig c = config;
        c.seed = seeds[k];
        result.runs[k] = sgd_run(c);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t count = std::clamp<std::size_t>(threads, 1, seeds.size());
  if (count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < count; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  result.mean = mean_trace(result.runs);
  if (config.record_epoch_values) {
    const std::size_t epochs = result.runs.front().epoch_F.size();
    result.mean_epoch_F.assign(epochs, 0.0);
    for (const RunTrace& run : result.runs)
      for (std::size_t k = 0; k < epochs; ++k) result.mean_epoch_F[k] += run.epoch_F[k];
    for (double& v : result.mean_epoch_F) v /= static_cast<double>(result.runs.size());
    result.smoothed_epoch_F = moving_mean(result.mean_epoch_F, 3);
  }
  return result;
}

double tail_average(std::span<const double> series, std::size_t t) {
  if (t == 0) throw std::invalid_argument("tail_average: t must be >= 1");
  if (2 * t >= series.size()) throw std::out_of_range("tail_average: window exceeds trace");
  double s = 0.0;
  for (std::size_t i = t + 1; i <= 2 * t; ++i) s += series[i];
  return s / static_cast<double>(t);
}

double tail_average(const SweepResult& sweep, std::size_t t) {
  if (t == 0) throw std::invalid_argument("tail_average: t must be >= 1");
  const auto& mean = sweep.mean;
  auto it = std::lower_bound(mean.begin(), mean.end(), t + 1,
                             [](const TraceRecord& r, std::size_t v) { return r.t < v; });
  double s = 0.0;
  for (std::size_t i = t + 1; i <= 2 * t; ++i, ++it) {
    if (it == mean.end() || it->t != i) throw std::out_of_range("tail_average: window exceeds trace");
    s += it->E;
  }
  return s / static_cast<double>(t);
}

double rate_slope_fit(std::span<const double> t, std::span<const double> values, double t_lo, double t_hi) {
  require_same_size(t.size(), values.size(), "rate_slope_fit");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (!(values[i] > 0.0) || !(t[i] > 0.0)) throw std::domain_error("rate_slope_fit: values must be positive");
    lx.push_back(std::log(t[i]));
    ly.push_back(std::log(values[i]));
  }
  if (lx.size() < 8) throw std::invalid_argument("rate_slope_fit: need at least 8 points in the window");
  const double k = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
  mx /= k;
  my /= k;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

RecurrenceReport recurrence_check(const Objective& objective, const ReferenceSolution& reference, double L,
                                  const std::vector<Vector>& trajectory, std::span<const double> etas,
                                  double tolerance) {
  if (etas.size() < trajectory.size()) throw std::invalid_argument("recurrence_check: missing step sizes");
  if (!(L > 0.0) || std::isinf(L)) throw std::invalid_argument("recurrence_check: needs a finite smoothness bound");
  const std::size_t n = objective.component_count();
  const std::size_t d = objective.dimension();
  RecurrenceReport report;
  report.worst_margin = std::numeric_limits<double>::infinity();
  Vector g(d), next(d);
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const Vector& w = trajectory[k];
    const double step = etas[k];
    if (step < 0.0 || step > 1.0 / L) throw std::invalid_argument("recurrence_check: requires 0 <= eta_t <= 1/L");
    const double Y = squared_distance(w, reference.w_star);
    const double E = objective.value(w) - reference.f_min;
    double expected = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      objective.component_gradient(i, w, g);
      for (std::size_t j = 0; j < d; ++j) next[j] = w[j] - step * g[j];
      expected += squared_distance(next, reference.w_star);
    }
    expected /= static_cast<double>(n);
    const double rhs = Y - 2.0 * step * (1.0 - step * L) * E + 2.0 * step * step * reference.noise_constant;
    const double margin = rhs - expected;
    report.worst_margin = std::min(report.worst_margin, margin);
    if (expected > rhs + tolerance) ++report.violations;
    ++report.checked;
  }
  return report;
}

RecurrenceReport recurrence_check(const Objective& objective, const ScheduleSpec& schedule,
                                  const ReferenceSolution& reference, double L,
                                  const std::vector<Vector>& trajectory, double tolerance) {
  std::vector<double> etas(trajectory.size());
  for (std::size_t k = 0; k < etas.size(); ++k) etas[k] = step_size(schedule, static_cast<double>(k));
  return recurrence_check(objective, reference, L, trajectory, etas, tolerance);
}

}  // namespace curvesgd
