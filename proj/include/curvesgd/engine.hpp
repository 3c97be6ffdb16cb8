#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "curvesgd/objectives.hpp"
#include "curvesgd/schedule.hpp"
#include "curvesgd/vector.hpp"

namespace curvesgd {

/// Thrown when an iterate stops being finite.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::shared_ptr<const Objective> objective;
  ScheduleSpec schedule;
  std::uint64_t seed = 1;
  std::size_t iterations = 1;
  /// Record w_t for t = 0, stride, 2 stride, ... and always t = iterations.
  std::size_t record_stride = 1;
  /// Explicit record iterations; replaces the stride grid when nonempty.
  std::vector<std::size_t> record_at;
  double region_radius = 3.0;
  Vector w0;  // empty -> zero vector
  /// Enables E_t and Y_t.
  std::optional<ReferenceSolution> reference;
  /// Evaluate F at the end of every epoch (n iterations).
  bool record_epoch_values = false;
  /// Keep a copy of w_t at every record.
  bool keep_iterates = false;

  void validate() const;
  std::vector<std::size_t> record_grid() const;
};

struct TraceRecord {
  std::size_t t = 0;
  /// Step applied at iteration t (the one producing w_{t+1}).
  double eta = 0.0;
  double F = 0.0;
  /// NaN without a reference solution.
  double E = 0.0;
  double Y = 0.0;
  bool violation = false;
};

struct RunTrace {
  std::uint64_t seed = 0;
  std::vector<TraceRecord> records;
  /// F(w_{k n}) for k = 0, 1, ..., epochs.
  std::vector<double> epoch_F;
  /// Number of iterates with ||w_t||_inf > region_radius.
  std::size_t violations = 0;
  std::vector<Vector> iterates;
  Vector final_w;
};

/// SGD: w_{t+1} = w_t - eta_t grad f_{xi_t}(w_t), xi_t uniform with replacement.
/// Iteration index t uses step_size(schedule, t).
RunTrace sgd_run(const RunConfig& config);

struct SweepResult {
  std::vector<RunTrace> runs;
  /// Pointwise mean over seeds of F, E, Y on the common record grid.
  std::vector<TraceRecord> mean;
  std::vector<double> mean_epoch_F;
  /// Trailing length-3 moving mean of mean_epoch_F.
  std::vector<double> smoothed_epoch_F;
};

/// Worker count from CURVESGD_THREADS, else hardware concurrency.
std::size_t sweep_threads();

SweepResult multi_seed_sweep(const RunConfig& config, const std::vector<std::uint64_t>& seeds);
SweepResult multi_seed_sweep(const RunConfig& config, const std::vector<std::uint64_t>& seeds, std::size_t threads);

/// Trailing window mean; the first entries average the available prefix.
std::vector<double> moving_mean(std::span<const double> series, std::size_t window = 3);

/// Pointwise mean of traces sharing one record grid.
std::vector<TraceRecord> mean_trace(const std::vector<RunTrace>& runs);

/// A_t = (1/t) sum_{i=t+1}^{2t} series[i].
double tail_average(std::span<const double> series, std::size_t t);
/// Same over the mean E of a sweep recorded at every iteration.
double tail_average(const SweepResult& sweep, std::size_t t);

/// Least-squares slope of log(value) against log(t) over t in [t_lo, t_hi].
double rate_slope_fit(std::span<const double> t, std::span<const double> values, double t_lo, double t_hi);

struct RecurrenceReport {
  std::size_t checked = 0;
  std::size_t violations = 0;
  /// min over t of rhs - lhs
  double worst_margin = 0.0;
};

/// Checks E[Y_{t+1} | w_t] <= Y_t - 2 eta_t (1 - eta_t L) E_t + 2 eta_t^2 N + tolerance
/// with the conditional expectation computed exactly over all n components.
/// trajectory[k] is w_k and etas[k] the step applied to it.
RecurrenceReport recurrence_check(const Objective& objective, const ReferenceSolution& reference, double L,
                                  const std::vector<Vector>& trajectory, std::span<const double> etas,
                                  double tolerance = 1e-10);
RecurrenceReport recurrence_check(const Objective& objective, const ScheduleSpec& schedule,
                                  const ReferenceSolution& reference, double L,
                                  const std::vector<Vector>& trajectory, double tolerance = 1e-10);

}  // namespace curvesgd
