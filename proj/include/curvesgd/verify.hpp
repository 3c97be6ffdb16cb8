#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "curvesgd/objectives.hpp"
#include "curvesgd/schedule.hpp"

namespace curvesgd {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Runs fn, catching exceptions as failures and timing it.
CheckResult timed_check(const std::string& name, const std::function<CheckResult()>& fn);

// --- benchmark instances -----------------------------------------------------

/// A problem with everything the rate machinery needs.
struct Benchmark {
  std::string name;
  std::shared_ptr<const Objective> objective;
  ReferenceSolution reference;
  double h = 1.0;
  double mu = 0.0;
  double beta = 0.0;
  double L = 0.0;
  double region_radius = 3.0;

  ScheduleSpec paper_schedule() const { return ScheduleSpec::paper_optimal(h, beta, L); }
};

/// Ridge least squares: n = 1000, d = 10, unit-norm rows, noiseless planted
/// targets, (lambda/2)||w||^2 with lambda = 10; h = 1, mu = lambda, beta = mu/2.
Benchmark ridge_benchmark(std::uint64_t data_seed = 3);

/// Linear loss on centered N(0, 7^2 I) features plus lambda G, n = 100, d = 2,
/// lambda = 1, R = 3; h = 1/2, mu = lambda/(9d), beta = mu.
Benchmark exp_cosh_benchmark(std::uint64_t data_seed = 1);

/// mu of the curvature-1/2 comparison function for lambda G in dimension d.
double exp_cosh_mu(double lambda, std::size_t d);

// --- individual checks ---------------------------------------------------------

CheckResult check_gradients(std::uint64_t seed);
CheckResult check_cocoercivity(std::size_t pairs, std::uint64_t seed);
CheckResult check_convexity(std::size_t pairs, std::uint64_t seed);
CheckResult check_g_inequality(std::size_t pairs, std::uint64_t seed);
CheckResult check_omega_shape(std::uint64_t seed);
CheckResult check_omega_separability(std::size_t samples, std::uint64_t seed);
CheckResult check_v_closed_vs_numeric();
CheckResult check_c_alpha(std::size_t samples, std::uint64_t seed);
CheckResult check_ode_residual();
CheckResult check_envelope_quadrature();
CheckResult check_recurrence(std::size_t steps, std::uint64_t seed);
CheckResult check_delta_envelope(std::size_t samples, std::uint64_t seed);
CheckResult check_determinism();

struct VerifyOptions {
  bool quick = false;
  std::uint64_t seed = 1;
};

std::vector<CheckResult> run_verification(const VerifyOptions& options = {});

}  // namespace curvesgd
