#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <memory>
#include <vector>

#include "curvesgd/engine.hpp"
#include "curvesgd/synthetic.hpp"

using namespace curvesgd;

namespace {

std::shared_ptr<const Objective> scalar_least_squares(const std::vector<double>& targets) {
  std::vector<LabeledExample> ex;
  for (double b : targets) ex.push_back(LabeledExample::dense(std::vector<double>{1.0}, b));
  return std::make_shared<const Objective>(Objective::least_squares(std::make_shared<const Dataset>(std::move(ex), 1)));
}

std::shared_ptr<const Objective> small_logistic(std::uint64_t seed = 5) {
  auto data = std::make_shared<const Dataset>(synthesize_dataset({SyntheticKind::blobs, 10, 3, seed, 2.0, 1.0}));
  return std::make_shared<const Objective>(Objective::logistic(data).with_regularizer(Regularizer::norm2_squared, 0.1));
}

bool same_trace(const RunTrace& a, const RunTrace& b) {
  if (a.records.size() != b.records.size() || a.final_w != b.final_w || a.epoch_F != b.epoch_F) return false;
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    const TraceRecord &x = a.records[k], &y = b.records[k];
    if (x.t != y.t || x.eta != y.eta || x.F != y.F || x.violation != y.violation) return false;
    if (std::isnan(x.E) != std::isnan(y.E) || (!std::isnan(x.E) && (x.E != y.E || x.Y != y.Y))) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("one-dimensional least squares run") {
  RunConfig c;
  c.objective = scalar_least_squares({1.0});
  c.schedule = ScheduleSpec::constant(0.25);
  c.iterations = 20;
  c.keep_iterates = true;
  const RunTrace trace = sgd_run(c);
  REQUIRE(trace.iterates.size() == 21);
  CHECK(trace.iterates[0][0] == 0.0);
  CHECK(trace.iterates[1][0] == 0.5);
  for (std::size_t t = 0; t <= 20; ++t) CHECK(trace.iterates[t][0] == doctest::Approx(1.0 - std::pow(0.5, t)).epsilon(1e-15));
  CHECK(trace.records.back().t == 20);
  CHECK(trace.final_w[0] == trace.iterates.back()[0]);
}

TEST_CASE("record grids") {
  RunConfig c;
  c.objective = scalar_least_squares({1.0});
  c.iterations = 10;
  c.record_stride = 4;
  CHECK(c.record_grid() == std::vector<std::size_t>{0, 4, 8, 10});
  c.record_at = {7, 3, 3, 50, 0};
  CHECK(c.record_grid() == std::vector<std::size_t>{0, 3, 7});
  c.record_stride = 0;
  CHECK_THROWS(c.validate());
  c.record_stride = 1;
  c.iterations = 0;
  CHECK_THROWS(c.validate());
}

TEST_CASE("runs are deterministic") {
  RunConfig c;
  c.objective = small_logistic();
  c.schedule = ScheduleSpec::paper_optimal(1.0, 0.05, c.objective->smoothness_bound(3.0));
  c.reference = solve_reference(*c.objective, 1e-10);
  c.iterations = 500;
  c.record_stride = 7;
  c.record_epoch_values = true;
  c.seed = 42;
  const RunTrace a = sgd_run(c), b = sgd_run(c);
  CHECK(same_trace(a, b));
  CHECK(a.epoch_F.size() == 51);
  c.seed = 43;
  CHECK_FALSE(same_trace(a, sgd_run(c)));
  for (const TraceRecord& r : a.records) {
    CHECK(r.Y >= 0.0);
    CHECK(r.E >= -1e-10);
  }
}

TEST_CASE("region violations are counted, not corrected") {
  RunConfig c;
  c.objective = scalar_least_squares({5.0});
  c.schedule = ScheduleSpec::constant(0.25);
  c.iterations = 10;
  c.region_radius = 3.0;
  const RunTrace trace = sgd_run(c);
  // w_t = 5 (1 - 0.5^t) exceeds 3 from t = 2 on
  CHECK(trace.violations == 9);
  CHECK(trace.final_w[0] > 4.99);
  CHECK(trace.records.back().violation);
  CHECK_FALSE(trace.records.front().violation);
}

TEST_CASE("non-finite iterates abort the run") {
  RunConfig c;
  c.objective = scalar_least_squares({1.0});
  c.schedule = ScheduleSpec::constant(10.0);
  c.iterations = 100000;
  CHECK_THROWS_AS(sgd_run(c), NumericalError);
}

TEST_CASE("sweep aggregation") {
  RunConfig c;
  c.objective = small_logistic();
  c.schedule = ScheduleSpec::constant(0.05);
  c.reference = solve_reference(*c.objective, 1e-10);
  c.iterations = 200;
  c.record_epoch_values = true;

  SUBCASE("single seed is the identity") {
    const SweepResult s = multi_seed_sweep(c, {9}, 1);
    c.seed = 9;
    const RunTrace t = sgd_run(c);
    REQUIRE(s.mean.size() == t.records.size());
    for (std::size_t k = 0; k < t.records.size(); ++k) {
      CHECK(s.mean[k].F == t.records[k].F);
      CHECK(s.mean[k].Y == t.records[k].Y);
    }
    CHECK(s.mean_epoch_F == t.epoch_F);
  }
  SUBCASE("thread count does not change results") {
    const SweepResult a = multi_seed_sweep(c, {1, 2, 3, 4, 5}, 1);
    const SweepResult b = multi_seed_sweep(c, {1, 2, 3, 4, 5}, 4);
    for (std::size_t k = 0; k < a.runs.size(); ++k) CHECK(same_trace(a.runs[k], b.runs[k]));
    CHECK(a.smoothed_epoch_F == b.smoothed_epoch_F);
  }
  SUBCASE("failures propagate") {
    c.schedule = ScheduleSpec::constant(1e6);
    c.iterations = 5000;
    CHECK_THROWS_AS(multi_seed_sweep(c, {1, 2, 3}, 2), NumericalError);
  }
  CHECK_THROWS(multi_seed_sweep(c, {}, 1));
}

TEST_CASE("mean of two traces is the midpoint") {
  RunTrace a, b;
  for (std::size_t t = 0; t < 4; ++t) {
    a.records.push_back({t, 0.1, 1.0 * t, 2.0 * t, 3.0, false});
    b.records.push_back({t, 0.1, 3.0 * t, 0.0, 5.0, t == 2});
  }
  const auto mean = mean_trace({a, b});
  for (std::size_t t = 0; t < 4; ++t) {
    CHECK(mean[t].F == 2.0 * t);
    CHECK(mean[t].E == 1.0 * t);
    CHECK(mean[t].Y == 4.0);
    CHECK(mean[t].violation == (t == 2));
  }
  b.records.pop_back();
  CHECK_THROWS(mean_trace({a, b}));
}

TEST_CASE("moving mean") {
  const std::vector<double> flat(6, 2.5);
  for (double v : moving_mean(flat, 3)) CHECK(v == 2.5);
  const std::vector<double> ramp{3.0, 6.0, 9.0, 12.0};
  const std::vector<double> m = moving_mean(ramp, 3);
  CHECK(m[0] == 3.0);
  CHECK(m[1] == 4.5);
  CHECK(m[2] == 6.0);
  CHECK(m[3] == 9.0);
  CHECK_THROWS(moving_mean(ramp, 0));
}

TEST_CASE("tail average") {
  std::vector<double> ones(20, 1.0);
  CHECK(tail_average(ones, 5) == 1.0);
  std::vector<double> inv(10);
  for (std::size_t i = 1; i < inv.size(); ++i) inv[i] = 1.0 / static_cast<double>(i);
  CHECK(tail_average(inv, 2) == doctest::Approx(7.0 / 24.0).epsilon(1e-15));
  double prev = tail_average(inv, 1);
  for (std::size_t t = 2; 2 * t < inv.size(); ++t) {
    CHECK(tail_average(inv, t) <= prev);
    prev = tail_average(inv, t);
  }
  CHECK_THROWS(tail_average(inv, 5));
  CHECK_THROWS(tail_average(inv, 0));

  SweepResult s;
  for (std::size_t t = 0; t <= 6; ++t) s.mean.push_back({t, 0.0, 0.0, t == 0 ? 0.0 : 1.0 / t, 0.0, false});
  CHECK(tail_average(s, 2) == doctest::Approx(7.0 / 24.0).epsilon(1e-15));
  CHECK(tail_average(s, 3) == doctest::Approx((0.25 + 0.2 + 1.0 / 6.0) / 3.0).epsilon(1e-15));
  CHECK_THROWS(tail_average(s, 4));
}

TEST_CASE("rate slope fit") {
  std::vector<double> t, a, b, c;
  for (double x = 1e3; x <= 1e5 * (1 + 1e-9); x *= std::pow(10.0, 0.1)) {
    t.push_back(x);
    a.push_back(1.0 / x);
    b.push_back(5.0 * std::pow(x, -1.0 / 3.0));
    c.push_back(1.0 / x + 100.0 / (x * x));
  }
  CHECK(rate_slope_fit(t, a, 1e3, 1e5 * 1.0001) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(rate_slope_fit(t, b, 1e3, 1e5 * 1.0001) == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  CHECK(std::abs(rate_slope_fit(t, c, 1e3, 1e5 * 1.0001) + 1.0) <= 0.02);
  CHECK_THROWS(rate_slope_fit(t, a, 1e3, 1.5e3));
  std::vector<double> bad = a;
  bad[3] = 0.0;
  CHECK_THROWS(rate_slope_fit(t, bad, 1e3, 1e5 * 1.0001));
}

TEST_CASE("recurrence oracle") {
  SUBCASE("convex finite sum") {
    auto obj = small_logistic(8);
    const double L = obj->smoothness_bound(3.0);
    RunConfig c;
    c.objective = obj;
    c.schedule = ScheduleSpec::paper_optimal(1.0, 0.05, L);
    c.reference = solve_reference(*obj, 1e-10);
    c.iterations = 3000;
    c.keep_iterates = true;
    c.w0 = Vector(3, 2.0);
    const RunTrace trace = sgd_run(c);
    const RecurrenceReport r = recurrence_check(*obj, c.schedule, *c.reference, L, trace.iterates);
    CHECK(r.checked == 3001);
    CHECK(r.violations == 0);
  }
  SUBCASE("single quadratic reduces to an identity") {
    auto obj = scalar_least_squares({2.0});
    const ReferenceSolution ref = solve_reference(*obj, 1e-12);
    const double eta = 0.2;
    const std::vector<Vector> traj{{-1.0}, {0.5}, {7.0}};
    const std::vector<double> etas(3, eta);
    const RecurrenceReport r = recurrence_check(*obj, ref, 2.0, traj, etas);
    CHECK(r.violations == 0);
    // rhs - lhs = Y (1 - 2 eta + 4 eta^2) - (1 - 2 eta)^2 Y = 2 eta Y, smallest at w = 0.5
    CHECK(r.worst_margin == doctest::Approx(2.0 * eta * 2.25).epsilon(1e-9));
  }
  SUBCASE("zero step") {
    auto obj = small_logistic(3);
    const ReferenceSolution ref = solve_reference(*obj, 1e-10);
    const std::vector<Vector> traj{{0.3, -0.2, 1.0}, {2.0, 2.0, -2.0}};
    const std::vector<double> etas(2, 0.0);
    const RecurrenceReport r = recurrence_check(*obj, ref, obj->smoothness_bound(3.0), traj, etas);
    CHECK(r.violations == 0);
    CHECK(std::abs(r.worst_margin) <= 1e-14);
  }
  SUBCASE("preconditions") {
    auto obj = scalar_least_squares({2.0});
    const ReferenceSolution ref = solve_reference(*obj, 1e-12);
    const std::vector<Vector> traj{{0.0}};
    CHECK_THROWS(recurrence_check(*obj, ref, 2.0, traj, std::vector<double>{0.6}));
    CHECK_THROWS(recurrence_check(*obj, ref, 2.0, traj, std::vector<double>{}));
  }
}

TEST_CASE("thread count from the environment") {
  setenv("CURVESGD_THREADS", "3", 1);
  CHECK(sweep_threads() == 3);
  setenv("CURVESGD_THREADS", "zero", 1);
  CHECK_THROWS(sweep_threads());
  unsetenv("CURVESGD_THREADS");
  CHECK(sweep_threads() >= 1);
}
