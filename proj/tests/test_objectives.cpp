#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "curvesgd/objectives.hpp"
#include "curvesgd/random.hpp"
#include "curvesgd/synthetic.hpp"

using namespace curvesgd;

namespace {

std::shared_ptr<const Dataset> one_example(std::vector<double> x, double y) {
  std::vector<LabeledExample> ex{LabeledExample::dense(x, y)};
  return std::make_shared<const Dataset>(std::move(ex), x.size());
}

std::shared_ptr<const Dataset> scalar_targets(const std::vector<double>& targets) {
  std::vector<LabeledExample> ex;
  for (double b : targets) ex.push_back(LabeledExample::dense(std::vector<double>{1.0}, b));
  return std::make_shared<const Dataset>(std::move(ex), 1);
}

Vector random_point(Rng& rng, std::size_t d, double radius) {
  Vector w(d);
  for (double& x : w) x = rng.uniform(-radius, radius);
  return w;
}

// max relative error of the gradient against central differences with step 1e-5
double fd_error(const std::function<double(std::span<const double>)>& f, std::span<const double> w,
                std::span<const double> grad) {
  const double step = 1e-5;
  Vector p(w.begin(), w.end());
  double worst = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    p[j] = w[j] + step;
    const double up = f(p);
    p[j] = w[j] - step;
    const double down = f(p);
    p[j] = w[j];
    const double fd = (up - down) / (2.0 * step);
    worst = std::max(worst, std::abs(fd - grad[j]) / std::max(1.0, std::abs(grad[j])));
  }
  return worst;
}

}  // namespace

TEST_CASE("logistic component values") {
  auto data = one_example({1.0, 0.0}, 1.0);
  const auto& ex = (*data)[0];
  CHECK(logistic_component_value(ex, std::vector<double>{0.0, 0.0}) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(logistic_component_value(ex, std::vector<double>{1.0, 5.0}) == doctest::Approx(0.31326168751822286).epsilon(1e-14));
  CHECK(logistic_component_value(ex, std::vector<double>{50.0, 0.0}) < 1e-20);
  CHECK(std::isfinite(logistic_component_value(ex, std::vector<double>{-1000.0, 0.0})));
  CHECK(logistic_component_value(ex, std::vector<double>{-1000.0, 0.0}) == doctest::Approx(1000.0));
}

TEST_CASE("logistic component gradient") {
  auto data = one_example({2.0, -1.0, 0.5}, -1.0);
  const auto& ex = (*data)[0];
  const Vector g0 = logistic_component_gradient(ex, std::vector<double>{0.0, 0.0, 0.0});
  CHECK(g0[0] == doctest::Approx(1.0));
  CHECK(g0[1] == doctest::Approx(-0.5));
  CHECK(g0[2] == doctest::Approx(0.25));

  const Vector far = logistic_component_gradient(ex, std::vector<double>{-400.0, 0.0, 0.0});
  CHECK(norm(far) < 1e-300);

  Rng rng(4);
  for (int k = 0; k < 20; ++k) {
    const Vector w = random_point(rng, 3, 2.0);
    auto f = [&](std::span<const double> p) { return logistic_component_value(ex, p); };
    CHECK(fd_error(f, w, logistic_component_gradient(ex, w)) < 1e-6);
  }
  CHECK_THROWS(logistic_component_value(ex, std::vector<double>{1.0}));
}

TEST_CASE("least squares component") {
  auto root = one_example({1.0}, 3.0);
  auto [v, g] = least_squares_component((*root)[0], std::vector<double>{3.0});
  CHECK(v == 0.0);
  CHECK(g[0] == 0.0);

  auto other = one_example({1.0}, 1.0);
  auto [v1, g1] = least_squares_component((*other)[0], std::vector<double>{0.0});
  CHECK(v1 == 1.0);
  CHECK(g1[0] == -2.0);

  auto wide = one_example({0.3, -1.2, 2.0}, 0.7);
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    const Vector w = random_point(rng, 3, 2.0);
    auto f = [&](std::span<const double> p) { return least_squares_component((*wide)[0], p).first; };
    CHECK(fd_error(f, w, least_squares_component((*wide)[0], w).second) < 1e-6);
  }
}

TEST_CASE("G regularizer") {
  CHECK(regularizer_G_value(std::vector<double>{0.0, 0.0}) == 0.0);
  CHECK(regularizer_G_value(std::vector<double>{1.0}) == doctest::Approx(0.08616126963048859).epsilon(1e-13));
  const Vector g0 = regularizer_G_gradient(std::vector<double>{0.0, 0.0, 0.0});
  for (double x : g0) CHECK(x == 0.0);

  Rng rng(6);
  for (int k = 0; k < 50; ++k) {
    const Vector w = random_point(rng, 4, 3.0);
    Vector neg = w;
    for (double& x : neg) x = -x;
    CHECK(regularizer_G_value(w) >= 0.0);
    CHECK(regularizer_G_value(w) == regularizer_G_value(neg));
    const Vector g = regularizer_G_gradient(w);
    const Vector gn = regularizer_G_gradient(neg);
    for (std::size_t j = 0; j < w.size(); ++j) CHECK(gn[j] == -g[j]);
    CHECK(fd_error([](std::span<const double> p) { return regularizer_G_value(p); }, w, g) < 1e-6);
  }
  CHECK_THROWS_AS(regularizer_G_value(std::vector<double>{701.0}), OverflowError);
  CHECK_THROWS_AS(regularizer_G_gradient(std::vector<double>{-701.0}), OverflowError);
}

TEST_CASE("composite objectives") {
  auto data = std::make_shared<const Dataset>(synthesize_dataset({SyntheticKind::blobs, 20, 3, 2, 2.0, 1.0}));
  const Objective base = Objective::logistic(data);

  SUBCASE("lambda zero is the identity") {
    for (Regularizer reg : {Regularizer::norm2, Regularizer::norm2_squared, Regularizer::exp_cosh}) {
      const Objective c = composite_objective(base, reg, 0.0);
      Rng rng(7);
      for (int k = 0; k < 10; ++k) {
        const Vector w = random_point(rng, 3, 2.0);
        CHECK(c.value(w) == base.value(w));
        const Vector a = c.gradient(w), b = base.gradient(w);
        for (std::size_t j = 0; j < 3; ++j) CHECK(a[j] == b[j]);
      }
    }
  }

  SUBCASE("known mu") {
    CHECK(composite_objective(base, Regularizer::norm2_squared, 1e-3).known_mu().value() == 1e-3);
    CHECK_FALSE(base.known_mu().has_value());
    CHECK_THROWS(composite_objective(base, Regularizer::norm2_squared, -1.0));
  }

  SUBCASE("gradients match finite differences") {
    for (Regularizer reg : {Regularizer::norm2, Regularizer::norm2_squared, Regularizer::exp_cosh}) {
      const Objective c = composite_objective(base, reg, 0.3);
      Rng rng(8);
      for (int k = 0; k < 10; ++k) {
        const Vector w = random_point(rng, 3, 3.0);
        for (std::size_t i = 0; i < 3; ++i) {
          auto f = [&](std::span<const double> p) { return c.component_value(i, p); };
          CHECK(fd_error(f, w, c.component_gradient(i, w)) < 1e-5);
        }
        CHECK(fd_error([&](std::span<const double> p) { return c.value(p); }, w, c.gradient(w)) < 1e-5);
      }
    }
  }
}

TEST_CASE("smoothness bounds") {
  CHECK(Objective::logistic(one_example({2.0, 0.0}, 1.0)).smoothness_bound(3.0) == doctest::Approx(1.0));
  for (double R : {0.5, 3.0, 100.0}) CHECK(Objective::least_squares(one_example({1.0}, 5.0)).smoothness_bound(R) == 2.0);
  const Objective g = Objective::zero(2).with_regularizer(Regularizer::exp_cosh, 1.0);
  CHECK(g.smoothness_bound(0.0) == 0.0);
  CHECK(g.smoothness_bound(3.0) == doctest::Approx(std::exp(3.0) + std::exp(-3.0) - 2.0));
  const Objective ridge = Objective::least_squares(one_example({1.0}, 5.0)).with_regularizer(Regularizer::norm2_squared, 0.5);
  CHECK(ridge.smoothness_bound(1.0) == doctest::Approx(2.5));
}

TEST_CASE("co-coercivity and convexity on random pairs") {
  auto data = std::make_shared<const Dataset>(synthesize_dataset({SyntheticKind::blobs, 8, 3, 11, 2.0, 1.0}));
  const double R = 3.0;
  const std::vector<Objective> zoo = {
      Objective::logistic(data),
      Objective::least_squares(data).with_regularizer(Regularizer::norm2_squared, 0.2),
      Objective::logistic(data).with_regularizer(Regularizer::exp_cosh, 0.1),
  };
  Rng rng(12);
  for (const Objective& obj : zoo) {
    const double L = obj.smoothness_bound(R);
    for (int k = 0; k < 2000; ++k) {
      const Vector w = random_point(rng, 3, R), v = random_point(rng, 3, R);
      const std::size_t i = rng.index(obj.component_count());
      const Vector gw = obj.component_gradient(i, w), gv = obj.component_gradient(i, v);
      double diff2 = 0.0, inner = 0.0, lin = 0.0;
      for (std::size_t j = 0; j < 3; ++j) {
        diff2 += (gw[j] - gv[j]) * (gw[j] - gv[j]);
        inner += (gw[j] - gv[j]) * (w[j] - v[j]);
        lin += gv[j] * (w[j] - v[j]);
      }
      CHECK(diff2 <= L * inner + 1e-10);
      CHECK(obj.component_value(i, w) - obj.component_value(i, v) >= lin - 1e-10);
    }
  }
}

TEST_CASE("G curvature inequality") {
  Rng rng(13);
  for (std::size_t d : {1u, 2u, 5u, 10u}) {
    const double gamma = 1.0 / (36.0 * static_cast<double>(d));
    for (int k = 0; k < 5000; ++k) {
      const Vector w = random_point(rng, d, 3.0), v = random_point(rng, d, 3.0);
      const Vector g = regularizer_G_gradient(v);
      double lin = 0.0, dist2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        lin += g[j] * (w[j] - v[j]);
        dist2 += (w[j] - v[j]) * (w[j] - v[j]);
      }
      CHECK(regularizer_G_value(w) - regularizer_G_value(v) - lin >= gamma * dist2 * dist2 - 1e-12);
    }
  }
}

TEST_CASE("reference solver") {
  SUBCASE("single root") {
    const ReferenceSolution s = solve_reference(Objective::least_squares(scalar_targets({3.0})), 1e-10);
    CHECK(s.w_star[0] == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(s.f_min == doctest::Approx(0.0).epsilon(1e-18));
  }
  SUBCASE("two components") {
    const ReferenceSolution s = solve_reference(Objective::least_squares(scalar_targets({1.0, -1.0})), 1e-10);
    CHECK(std::abs(s.w_star[0]) < 1e-10);
    CHECK(s.noise_constant == doctest::Approx(4.0));
    CHECK(s.f_min == doctest::Approx(1.0));
  }
  SUBCASE("tolerance and determinism") {
    auto data = std::make_shared<const Dataset>(synthesize_dataset({SyntheticKind::blobs, 40, 5, 3, 2.0, 1.0}));
    const Objective obj = Objective::logistic(data).with_regularizer(Regularizer::norm2_squared, 0.05);
    const ReferenceSolution a = solve_reference(obj, 1e-10);
    const ReferenceSolution b = solve_reference(obj, 1e-10);
    CHECK(a.gradient_norm_at_solution <= 1e-10);
    CHECK(norm(obj.gradient(a.w_star)) <= 1e-10);
    CHECK(a.w_star == b.w_star);
    CHECK(a.f_min == b.f_min);
    CHECK(a.noise_constant == b.noise_constant);
    CHECK(a.iterations == b.iterations);
  }
  SUBCASE("errors") {
    CHECK_THROWS(solve_reference(Objective::least_squares(scalar_targets({1.0})), 0.0));
    SolverOptions capped;
    capped.tolerance = 1e-12;
    capped.max_iterations = 2;
    auto data = std::make_shared<const Dataset>(synthesize_dataset({SyntheticKind::blobs, 40, 5, 3, 2.0, 1.0}));
    CHECK_THROWS_AS(solve_reference(Objective::logistic(data).with_regularizer(Regularizer::norm2_squared, 0.05), capped),
                    NonConvergenceError);
  }
}
