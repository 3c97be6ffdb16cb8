#include "curvesgd/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace curvesgd {

namespace {

double log1p_exp(double u) {
  // log(1 + e^u)
  return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
}

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

void check_exp_cosh_range(std::span<const double> w) {
  for (double x : w) {
    if (!(std::abs(x) <= kExpCoshLimit)) {
      throw OverflowError("exp_cosh regularizer: |w_i| exceeds " + std::to_string(kExpCoshLimit));
    }
  }
}

// e^x + e^{-x} - 2 - x^2 = sum_{k>=2} 2 x^{2k} / (2k)!
double exp_cosh_term(double x) {
  const double x2 = x * x;
  if (x2 < 1.0) {
    double term = x2 * x2 / 12.0;
    double s = 0.0;
    for (int k = 2; term > 1e-18 * s || s == 0.0; ++k) {
      s += term;
      term *= x2 / ((2.0 * k + 1.0) * (2.0 * k + 2.0));
      if (term == 0.0) break;
    }
    return s;
  }
  const double sh = std::sinh(0.5 * x);
  return 4.0 * sh * sh - x2;
}

// e^x - e^{-x} - 2x = sum_{k>=1} 2 x^{2k+1} / (2k+1)!
double exp_cosh_term_derivative(double x) {
  const double x2 = x * x;
  if (x2 < 1.0) {
    double term = x * x2 / 3.0;
    double s = 0.0;
    for (int k = 1; std::abs(term) > 1e-18 * std::abs(s) || s == 0.0; ++k) {
      s += term;
      term *= x2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
      if (term == 0.0) break;
    }
    return s;
  }
  return 2.0 * std::sinh(x) - 2.0 * x;
}

std::string format_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

void check_example(const LabeledExample& ex, std::span<const double> w) {
  require_same_size(ex.dimension, w.size(), "example");
}

}  // namespace

LabeledExample LabeledExample::dense(std::span<const double> x, double label) {
  LabeledExample ex;
  ex.label = label;
  ex.dimension = x.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) ex.features.push_back({static_cast<std::uint32_t>(i), x[i]});
  }
  return ex;
}

Vector LabeledExample::to_dense() const {
  Vector x(dimension, 0.0);
  for (const auto& f : features) x[f.index] = f.value;
  return x;
}

double LabeledExample::dot(std::span<const double> w) const {
  double s = 0.0;
  for (const auto& f : features) s += f.value * w[f.index];
  return s;
}

double LabeledExample::squared_norm() const {
  double s = 0.0;
  for (const auto& f : features) s += f.value * f.value;
  return s;
}

void LabeledExample::add_scaled_to(double alpha, std::span<double> out) const {
  for (const auto& f : features) out[f.index] += alpha * f.value;
}

Dataset::Dataset(std::vector<LabeledExample> examples, std::size_t dimension)
    : examples_(std::move(examples)), dimension_(dimension) {
  if (examples_.empty()) throw std::invalid_argument("empty dataset");
  if (dimension_ == 0) throw std::invalid_argument("dataset dimension must be positive");
  for (auto& ex : examples_) {
    ex.dimension = dimension_;
    std::int64_t prev = -1;
    for (const auto& f : ex.features) {
      if (f.index >= dimension_ || static_cast<std::int64_t>(f.index) <= prev) {
        throw std::invalid_argument("feature indices must be strictly increasing and < dimension");
      }
      prev = f.index;
    }
  }
}

double Dataset::max_squared_norm() const {
  double m = 0.0;
  for (const auto& ex : examples_) m = std::max(m, ex.squared_norm());
  return m;
}

bool Dataset::has_binary_labels() const {
  return std::all_of(examples_.begin(), examples_.end(),
                     [](const LabeledExample& ex) { return ex.label == 1.0 || ex.label == -1.0; });
}

std::string to_string(Loss loss) {
  switch (loss) {
    case Loss::zero: return "zero";
    case Loss::logistic: return "logistic";
    case Loss::least_squares: return "least_squares";
    case Loss::linear: return "linear";
  }
  return "?";
}

std::string to_string(Regularizer reg) {
  switch (reg) {
    case Regularizer::none: return "plain";
    case Regularizer::norm2: return "norm2";
    case Regularizer::norm2_squared: return "norm2_squared";
    case Regularizer::exp_cosh: return "exp_cosh_G";
  }
  return "?";
}

Loss parse_loss(const std::string& text) {
  if (text == "zero") return Loss::zero;
  if (text == "logistic") return Loss::logistic;
  if (text == "least_squares") return Loss::least_squares;
  if (text == "linear") return Loss::linear;
  throw std::invalid_argument("unknown loss '" + text + "'");
}

Regularizer parse_regularizer(const std::string& text) {
  if (text == "plain" || text == "none") return Regularizer::none;
  if (text == "norm2") return Regularizer::norm2;
  if (text == "norm2_squared") return Regularizer::norm2_squared;
  if (text == "exp_cosh_G" || text == "exp_cosh") return Regularizer::exp_cosh;
  throw std::invalid_argument("unknown objective variant '" + text + "'");
}

double logistic_component_value(const LabeledExample& example, std::span<const double> w) {
  check_example(example, w);
  return log1p_exp(-example.label * example.dot(w));
}

Vector logistic_component_gradient(const LabeledExample& example, std::span<const double> w) {
  check_example(example, w);
  Vector g(w.size(), 0.0);
  const double y = example.label;
  example.add_scaled_to(-y * sigmoid(-y * example.dot(w)), g);
  return g;
}

std::pair<double, Vector> least_squares_component(const LabeledExample& example,
                                                  std::span<const double> w) {
  check_example(example, w);
  const double r = example.dot(w) - example.label;
  Vector g(w.size(), 0.0);
  example.add_scaled_to(2.0 * r, g);
  return {r * r, std::move(g)};
}

double regularizer_G_value(std::span<const double> w) {
  check_exp_cosh_range(w);
  double s = 0.0;
  for (double x : w) s += exp_cosh_term(x);
  return s;
}

Vector regularizer_G_gradient(std::span<const double> w) {
  check_exp_cosh_range(w);
  Vector g(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) g[i] = exp_cosh_term_derivative(w[i]);
  return g;
}

Objective::Objective(Loss loss, std::shared_ptr<const Dataset> data, std::size_t dimension)
    : loss_(loss), data_(std::move(data)), dimension_(dimension) {}

Objective Objective::logistic(std::shared_ptr<const Dataset> data) { return make(Loss::logistic, std::move(data)); }

Objective Objective::least_squares(std::shared_ptr<const Dataset> data) {
  return make(Loss::least_squares, std::move(data));
}

Objective Objective::linear(std::shared_ptr<const Dataset> data) { return make(Loss::linear, std::move(data)); }

Objective Objective::zero(std::size_t dimension) {
  if (dimension == 0) throw std::invalid_argument("dimension must be positive");
  return Objective(Loss::zero, nullptr, dimension);
}

Objective Objective::make(Loss loss, std::shared_ptr<const Dataset> data) {
  if (loss == Loss::zero) {
    if (!data) throw std::invalid_argument("zero loss needs a dimension");
    return zero(data->dimension());
  }
  if (!data) throw std::invalid_argument("objective requires a dataset");
  if (loss == Loss::logistic && !data->has_binary_labels()) {
    throw std::invalid_argument("logistic loss requires labels in {-1,+1}");
  }
  const std::size_t d = data->dimension();
  return Objective(loss, std::move(data), d);
}

std::size_t Objective::component_count() const { return data_ ? data_->size() : 1; }

std::optional<double> Objective::known_mu() const {
  if (regularizer_ == Regularizer::norm2_squared && lambda_ > 0.0) return lambda_;
  return std::nullopt;
}

double Objective::base_value(std::size_t i, std::span<const double> w) const {
  switch (loss_) {
    case Loss::zero: return 0.0;
    case Loss::logistic: {
      const auto& ex = (*data_)[i];
      return log1p_exp(-ex.label * ex.dot(w));
    }
    case Loss::least_squares: {
      const auto& ex = (*data_)[i];
      const double r = ex.dot(w) - ex.label;
      return r * r;
    }
    case Loss::linear: {
      const auto& ex = (*data_)[i];
      return -ex.label * ex.dot(w);
    }
  }
  return 0.0;
}

void Objective::base_gradient(std::size_t i, std::span<const double> w, std::span<double> out) const {
  switch (loss_) {
    case Loss::zero: return;
    case Loss::logistic: {
      const auto& ex = (*data_)[i];
      const double y = ex.label;
      ex.add_scaled_to(-y * sigmoid(-y * ex.dot(w)), out);
      return;
    }
    case Loss::least_squares: {
      const auto& ex = (*data_)[i];
      ex.add_scaled_to(2.0 * (ex.dot(w) - ex.label), out);
      return;
    }
    case Loss::linear: {
      const auto& ex = (*data_)[i];
      ex.add_scaled_to(-ex.label, out);
      return;
    }
  }
}

double Objective::regularizer_value(std::span<const double> w) const {
  if (lambda_ == 0.0) return 0.0;
  switch (regularizer_) {
    case Regularizer::none: return 0.0;
    case Regularizer::norm2: return lambda_ * norm(w);
    case Regularizer::norm2_squared: return 0.5 * lambda_ * squared_norm(w);
    case Regularizer::exp_cosh: return lambda_ * regularizer_G_value(w);
  }
  return 0.0;
}

void Objective::add_regularizer_gradient(std::span<const double> w, std::span<double> out) const {
  if (lambda_ == 0.0) return;
  switch (regularizer_) {
    case Regularizer::none: return;
    case Regularizer::norm2: {
      const double n = norm(w);
      if (n > 0.0) axpy(lambda_ / n, w, out);  // subgradient 0 at the origin
      return;
    }
    case Regularizer::norm2_squared: axpy(lambda_, w, out); return;
    case Regularizer::exp_cosh: axpy(lambda_, regularizer_G_gradient(w), out); return;
  }
}

double Objective::component_value(std::size_t i, std::span<const double> w) const {
  require_same_size(dimension_, w.size(), "component_value");
  return base_value(i, w) + regularizer_value(w);
}

void Objective::component_gradient(std::size_t i, std::span<const double> w, std::span<double> out) const {
  require_same_size(dimension_, w.size(), "component_gradient");
  require_same_size(dimension_, out.size(), "component_gradient");
  std::fill(out.begin(), out.end(), 0.0);
  base_gradient(i, w, out);
  add_regularizer_gradient(w, out);
}

Vector Objective::component_gradient(std::size_t i, std::span<const double> w) const {
  Vector g(dimension_);
  component_gradient(i, w, g);
  return g;
}

double Objective::value(std::span<const double> w) const {
  require_same_size(dimension_, w.size(), "value");
  const std::size_t n = component_count();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += base_value(i, w);
  return s / static_cast<double>(n) + regularizer_value(w);
}

Vector Objective::gradient(std::span<const double> w) const {
  require_same_size(dimension_, w.size(), "gradient");
  Vector g(dimension_, 0.0);
  const std::size_t n = component_count();
  for (std::size_t i = 0; i < n; ++i) base_gradient(i, w, g);
  for (double& x : g) x /= static_cast<double>(n);
  add_regularizer_gradient(w, g);
  return g;
}

double Objective::smoothness_bound(double region_radius) const {
  if (!(region_radius >= 0.0)) throw std::invalid_argument("region radius must be >= 0");
  double base = 0.0;
  switch (loss_) {
    case Loss::zero:
    case Loss::linear: base = 0.0; break;
    case Loss::logistic: base = data_->max_squared_norm() / 4.0; break;
    case Loss::least_squares: base = 2.0 * data_->max_squared_norm(); break;
  }
  double reg = 0.0;
  if (lambda_ > 0.0) {
    switch (regularizer_) {
      case Regularizer::none: break;
      case Regularizer::norm2: reg = std::numeric_limits<double>::infinity(); break;
      case Regularizer::norm2_squared: reg = lambda_; break;
      case Regularizer::exp_cosh: {
        const double R = std::min(region_radius, kExpCoshLimit);
        reg = lambda_ * 2.0 * (std::cosh(R) - 1.0);
        break;
      }
    }
  }
  return base + reg;
}

bool Objective::has_unique_minimizer() const {
  return lambda_ > 0.0 &&
         (regularizer_ == Regularizer::norm2_squared || regularizer_ == Regularizer::exp_cosh);
}

Objective Objective::with_regularizer(Regularizer reg, double lambda) const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("regularization weight must be >= 0");
  Objective out = *this;
  out.regularizer_ = reg;
  out.lambda_ = lambda;
  return out;
}

Objective composite_objective(const Objective& base, Regularizer reg, double lambda) {
  return base.with_regularizer(reg, lambda);
}

double smoothness_bound(const Objective& objective, double region_radius) {
  return objective.smoothness_bound(region_radius);
}

double noise_constant(const Objective& objective, std::span<const double> w_star) {
  const std::size_t n = objective.component_count();
  Vector g(objective.dimension());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    objective.component_gradient(i, w_star, g);
    s += squared_norm(g);
  }
  return s / static_cast<double>(n);
}

ReferenceSolution solve_reference(const Objective& objective, double tolerance) {
  SolverOptions opts;
  opts.tolerance = tolerance;
  return solve_reference(objective, opts);
}

ReferenceSolution solve_reference(const Objective& objective, const SolverOptions& options) {
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const std::size_t d = objective.dimension();
  const bool bounded_below = objective.has_unique_minimizer() || objective.loss() == Loss::least_squares ||
                             objective.loss() == Loss::zero;
  if (!bounded_below && objective.loss() == Loss::linear) {
    throw NonConvergenceError("linear loss without a coercive regularizer is unbounded below");
  }

  Vector w = options.w0.empty() ? Vector(d, 0.0) : options.w0;
  require_same_size(d, w.size(), "solve_reference w0");
  double f = objective.value(w);
  Vector g = objective.gradient(w);
  double gnorm = norm(g);
  double step = 1.0;
  Vector trial(d);

  std::size_t it = 0;
  for (; it < options.max_iterations && gnorm > options.tolerance; ++it) {
    const double g2 = gnorm * gnorm;
    step = std::min(step * 2.0, 1e6);
    double f_trial = 0.0;
    for (;;) {
      for (std::size_t k = 0; k < d; ++k) trial[k] = w[k] - step * g[k];
      bool ok = true;
      try {
        f_trial = objective.value(trial);
      } catch (const OverflowError&) {
        ok = false;
      }
      if (ok && std::isfinite(f_trial)) {
        const double required = options.armijo_c * step * g2;
        if (required > 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(f))) {
          if (f_trial <= f - required) break;
        } else if (f_trial <= f + 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(f)) &&
                   norm(objective.gradient(trial)) <= gnorm) {
          // decrease below the resolution of f: fall back to a nonincreasing gradient norm
          break;
        }
      }
      step *= 0.5;
      if (step < 1e-300) {
        // No representable decrease left; accept the current point if close.
        ReferenceSolution out{w, f, noise_constant(objective, w), gnorm, it};
        if (gnorm <= options.tolerance * 1e3) return out;
        throw NonConvergenceError("reference solver: line search failed at ||grad|| = " + format_g(gnorm));
      }
    }
    w.swap(trial);
    f = f_trial;
    g = objective.gradient(w);
    gnorm = norm(g);
    if (!objective.has_unique_minimizer() && objective.loss() == Loss::logistic && max_abs(w) > 1e4) {
      throw NonConvergenceError("reference solver: iterates diverge; minimizer is not unique (separable data?)");
    }
  }
  if (gnorm > options.tolerance) {
    throw NonConvergenceError("reference solver: no convergence within " + std::to_string(options.max_iterations) +
                              " iterations (||grad|| = " + format_g(gnorm) + ")");
  }
  return ReferenceSolution{w, f, noise_constant(objective, w), gnorm, it};
}

}  // namespace curvesgd
