#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "curvesgd/vector.hpp"

namespace curvesgd {

struct Feature {
  std::uint32_t index = 0;  // 0-based
  double value = 0.0;
};

/// One training pair (x_i, y_i). Features are stored sparsely with strictly
/// increasing indices in [0, dimension).
struct LabeledExample {
  std::vector<Feature> features;
  double label = 0.0;
  std::size_t dimension = 0;

  static LabeledExample dense(std::span<const double> x, double label);

  Vector to_dense() const;
  double dot(std::span<const double> w) const;
  double squared_norm() const;
  /// out += alpha * x
  void add_scaled_to(double alpha, std::span<double> out) const;
};

/// Immutable list of examples sharing one dimension.
class Dataset {
 public:
  Dataset(std::vector<LabeledExample> examples, std::size_t dimension);

  std::size_t size() const { return examples_.size(); }
  std::size_t dimension() const { return dimension_; }
  const LabeledExample& operator[](std::size_t i) const { return examples_[i]; }
  const std::vector<LabeledExample>& examples() const { return examples_; }

  double max_squared_norm() const;
  /// True when every label is exactly -1 or +1.
  bool has_binary_labels() const;

 private:
  std::vector<LabeledExample> examples_;
  std::size_t dimension_;
};

enum class Loss { zero, logistic, least_squares, linear };
enum class Regularizer { none, norm2, norm2_squared, exp_cosh };

std::string to_string(Loss loss);
std::string to_string(Regularizer reg);
Loss parse_loss(const std::string& text);
/// Accepts plain|none, norm2, norm2_squared, exp_cosh_G|exp_cosh.
Regularizer parse_regularizer(const std::string& text);

/// Thrown when an exp_cosh evaluation would leave the safe exponent range.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// |w_i| above this raises OverflowError in G and its gradient.
inline constexpr double kExpCoshLimit = 700.0;

// --- component losses -------------------------------------------------------

/// log(1 + exp(-y <x, w>)), evaluated without overflow.
double logistic_component_value(const LabeledExample& example, std::span<const double> w);
/// -y * sigmoid(-y <x, w>) * x
Vector logistic_component_gradient(const LabeledExample& example, std::span<const double> w);
/// ((<a, w> - b)^2, 2 (<a, w> - b) a)
std::pair<double, Vector> least_squares_component(const LabeledExample& example,
                                                  std::span<const double> w);

/// G(w) = sum_i (e^{w_i} + e^{-w_i} - 2 - w_i^2). Nonnegative and even.
double regularizer_G_value(std::span<const double> w);
/// dG/dw_i = e^{w_i} - e^{-w_i} - 2 w_i
Vector regularizer_G_gradient(std::span<const double> w);

// --- finite-sum objective ---------------------------------------------------

/// F(w) = (1/n) sum_i f_i(w), with f_i(w) = loss_i(w) + lambda * R(w).
///
/// Regularizer forms: norm2 -> lambda ||w||, norm2_squared -> (lambda/2) ||w||^2,
/// exp_cosh -> lambda G(w). Objectives are immutable values; the dataset is
/// shared between copies.
class Objective {
 public:
  static Objective logistic(std::shared_ptr<const Dataset> data);
  static Objective least_squares(std::shared_ptr<const Dataset> data);
  static Objective linear(std::shared_ptr<const Dataset> data);
  /// A single zero component in dimension d (useful with a regularizer).
  static Objective zero(std::size_t dimension);
  static Objective make(Loss loss, std::shared_ptr<const Dataset> data);

  std::size_t component_count() const;
  std::size_t dimension() const { return dimension_; }
  Loss loss() const { return loss_; }
  Regularizer regularizer() const { return regularizer_; }
  double regularization_weight() const { return lambda_; }
  const std::shared_ptr<const Dataset>& data() const { return data_; }

  /// Strong-convexity constant when analytically known.
  std::optional<double> known_mu() const;

  double component_value(std::size_t i, std::span<const double> w) const;
  /// Overwrites out with grad f_i(w).
  void component_gradient(std::size_t i, std::span<const double> w, std::span<double> out) const;
  Vector component_gradient(std::size_t i, std::span<const double> w) const;

  double value(std::span<const double> w) const;
  Vector gradient(std::span<const double> w) const;

  double regularizer_value(std::span<const double> w) const;
  /// Adds lambda * grad R(w) to out.
  void add_regularizer_gradient(std::span<const double> w, std::span<double> out) const;

  /// Upper bound on the per-component Hessian spectral norm on ||w||_inf <= R.
  double smoothness_bound(double region_radius) const;

  /// True when F is known to have a unique minimizer.
  bool has_unique_minimizer() const;

  Objective with_regularizer(Regularizer reg, double lambda) const;

 private:
  Objective(Loss loss, std::shared_ptr<const Dataset> data, std::size_t dimension);

  double base_value(std::size_t i, std::span<const double> w) const;
  void base_gradient(std::size_t i, std::span<const double> w, std::span<double> out) const;

  Loss loss_;
  std::shared_ptr<const Dataset> data_;
  std::size_t dimension_;
  Regularizer regularizer_ = Regularizer::none;
  double lambda_ = 0.0;
};

Objective composite_objective(const Objective& base, Regularizer reg, double lambda);
double smoothness_bound(const Objective& objective, double region_radius);

// --- reference minimizer ----------------------------------------------------

struct ReferenceSolution {
  Vector w_star;
  double f_min = 0.0;
  /// N = (1/n) sum_i ||grad f_i(w_star)||^2
  double noise_constant = 0.0;
  double gradient_norm_at_solution = 0.0;
  std::size_t iterations = 0;
};

struct SolverOptions {
  double tolerance = 1e-10;
  std::size_t max_iterations = 1'000'000;
  double armijo_c = 1e-4;
  Vector w0;  // empty -> zero vector
};

class NonConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Deterministic full-gradient descent with Armijo backtracking (halving)
/// until ||grad F|| <= tolerance.
ReferenceSolution solve_reference(const Objective& objective, double tolerance);
ReferenceSolution solve_reference(const Objective& objective, const SolverOptions& options);

/// N evaluated at an arbitrary point.
double noise_constant(const Objective& objective, std::span<const double> w_star);

}  // namespace curvesgd
