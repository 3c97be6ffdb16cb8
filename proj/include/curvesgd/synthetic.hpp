#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "curvesgd/objectives.hpp"
#include "curvesgd/vector.hpp"

namespace curvesgd {

/// blobs:          labels alternate +1/-1, x = y (sep/2)/sqrt(d) 1 + N(0, I)
/// linear:         unit-norm Gaussian rows a_i, targets b_i = <a_i, w_planted>
/// centered_noise: rows N(0, scale^2 I) minus their column mean, labels +1
enum class SyntheticKind { blobs, linear, centered_noise };

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::blobs;
  std::size_t n = 100;
  std::size_t d = 2;
  std::uint64_t seed = 1;
  double separation = 10.0;
  double scale = 1.0;

  bool operator==(const SyntheticSpec&) const = default;
};

Dataset synthesize_dataset(const SyntheticSpec& spec);

/// Weights used for kind = linear (drawn first from the same stream).
Vector planted_weights(const SyntheticSpec& spec);

/// `synthetic:kind=blobs,n=1000,d=10,seed=1[,sep=10][,scale=1]`
SyntheticSpec parse_synthetic(const std::string& text);
std::string to_string(const SyntheticSpec& spec);

}  // namespace curvesgd
