#include "curvesgd/synthetic.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string_view>

#include "curvesgd/random.hpp"

namespace curvesgd {

namespace {

void check(const SyntheticSpec& spec) {
  if (spec.n < 2) throw std::invalid_argument("synthetic: n must be >= 2");
  if (spec.d < 1) throw std::invalid_argument("synthetic: d must be >= 1");
  if (!(spec.separation >= 0.0) || std::isinf(spec.separation))
    throw std::invalid_argument("synthetic: separation must be finite and nonnegative");
  if (!(spec.scale > 0.0) || std::isinf(spec.scale)) throw std::invalid_argument("synthetic: scale must be positive");
}

std::string kind_name(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::blobs: return "blobs";
    case SyntheticKind::linear: return "linear";
    case SyntheticKind::centered_noise: return "centered_noise";
  }
  return {};
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <class T>
T parse_value(const std::string& text, const std::string& key) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw std::invalid_argument("synthetic: bad value for " + key + ": '" + text + "'");
  return value;
}

}  // namespace

Vector planted_weights(const SyntheticSpec& spec) {
  check(spec);
  Rng rng(spec.seed);
  Vector w(spec.d);
  for (auto& wi : w) wi = rng.normal();
  return w;
}

Dataset synthesize_dataset(const SyntheticSpec& spec) {
  check(spec);
  const std::size_t n = spec.n, d = spec.d;
  std::vector<LabeledExample> examples;
  examples.reserve(n);
  Vector x(d);
  switch (spec.kind) {
    case SyntheticKind::blobs: {
      Rng rng(spec.seed);
      const double offset = 0.5 * spec.separation / std::sqrt(static_cast<double>(d));
      for (std::size_t i = 0; i < n; ++i) {
        const double y = i % 2 == 0 ? 1.0 : -1.0;
        for (auto& xi : x) xi = y * offset + rng.normal();
        examples.push_back(LabeledExample::dense(x, y));
      }
      break;
    }
    case SyntheticKind::linear: {
      Rng rng(spec.seed);
      Vector w(d);
      for (auto& wi : w) wi = rng.normal();
      for (std::size_t i = 0; i < n; ++i) {
        double nrm = 0.0;
        do {
          for (auto& xi : x) xi = rng.normal();
          nrm = norm(x);
        } while (nrm == 0.0);
        for (auto& xi : x) xi /= nrm;
        examples.push_back(LabeledExample::dense(x, dot(x, w)));
      }
      break;
    }
    case SyntheticKind::centered_noise: {
      Rng rng(spec.seed);
      std::vector<Vector> rows(n, Vector(d));
      Vector mean(d, 0.0);
      for (auto& row : rows) {
        for (std::size_t j = 0; j < d; ++j) {
          row[j] = spec.scale * rng.normal();
          mean[j] += row[j];
        }
      }
      for (auto& m : mean) m /= static_cast<double>(n);
      for (auto& row : rows) {
        for (std::size_t j = 0; j < d; ++j) row[j] -= mean[j];
        examples.push_back(LabeledExample::dense(row, 1.0));
      }
      break;
    }
  }
  return Dataset(std::move(examples), d);
}

SyntheticSpec parse_synthetic(const std::string& text) {
  constexpr std::string_view prefix = "synthetic:";
  if (text.compare(0, prefix.size(), prefix) != 0) throw std::invalid_argument("synthetic: expected 'synthetic:' prefix");
  std::map<std::string, std::string> pairs;
  std::string_view body = std::string_view(text).substr(prefix.size());
  while (!body.empty()) {
    const auto comma = body.find(',');
    const std::string_view item = body.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument("synthetic: expected key=value in '" + std::string(item) + "'");
    if (!pairs.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1))).second)
      throw std::invalid_argument("synthetic: duplicate key '" + std::string(item.substr(0, eq)) + "'");
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
  }
  SyntheticSpec spec;
  bool have_kind = false, have_n = false, have_d = false;
  for (const auto& [key, value] : pairs) {
    if (key == "kind") {
      if (value == "blobs") spec.kind = SyntheticKind::blobs;
      else if (value == "linear") spec.kind = SyntheticKind::linear;
      else if (value == "centered_noise") spec.kind = SyntheticKind::centered_noise;
      else throw std::invalid_argument("synthetic: unknown kind '" + value + "'");
      have_kind = true;
    } else if (key == "n") {
      spec.n = parse_value<std::size_t>(value, key);
      have_n = true;
    } else if (key == "d") {
      spec.d = parse_value<std::size_t>(value, key);
      have_d = true;
    } else if (key == "seed") {
      spec.seed = parse_value<std::uint64_t>(value, key);
    } else if (key == "sep") {
      spec.separation = parse_value<double>(value, key);
    } else if (key == "scale") {
      spec.scale = parse_value<double>(value, key);
    } else {
      throw std::invalid_argument("synthetic: unknown key '" + key + "'");
    }
  }
  if (!have_kind || !have_n || !have_d) throw std::invalid_argument("synthetic: kind, n and d are required");
  check(spec);
  return spec;
}

std::string to_string(const SyntheticSpec& spec) {
  std::string s = "synthetic:kind=" + kind_name(spec.kind) + ",n=" + std::to_string(spec.n) +
                  ",d=" + std::to_string(spec.d) + ",seed=" + std::to_string(spec.seed);
  if (spec.kind == SyntheticKind::blobs) s += ",sep=" + format_number(spec.separation);
  if (spec.kind == SyntheticKind::centered_noise) s += ",scale=" + format_number(spec.scale);
  return s;
}

}  // namespace curvesgd
