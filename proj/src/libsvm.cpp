#include "curvesgd/libsvm.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string_view>

namespace curvesgd {

namespace {

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

bool parse_index(std::string_view s, std::uint64_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

enum class LabelRule { keep, one_two, zero_one, invalid };

LabelRule label_rule(const std::set<double>& labels) {
  auto within = [&](double a, double b) {
    return std::all_of(labels.begin(), labels.end(), [&](double l) { return l == a || l == b; });
  };
  if (within(-1.0, 1.0)) return LabelRule::keep;
  if (within(1.0, 2.0)) return LabelRule::one_two;
  if (within(0.0, 1.0)) return LabelRule::zero_one;
  return LabelRule::invalid;
}

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& message)
    : std::runtime_error(line == 0 ? message : "line " + std::to_string(line) + ": " + message), line_(line) {}

Dataset parse_libsvm(std::istream& in, LabelMapping mapping) {
  struct Raw {
    LabeledExample example;
    std::size_t line;
  };
  std::vector<Raw> rows;
  std::uint64_t dimension = 0;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    std::istringstream tokens(text);
    std::string token;
    if (!(tokens >> token)) continue;
    Raw row{{}, line_no};
    if (!parse_double(token, row.example.label)) throw ParseError(line_no, "malformed label '" + token + "'");
    std::uint64_t previous = 0;
    while (tokens >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) throw ParseError(line_no, "expected index:value, got '" + token + "'");
      std::uint64_t index = 0;
      double value = 0.0;
      const std::string_view view(token);
      if (!parse_index(view.substr(0, colon), index) || index == 0)
        throw ParseError(line_no, "malformed index in '" + token + "'");
      if (!parse_double(view.substr(colon + 1), value)) throw ParseError(line_no, "malformed value in '" + token + "'");
      if (index <= previous) throw ParseError(line_no, "indices must be strictly increasing");
      if (index > std::numeric_limits<std::uint32_t>::max()) throw ParseError(line_no, "index too large");
      previous = index;
      row.example.features.push_back({static_cast<std::uint32_t>(index - 1), value});
    }
    dimension = std::max(dimension, previous);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(0, "empty dataset");
  if (dimension == 0) throw ParseError(0, "dataset has no features");

  std::set<double> labels;
  for (const auto& r : rows) labels.insert(r.example.label);
  const LabelRule rule = mapping == LabelMapping::raw ? LabelRule::keep : label_rule(labels);
  std::vector<LabeledExample> examples;
  examples.reserve(rows.size());
  for (auto& r : rows) {
    double& y = r.example.label;
    switch (rule) {
      case LabelRule::keep:
        break;
      case LabelRule::one_two:  // 1 -> +1, 2 -> -1
        y = y == 1.0 ? 1.0 : -1.0;
        break;
      case LabelRule::zero_one:
        y = y == 1.0 ? 1.0 : -1.0;
        break;
      case LabelRule::invalid:
        if (y != 1.0 && y != -1.0) {
          std::ostringstream msg;
          msg << "unmappable label " << y << " (labels must be {-1,+1}, {1,2} or {0,1})";
          throw ParseError(r.line, msg.str());
        }
        break;
    }
    examples.push_back(std::move(r.example));
  }
  return Dataset(std::move(examples), static_cast<std::size_t>(dimension));
}

Dataset parse_libsvm_text(const std::string& text, LabelMapping mapping) {
  std::istringstream in(text);
  return parse_libsvm(in, mapping);
}

Dataset load_libsvm(const std::filesystem::path& path, LabelMapping mapping) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_libsvm(in, mapping);
}

}  // namespace curvesgd
