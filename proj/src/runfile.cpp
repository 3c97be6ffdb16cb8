#include "curvesgd/runfile.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "curvesgd/libsvm.hpp"
#include "curvesgd/synthetic.hpp"

namespace curvesgd {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_value(const std::string& text, const std::string& key, std::size_t line) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw ParseError(line, "bad value for " + key + ": '" + text + "'");
  return value;
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<std::uint64_t> parse_seeds(const std::string& text, std::size_t line) {
  std::vector<std::uint64_t> seeds;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const auto lo = parse_value<std::uint64_t>(trim(text.substr(0, dots)), "seeds", line);
    const auto hi = parse_value<std::uint64_t>(trim(text.substr(dots + 2)), "seeds", line);
    if (hi < lo || hi - lo >= 1'000'000) throw ParseError(line, "bad seed range '" + text + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) seeds.push_back(parse_value<std::uint64_t>(trim(item), "seeds", line));
  if (seeds.empty()) throw ParseError(line, "seeds must not be empty");
  return seeds;
}

std::string regularizer_key(Regularizer reg) {
  switch (reg) {
    case Regularizer::none: return "plain";
    case Regularizer::norm2: return "norm2";
    case Regularizer::norm2_squared: return "norm2_squared";
    case Regularizer::exp_cosh: return "exp_cosh_G";
  }
  return {};
}

std::string reference_key(ReferencePolicy p) {
  switch (p) {
    case ReferencePolicy::automatic: return "auto";
    case ReferencePolicy::none: return "none";
    case ReferencePolicy::required: return "required";
  }
  return {};
}

}  // namespace

bool RunFile::operator==(const RunFile& o) const {
  if (schedules.size() != o.schedules.size()) return false;
  for (std::size_t i = 0; i < schedules.size(); ++i)
    if (to_string(schedules[i]) != to_string(o.schedules[i])) return false;
  return name == o.name && dataset == o.dataset && loss == o.loss && objective == o.objective &&
         lambda == o.lambda && seeds == o.seeds && epochs == o.epochs && stride == o.stride &&
         region_radius == o.region_radius && reference == o.reference && output == o.output;
}

RunFile parse_runfile(std::istream& in) {
  RunFile file;
  file.schedules.clear();
  std::set<std::string> seen;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (const auto hash = text.find('#'); hash != std::string::npos) text.erase(hash);
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError(line, "expected key = value");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key != "schedule" && !seen.insert(key).second) throw ParseError(line, "duplicate key '" + key + "'");
    try {
      if (key == "name") {
        if (value.empty() || value.find_first_of("/\\ ,") != std::string::npos)
          throw ParseError(line, "name must be nonempty without spaces, commas or slashes");
        file.name = value;
      } else if (key == "dataset") {
        file.dataset = value;
      } else if (key == "loss") {
        file.loss = parse_loss(value);
      } else if (key == "objective") {
        file.objective = parse_regularizer(value);
      } else if (key == "lambda") {
        file.lambda = parse_value<double>(value, key, line);
        if (!(file.lambda >= 0.0) || std::isinf(file.lambda)) throw ParseError(line, "lambda must be >= 0");
      } else if (key == "schedule") {
        file.schedules.push_back(parse_schedule(value));
      } else if (key == "seeds") {
        file.seeds = parse_seeds(value, line);
      } else if (key == "epochs") {
        file.epochs = parse_value<std::size_t>(value, key, line);
        if (file.epochs == 0) throw ParseError(line, "epochs must be >= 1");
      } else if (key == "stride") {
        file.stride = parse_value<std::size_t>(value, key, line);
        if (file.stride == 0) throw ParseError(line, "stride must be >= 1");
      } else if (key == "region_radius") {
        file.region_radius = parse_value<double>(value, key, line);
        if (!(file.region_radius > 0.0)) throw ParseError(line, "region_radius must be positive");
      } else if (key == "reference") {
        if (value == "auto") file.reference = ReferencePolicy::automatic;
        else if (value == "none") file.reference = ReferencePolicy::none;
        else if (value == "required") file.reference = ReferencePolicy::required;
        else throw ParseError(line, "reference must be auto, none or required");
      } else if (key == "output") {
        if (value.empty()) throw ParseError(line, "output must not be empty");
        file.output = value;
      } else {
        throw ParseError(line, "unknown key '" + key + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(line, e.what());
    }
  }
  if (file.dataset.empty()) throw ParseError(0, "missing key 'dataset'");
  if (file.schedules.empty()) throw ParseError(0, "missing key 'schedule'");
  return file;
}

RunFile parse_runfile_text(const std::string& text) {
  std::istringstream in(text);
  return parse_runfile(in);
}

RunFile load_runfile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_runfile(in);
}

std::string serialize(const RunFile& file) {
  std::ostringstream out;
  out << "name = " << file.name << "\n";
  out << "dataset = " << file.dataset << "\n";
  out << "loss = " << to_string(file.loss) << "\n";
  out << "objective = " << regularizer_key(file.objective) << "\n";
  out << "lambda = " << format_number(file.lambda) << "\n";
  for (const auto& s : file.schedules) out << "schedule = " << to_string(s) << "\n";
  out << "seeds = ";
  for (std::size_t i = 0; i < file.seeds.size(); ++i) out << (i ? "," : "") << file.seeds[i];
  out << "\n";
  out << "epochs = " << file.epochs << "\n";
  out << "stride = " << file.stride << "\n";
  out << "region_radius = " << format_number(file.region_radius) << "\n";
  out << "reference = " << reference_key(file.reference) << "\n";
  out << "output = " << file.output << "\n";
  return out.str();
}

Dataset load_dataset(const std::string& source, const std::filesystem::path& base_dir) {
  if (source.rfind("synthetic:", 0) == 0) return synthesize_dataset(parse_synthetic(source));
  if (source.rfind("libsvm:", 0) == 0) {
    std::filesystem::path path = source.substr(7);
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    return load_libsvm(path);
  }
  throw std::invalid_argument("dataset must start with 'synthetic:' or 'libsvm:'");
}

std::string schedule_label(const ScheduleSpec& spec) {
  switch (spec.kind) {
    case ScheduleKind::constant: return "eta=" + format_number(spec.eta);
    case ScheduleKind::power_law:
    case ScheduleKind::paper_optimal: return "h=" + format_number(spec.h);
  }
  return {};
}

}  // namespace curvesgd
