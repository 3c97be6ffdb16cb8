#include "curvesgd/results.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace curvesgd {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_field(const std::string& text, std::size_t line) {
  if (text.empty()) return std::nan("");
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw std::runtime_error("results line " + std::to_string(line) + ": bad number '" + text + "'");
  return v;
}

template <class T>
T parse_integer(const std::string& text, std::size_t line) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw std::runtime_error("results line " + std::to_string(line) + ": bad integer '" + text + "'");
  return v;
}

std::string quote_gnuplot(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("''") : std::string(1, c);
  return out + "'";
}

}  // namespace

std::string format_field(double value) {
  if (std::isnan(value)) return {};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::vector<ResultRow> result_rows(const std::string& run_id, const SweepResult& sweep, std::size_t components) {
  if (components == 0) throw std::invalid_argument("result_rows: components must be >= 1");
  if (run_id.find_first_of(",\n\"") != std::string::npos)
    throw std::invalid_argument("result_rows: run id must not contain commas, quotes or newlines");
  std::vector<ResultRow> rows;
  for (const RunTrace& run : sweep.runs) {
    const std::vector<double> smoothed = moving_mean(run.epoch_F, 3);
    for (const TraceRecord& r : run.records) {
      ResultRow row{run_id, run.seed, r.t / components, r.t, r.eta, r.F, r.E, r.Y, std::nan("")};
      if (r.t % components == 0 && row.epoch < smoothed.size()) row.smoothed_F = smoothed[row.epoch];
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string format_results(const std::vector<ResultRow>& rows) {
  std::string out = kResultHeader;
  out += '\n';
  for (const ResultRow& r : rows) {
    out += r.run;
    out += ',' + std::to_string(r.seed) + ',' + std::to_string(r.epoch) + ',' + std::to_string(r.t);
    for (double v : {r.eta, r.F, r.E, r.Y, r.smoothed_F}) out += ',' + format_field(v);
    out += '\n';
  }
  return out;
}

void write_results(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << format_results(rows);
  if (!out.flush()) throw std::runtime_error("write failed for " + path.string());
}

std::vector<ResultRow> parse_results(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kResultHeader) throw std::runtime_error("results: unexpected header");
  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 9) throw std::runtime_error("results line " + std::to_string(line_no) + ": expected 9 fields");
    ResultRow r;
    r.run = f[0];
    r.seed = parse_integer<std::uint64_t>(f[1], line_no);
    r.epoch = parse_integer<std::size_t>(f[2], line_no);
    r.t = parse_integer<std::size_t>(f[3], line_no);
    r.eta = parse_field(f[4], line_no);
    r.F = parse_field(f[5], line_no);
    r.E = parse_field(f[6], line_no);
    r.Y = parse_field(f[7], line_no);
    r.smoothed_F = parse_field(f[8], line_no);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ResultRow> read_results(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_results(buf.str());
}

std::string plot_script(const std::vector<PlotCurve>& curves, const std::filesystem::path& script_path) {
  if (curves.empty()) throw std::invalid_argument("plot script needs at least one table");
  const std::filesystem::path base = script_path.parent_path();
  std::ostringstream out;
  out << "# gnuplot: smoothed F per epoch, seed mean via 'smooth unique'\n";
  out << "set datafile separator ','\n";
  out << "set logscale y\n";
  out << "set xlabel 'epoch'\n";
  out << "set ylabel 'F (moving mean, window 3)'\n";
  out << "set key top right\n";
  out << "plot \\\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    std::filesystem::path csv = curves[i].csv;
    if (csv.is_absolute() || (!base.empty() && csv.has_parent_path()))
      csv = std::filesystem::proximate(csv, base.empty() ? std::filesystem::current_path() : base);
    if (csv.is_absolute()) throw std::invalid_argument("plot script: cannot make " + csv.string() + " relative");
    out << "  " << quote_gnuplot(csv.generic_string()) << " skip 1 using 3:9 smooth unique with linespoints title "
        << quote_gnuplot(curves[i].title) << (i + 1 < curves.size() ? ", \\\n" : "\n");
  }
  return out.str();
}

void emit_plot_script(const std::vector<PlotCurve>& curves, const std::filesystem::path& script_path) {
  const std::string text = plot_script(curves, script_path);
  if (script_path.has_parent_path()) std::filesystem::create_directories(script_path.parent_path());
  std::ofstream out(script_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + script_path.string());
  out << text;
  if (!out.flush()) throw std::runtime_error("write failed for " + script_path.string());
}

}  // namespace curvesgd
