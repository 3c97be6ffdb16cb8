#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "curvesgd/engine.hpp"

namespace curvesgd {

inline constexpr const char* kResultHeader = "run,seed,epoch,t,eta,F,E,Y,smoothed_F";

/// One CSV row. NaN fields serialize as empty cells.
struct ResultRow {
  std::string run;
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
  std::size_t t = 0;
  double eta = 0.0;
  double F = 0.0;
  double E = 0.0;
  double Y = 0.0;
  double smoothed_F = 0.0;
};

/// Rows for every record of every seed. epoch = t / n; smoothed_F is the
/// trailing 3-epoch mean of that seed's epoch-end F, empty off epoch ends.
std::vector<ResultRow> result_rows(const std::string& run_id, const SweepResult& sweep, std::size_t components);

std::string format_results(const std::vector<ResultRow>& rows);
void write_results(const std::vector<ResultRow>& rows, const std::filesystem::path& path);
std::vector<ResultRow> parse_results(const std::string& text);
std::vector<ResultRow> read_results(const std::filesystem::path& path);

/// 17 significant digits; NaN -> "".
std::string format_field(double value);

struct PlotCurve {
  std::filesystem::path csv;
  std::string title;
};

/// gnuplot script, one curve per table: smoothed F against epoch, log y.
/// CSV paths are written relative to the script's directory.
std::string plot_script(const std::vector<PlotCurve>& curves, const std::filesystem::path& script_path);
void emit_plot_script(const std::vector<PlotCurve>& curves, const std::filesystem::path& script_path);

}  // namespace curvesgd
