#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "curvesgd/objectives.hpp"
#include "curvesgd/schedule.hpp"

namespace curvesgd {

enum class ReferencePolicy { automatic, none, required };

/// Plain-text run description, one `key = value` per line, `#` comments.
///
///   name = fig1
///   dataset = synthetic:kind=blobs,n=1000,d=10,seed=1,sep=10   (or libsvm:<path>)
///   loss = logistic
///   objective = norm2_squared
///   lambda = 0.001
///   schedule = power:scale=0.1,h=0.5      (repeatable, one run per line)
///   seeds = 1,2,3                        (or a range 1..10)
///   epochs = 30
///   stride = 1                           (epochs between records)
///   region_radius = 3
///   reference = auto                     (auto | none | required)
///   output = out
struct RunFile {
  std::string name = "run";
  std::string dataset;
  Loss loss = Loss::logistic;
  Regularizer objective = Regularizer::none;
  double lambda = 0.0;
  std::vector<ScheduleSpec> schedules;
  std::vector<std::uint64_t> seeds{1};
  std::size_t epochs = 1;
  std::size_t stride = 1;
  double region_radius = 3.0;
  ReferencePolicy reference = ReferencePolicy::automatic;
  std::string output = ".";

  bool operator==(const RunFile& other) const;
};

RunFile parse_runfile(std::istream& in);
RunFile parse_runfile_text(const std::string& text);
RunFile load_runfile(const std::filesystem::path& path);
std::string serialize(const RunFile& file);

/// Builds the dataset named by a RunFile; relative libsvm paths resolve
/// against base_dir.
Dataset load_dataset(const std::string& source, const std::filesystem::path& base_dir = {});

/// `h=0.5` style label for a schedule.
std::string schedule_label(const ScheduleSpec& spec);

}  // namespace curvesgd
