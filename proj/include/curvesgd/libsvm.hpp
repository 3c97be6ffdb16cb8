#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>

#include "curvesgd/objectives.hpp"

namespace curvesgd {

/// How raw labels become training labels.
///   automatic: {-1,+1} kept, {1,2} -> {+1,-1}, {0,1} -> {-1,+1}, otherwise an error
///   raw:       labels kept as read (regression)
enum class LabelMapping { automatic, raw };

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Lines of `<label> <index>:<value> ...` with 1-based strictly increasing
/// indices. Blank lines are skipped; the dimension is the largest index.
Dataset parse_libsvm(std::istream& in, LabelMapping mapping = LabelMapping::automatic);
Dataset parse_libsvm_text(const std::string& text, LabelMapping mapping = LabelMapping::automatic);
Dataset load_libsvm(const std::filesystem::path& path, LabelMapping mapping = LabelMapping::automatic);

}  // namespace curvesgd
