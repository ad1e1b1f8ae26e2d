#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "sdde/linalg.hpp"

namespace sdde {

/// Shortest exact decimal is not reproducible across formatting libraries;
/// all file output goes through this 17-significant-digit formatter instead.
std::string format17(double v);

/// RFC-4180-style CSV with a header row, LF line endings, fields that never
/// need quoting (numbers only after the header).
class CsvWriter {
public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}
  void header(const std::vector<std::string>& cols);
  void row(const std::vector<double>& values);

private:
  std::ostream& os_;
};

}  // namespace sdde
