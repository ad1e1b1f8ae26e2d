#include "sdde/io.hpp"

#include <cstdio>

namespace sdde {

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void CsvWriter::header(const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) os_ << ',';
    os_ << cols[i];
  }
  os_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os_ << ',';
    os_ << format17(values[i]);
  }
  os_ << '\n';
}

}  // namespace sdde
