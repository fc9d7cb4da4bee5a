#pragma once

#include <string>
#include <vector>

namespace charflow {

// Numeric CSV table with a header row; lines starting with '#' are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  // Index of a named column; throws InvalidInput when absent.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

}  // namespace charflow
