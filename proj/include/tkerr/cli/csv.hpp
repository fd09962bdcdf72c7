#pragma once

#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace tkerr::cli {

/// Numbers in scientific notation with 12 significant digits, '.' decimal.
std::string format_number(double v);

/// Header-first CSV file. Cells are numbers or plain text (quoted when they
/// contain a comma, quote or newline).
class CsvWriter {
 public:
  using Cell = std::variant<double, std::string>;

  /// Creates parent directories. Throws std::runtime_error if the file
  /// cannot be opened.
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  void row(const std::vector<Cell>& cells);

 private:
  void write_line(const std::vector<std::string>& fields);

  std::ofstream out_;
  std::size_t columns_;
};

}  // namespace tkerr::cli
