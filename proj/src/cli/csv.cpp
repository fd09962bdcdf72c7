#include "tkerr/cli/csv.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

namespace tkerr::cli {
namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : columns_(header.size()) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw std::runtime_error("cannot open output file " + path);
  write_line(header);
}

void CsvWriter::row(const std::vector<Cell>& cells) {
  if (cells.size() != columns_) throw std::logic_error("CSV row width does not match header");
  std::vector<std::string> fields;
  fields.reserve(cells.size());
  for (const auto& cell : cells) {
    if (const double* d = std::get_if<double>(&cell)) {
      fields.push_back(format_number(*d));
    } else {
      fields.push_back(std::get<std::string>(cell));
    }
  }
  write_line(fields);
}

void CsvWriter::write_line(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << quote(fields[i]);
  }
  out_ << '\n';
  if (!out_) throw std::runtime_error("write to CSV output failed");
}

}  // namespace tkerr::cli
