#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace soc {

// Shortest decimal that round-trips to the same double; locale independent.
std::string format_number(double value);
std::string format_number(std::int64_t value);
double parse_number(std::string_view text);

// Comma-separated writer with a header row.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  template <typename... Cells>
  void row(const Cells&... cells) {
    std::string line;
    (append(line, cells), ...);
    line.back() = '\n';
    out_ << line;
  }

 private:
  static void append(std::string& line, double v) { line += format_number(v) + ','; }
  static void append(std::string& line, std::int64_t v) { line += format_number(v) + ','; }
  static void append(std::string& line, int v) { line += format_number(static_cast<std::int64_t>(v)) + ','; }
  static void append(std::string& line, std::string_view v) { (line += v) += ','; }
  static void append(std::string& line, const std::string& v) { (line += v) += ','; }
  static void append(std::string& line, const char* v) { (line += v) += ','; }

  std::ofstream out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a named column; throws std::runtime_error when absent.
  std::size_t column(std::string_view name) const;
  std::vector<double> numbers(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace soc
