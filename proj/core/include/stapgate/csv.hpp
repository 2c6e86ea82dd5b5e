#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace stapgate {

/// Fixed 12-significant-digit rendering used for every numeric CSV cell.
std::string format_number(double value);

/// RFC-4180 quoting: wraps in quotes when the cell holds a comma, quote, CR
/// or LF, doubling embedded quotes.
std::string csv_escape(std::string_view cell);

class CsvWriter {
 public:
  CsvWriter(std::ostream& os, std::vector<std::string> header);

  std::size_t columns() const { return columns_; }

  void cells(const std::vector<std::string>& cells);

  template <typename... Ts>
  void row(const Ts&... values) {
    cells({to_cell(values)...});
  }

  static std::string to_cell(const std::string& s) { return s; }
  static std::string to_cell(std::string_view s) { return std::string(s); }
  static std::string to_cell(const char* s) { return s; }
  template <typename T>
    requires std::is_arithmetic_v<T>
  static std::string to_cell(T value) {
    if constexpr (std::is_floating_point_v<T>) {
      return format_number(static_cast<double>(value));
    } else {
      return std::to_string(value);
    }
  }

 private:
  std::ostream& os_;
  std::size_t columns_;
};

}  // namespace stapgate
