#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace finq {

/// RFC-4180-style field splitting for a single physical line. Quoted fields
/// may contain commas and doubled quotes; embedded newlines are not supported.
std::vector<std::string> split_csv_line(std::string_view line);

/// Quotes a field only when it needs it.
std::string csv_escape(std::string_view field);

class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  /// Reads the next non-blank line. Lines starting with '#' are comments.
  bool next(std::vector<std::string>& fields);
  /// 1-based physical line number of the last record returned.
  std::size_t line_number() const { return line_number_; }

 private:
  std::istream& in_;
  std::size_t line_number_ = 0;
};

}  // namespace finq
