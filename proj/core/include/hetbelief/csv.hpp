#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace hetbelief {

using CsvField = std::variant<std::string, double, std::int64_t>;
using CsvRecord = std::vector<CsvField>;

/// 17 significant digits, '.' decimal separator.
std::string format_double(double value);

/// Streams RFC-4180 style CSV: header first, '\n' line ends, fields quoted
/// only when they contain a comma, quote, or line break.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> schema);

  /// Throws ValidationError if the record width differs from the schema.
  void write(const CsvRecord& record);

 private:
  std::ostream& out_;
  std::vector<std::string> schema_;
};

/// Writes `records` to `path`. Throws IoError when the file cannot be written.
void emit_csv(const std::vector<CsvRecord>& records, const std::vector<std::string>& schema,
              const std::filesystem::path& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(std::istream& in);

}  // namespace hetbelief
