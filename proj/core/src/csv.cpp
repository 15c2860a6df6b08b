#include "hetbelief/csv.hpp"

#include <charconv>
#include <fstream>
#include <ostream>

#include "hetbelief/errors.hpp"

namespace hetbelief {
namespace {

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string render(const CsvField& field) {
  if (const auto* s = std::get_if<std::string>(&field)) return quote(*s);
  if (const auto* d = std::get_if<double>(&field)) return format_double(*d);
  return std::to_string(std::get<std::int64_t>(field));
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return {buf, res.ptr};
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> schema)
    : out_(out), schema_(std::move(schema)) {
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    out_ << (i ? "," : "") << quote(schema_[i]);
  }
  out_ << '\n';
}

void CsvWriter::write(const CsvRecord& record) {
  if (record.size() != schema_.size()) {
    throw ValidationError("csv: record has " + std::to_string(record.size()) +
                          " fields, schema has " + std::to_string(schema_.size()));
  }
  for (std::size_t i = 0; i < record.size(); ++i) {
    out_ << (i ? "," : "") << render(record[i]);
  }
  out_ << '\n';
}

void emit_csv(const std::vector<CsvRecord>& records, const std::vector<std::string>& schema,
              const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  CsvWriter writer(out, schema);
  for (const auto& r : records) writer.write(r);
  out.flush();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

CsvTable parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> lines;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  char ch;
  while (in.get(ch)) {
    any = true;
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (ch == '\n') {
      row.push_back(std::move(field));
      field.clear();
      lines.push_back(std::move(row));
      row.clear();
      any = false;
    } else if (ch != '\r') {
      field += ch;
    }
  }
  if (any) {
    row.push_back(std::move(field));
    lines.push_back(std::move(row));
  }
  CsvTable table;
  if (!lines.empty()) {
    table.header = std::move(lines.front());
    table.rows.assign(std::make_move_iterator(lines.begin() + 1),
                      std::make_move_iterator(lines.end()));
  }
  return table;
}

}  // namespace hetbelief
