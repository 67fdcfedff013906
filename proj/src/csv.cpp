#include "diastyle/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "diastyle/error.hpp"

namespace diastyle::csv {

std::vector<Row> parse(std::string_view content) {
  std::vector<Row> rows;
  std::size_t pos = 0;
  std::size_t line = 1;
  const std::size_t n = content.size();

  while (pos < n) {
    Row row;
    row.line = line;
    std::string field;
    bool end_of_record = false;
    while (!end_of_record) {
      field.clear();
      if (pos < n && content[pos] == '"') {
        ++pos;
        bool closed = false;
        while (pos < n) {
          const char c = content[pos];
          if (c == '"') {
            if (pos + 1 < n && content[pos + 1] == '"') {
              field.push_back('"');
              pos += 2;
              continue;
            }
            ++pos;
            closed = true;
            break;
          }
          if (c == '\n') ++line;
          field.push_back(c);
          ++pos;
        }
        if (!closed) {
          throw DataError("line " + std::to_string(row.line) + ": unterminated quoted field");
        }
        if (pos < n && content[pos] != ',' && content[pos] != '\n' && content[pos] != '\r') {
          throw DataError("line " + std::to_string(line) + ": unexpected character after closing quote");
        }
      } else {
        while (pos < n && content[pos] != ',' && content[pos] != '\n' && content[pos] != '\r') {
          field.push_back(content[pos++]);
        }
      }
      row.fields.push_back(field);

      if (pos >= n) {
        end_of_record = true;
      } else if (content[pos] == ',') {
        ++pos;
      } else {
        if (content[pos] == '\r') ++pos;
        if (pos < n && content[pos] == '\n') ++pos;
        ++line;
        end_of_record = true;
      }
    }
    const bool blank = row.fields.size() == 1 && row.fields[0].empty();
    if (!blank) rows.push_back(std::move(row));
  }
  return rows;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(fields[i]);
  }
  return out;
}

}  // namespace diastyle::csv

namespace diastyle::io {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string format_roundtrip(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("to_chars failed");
  return std::string(buf, end);
}

std::string format_sig(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, value);
  return buf;
}

}  // namespace diastyle::io
