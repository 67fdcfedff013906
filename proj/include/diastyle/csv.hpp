#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace diastyle::csv {

struct Row {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
// line breaks. Accepts LF or CRLF record separators. Throws DataError on an
// unterminated quote or stray characters after a closing quote.
std::vector<Row> parse(std::string_view content);

// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

}  // namespace diastyle::csv

namespace diastyle::io {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Shortest decimal that round-trips the double.
std::string format_roundtrip(double value);

// printf("%.*g") with the given significant digits.
std::string format_sig(double value, int digits);

}  // namespace diastyle::io
