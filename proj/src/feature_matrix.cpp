#include "diastyle/feature_matrix.hpp"

#include <charconv>
#include <cmath>

#include "diastyle/csv.hpp"
#include "diastyle/error.hpp"

namespace diastyle {

std::string_view to_string(FeatureKind kind) {
  return kind == FeatureKind::handcrafted ? "handcrafted" : "embedding";
}

FeatureKind parse_feature_kind(std::string_view text) {
  if (text == "handcrafted") return FeatureKind::handcrafted;
  if (text == "embedding") return FeatureKind::embedding;
  throw std::invalid_argument("unknown feature kind '" + std::string(text) + "'");
}

FeatureMatrix::FeatureMatrix(std::vector<std::string> columns, FeatureKind kind)
    : kind_(kind), columns_(std::move(columns)) {}

void FeatureMatrix::add_row(std::string id, std::span<const double> values) {
  if (values.size() != cols()) {
    throw DataError("row '" + id + "' has " + std::to_string(values.size()) + " values, expected " +
                    std::to_string(cols()));
  }
  if (!index_.emplace(id, ids_.size()).second) throw DataError("duplicate feature row id '" + id + "'");
  ids_.push_back(std::move(id));
  values_.insert(values_.end(), values.begin(), values.end());
}

std::size_t FeatureMatrix::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? npos : it->second;
}

std::string to_csv(const FeatureMatrix& matrix) {
  std::vector<std::string> header{"id"};
  header.insert(header.end(), matrix.columns().begin(), matrix.columns().end());
  std::string out = csv::join(header) + "\n";
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    out += csv::escape(matrix.ids()[r]);
    for (double v : matrix.row(r)) {
      out.push_back(',');
      out += io::format_roundtrip(v);
    }
    out.push_back('\n');
  }
  return out;
}

FeatureMatrix feature_matrix_from_csv(std::string_view content, FeatureKind kind) {
  const auto rows = csv::parse(content);
  if (rows.empty() || rows.front().fields.empty() || rows.front().fields.front() != "id") {
    throw DataError("feature CSV must start with an 'id' header column");
  }
  std::vector<std::string> columns(rows.front().fields.begin() + 1, rows.front().fields.end());
  FeatureMatrix matrix(columns, kind);
  std::vector<double> values(columns.size());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    if (f.size() != columns.size() + 1) {
      throw DataError("line " + std::to_string(rows[r].line) + ": wrong field count in feature CSV");
    }
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto& cell = f[c + 1];
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), values[c]);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(values[c])) {
        throw DataError("line " + std::to_string(rows[r].line) + ": bad numeric value '" + cell + "'");
      }
    }
    matrix.add_row(f[0], values);
  }
  return matrix;
}

}  // namespace diastyle
