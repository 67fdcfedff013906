#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace diastyle {

enum class FeatureKind { handcrafted, embedding };

std::string_view to_string(FeatureKind kind);
FeatureKind parse_feature_kind(std::string_view text);

// Dense row-major matrix with named columns and string row ids.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::vector<std::string> columns, FeatureKind kind);

  void add_row(std::string id, std::span<const double> values);

  std::size_t rows() const { return ids_.size(); }
  std::size_t cols() const { return columns_.size(); }
  FeatureKind kind() const { return kind_; }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::string>& ids() const { return ids_; }

  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols(), cols()};
  }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

  // Row index by id, or npos.
  std::size_t find(std::string_view id) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  bool operator==(const FeatureMatrix& other) const {
    return kind_ == other.kind_ && columns_ == other.columns_ && ids_ == other.ids_ &&
           values_ == other.values_;
  }

 private:
  FeatureKind kind_ = FeatureKind::handcrafted;
  std::vector<std::string> columns_;
  std::vector<std::string> ids_;
  std::vector<double> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

// CSV with header "id,<columns...>". Values use the shortest round-trip
// decimal form, so 0/1 flags come out as 0 and 1.
std::string to_csv(const FeatureMatrix& matrix);
FeatureMatrix feature_matrix_from_csv(std::string_view content, FeatureKind kind);

}  // namespace diastyle
