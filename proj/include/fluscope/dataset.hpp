#pragma once

#include <span>
#include <string>
#include <vector>

#include "fluscope/types.hpp"

namespace fluscope {

struct FeatureVector {
  std::vector<double> values;
  std::string schema_id;
};

/// Row-major feature matrix with labels and instance ids under one schema.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::string schema_id, std::size_t n_features)
      : schema_id_(std::move(schema_id)), n_features_(n_features) {}

  /// Throws ConfigError when the width or schema does not match.
  void add(std::span<const double> values, Label label, std::string id);
  void add(const FeatureVector& fv, Label label, std::string id);

  const std::string& schema_id() const { return schema_id_; }
  std::size_t n_features() const { return n_features_; }
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }

  std::span<const double> row(std::size_t i) const { return {values_.data() + i * n_features_, n_features_}; }
  double at(std::size_t i, std::size_t j) const { return values_[i * n_features_ + j]; }
  Label label(std::size_t i) const { return labels_[i]; }
  const std::vector<Label>& labels() const { return labels_; }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  FeatureVector vector(std::size_t i) const;

  std::size_t count(Label l) const;
  Dataset subset(std::span<const std::size_t> rows) const;
  Dataset with_flipped_labels() const;

 private:
  std::string schema_id_;
  std::size_t n_features_ = 0;
  std::vector<double> values_;
  std::vector<Label> labels_;
  std::vector<std::string> ids_;
};

}  // namespace fluscope
