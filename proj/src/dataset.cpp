#include "fluscope/dataset.hpp"

#include <algorithm>

namespace fluscope {

void Dataset::add(std::span<const double> values, Label label, std::string id) {
  if (values.size() != n_features_)
    throw ConfigError("feature vector of width " + std::to_string(values.size()) + " added to schema '" +
                      schema_id_ + "' of width " + std::to_string(n_features_));
  values_.insert(values_.end(), values.begin(), values.end());
  labels_.push_back(label);
  ids_.push_back(std::move(id));
}

void Dataset::add(const FeatureVector& fv, Label label, std::string id) {
  if (fv.schema_id != schema_id_)
    throw ConfigError("feature vector schema '" + fv.schema_id + "' does not match dataset schema '" + schema_id_ + "'");
  add(fv.values, label, std::move(id));
}

FeatureVector Dataset::vector(std::size_t i) const {
  const auto r = row(i);
  return {{r.begin(), r.end()}, schema_id_};
}

std::size_t Dataset::count(Label l) const { return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), l)); }

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out(schema_id_, n_features_);
  out.values_.reserve(rows.size() * n_features_);
  for (const auto r : rows) out.add(row(r), labels_[r], ids_[r]);
  return out;
}

Dataset Dataset::with_flipped_labels() const {
  Dataset out = *this;
  for (auto& l : out.labels_) l = flipped(l);
  return out;
}

}  // namespace fluscope
