#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace incagg {

/// Incident-type vectors, all of the same dimension, stored row-major.
class IncidentEmbedding {
 public:
  explicit IncidentEmbedding(std::size_t dim = 128);

  /// Throws ValidationError on a duplicate type, wrong length or non-finite entry.
  void add(std::string type, std::span<const float> vec);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return types_.size(); }
  const std::vector<std::string>& types() const noexcept { return types_; }

  std::optional<std::size_t> find(std::string_view type) const;
  std::span<const float> row(std::size_t r) const;
  /// Throws LookupError for an out-of-vocabulary type.
  std::span<const float> vector(std::string_view type) const;

  bool operator==(const IncidentEmbedding& o) const {
    return dim_ == o.dim_ && types_ == o.types_ && data_ == o.data_;
  }

 private:
  std::size_t dim_;
  std::vector<std::string> types_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<float> data_;
};

/// Cosine similarity; 0 if either vector has zero norm.
double cosine(std::span<const float> a, std::span<const float> b);

/// Full-vocabulary softmax exp(v_i . v_j) / sum_k exp(v_i . v_k).
/// Throws LookupError for unknown types.
double emb_softmax(const IncidentEmbedding& emb, std::string_view i, std::string_view j);

}  // namespace incagg
