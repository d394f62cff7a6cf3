#include "incagg/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "incagg/error.hpp"

namespace incagg {

IncidentEmbedding::IncidentEmbedding(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw ValidationError("embedding dimension must be positive");
}

void IncidentEmbedding::add(std::string type, std::span<const float> vec) {
  if (vec.size() != dim_) throw ValidationError("vector for '" + type + "' has the wrong length");
  if (!std::all_of(vec.begin(), vec.end(), [](float x) { return std::isfinite(x); })) {
    throw ValidationError("vector for '" + type + "' has a non-finite entry");
  }
  if (type.empty() || type.find_first_of(" \t\n") != std::string::npos) {
    throw ValidationError("invalid incident type name '" + type + "'");
  }
  if (index_.count(type)) throw ValidationError("duplicate incident type '" + type + "'");
  index_.emplace(type, types_.size());
  types_.push_back(std::move(type));
  data_.insert(data_.end(), vec.begin(), vec.end());
}

std::optional<std::size_t> IncidentEmbedding::find(std::string_view type) const {
  auto it = index_.find(std::string(type));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const float> IncidentEmbedding::row(std::size_t r) const {
  if (r >= types_.size()) throw LookupError("embedding row out of range");
  return {data_.data() + r * dim_, dim_};
}

std::span<const float> IncidentEmbedding::vector(std::string_view type) const {
  if (auto r = find(type)) return row(*r);
  throw LookupError("incident type '" + std::string(type) + "' is not in the embedding vocabulary");
}

double cosine(std::span<const float> a, std::span<const float> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += double(a[k]) * double(b[k]);
    na += double(a[k]) * double(a[k]);
    nb += double(b[k]) * double(b[k]);
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double emb_softmax(const IncidentEmbedding& emb, std::string_view i, std::string_view j) {
  const auto vi = emb.vector(i);
  const auto target = emb.find(j);
  if (!target) throw LookupError("incident type '" + std::string(j) + "' is not in the embedding vocabulary");
  std::vector<double> logits(emb.size());
  for (std::size_t k = 0; k < emb.size(); ++k) {
    const auto vk = emb.row(k);
    double dot = 0.0;
    for (std::size_t d = 0; d < emb.dim(); ++d) dot += double(vi[d]) * double(vk[d]);
    logits[k] = dot;
  }
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double l : logits) total += std::exp(l - peak);
  return std::exp(logits[*target] - peak) / total;
}

}  // namespace incagg
