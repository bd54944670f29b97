#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gaug/sample.hpp"

namespace gaug {

/// Maps a sample to its d-dimensional embedding.
using Extractor = std::function<std::vector<float>(const Sample&)>;

/// Row-major N×d matrix of instance embeddings with optional labels.
///
/// Invariants: count() >= 1, every entry finite, no all-zero row, labels
/// either absent or of length count(). Immutable once constructed.
class EmbeddingStore {
public:
    EmbeddingStore(std::size_t dim, std::vector<float> embeddings,
                   std::optional<std::vector<std::uint32_t>> labels = std::nullopt);

    std::size_t count() const { return count_; }
    std::size_t dim() const { return dim_; }
    std::span<const float> row(std::size_t i) const {
        return std::span<const float>(embeddings_).subspan(i * dim_, dim_);
    }
    std::span<const float> data() const { return embeddings_; }
    bool has_labels() const { return labels_.has_value(); }
    const std::optional<std::vector<std::uint32_t>>& labels() const { return labels_; }

    bool operator==(const EmbeddingStore&) const = default;

private:
    std::size_t dim_;
    std::size_t count_;
    std::vector<float> embeddings_;
    std::optional<std::vector<std::uint32_t>> labels_;
};

/// Applies `extractor` to every sample. Rejects empty datasets, inconsistent
/// dimensions, and non-finite or zero-norm embeddings (naming the offending id).
EmbeddingStore extract_embeddings(const Dataset& dataset, const Extractor& extractor);

/// Cosine similarity; both vectors must be non-zero.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

}  // namespace gaug
