#include "gaug/embedding_store.hpp"

#include <cmath>
#include <string>

#include "gaug/error.hpp"

namespace gaug {

namespace {

double squared_norm(std::span<const float> v) {
    double s = 0.0;
    for (float x : v) s += static_cast<double>(x) * static_cast<double>(x);
    return s;
}

}  // namespace

EmbeddingStore::EmbeddingStore(std::size_t dim, std::vector<float> embeddings,
                               std::optional<std::vector<std::uint32_t>> labels)
    : dim_(dim), count_(0), embeddings_(std::move(embeddings)), labels_(std::move(labels)) {
    if (dim_ == 0) throw InvalidArgument("embedding dimension must be >= 1");
    if (embeddings_.empty() || embeddings_.size() % dim_ != 0) {
        throw InvalidArgument("embedding matrix size " + std::to_string(embeddings_.size()) +
                              " is not a positive multiple of dim " + std::to_string(dim_));
    }
    count_ = embeddings_.size() / dim_;
    if (labels_ && labels_->size() != count_) {
        throw InvalidArgument("label count does not match embedding count");
    }
    for (std::size_t i = 0; i < count_; ++i) {
        auto r = row(i);
        for (float v : r) {
            if (!std::isfinite(v)) {
                throw InvalidArgument("non-finite embedding at id " + std::to_string(i));
            }
        }
        if (squared_norm(r) == 0.0) {
            throw InvalidArgument("zero-norm embedding at id " + std::to_string(i));
        }
    }
}

EmbeddingStore extract_embeddings(const Dataset& dataset, const Extractor& extractor) {
    if (dataset.empty()) throw InvalidArgument("cannot extract embeddings from an empty dataset");
    const bool labeled = dataset.front().label.has_value();
    std::size_t dim = 0;
    std::vector<float> matrix;
    std::vector<std::uint32_t> labels;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const Instance& inst = dataset[i];
        std::vector<float> h = extractor(inst.sample);
        if (i == 0) {
            dim = h.size();
            if (dim == 0) throw InvalidArgument("extractor returned an empty embedding at id 0");
            matrix.reserve(dim * dataset.size());
        } else if (h.size() != dim) {
            throw InvalidArgument("inconsistent embedding dimension at id " +
                                  std::to_string(inst.id) + ": expected " + std::to_string(dim) +
                                  ", got " + std::to_string(h.size()));
        }
        for (float v : h) {
            if (!std::isfinite(v)) {
                throw InvalidArgument("non-finite embedding at id " + std::to_string(inst.id));
            }
        }
        if (squared_norm(h) == 0.0) {
            throw InvalidArgument("zero-norm embedding at id " + std::to_string(inst.id));
        }
        matrix.insert(matrix.end(), h.begin(), h.end());
        if (inst.label.has_value() != labeled) {
            throw InvalidArgument("labels must be present for all instances or for none (id " +
                                  std::to_string(inst.id) + ")");
        }
        if (labeled) {
            if (*inst.label < 0) {
                throw InvalidArgument("negative label at id " + std::to_string(inst.id));
            }
            labels.push_back(static_cast<std::uint32_t>(*inst.label));
        }
    }
    std::optional<std::vector<std::uint32_t>> maybe_labels;
    if (labeled) maybe_labels = std::move(labels);
    return EmbeddingStore(dim, std::move(matrix), std::move(maybe_labels));
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) throw InvalidArgument("cosine_similarity: dimension mismatch");
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    const double na = std::sqrt(squared_norm(a));
    const double nb = std::sqrt(squared_norm(b));
    if (na == 0.0 || nb == 0.0) throw InvalidArgument("cosine_similarity: zero-norm vector");
    return dot / (na * nb);
}

}  // namespace gaug
