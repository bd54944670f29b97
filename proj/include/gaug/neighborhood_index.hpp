#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "gaug/embedding_store.hpp"
#include "gaug/rng.hpp"

namespace gaug {

/// Per-instance list of the k most cosine-similar instances, most similar first.
/// Each instance is a candidate of its own neighborhood.
class NeighborhoodIndex {
public:
    NeighborhoodIndex(std::size_t k, std::vector<std::uint32_t> neighbors);

    std::size_t k() const { return k_; }
    std::size_t count() const { return count_; }
    std::span<const std::uint32_t> row(std::size_t i) const {
        return std::span<const std::uint32_t>(neighbors_).subspan(i * k_, k_);
    }
    std::span<const std::uint32_t> data() const { return neighbors_; }

    bool operator==(const NeighborhoodIndex&) const = default;

private:
    std::size_t k_;
    std::size_t count_;
    std::vector<std::uint32_t> neighbors_;
};

/// Exact cosine k-NN over all rows of `store`; ties broken by ascending id.
/// `workers` > 1 splits the query rows across threads; output does not depend on it.
NeighborhoodIndex build_neighborhoods(const EmbeddingStore& store, std::size_t k,
                                      unsigned workers = 1);

/// Uniform draw from row i of the index.
std::uint32_t sample_neighbor(const NeighborhoodIndex& index, std::size_t i, Rng& rng);

/// Per-class mean fraction of neighbors whose label differs from the datapoint's own.
std::map<int, double> nn_corruption(const NeighborhoodIndex& index,
                                    std::span<const std::uint32_t> labels);

}  // namespace gaug
