#include "gaug/neighborhood_index.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>
#include <unordered_set>

#include "gaug/error.hpp"

namespace gaug {

NeighborhoodIndex::NeighborhoodIndex(std::size_t k, std::vector<std::uint32_t> neighbors)
    : k_(k), count_(0), neighbors_(std::move(neighbors)) {
    if (k_ == 0) throw InvalidArgument("neighborhood size k must be >= 1");
    if (neighbors_.empty() || neighbors_.size() % k_ != 0) {
        throw InvalidArgument("neighbor matrix size is not a positive multiple of k");
    }
    count_ = neighbors_.size() / k_;
    if (k_ > count_) throw InvalidArgument("k exceeds the number of instances");
    std::unordered_set<std::uint32_t> seen;
    for (std::size_t i = 0; i < count_; ++i) {
        seen.clear();
        for (std::uint32_t id : row(i)) {
            if (id >= count_) {
                throw InvalidArgument("neighbor id " + std::to_string(id) + " out of range in row " +
                                      std::to_string(i));
            }
            if (!seen.insert(id).second) {
                throw InvalidArgument("duplicate neighbor id in row " + std::to_string(i));
            }
        }
    }
}

namespace {

struct Candidate {
    double similarity;
    std::uint32_t id;
};

bool more_similar(const Candidate& a, const Candidate& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.id < b.id;
}

std::vector<double> normalized_rows(const EmbeddingStore& store) {
    const std::size_t n = store.count();
    const std::size_t d = store.dim();
    std::vector<double> unit(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        auto r = store.row(i);
        double s = 0.0;
        for (float v : r) s += static_cast<double>(v) * static_cast<double>(v);
        const double norm = std::sqrt(s);
        for (std::size_t j = 0; j < d; ++j) unit[i * d + j] = static_cast<double>(r[j]) / norm;
    }
    return unit;
}

void scan_rows(const std::vector<double>& unit, std::size_t n, std::size_t d, std::size_t k,
               std::size_t begin, std::size_t end, std::vector<std::uint32_t>& out) {
    std::vector<Candidate> candidates(n);
    for (std::size_t i = begin; i < end; ++i) {
        const double* q = &unit[i * d];
        for (std::size_t j = 0; j < n; ++j) {
            const double* r = &unit[j * d];
            double dot = 0.0;
            for (std::size_t t = 0; t < d; ++t) dot += q[t] * r[t];
            candidates[j] = {dot, static_cast<std::uint32_t>(j)};
        }
        std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                          candidates.end(), more_similar);
        for (std::size_t t = 0; t < k; ++t) out[i * k + t] = candidates[t].id;
    }
}

}  // namespace

NeighborhoodIndex build_neighborhoods(const EmbeddingStore& store, std::size_t k,
                                      unsigned workers) {
    const std::size_t n = store.count();
    if (k < 1) throw InvalidArgument("neighborhood size k must be >= 1");
    if (k > n) {
        throw InvalidArgument("k=" + std::to_string(k) + " exceeds instance count " +
                              std::to_string(n));
    }
    const std::size_t d = store.dim();
    const std::vector<double> unit = normalized_rows(store);
    std::vector<std::uint32_t> out(n * k);

    const std::size_t threads = std::clamp<std::size_t>(workers, 1, n);
    if (threads == 1) {
        scan_rows(unit, n, d, k, 0, n, out);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (n + threads - 1) / threads;
        for (std::size_t t = 0; t < threads; ++t) {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(n, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back([&, begin, end] { scan_rows(unit, n, d, k, begin, end, out); });
        }
    }
    return NeighborhoodIndex(k, std::move(out));
}

std::uint32_t sample_neighbor(const NeighborhoodIndex& index, std::size_t i, Rng& rng) {
    if (i >= index.count()) throw InvalidArgument("sample_neighbor: id out of range");
    auto r = index.row(i);
    std::uniform_int_distribution<std::size_t> pick(0, r.size() - 1);
    return r[pick(rng)];
}

std::map<int, double> nn_corruption(const NeighborhoodIndex& index,
                                    std::span<const std::uint32_t> labels) {
    if (labels.size() != index.count()) {
        throw InvalidArgument("nn_corruption: labels must cover all " +
                              std::to_string(index.count()) + " instances, got " +
                              std::to_string(labels.size()));
    }
    std::map<int, double> sums;
    std::map<int, std::size_t> counts;
    const double k = static_cast<double>(index.k());
    for (std::size_t i = 0; i < index.count(); ++i) {
        std::size_t foreign = 0;
        for (std::uint32_t j : index.row(i)) {
            if (labels[j] != labels[i]) ++foreign;
        }
        const int cls = static_cast<int>(labels[i]);
        sums[cls] += static_cast<double>(foreign) / k;
        counts[cls] += 1;
    }
    for (auto& [cls, s] : sums) s /= static_cast<double>(counts[cls]);
    return sums;
}

}  // namespace gaug
