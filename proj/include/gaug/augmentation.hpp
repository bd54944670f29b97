#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include <json.hpp>

#include "gaug/embedding_store.hpp"
#include "gaug/generative.hpp"
#include "gaug/mixing.hpp"
#include "gaug/neighborhood_index.hpp"
#include "gaug/transforms.hpp"

namespace gaug {

inline constexpr double kDefaultFidThreshold = 150.0;
inline constexpr std::size_t kDefaultNeighborhoodSize = 50;

/// Knobs of the generator gate and of the two handcrafted pipelines around it.
struct AugmentationPolicy {
    double p_g = 0.0;
    TruncationPolicy truncation = TruncationPolicy::at(kInstanceConditionedSigma);
    std::size_t k = kDefaultNeighborhoodSize;
    Pipeline pipeline_real;       // applied to real samples
    Pipeline pipeline_generated;  // applied to generator outputs
    std::optional<double> fid_threshold;
    std::optional<std::set<int>> allowed_classes;  // present iff fid_threshold is
    bool use_soft_labels = true;
    std::optional<MixingConfig> mixing;

    void validate() const;
};

/// Sets fid_threshold and the classes passing it.
void apply_fid_filter(AugmentationPolicy& policy, const std::map<int, double>& per_class_fid,
                      double threshold);

nlohmann::json to_json(const AugmentationPolicy& policy);
/// Unknown keys are rejected. `allowed_classes` is never read from JSON; it is derived
/// from the threshold at run time.
AugmentationPolicy policy_from_json(const nlohmann::json& j);

/// N×C matrix; row i is the class histogram of neighborhood i divided by k.
class SoftLabelTable {
public:
    SoftLabelTable(std::size_t rows, std::size_t classes, std::vector<double> values);

    std::size_t rows() const { return rows_; }
    std::size_t classes() const { return classes_; }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(values_).subspan(i * classes_, classes_);
    }

private:
    std::size_t rows_;
    std::size_t classes_;
    std::vector<double> values_;
};

SoftLabelTable soft_labels(const NeighborhoodIndex& index, std::span<const std::uint32_t> labels,
                           std::size_t num_classes);

/// Uniformly random subset of {0..B-1} with exactly ceil(B * p_g) members, ascending.
std::vector<std::size_t> select_augmented_indices(std::size_t batch_size, double p_g, Rng& rng);

/// {c : fid_c < threshold}. An infinite threshold admits every class.
std::set<int> fid_filter(const std::map<int, double>& per_class_fid, double threshold);

struct LabeledBatch {
    std::vector<std::uint32_t> ids;
    std::vector<Sample> samples;
    std::size_t num_classes = 0;
    std::vector<double> labels;  // B×num_classes, row-stochastic
    std::vector<bool> augmented_mask;
    std::optional<MixChoice> mixing;  // unset when mixing is off

    std::size_t size() const { return samples.size(); }
    std::span<const double> label(std::size_t b) const {
        return std::span<const double>(labels).subspan(b * num_classes, num_classes);
    }
    std::span<double> label(std::size_t b) {
        return std::span<double>(labels).subspan(b * num_classes, num_classes);
    }
};

/// Independent random streams for one batch. The gate and latent streams never feed
/// the transform stream, so p_g = 0 reproduces a gate-free loader exactly.
struct AugmentStreams {
    Rng gate;
    Rng latent;
    Rng transform;
    Rng mix;

    static AugmentStreams derive(std::uint64_t seed, std::uint64_t worker, std::uint64_t batch_index);
};

/// Gate-free loader: pipeline_real on every sample with one-hot labels.
LabeledBatch plain_batch(std::span<const std::uint32_t> ids, const Dataset& dataset,
                         const Pipeline& pipeline_real, std::size_t num_classes, Rng& transform_rng);

/// Replaces ceil(B * p_g) batch entries with generator samples (subject to the class filter),
/// applies the matching pipeline to every entry, and mixes the assembled batch if enabled.
/// `adapter` may be null only when p_g == 0; `soft_table` is required when use_soft_labels.
LabeledBatch da_icgan_augment_batch(std::span<const std::uint32_t> ids, const Dataset& dataset,
                                    const AugmentationPolicy& policy, const GeneratorAdapter* adapter,
                                    const EmbeddingStore& store, const SoftLabelTable* soft_table,
                                    std::size_t num_classes, AugmentStreams& streams);

/// Pairs entry b with (b+1) mod B and applies one CutMix / MixUp / nothing choice to the batch.
void apply_batch_mixing(LabeledBatch& batch, const MixingConfig& cfg, Rng& rng);

}  // namespace gaug
