#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaug/augmentation.hpp"
#include "gaug/sample.hpp"
#include "gaug/toy_gan.hpp"

namespace gaug {

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Synthetic dataset recipe. Generators: "cluster_images", "vector_clusters", "gaussian_mixture_2d".
struct DatasetSpec {
    std::string generator = "cluster_images";
    std::size_t n = 1000;
    std::size_t n_test = 500;
    int classes = 10;
    Shape shape{1, 4, 4};
    std::uint64_t seed = 0;
    double cluster_std = 0.05;
    int group_size = 1;  // cluster generators only
    double group_spread = 0.1;
};

/// Feature extractor recipe. Kinds: "random_projection" (flatten, center, project to `dim`)
/// and "centered_identity" (flatten, subtract 0.5).
struct ExtractorSpec {
    std::string kind = "random_projection";
    std::size_t dim = 16;
    std::uint64_t seed = 7;
};

struct TrainingConfig {
    int epochs = 10;
    int batch_size = 64;
    double learning_rate = 0.1;
    int reference_batch = 256;  // lr_effective = learning_rate * batch_size / reference_batch
    std::vector<int> lr_milestones;
    double lr_decay = 0.1;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    double label_smoothing = 0.0;
    std::uint64_t seed = 0;
};

struct GanSection {
    bool enabled = false;
    ToyGanConfig config;
    std::optional<std::string> checkpoint;  // load instead of training
    std::vector<int> noise_classes;         // classes whose generator output is replaced by noise
};

struct MetricsConfig {
    bool fid_on = false;
    bool nn_corruption_on = false;
    bool ris_on = false;
    std::size_t top_k = 25;
    double q = 0.5;
    int ris_views = 8;
    int ris_objects = 50;
};

struct ExperimentConfig {
    DatasetSpec dataset;
    ExtractorSpec extractor;
    AugmentationPolicy policy;
    TrainingConfig training;
    GanSection gan;
    MetricsConfig metrics;
    std::string output_dir = "run";
    std::string source_text;  // exact bytes the config was parsed from

    /// Semantic checks; relative file references resolve against `base_dir`.
    void validate(const std::filesystem::path& base_dir = {}) const;
    nlohmann::json to_json() const;
};

/// Parses and validates. Unknown keys anywhere in the document are rejected.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace gaug
