#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaug/classifier.hpp"
#include "gaug/config.hpp"
#include "gaug/fid.hpp"
#include "gaug/neighborhood_index.hpp"
#include "gaug/report.hpp"
#include "gaug/ssl_views.hpp"
#include "gaug/toy_data.hpp"
#include "gaug/toy_gan.hpp"

namespace gaug {

inline constexpr const char* kToolkitVersion = "1.0.0";

/// A failure inside run_experiment, tagged with the stage that raised it.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct ExperimentData {
    Dataset train;
    Dataset test;
    Extractor extractor;
    std::optional<EmbeddingStore> store;
    std::optional<NeighborhoodIndex> index;
    std::optional<SoftLabelTable> soft_labels;
    std::size_t num_classes = 0;
};

/// Datasets, extractor, store, index and soft labels for `cfg`.
ExperimentData prepare_data(const ExperimentConfig& cfg, unsigned workers = 1);

/// Wraps `base` so that the listed classes produce uniform noise in [0,1], seeded by the latent.
GeneratorAdapter with_noise_classes(GeneratorAdapter base, std::set<int> noise_classes);

/// Loads gan.checkpoint (resolved against `base_dir`) or trains a toy IC-GAN on the training split.
TrainedIcGan obtain_gan(const ExperimentConfig& cfg, const ExperimentData& data,
                        const std::filesystem::path& base_dir = {});

struct EvaluationInputs {
    const ExperimentData* data = nullptr;
    const GeneratorAdapter* generator = nullptr;           // needed for FID
    const std::map<int, ClassFid>* precomputed_fid = nullptr;
    TruncationPolicy truncation;
    std::uint64_t seed = 0;
};

/// Top-1 and per-class accuracy on the test split (the training split when there is none),
/// plus whichever metrics are enabled. Correlations are against per-class top-1 and are
/// reported when at least three classes carry both values.
MetricsReport evaluate(const ClassifierAdapter& model, const EvaluationInputs& inputs, const MetricsConfig& metrics);

/// Per-class FID of the generator on the training split.
std::map<int, ClassFid> compute_class_fid(const ExperimentData& data, const GeneratorAdapter& generator,
                                          const TruncationPolicy& truncation, std::uint64_t seed);

struct RunOptions {
    std::optional<std::uint64_t> seed;  // replaces training.seed and gan.seed
    unsigned workers = 1;
    std::optional<std::filesystem::path> out_dir;
    std::filesystem::path base_dir;     // resolves relative paths in the config
};

struct RunResult {
    nlohmann::json report;
    std::filesystem::path out_dir;
};

/// embed → index → (gan) → train → evaluate, writing report.json, per_class.csv,
/// classifier.json and SVG plots into the output directory. On failure, status.json
/// records the failed stage and the outputs already written, and StageError is thrown.
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});
RunResult run_experiment(const std::filesystem::path& config_path, RunOptions options = {});

/// Removes the "timings" object.
nlohmann::json strip_timings(nlohmann::json report);

/// Rewrites per_class.csv and plots from an existing report.json; returns the report.
nlohmann::json rebuild_report_outputs(const std::filesystem::path& run_dir);

/// InfoNCE between the first two main views of each ViewSet, cosine similarity over
/// `extractor` features scaled by 1/temperature.
double toy_contrastive_loss(std::span<const ViewSet> views, const Extractor& extractor, double temperature = 0.1);

}  // namespace gaug
