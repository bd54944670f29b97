#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gaug/augmentation.hpp"
#include "gaug/config.hpp"
#include "gaug/sample.hpp"

namespace gaug {

/// Trainable classifier seen by the training loop and the evaluator.
class ClassifierAdapter {
public:
    virtual ~ClassifierAdapter() = default;

    virtual std::size_t num_classes() const = 0;
    /// One row of logits per sample.
    virtual Eigen::MatrixXd predict_logits(std::span<const Sample> xs) const = 0;
    /// Mean soft-target cross-entropy; adds d(loss)/d(params) into `grad`.
    virtual double loss_and_gradient(std::span<const Sample> xs, const Eigen::MatrixXd& targets,
                                     std::span<double> grad) const = 0;
    virtual std::span<double> parameters() = 0;
    virtual std::span<const double> parameters() const = 0;
};

/// logits = W x + b on the flattened sample.
class LinearClassifier final : public ClassifierAdapter {
public:
    LinearClassifier(std::size_t input_dim, std::size_t num_classes);

    std::size_t input_dim() const { return input_dim_; }
    std::size_t num_classes() const override { return num_classes_; }
    Eigen::MatrixXd predict_logits(std::span<const Sample> xs) const override;
    double loss_and_gradient(std::span<const Sample> xs, const Eigen::MatrixXd& targets,
                             std::span<double> grad) const override;
    std::span<double> parameters() override { return params_; }
    std::span<const double> parameters() const override { return params_; }

    nlohmann::json to_json() const;
    static LinearClassifier from_json(const nlohmann::json& j);

private:
    Eigen::MatrixXd features(std::span<const Sample> xs) const;

    std::size_t input_dim_;
    std::size_t num_classes_;
    std::vector<double> params_;  // W (classes × input, row-major) then b
};

void save_classifier(const LinearClassifier& model, const std::filesystem::path& path);
LinearClassifier load_classifier(const std::filesystem::path& path);

/// Row-wise log-softmax cross-entropy against row-stochastic targets, averaged over rows.
/// Writes (softmax - targets) / rows into `grad_logits` when non-null.
double soft_cross_entropy(const Eigen::MatrixXd& logits, const Eigen::MatrixXd& targets,
                          Eigen::MatrixXd* grad_logits = nullptr);

/// (1 - s) * y + s / C per row.
Eigen::MatrixXd smooth_labels(const Eigen::MatrixXd& targets, double smoothing);

/// learning_rate * batch_size / reference_batch, times lr_decay for every milestone <= epoch.
double learning_rate_at(const TrainingConfig& cfg, int epoch);

class SgdMomentum {
public:
    SgdMomentum(std::size_t n, double momentum, double weight_decay);
    void step(std::span<double> params, std::span<const double> grad, double lr);

private:
    double momentum_;
    double weight_decay_;
    std::vector<double> velocity_;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

struct EpochRecord {
    int epoch = 0;
    double learning_rate = 0.0;
    double loss = 0.0;
    double train_top1 = 0.0;  // argmax of logits vs argmax of targets on augmented batches
    std::optional<double> test_top1;
    std::size_t generated = 0;
    std::size_t mixed_batches = 0;
};

struct TrainInputs {
    const Dataset* train = nullptr;
    const Dataset* test = nullptr;                 // optional, for per-epoch test accuracy
    const EmbeddingStore* store = nullptr;         // required when p_g > 0
    const SoftLabelTable* soft_labels = nullptr;   // required when p_g > 0 with soft labels
    const GeneratorAdapter* generator = nullptr;   // required when p_g > 0
    std::size_t num_classes = 0;
};

/// Epochs of shuffled minibatches through the augmentation policy, then soft-target
/// cross-entropy with smoothing applied last. Throws TrainingError on a non-finite loss.
std::vector<EpochRecord> train_classifier(ClassifierAdapter& model, const TrainInputs& inputs,
                                          const AugmentationPolicy& policy, const TrainingConfig& cfg);

std::vector<int> labels_of(const Dataset& dataset);
std::vector<Sample> samples_of(const Dataset& dataset);

}  // namespace gaug
