#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gaug/embedding_store.hpp"
#include "gaug/error.hpp"
#include "gaug/generative.hpp"
#include "gaug/mlp.hpp"
#include "gaug/neighborhood_index.hpp"

namespace gaug {

enum class LossVariant { Saturating, NonSaturating };

const char* to_string(LossVariant v);
LossVariant loss_variant_from_string(const std::string& s);

struct ToyGanConfig {
    int steps = 2000;
    int batch_size = 64;
    double lr_generator = 1e-3;
    double lr_discriminator = 1e-3;
    std::size_t latent_dim = 8;
    std::size_t hidden = 32;
    LossVariant loss_variant = LossVariant::NonSaturating;
    std::uint64_t seed = 0;
    bool class_conditional = false;
    int num_classes = 0;  // required when class_conditional
    double adam_beta1 = 0.5;

    void validate() const;
};

/// G(z, h[, onehot(y)]) -> flattened sample.
class ToyGenerator {
public:
    ToyGenerator() = default;
    ToyGenerator(std::size_t latent_dim, std::size_t conditioning_dim, std::optional<int> num_classes,
                 Shape output_shape, std::size_t hidden);

    std::vector<double> input(std::span<const double> z, std::span<const double> h,
                              std::optional<int> cls) const;
    std::vector<double> forward(std::span<const double> z, std::span<const double> h,
                                std::optional<int> cls, Mlp::Cache* cache = nullptr) const;

    Mlp& net() { return net_; }
    const Mlp& net() const { return net_; }
    std::size_t latent_dim() const { return latent_dim_; }
    std::size_t conditioning_dim() const { return conditioning_dim_; }
    std::optional<int> num_classes() const { return num_classes_; }
    const Shape& output_shape() const { return output_shape_; }

private:
    std::size_t latent_dim_ = 0;
    std::size_t conditioning_dim_ = 0;
    std::optional<int> num_classes_;
    Shape output_shape_{};
    Mlp net_;
};

/// D(x, h[, onehot(y)]) -> logit.
class ToyDiscriminator {
public:
    ToyDiscriminator() = default;
    ToyDiscriminator(std::size_t sample_dim, std::size_t conditioning_dim,
                     std::optional<int> num_classes, std::size_t hidden);

    std::vector<double> input(std::span<const double> x, std::span<const double> h,
                              std::optional<int> cls) const;
    double logit(std::span<const double> x, std::span<const double> h, std::optional<int> cls,
                 Mlp::Cache* cache = nullptr) const;

    Mlp& net() { return net_; }
    const Mlp& net() const { return net_; }
    std::size_t sample_dim() const { return sample_dim_; }

private:
    std::size_t sample_dim_ = 0;
    std::size_t conditioning_dim_ = 0;
    std::optional<int> num_classes_;
    Mlp net_;
};

/// One minibatch of the instance-conditioned game: real neighbor x_j, conditioning h_i, latent z.
struct GanBatch {
    std::vector<std::vector<double>> real;
    std::vector<std::vector<double>> conditioning;
    std::vector<std::vector<double>> latent;
    std::vector<std::optional<int>> classes;
    std::vector<std::uint32_t> ids;

    std::size_t size() const { return real.size(); }
};

/// -mean[ln s(D(x_j,h_i)) + ln(1 - s(D(G(z,h_i),h_i)))], s = logistic.
/// Accumulates the gradient w.r.t. D's parameters when `grad_d` is non-empty.
double discriminator_loss(const ToyGenerator& g, const ToyDiscriminator& d, const GanBatch& batch,
                          std::span<double> grad_d = {});

/// Saturating: +mean ln(1 - s(D(G))). Non-saturating: -mean ln s(D(G)).
/// Accumulates the gradient w.r.t. G's parameters when `grad_g` is non-empty.
double generator_loss(const ToyGenerator& g, const ToyDiscriminator& d, const GanBatch& batch,
                      LossVariant variant, std::span<double> grad_g = {});

class GanTrainingError : public Error {
public:
    using Error::Error;
};

struct ToyGanState {
    ToyGenerator generator;
    ToyDiscriminator discriminator;
    Adam opt_generator;
    Adam opt_discriminator;

    static ToyGanState create(const ToyGanConfig& cfg, std::size_t conditioning_dim,
                              Shape sample_shape);
};

struct StepLosses {
    double discriminator = 0.0;
    double generator = 0.0;
};

/// Draws a minibatch: ids uniform over the store, x_j uniform from A_i, untruncated z.
GanBatch draw_gan_batch(const Dataset& dataset, const EmbeddingStore& store,
                        const NeighborhoodIndex& index, const ToyGanConfig& cfg,
                        std::size_t latent_dim, Rng& rng);

/// One discriminator update followed by one generator update on the same minibatch.
StepLosses icgan_train_step(ToyGanState& state, const Dataset& dataset, const EmbeddingStore& store,
                            const NeighborhoodIndex& index, const ToyGanConfig& cfg, Rng& rng,
                            int step_number = 0);

struct CheckpointMeta {
    int version = 1;
    std::size_t latent_dim = 0;
    std::size_t conditioning_dim = 0;
    bool class_conditional = false;
    int num_classes = 0;
    std::uint64_t seed = 0;
    int steps = 0;

    bool operator==(const CheckpointMeta&) const = default;
};

struct TrainedIcGan {
    ToyGenerator generator;
    ToyDiscriminator discriminator;
    std::vector<StepLosses> trace;
    CheckpointMeta meta;

    GeneratorAdapter adapter() const;
    DiscriminatorAdapter discriminator_adapter() const;
};

/// Runs cfg.steps steps of icgan_train_step. With class_conditional, G and D also see y_i.
TrainedIcGan train_icgan(const Dataset& dataset, const EmbeddingStore& store,
                         const NeighborhoodIndex& index, const ToyGanConfig& cfg);

inline constexpr int kGanCheckpointVersion = 1;

void save_gan_checkpoint(const TrainedIcGan& gan, const std::filesystem::path& path);

/// Loads a checkpoint; when `expected` is given, every meta field except `steps`
/// must match it or the load is rejected.
TrainedIcGan load_gan_checkpoint(const std::filesystem::path& path,
                                 const std::optional<CheckpointMeta>& expected = std::nullopt);

}  // namespace gaug
