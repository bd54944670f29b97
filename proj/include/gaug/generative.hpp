#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gaug/embedding_store.hpp"
#include "gaug/error.hpp"
#include "gaug/rng.hpp"
#include "gaug/sample.hpp"

namespace gaug {

enum class GenerationErrorCode { DimensionMismatch, ConditioningMismatch, InvalidOutput };

class GenerationError : public Error {
public:
    GenerationError(GenerationErrorCode code, const std::string& what) : Error(what), code_(code) {}
    GenerationErrorCode code() const { return code_; }

private:
    GenerationErrorCode code_;
};

/// Conditional sampler (z, h[, class]) -> sample. The only contact point with a generative model.
///
/// `generate` must be deterministic in its inputs. Adapters are not assumed to be
/// safe for concurrent calls; give each worker its own copy.
struct GeneratorAdapter {
    using Fn = std::function<Sample(std::span<const double> z, std::span<const float> h,
                                    std::optional<int> cls)>;

    std::size_t latent_dim = 0;
    std::size_t conditioning_dim = 0;
    bool class_conditional = false;
    Shape output_shape{};
    Fn fn;
};

/// Discriminator logit for (sample, h).
struct DiscriminatorAdapter {
    std::function<double(const Sample&, std::span<const float> h)> score;
};

/// Latent truncation. `sigma` unset means no truncation (plain N(0, I)).
struct TruncationPolicy {
    std::optional<double> sigma;

    static TruncationPolicy disabled() { return {}; }
    static TruncationPolicy at(double s);
    bool enabled() const { return sigma.has_value(); }
};

/// Instance-conditioned default truncation.
inline constexpr double kInstanceConditionedSigma = 0.8;
/// Class-conditional default truncation.
inline constexpr double kClassConditionalSigma = 1.0;

/// Per-coordinate standard normal, rejection-resampled into [-sigma, sigma] when enabled.
std::vector<double> sample_latent(std::size_t latent_dim, const TruncationPolicy& policy, Rng& rng);

/// Validates dimensions and conditioning, then forwards to the adapter unchanged.
Sample generate(const GeneratorAdapter& adapter, std::span<const float> h,
                std::span<const double> z, std::optional<int> cls = std::nullopt);

inline constexpr int kDefaultBestOfN = 20;

/// Generates `n` candidates conditioned on extractor(x_cond) and returns the one whose
/// own embedding is most cosine-similar to the conditioning; lowest index wins ties.
Sample best_of_n(const GeneratorAdapter& adapter, const Instance& x_cond, int n,
                 const Extractor& extractor, const TruncationPolicy& policy, Rng& rng);

}  // namespace gaug
