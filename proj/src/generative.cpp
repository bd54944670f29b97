#include "gaug/generative.hpp"

#include <cmath>

namespace gaug {

TruncationPolicy TruncationPolicy::at(double s) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("truncation sigma must be > 0");
    return TruncationPolicy{s};
}

std::vector<double> sample_latent(std::size_t latent_dim, const TruncationPolicy& policy, Rng& rng) {
    if (latent_dim < 1) throw InvalidArgument("latent dimension must be >= 1");
    std::vector<double> z(latent_dim);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : z) {
        v = normal(rng);
        if (policy.sigma) {
            const double bound = std::abs(*policy.sigma);
            while (std::abs(v) > bound) v = normal(rng);
        }
    }
    return z;
}

Sample generate(const GeneratorAdapter& adapter, std::span<const float> h,
                std::span<const double> z, std::optional<int> cls) {
    if (z.size() != adapter.latent_dim) {
        throw GenerationError(GenerationErrorCode::DimensionMismatch,
                              "latent has " + std::to_string(z.size()) + " dims, adapter expects " +
                                  std::to_string(adapter.latent_dim));
    }
    if (h.size() != adapter.conditioning_dim) {
        throw GenerationError(GenerationErrorCode::DimensionMismatch,
                              "conditioning has " + std::to_string(h.size()) +
                                  " dims, adapter expects " +
                                  std::to_string(adapter.conditioning_dim));
    }
    if (cls.has_value() != adapter.class_conditional) {
        throw GenerationError(GenerationErrorCode::ConditioningMismatch,
                              adapter.class_conditional
                                  ? "class-conditional adapter requires a class"
                                  : "class supplied to an unconditional adapter");
    }
    Sample out = adapter.fn(z, h, cls);
    if (out.shape() != adapter.output_shape) {
        throw GenerationError(GenerationErrorCode::InvalidOutput,
                              "adapter output shape differs from its declared shape");
    }
    if (!out.all_finite()) {
        throw GenerationError(GenerationErrorCode::InvalidOutput, "adapter produced non-finite output");
    }
    return out;
}

Sample best_of_n(const GeneratorAdapter& adapter, const Instance& x_cond, int n,
                 const Extractor& extractor, const TruncationPolicy& policy, Rng& rng) {
    if (n < 1) throw InvalidArgument("best_of_n requires n >= 1");
    const std::vector<float> h = extractor(x_cond.sample);
    const std::optional<int> cls =
        adapter.class_conditional ? x_cond.label : std::optional<int>{};
    std::optional<Sample> best;
    double best_similarity = -2.0;
    for (int j = 0; j < n; ++j) {
        const std::vector<double> z = sample_latent(adapter.latent_dim, policy, rng);
        Sample candidate = generate(adapter, h, z, cls);
        if (n == 1) return candidate;
        const double s = cosine_similarity(extractor(candidate), h);
        if (!best || s > best_similarity) {
            best_similarity = s;
            best = std::move(candidate);
        }
    }
    return std::move(*best);
}

}  // namespace gaug
