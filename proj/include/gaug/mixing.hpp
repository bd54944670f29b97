#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gaug/rng.hpp"
#include "gaug/sample.hpp"
#include "gaug/transforms.hpp"

namespace gaug {

enum class MixChoice { None, CutMix, MixUp };

const char* to_string(MixChoice c);

struct MixingConfig {
    double switch_prob = 0.5;  // probability that CutMix is the candidate
    double mixup_prob = 0.8;   // probability MixUp fires once it is the candidate
    double mixup_alpha = 0.2;
    double cutmix_alpha = 1.0;

    void validate() const;
    bool operator==(const MixingConfig&) const = default;
};

struct MixResult {
    Sample sample;
    std::vector<double> label;
    double lambda = 1.0;  // weight of the first operand
};

/// Pastes `box` of x_b into x_a. lambda = 1 - box area / image area.
MixResult cutmix_box(const Sample& x_a, const Sample& x_b, std::span<const double> y_a,
                     std::span<const double> y_b, const CropBox& box);

/// Samples lambda ~ Beta(alpha, alpha), a box with sides sqrt(1-lambda)*(H, W) centered
/// uniformly, clips it to the image, and mixes with lambda recomputed from the clipped box.
CropBox sample_cutmix_box(int height, int width, double alpha, Rng& rng);
MixResult cutmix(const Sample& x_a, const Sample& x_b, std::span<const double> y_a,
                 std::span<const double> y_b, Rng& rng, double alpha = 1.0);

/// lambda*x_a + (1-lambda)*x_b, same for the labels.
MixResult mixup(const Sample& x_a, const Sample& x_b, std::span<const double> y_a,
                std::span<const double> y_b, double lambda);

/// Two uniform draws per call: candidate coin, then the MixUp acceptance draw.
MixChoice cutmixup_select(Rng& rng, const MixingConfig& cfg = {});

}  // namespace gaug
