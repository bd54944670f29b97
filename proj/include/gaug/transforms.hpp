#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "gaug/rng.hpp"
#include "gaug/sample.hpp"

namespace gaug {

enum class TransformKind { HFlip, RRCrop, ColorJitter, RandomErase, RandAugmentLite, Resize };

const char* to_string(TransformKind kind);

using Range = std::pair<double, double>;

struct HFlipParams {
    bool operator==(const HFlipParams&) const = default;
};

/// Random resized crop: area fraction uniform in `scale`, aspect log-uniform in `ratio`,
/// then bilinear resize to (out_height, out_width).
struct RRCropParams {
    Range scale{0.08, 1.0};
    Range ratio{3.0 / 4.0, 4.0 / 3.0};
    int out_height = 0;
    int out_width = 0;
    bool operator==(const RRCropParams&) const = default;
};

/// Brightness, contrast and saturation factors uniform in [1-m, 1+m]; each component
/// is applied independently with probability `component_p`.
struct ColorJitterParams {
    double brightness = 0.4;
    double contrast = 0.4;
    double saturation = 0.4;
    double component_p = 0.4;
    bool operator==(const ColorJitterParams&) const = default;
};

/// Fills one rectangle with uniform noise; area fraction uniform in `area`,
/// aspect log-uniform in `ratio`.
struct RandomEraseParams {
    Range area{0.02, 0.33};
    Range ratio{0.3, 3.3};
    bool operator==(const RandomEraseParams&) const = default;
};

/// Picks `num_ops` distinct ops from {hflip, rotate90, invert, brightness, contrast, cutout};
/// magnitude ~ N(magnitude, magnitude_std) clamped to [0, max_magnitude], intensity = m / max.
struct RandAugmentLiteParams {
    int num_ops = 2;
    double magnitude = 9.0;
    double magnitude_std = 0.5;
    double max_magnitude = 10.0;
    bool operator==(const RandAugmentLiteParams&) const = default;
};

struct ResizeParams {
    int out_height = 0;
    int out_width = 0;
    bool operator==(const ResizeParams&) const = default;
};

using TransformParams = std::variant<HFlipParams, RRCropParams, ColorJitterParams,
                                     RandomEraseParams, RandAugmentLiteParams, ResizeParams>;

/// One handcrafted augmentation applied with probability `p`.
struct Transform {
    double p = 1.0;
    TransformParams params;

    TransformKind kind() const { return static_cast<TransformKind>(params.index()); }
    void validate() const;

    static Transform hflip(double p = 0.5);
    static Transform rrcrop(int out_height, int out_width, Range scale = {0.08, 1.0},
                            double p = 1.0);
    static Transform color_jitter(double p = 1.0, ColorJitterParams params = {});
    static Transform random_erase(double p = 0.25, Range area = {0.02, 0.33});
    static Transform randaugment_lite(double p = 1.0, RandAugmentLiteParams params = {});
    static Transform resize(int out_height, int out_width);

    bool operator==(const Transform&) const = default;
};

/// Transforms are applied left to right.
struct Pipeline {
    std::vector<Transform> transforms;

    bool empty() const { return transforms.empty(); }
    void validate() const;
    bool operator==(const Pipeline&) const = default;
};

Sample hflip(const Sample& x);
Sample rotate90(const Sample& x);
Sample resize_bilinear(const Sample& x, int out_height, int out_width);

struct CropBox {
    int top = 0;
    int left = 0;
    int height = 0;
    int width = 0;
};

Sample crop(const Sample& x, const CropBox& box);
CropBox sample_rrcrop_box(int height, int width, Range scale, Range ratio, Rng& rng);
Sample rrcrop(const Sample& x, const RRCropParams& params, Rng& rng);
Sample color_jitter(const Sample& x, const ColorJitterParams& params, Rng& rng);
Sample random_erase(const Sample& x, const RandomEraseParams& params, Rng& rng);
Sample randaugment_lite(const Sample& x, const RandAugmentLiteParams& params, Rng& rng);

/// Applies the transform unconditionally (its probability is handled by apply_pipeline).
Sample apply_transform(const Transform& t, const Sample& x, Rng& rng);

/// One uniform draw per transform decides whether it fires; output clamped to [0,1].
Sample apply_pipeline(const Pipeline& pipeline, const Sample& x, Rng& rng);

nlohmann::json to_json(const Transform& t);
Transform transform_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Pipeline& p);
Pipeline pipeline_from_json(const nlohmann::json& j);

}  // namespace gaug
