#include "gaug/transforms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "gaug/error.hpp"

namespace gaug {

const char* to_string(TransformKind kind) {
    switch (kind) {
        case TransformKind::HFlip: return "hflip";
        case TransformKind::RRCrop: return "rrcrop";
        case TransformKind::ColorJitter: return "color_jitter";
        case TransformKind::RandomErase: return "erase";
        case TransformKind::RandAugmentLite: return "randaugment_lite";
        case TransformKind::Resize: return "resize";
    }
    return "unknown";
}

namespace {

void check_range(const Range& r, const char* what, double lo_bound, double hi_bound) {
    if (!(r.first <= r.second)) {
        throw InvalidArgument(std::string(what) + ": upper bound is below lower bound");
    }
    if (!(r.first > lo_bound) || !(r.second <= hi_bound)) {
        throw InvalidArgument(std::string(what) + ": range outside legal bounds");
    }
}

void check_size(int h, int w, const char* what) {
    if (h <= 0 || w <= 0) throw InvalidArgument(std::string(what) + ": output size must be positive");
}

double log_uniform(Rng& rng, const Range& r) {
    if (r.first == r.second) return r.first;
    return std::exp(uniform(rng, std::log(r.first), std::log(r.second)));
}

double range_uniform(Rng& rng, const Range& r) {
    if (r.first == r.second) return r.first;
    return uniform(rng, r.first, r.second);
}

// Luma weights for 3-channel samples; plain channel mean otherwise.
float gray_at(const Sample& x, int y, int xx) {
    if (x.channels() == 3) {
        return 0.299f * x.at(0, y, xx) + 0.587f * x.at(1, y, xx) + 0.114f * x.at(2, y, xx);
    }
    float s = 0.0f;
    for (int c = 0; c < x.channels(); ++c) s += x.at(c, y, xx);
    return s / static_cast<float>(x.channels());
}

Sample adjust_brightness(const Sample& x, double factor) {
    Sample out = x;
    for (float& v : out.raw()) v = static_cast<float>(v * factor);
    out.clamp01();
    return out;
}

Sample adjust_contrast(const Sample& x, double factor) {
    double mean = 0.0;
    for (int y = 0; y < x.height(); ++y)
        for (int xx = 0; xx < x.width(); ++xx) mean += gray_at(x, y, xx);
    mean /= static_cast<double>(x.height() * x.width());
    Sample out = x;
    for (float& v : out.raw()) v = static_cast<float>((v - mean) * factor + mean);
    out.clamp01();
    return out;
}

Sample adjust_saturation(const Sample& x, double factor) {
    Sample out = x;
    for (int y = 0; y < x.height(); ++y) {
        for (int xx = 0; xx < x.width(); ++xx) {
            const double g = gray_at(x, y, xx);
            for (int c = 0; c < x.channels(); ++c) {
                out.at(c, y, xx) = static_cast<float>((x.at(c, y, xx) - g) * factor + g);
            }
        }
    }
    out.clamp01();
    return out;
}

Sample invert(const Sample& x) {
    Sample out = x;
    for (float& v : out.raw()) v = 1.0f - v;
    return out;
}

void fill_box(Sample& x, const CropBox& box, float value) {
    for (int c = 0; c < x.channels(); ++c)
        for (int y = box.top; y < box.top + box.height; ++y)
            for (int xx = box.left; xx < box.left + box.width; ++xx) x.at(c, y, xx) = value;
}

}  // namespace

void Transform::validate() const {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("transform probability must be in [0,1]");
    std::visit(
        [](const auto& prm) {
            using T = std::decay_t<decltype(prm)>;
            if constexpr (std::is_same_v<T, RRCropParams>) {
                check_range(prm.scale, "rrcrop.scale", 0.0, 1.0);
                check_range(prm.ratio, "rrcrop.ratio", 0.0, 1e9);
                check_size(prm.out_height, prm.out_width, "rrcrop");
            } else if constexpr (std::is_same_v<T, ColorJitterParams>) {
                for (double m : {prm.brightness, prm.contrast, prm.saturation}) {
                    if (!(m >= 0.0)) throw InvalidArgument("color_jitter magnitude must be >= 0");
                }
                if (!(prm.component_p >= 0.0 && prm.component_p <= 1.0)) {
                    throw InvalidArgument("color_jitter.component_p must be in [0,1]");
                }
            } else if constexpr (std::is_same_v<T, RandomEraseParams>) {
                check_range(prm.area, "erase.area", 0.0, 1.0);
                check_range(prm.ratio, "erase.ratio", 0.0, 1e9);
            } else if constexpr (std::is_same_v<T, RandAugmentLiteParams>) {
                if (prm.num_ops < 1 || prm.num_ops > 6) {
                    throw InvalidArgument("randaugment_lite.num_ops must be in [1,6]");
                }
                if (!(prm.magnitude >= 0.0)) throw InvalidArgument("randaugment_lite.magnitude must be >= 0");
                if (!(prm.magnitude_std >= 0.0)) throw InvalidArgument("randaugment_lite.magnitude_std must be >= 0");
                if (!(prm.max_magnitude > 0.0)) throw InvalidArgument("randaugment_lite.max_magnitude must be > 0");
            } else if constexpr (std::is_same_v<T, ResizeParams>) {
                check_size(prm.out_height, prm.out_width, "resize");
            }
        },
        params);
}

Transform Transform::hflip(double p) {
    Transform t{p, HFlipParams{}};
    t.validate();
    return t;
}

Transform Transform::rrcrop(int out_height, int out_width, Range scale, double p) {
    RRCropParams prm;
    prm.scale = scale;
    prm.out_height = out_height;
    prm.out_width = out_width;
    Transform t{p, prm};
    t.validate();
    return t;
}

Transform Transform::color_jitter(double p, ColorJitterParams params) {
    Transform t{p, params};
    t.validate();
    return t;
}

Transform Transform::random_erase(double p, Range area) {
    RandomEraseParams prm;
    prm.area = area;
    Transform t{p, prm};
    t.validate();
    return t;
}

Transform Transform::randaugment_lite(double p, RandAugmentLiteParams params) {
    Transform t{p, params};
    t.validate();
    return t;
}

Transform Transform::resize(int out_height, int out_width) {
    Transform t{1.0, ResizeParams{out_height, out_width}};
    t.validate();
    return t;
}

void Pipeline::validate() const {
    for (const auto& t : transforms) t.validate();
}

Sample hflip(const Sample& x) {
    Sample out(x.shape());
    for (int c = 0; c < x.channels(); ++c)
        for (int y = 0; y < x.height(); ++y)
            for (int xx = 0; xx < x.width(); ++xx) out.at(c, y, x.width() - 1 - xx) = x.at(c, y, xx);
    return out;
}

Sample rotate90(const Sample& x) {
    if (x.height() != x.width()) {
        // Non-square samples rotate by 180 degrees.
        Sample out(x.shape());
        for (int c = 0; c < x.channels(); ++c)
            for (int y = 0; y < x.height(); ++y)
                for (int xx = 0; xx < x.width(); ++xx)
                    out.at(c, x.height() - 1 - y, x.width() - 1 - xx) = x.at(c, y, xx);
        return out;
    }
    const int n = x.height();
    Sample out(x.shape());
    for (int c = 0; c < x.channels(); ++c)
        for (int y = 0; y < n; ++y)
            for (int xx = 0; xx < n; ++xx) out.at(c, n - 1 - xx, y) = x.at(c, y, xx);
    return out;
}

Sample resize_bilinear(const Sample& x, int out_height, int out_width) {
    check_size(out_height, out_width, "resize");
    if (out_height == x.height() && out_width == x.width()) return x;
    Sample out(Shape{x.channels(), out_height, out_width});
    const double sy = static_cast<double>(x.height()) / out_height;
    const double sx = static_cast<double>(x.width()) / out_width;
    for (int y = 0; y < out_height; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(x.height() - 1));
        const int y0 = static_cast<int>(std::floor(fy));
        const int y1 = std::min(y0 + 1, x.height() - 1);
        const double wy = fy - y0;
        for (int xx = 0; xx < out_width; ++xx) {
            const double fx =
                std::clamp((xx + 0.5) * sx - 0.5, 0.0, static_cast<double>(x.width() - 1));
            const int x0 = static_cast<int>(std::floor(fx));
            const int x1 = std::min(x0 + 1, x.width() - 1);
            const double wx = fx - x0;
            for (int c = 0; c < x.channels(); ++c) {
                const double top = x.at(c, y0, x0) * (1.0 - wx) + x.at(c, y0, x1) * wx;
                const double bot = x.at(c, y1, x0) * (1.0 - wx) + x.at(c, y1, x1) * wx;
                out.at(c, y, xx) = static_cast<float>(top * (1.0 - wy) + bot * wy);
            }
        }
    }
    return out;
}

Sample crop(const Sample& x, const CropBox& box) {
    if (box.top < 0 || box.left < 0 || box.height <= 0 || box.width <= 0 ||
        box.top + box.height > x.height() || box.left + box.width > x.width()) {
        throw InvalidArgument("crop box outside the sample");
    }
    Sample out(Shape{x.channels(), box.height, box.width});
    for (int c = 0; c < x.channels(); ++c)
        for (int y = 0; y < box.height; ++y)
            for (int xx = 0; xx < box.width; ++xx)
                out.at(c, y, xx) = x.at(c, box.top + y, box.left + xx);
    return out;
}

CropBox sample_rrcrop_box(int height, int width, Range scale, Range ratio, Rng& rng) {
    const double area = static_cast<double>(height) * width;
    for (int attempt = 0; attempt < 10; ++attempt) {
        const double target = area * range_uniform(rng, scale);
        const double aspect = log_uniform(rng, ratio);
        const int w = static_cast<int>(std::lround(std::sqrt(target * aspect)));
        const int h = static_cast<int>(std::lround(std::sqrt(target / aspect)));
        if (w > 0 && h > 0 && w <= width && h <= height) {
            const int top = uniform_int(rng, 0, height - h);
            const int left = uniform_int(rng, 0, width - w);
            return {top, left, h, w};
        }
    }
    // Fallback: centered crop with the aspect clamped into the ratio range.
    const double in_ratio = static_cast<double>(width) / height;
    int w = width;
    int h = height;
    if (in_ratio < ratio.first) {
        h = std::max(1, static_cast<int>(std::lround(w / ratio.first)));
    } else if (in_ratio > ratio.second) {
        w = std::max(1, static_cast<int>(std::lround(h * ratio.second)));
    }
    h = std::min(h, height);
    w = std::min(w, width);
    return {(height - h) / 2, (width - w) / 2, h, w};
}

Sample rrcrop(const Sample& x, const RRCropParams& params, Rng& rng) {
    const CropBox box = sample_rrcrop_box(x.height(), x.width(), params.scale, params.ratio, rng);
    return resize_bilinear(crop(x, box), params.out_height, params.out_width);
}

Sample color_jitter(const Sample& x, const ColorJitterParams& params, Rng& rng) {
    Sample out = x;
    auto factor = [&](double m) { return uniform(rng, std::max(0.0, 1.0 - m), 1.0 + m); };
    // All draws happen whether or not a component fires.
    const bool do_b = bernoulli(rng, params.component_p);
    const double fb = factor(params.brightness);
    const bool do_c = bernoulli(rng, params.component_p);
    const double fc = factor(params.contrast);
    const bool do_s = bernoulli(rng, params.component_p);
    const double fs = factor(params.saturation);
    if (do_b) out = adjust_brightness(out, fb);
    if (do_c) out = adjust_contrast(out, fc);
    if (do_s) out = adjust_saturation(out, fs);
    return out;
}

Sample random_erase(const Sample& x, const RandomEraseParams& params, Rng& rng) {
    const double area = static_cast<double>(x.height()) * x.width();
    const double target = area * range_uniform(rng, params.area);
    const double aspect = log_uniform(rng, params.ratio);
    const int h = std::clamp(static_cast<int>(std::lround(std::sqrt(target * aspect))), 1, x.height());
    const int w = std::clamp(static_cast<int>(std::lround(std::sqrt(target / aspect))), 1, x.width());
    const int top = uniform_int(rng, 0, x.height() - h);
    const int left = uniform_int(rng, 0, x.width() - w);
    Sample out = x;
    for (int c = 0; c < x.channels(); ++c)
        for (int y = top; y < top + h; ++y)
            for (int xx = left; xx < left + w; ++xx) out.at(c, y, xx) = static_cast<float>(uniform01(rng));
    return out;
}

Sample randaugment_lite(const Sample& x, const RandAugmentLiteParams& params, Rng& rng) {
    std::array<int, 6> ops{0, 1, 2, 3, 4, 5};
    // Partial Fisher-Yates: the first num_ops entries are a uniform distinct choice.
    for (int i = 0; i < params.num_ops; ++i) {
        const int j = uniform_int(rng, i, 5);
        std::swap(ops[static_cast<std::size_t>(i)], ops[static_cast<std::size_t>(j)]);
    }
    Sample out = x;
    for (int i = 0; i < params.num_ops; ++i) {
        double m = params.magnitude;
        if (params.magnitude_std > 0.0) {
            m = std::normal_distribution<double>(params.magnitude, params.magnitude_std)(rng);
        }
        const double t = std::clamp(m, 0.0, params.max_magnitude) / params.max_magnitude;
        const double sign = bernoulli(rng, 0.5) ? 1.0 : -1.0;
        switch (ops[static_cast<std::size_t>(i)]) {
            case 0: out = hflip(out); break;
            case 1: out = rotate90(out); break;
            case 2: out = invert(out); break;
            case 3: out = adjust_brightness(out, std::max(0.0, 1.0 + sign * 0.9 * t)); break;
            case 4: out = adjust_contrast(out, std::max(0.0, 1.0 + sign * 0.9 * t)); break;
            case 5: {
                const int side = std::clamp(
                    static_cast<int>(std::lround(t * 0.5 * std::min(out.height(), out.width()))), 0,
                    std::min(out.height(), out.width()));
                const int cy = uniform_int(rng, 0, out.height() - 1);
                const int cx = uniform_int(rng, 0, out.width() - 1);
                if (side > 0) {
                    const int top = std::clamp(cy - side / 2, 0, out.height() - side);
                    const int left = std::clamp(cx - side / 2, 0, out.width() - side);
                    fill_box(out, {top, left, side, side}, 0.5f);
                }
                break;
            }
        }
    }
    return out;
}

Sample apply_transform(const Transform& t, const Sample& x, Rng& rng) {
    return std::visit(
        [&](const auto& prm) -> Sample {
            using T = std::decay_t<decltype(prm)>;
            if constexpr (std::is_same_v<T, HFlipParams>) return hflip(x);
            else if constexpr (std::is_same_v<T, RRCropParams>) return rrcrop(x, prm, rng);
            else if constexpr (std::is_same_v<T, ColorJitterParams>) return color_jitter(x, prm, rng);
            else if constexpr (std::is_same_v<T, RandomEraseParams>) return random_erase(x, prm, rng);
            else if constexpr (std::is_same_v<T, RandAugmentLiteParams>) return randaugment_lite(x, prm, rng);
            else return resize_bilinear(x, prm.out_height, prm.out_width);
        },
        t.params);
}

Sample apply_pipeline(const Pipeline& pipeline, const Sample& x, Rng& rng) {
    Sample out = x;
    for (const auto& t : pipeline.transforms) {
        if (uniform01(rng) < t.p) out = apply_transform(t, out, rng);
    }
    out.clamp01();
    return out;
}

namespace {

nlohmann::json range_json(const Range& r) { return nlohmann::json::array({r.first, r.second}); }

Range range_from(const nlohmann::json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 2) throw InvalidArgument(std::string(key) + " must be [lo, hi]");
    return {v[0].get<double>(), v[1].get<double>()};
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed) {
    std::set<std::string> ok;
    for (const char* k : allowed) ok.insert(k);
    for (const auto& [key, _] : j.items()) {
        if (!ok.count(key)) throw InvalidArgument("unknown transform key '" + key + "'");
    }
}

}  // namespace

nlohmann::json to_json(const Transform& t) {
    nlohmann::json j;
    j["kind"] = to_string(t.kind());
    j["p"] = t.p;
    std::visit(
        [&](const auto& prm) {
            using T = std::decay_t<decltype(prm)>;
            if constexpr (std::is_same_v<T, RRCropParams>) {
                j["scale"] = range_json(prm.scale);
                j["ratio"] = range_json(prm.ratio);
                j["size"] = {prm.out_height, prm.out_width};
            } else if constexpr (std::is_same_v<T, ColorJitterParams>) {
                j["brightness"] = prm.brightness;
                j["contrast"] = prm.contrast;
                j["saturation"] = prm.saturation;
                j["component_p"] = prm.component_p;
            } else if constexpr (std::is_same_v<T, RandomEraseParams>) {
                j["area"] = range_json(prm.area);
                j["ratio"] = range_json(prm.ratio);
            } else if constexpr (std::is_same_v<T, RandAugmentLiteParams>) {
                j["num_ops"] = prm.num_ops;
                j["magnitude"] = prm.magnitude;
                j["magnitude_std"] = prm.magnitude_std;
                j["max_magnitude"] = prm.max_magnitude;
            } else if constexpr (std::is_same_v<T, ResizeParams>) {
                j["size"] = {prm.out_height, prm.out_width};
            }
        },
        t.params);
    return j;
}

Transform transform_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InvalidArgument("transform must be a JSON object");
    try {
        const std::string kind = j.at("kind").get<std::string>();
        Transform t;
        if (kind == "hflip") {
            reject_unknown(j, {"kind", "p"});
            t = Transform{j.value("p", 0.5), HFlipParams{}};
        } else if (kind == "rrcrop") {
            reject_unknown(j, {"kind", "p", "scale", "ratio", "size"});
            RRCropParams prm;
            if (j.contains("scale")) prm.scale = range_from(j, "scale");
            if (j.contains("ratio")) prm.ratio = range_from(j, "ratio");
            const auto size = j.at("size").get<std::vector<int>>();
            if (size.size() != 2) throw InvalidArgument("rrcrop.size must be [h, w]");
            prm.out_height = size[0];
            prm.out_width = size[1];
            t = Transform{j.value("p", 1.0), prm};
        } else if (kind == "color_jitter") {
            reject_unknown(j, {"kind", "p", "brightness", "contrast", "saturation", "component_p"});
            ColorJitterParams prm;
            prm.brightness = j.value("brightness", prm.brightness);
            prm.contrast = j.value("contrast", prm.contrast);
            prm.saturation = j.value("saturation", prm.saturation);
            prm.component_p = j.value("component_p", prm.component_p);
            t = Transform{j.value("p", 1.0), prm};
        } else if (kind == "erase") {
            reject_unknown(j, {"kind", "p", "area", "ratio"});
            RandomEraseParams prm;
            if (j.contains("area")) prm.area = range_from(j, "area");
            if (j.contains("ratio")) prm.ratio = range_from(j, "ratio");
            t = Transform{j.value("p", 0.25), prm};
        } else if (kind == "randaugment_lite") {
            reject_unknown(j, {"kind", "p", "num_ops", "magnitude", "magnitude_std", "max_magnitude"});
            RandAugmentLiteParams prm;
            prm.num_ops = j.value("num_ops", prm.num_ops);
            prm.magnitude = j.value("magnitude", prm.magnitude);
            prm.magnitude_std = j.value("magnitude_std", prm.magnitude_std);
            prm.max_magnitude = j.value("max_magnitude", prm.max_magnitude);
            t = Transform{j.value("p", 1.0), prm};
        } else if (kind == "resize") {
            reject_unknown(j, {"kind", "p", "size"});
            const auto size = j.at("size").get<std::vector<int>>();
            if (size.size() != 2) throw InvalidArgument("resize.size must be [h, w]");
            t = Transform{j.value("p", 1.0), ResizeParams{size[0], size[1]}};
        } else {
            throw InvalidArgument("unknown transform kind '" + kind + "'");
        }
        t.validate();
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed transform: ") + e.what());
    }
}

nlohmann::json to_json(const Pipeline& p) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : p.transforms) arr.push_back(to_json(t));
    return arr;
}

Pipeline pipeline_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw InvalidArgument("pipeline must be a JSON array");
    Pipeline p;
    for (const auto& t : j) p.transforms.push_back(transform_from_json(t));
    return p;
}

}  // namespace gaug
