#include "gaug/mixing.hpp"

#include <algorithm>
#include <cmath>

#include "gaug/error.hpp"

namespace gaug {

const char* to_string(MixChoice c) {
    switch (c) {
        case MixChoice::None: return "none";
        case MixChoice::CutMix: return "cutmix";
        case MixChoice::MixUp: return "mixup";
    }
    return "unknown";
}

void MixingConfig::validate() const {
    if (!(switch_prob >= 0.0 && switch_prob <= 1.0)) throw InvalidArgument("mixing.switch_prob must be in [0,1]");
    if (!(mixup_prob >= 0.0 && mixup_prob <= 1.0)) throw InvalidArgument("mixing.mixup_prob must be in [0,1]");
    if (!(mixup_alpha > 0.0) || !(cutmix_alpha > 0.0)) throw InvalidArgument("mixing alphas must be > 0");
}

namespace {

void check_pair(const Sample& x_a, const Sample& x_b, std::span<const double> y_a,
                std::span<const double> y_b) {
    if (x_a.shape() != x_b.shape()) throw InvalidArgument("mixing: sample shape mismatch");
    if (y_a.size() != y_b.size()) throw InvalidArgument("mixing: label size mismatch");
}

std::vector<double> blend(std::span<const double> y_a, std::span<const double> y_b, double lambda) {
    std::vector<double> y(y_a.size());
    for (std::size_t c = 0; c < y.size(); ++c) y[c] = lambda * y_a[c] + (1.0 - lambda) * y_b[c];
    return y;
}

// Weights (1 - f, f).
std::vector<double> blend_fraction(std::span<const double> y_a, std::span<const double> y_b, double f) {
    std::vector<double> y(y_a.size());
    for (std::size_t c = 0; c < y.size(); ++c) y[c] = (1.0 - f) * y_a[c] + f * y_b[c];
    return y;
}

}  // namespace

MixResult cutmix_box(const Sample& x_a, const Sample& x_b, std::span<const double> y_a,
                     std::span<const double> y_b, const CropBox& box) {
    check_pair(x_a, x_b, y_a, y_b);
    if (box.top < 0 || box.left < 0 || box.height < 0 || box.width < 0 ||
        box.top + box.height > x_a.height() || box.left + box.width > x_a.width()) {
        throw InvalidArgument("cutmix box outside the sample");
    }
    Sample out = x_a;
    for (int c = 0; c < x_a.channels(); ++c)
        for (int y = box.top; y < box.top + box.height; ++y)
            for (int x = box.left; x < box.left + box.width; ++x) out.at(c, y, x) = x_b.at(c, y, x);
    const double total = static_cast<double>(x_a.height()) * x_a.width();
    const double pasted = static_cast<double>(box.height) * box.width / total;
    return {std::move(out), blend_fraction(y_a, y_b, pasted), 1.0 - pasted};
}

CropBox sample_cutmix_box(int height, int width, double alpha, Rng& rng) {
    const double lambda = beta(rng, alpha, alpha);
    const double cut = std::sqrt(1.0 - lambda);
    const int cut_h = static_cast<int>(height * cut);
    const int cut_w = static_cast<int>(width * cut);
    const int cy = uniform_int(rng, 0, height - 1);
    const int cx = uniform_int(rng, 0, width - 1);
    const int y1 = std::clamp(cy - cut_h / 2, 0, height);
    const int y2 = std::clamp(cy + cut_h / 2, 0, height);
    const int x1 = std::clamp(cx - cut_w / 2, 0, width);
    const int x2 = std::clamp(cx + cut_w / 2, 0, width);
    return {y1, x1, y2 - y1, x2 - x1};
}

MixResult cutmix(const Sample& x_a, const Sample& x_b, std::span<const double> y_a,
                 std::span<const double> y_b, Rng& rng, double alpha) {
    check_pair(x_a, x_b, y_a, y_b);
    return cutmix_box(x_a, x_b, y_a, y_b, sample_cutmix_box(x_a.height(), x_a.width(), alpha, rng));
}

MixResult mixup(const Sample& x_a, const Sample& x_b, std::span<const double> y_a,
                std::span<const double> y_b, double lambda) {
    check_pair(x_a, x_b, y_a, y_b);
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("mixup lambda must be in [0,1]");
    Sample out = x_a;
    auto a = x_a.values();
    auto b = x_b.values();
    auto o = out.values();
    for (std::size_t i = 0; i < o.size(); ++i) {
        o[i] = static_cast<float>(lambda * a[i] + (1.0 - lambda) * b[i]);
    }
    return {std::move(out), blend(y_a, y_b, lambda), lambda};
}

MixChoice cutmixup_select(Rng& rng, const MixingConfig& cfg) {
    const bool cutmix_candidate = uniform01(rng) < cfg.switch_prob;
    const bool mixup_fires = uniform01(rng) < cfg.mixup_prob;
    if (cutmix_candidate) return MixChoice::CutMix;
    return mixup_fires ? MixChoice::MixUp : MixChoice::None;
}

}  // namespace gaug
