#include "gaug/toy_data.hpp"

#include <cmath>
#include <memory>
#include <numbers>

#include "gaug/rng.hpp"

namespace gaug {

namespace {

std::uint64_t split_tag(Split split) { return split == Split::Train ? 1 : 2; }

}  // namespace

Dataset make_cluster_images(std::size_t n, int classes, Shape shape, double cluster_std,
                            std::uint64_t seed, Split split, int group_size, double group_spread) {
    if (classes < 1) throw InvalidArgument("classes must be >= 1");
    if (shape.numel() == 0) throw InvalidArgument("shape must be non-empty");
    if (group_size < 1) throw InvalidArgument("group_size must be >= 1");
    if (!(group_spread >= 0.0)) throw InvalidArgument("group_spread must be >= 0");
    Rng proto_rng(derive_seed(seed, 0x9207));
    Rng offset_rng(derive_seed(seed, 0x9208));
    std::vector<std::vector<float>> prototypes(static_cast<std::size_t>(classes));
    for (std::size_t c = 0; c < prototypes.size(); ++c) {
        auto& p = prototypes[c];
        if (c % static_cast<std::size_t>(group_size) != 0) {
            p = prototypes[c - 1];
            for (auto& v : p) v = static_cast<float>(v + uniform(offset_rng, -group_spread, group_spread));
            continue;
        }
        p.resize(shape.numel());
        for (auto& v : p) v = static_cast<float>(uniform(proto_rng, 0.15, 0.85));
    }
    Rng rng(derive_seed(seed, 0xda7a, split_tag(split)));
    Dataset out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % static_cast<std::size_t>(classes));
        std::vector<float> values(prototypes[static_cast<std::size_t>(label)]);
        for (auto& v : values) v += static_cast<float>(cluster_std * standard_normal(rng));
        Sample s(shape, std::move(values));
        s.clamp01();
        out.push_back({static_cast<std::uint32_t>(i), std::move(s), label});
    }
    return out;
}

std::vector<std::array<double, 2>> mixture_centers(int components) {
    std::vector<std::array<double, 2>> centers;
    for (int c = 0; c < components; ++c) {
        const double a = 2.0 * std::numbers::pi * c / components;
        centers.push_back({0.5 + 0.3 * std::cos(a), 0.5 + 0.3 * std::sin(a)});
    }
    return centers;
}

Dataset make_gaussian_mixture_2d(std::size_t n, int components, double std, std::uint64_t seed,
                                 Split split) {
    if (components < 1) throw InvalidArgument("components must be >= 1");
    const auto centers = mixture_centers(components);
    Rng rng(derive_seed(seed, 0x2d2d, split_tag(split)));
    Dataset out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % static_cast<std::size_t>(components));
        const auto& c = centers[static_cast<std::size_t>(label)];
        std::vector<float> v{static_cast<float>(c[0] + std * standard_normal(rng)),
                             static_cast<float>(c[1] + std * standard_normal(rng))};
        Sample s(Shape{2, 1, 1}, std::move(v));
        s.clamp01();
        out.push_back({static_cast<std::uint32_t>(i), std::move(s), label});
    }
    return out;
}

Dataset make_dataset(const DatasetSpec& spec, Split split) {
    const std::size_t n = split == Split::Train ? spec.n : spec.n_test;
    if (spec.generator == "cluster_images") {
        return make_cluster_images(n, spec.classes, spec.shape, spec.cluster_std, spec.seed, split, spec.group_size,
                                   spec.group_spread);
    }
    if (spec.generator == "vector_clusters") {
        const Shape flat{1, 1, static_cast<int>(spec.shape.numel())};
        return make_cluster_images(n, spec.classes, flat, spec.cluster_std, spec.seed, split, spec.group_size,
                                   spec.group_spread);
    }
    if (spec.generator == "gaussian_mixture_2d") {
        return make_gaussian_mixture_2d(n, spec.classes, spec.cluster_std, spec.seed, split);
    }
    throw InvalidArgument("unknown dataset generator '" + spec.generator + "'");
}

Extractor random_projection_extractor(Shape shape, std::size_t dim, std::uint64_t seed) {
    const std::size_t in = shape.numel();
    auto matrix = std::make_shared<std::vector<double>>(dim * in);
    Rng rng(derive_seed(seed, 0xe87c));
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    for (auto& v : *matrix) v = scale * standard_normal(rng);
    return [matrix, in, dim](const Sample& x) {
        if (x.size() != in) throw InvalidArgument("extractor input has the wrong size");
        std::vector<float> out(dim);
        const auto v = x.values();
        for (std::size_t r = 0; r < dim; ++r) {
            double acc = 0.0;
            const double* row = matrix->data() + r * in;
            for (std::size_t c = 0; c < in; ++c) acc += row[c] * (static_cast<double>(v[c]) - 0.5);
            out[r] = static_cast<float>(acc);
        }
        return out;
    };
}

Extractor centered_identity_extractor() {
    return [](const Sample& x) {
        std::vector<float> out(x.size());
        const auto v = x.values();
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - 0.5f;
        return out;
    };
}

Extractor make_extractor(const ExtractorSpec& spec, Shape shape) {
    if (spec.kind == "centered_identity") return centered_identity_extractor();
    return random_projection_extractor(shape, spec.dim, spec.seed);
}

}  // namespace gaug
