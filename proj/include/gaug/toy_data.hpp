#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "gaug/config.hpp"
#include "gaug/embedding_store.hpp"
#include "gaug/sample.hpp"

namespace gaug {

enum class Split { Train, Test };

/// Labels cycle 0..classes-1. Every sample is its class prototype plus Gaussian pixel noise,
/// clamped to [0,1]. Prototypes depend only on (seed, classes, shape, grouping), so both splits
/// share them. With group_size > 1, consecutive classes form groups: the first class of a group
/// gets a fresh prototype, each following one perturbs its predecessor's by U(-spread, spread).
Dataset make_cluster_images(std::size_t n, int classes, Shape shape, double cluster_std,
                            std::uint64_t seed, Split split, int group_size = 1,
                            double group_spread = 0.0);

/// Two-channel 1×1 samples drawn from `components` isotropic Gaussians whose centers lie
/// on a circle of radius 0.3 around (0.5, 0.5). The label is the component.
Dataset make_gaussian_mixture_2d(std::size_t n, int components, double std, std::uint64_t seed,
                                 Split split);

/// Component centers of make_gaussian_mixture_2d.
std::vector<std::array<double, 2>> mixture_centers(int components);

Dataset make_dataset(const DatasetSpec& spec, Split split);

/// Flattens, subtracts 0.5, and multiplies by a seeded dim×numel Gaussian matrix scaled by 1/sqrt(numel).
Extractor random_projection_extractor(Shape shape, std::size_t dim, std::uint64_t seed);

/// Flattens and subtracts 0.5.
Extractor centered_identity_extractor();

Extractor make_extractor(const ExtractorSpec& spec, Shape shape);

}  // namespace gaug
