#pragma once

#include <cstddef>
#include <map>
#include <optional>

#include <Eigen/Dense>

#include "gaug/embedding_store.hpp"
#include "gaug/generative.hpp"
#include "gaug/rng.hpp"

namespace gaug {

/// Sample mean and unbiased covariance of a feature set.
struct GaussianStats {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
    std::size_t count = 0;

    std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
};

/// Rows are samples. Requires at least two rows.
GaussianStats gaussian_stats(const Eigen::MatrixXd& features);

/// Relative tolerance for clamping negative eigenvalues to zero.
inline constexpr double kEigenClampTolerance = 1e-6;

/// Frechet distance between two Gaussians:
///   |mu_a - mu_b|^2 + Tr(S_a) + Tr(S_b) - 2 Tr((S_a S_b)^{1/2}).
/// The trace term is computed from the eigenvalues of the symmetric matrix
/// S_a^{1/2} S_b S_a^{1/2}, which shares its spectrum with S_a S_b.
double fid(const GaussianStats& a, const GaussianStats& b);

struct ClassFid {
    std::optional<double> fid;  // unset when the class has fewer than two members
    std::size_t real_count = 0;
    std::size_t generated_count = 0;
};

/// For each class: one generated sample per real member, conditioned on that member's
/// stored embedding; FID between the feature statistics of both sets.
std::map<int, ClassFid> per_class_fid(const Dataset& dataset, const EmbeddingStore& store,
                                      const GeneratorAdapter& adapter, const Extractor& features,
                                      const TruncationPolicy& truncation, Rng& rng);

}  // namespace gaug
