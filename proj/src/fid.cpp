#include "gaug/fid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gaug/error.hpp"

namespace gaug {

GaussianStats gaussian_stats(const Eigen::MatrixXd& features) {
    if (features.rows() < 2) throw InvalidArgument("gaussian_stats needs at least two samples");
    if (features.cols() < 1) throw InvalidArgument("gaussian_stats needs at least one feature");
    GaussianStats s;
    s.count = static_cast<std::size_t>(features.rows());
    s.mean = features.colwise().mean().transpose();
    const Eigen::MatrixXd centered = features.rowwise() - s.mean.transpose();
    s.covariance = (centered.transpose() * centered) / static_cast<double>(features.rows() - 1);
    s.covariance = 0.5 * (s.covariance + s.covariance.transpose());
    return s;
}

namespace {

Eigen::VectorXd clamped_eigenvalues(const Eigen::MatrixXd& symmetric, const char* what,
                                    Eigen::MatrixXd* vectors = nullptr) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        symmetric, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalError(std::string("eigendecomposition failed for ") + what);
    }
    Eigen::VectorXd values = solver.eigenvalues();
    const double max_abs = values.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (values[i] < 0.0) {
            if (values[i] < -kEigenClampTolerance * max_abs) {
                throw NumericalError(std::string(what) + " has eigenvalue " + std::to_string(values[i]) +
                                     " below the clamping tolerance");
            }
            values[i] = 0.0;
        }
    }
    if (vectors) *vectors = solver.eigenvectors();
    return values;
}

}  // namespace

double fid(const GaussianStats& a, const GaussianStats& b) {
    if (a.dim() != b.dim()) {
        throw InvalidArgument("fid: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                              std::to_string(b.dim()) + ")");
    }
    const double mean_term = (a.mean - b.mean).squaredNorm();

    Eigen::MatrixXd vectors;
    const Eigen::VectorXd values = clamped_eigenvalues(a.covariance, "covariance", &vectors);
    const Eigen::MatrixXd sqrt_a = vectors * values.cwiseSqrt().asDiagonal() * vectors.transpose();
    Eigen::MatrixXd product = sqrt_a * b.covariance * sqrt_a;
    product = 0.5 * (product + product.transpose());
    const Eigen::VectorXd product_values = clamped_eigenvalues(product, "covariance product");
    const double trace_sqrt = product_values.cwiseSqrt().sum();

    const double value = mean_term + a.covariance.trace() + b.covariance.trace() - 2.0 * trace_sqrt;
    return std::max(0.0, value);
}

std::map<int, ClassFid> per_class_fid(const Dataset& dataset, const EmbeddingStore& store,
                                      const GeneratorAdapter& adapter, const Extractor& features,
                                      const TruncationPolicy& truncation, Rng& rng) {
    if (store.count() != dataset.size()) throw InvalidArgument("per_class_fid: store/dataset size mismatch");
    std::map<int, std::vector<std::uint32_t>> members;
    for (const auto& inst : dataset) {
        if (!inst.label) throw InvalidArgument("per_class_fid requires labels");
        members[*inst.label].push_back(inst.id);
    }
    std::map<int, ClassFid> out;
    for (const auto& [cls, ids] : members) {
        ClassFid entry;
        entry.real_count = ids.size();
        if (ids.size() < 2) {
            out[cls] = entry;
            continue;
        }
        std::vector<std::vector<float>> real_f;
        std::vector<std::vector<float>> gen_f;
        for (std::uint32_t id : ids) {
            real_f.push_back(features(dataset[id].sample));
            const std::vector<double> z = sample_latent(adapter.latent_dim, truncation, rng);
            const std::optional<int> c = adapter.class_conditional ? std::optional<int>(cls) : std::nullopt;
            gen_f.push_back(features(generate(adapter, store.row(id), z, c)));
        }
        entry.generated_count = gen_f.size();
        if (entry.generated_count != entry.real_count) {
            throw Error("per_class_fid: generated/real count mismatch");
        }
        const auto d = static_cast<Eigen::Index>(real_f.front().size());
        Eigen::MatrixXd real_m(static_cast<Eigen::Index>(ids.size()), d);
        Eigen::MatrixXd gen_m(static_cast<Eigen::Index>(ids.size()), d);
        for (std::size_t r = 0; r < ids.size(); ++r) {
            if (real_f[r].size() != static_cast<std::size_t>(d) || gen_f[r].size() != static_cast<std::size_t>(d)) {
                throw InvalidArgument("per_class_fid: inconsistent feature dimension");
            }
            for (Eigen::Index c = 0; c < d; ++c) {
                real_m(static_cast<Eigen::Index>(r), c) = real_f[r][static_cast<std::size_t>(c)];
                gen_m(static_cast<Eigen::Index>(r), c) = gen_f[r][static_cast<std::size_t>(c)];
            }
        }
        entry.fid = fid(gaussian_stats(real_m), gaussian_stats(gen_m));
        out[cls] = entry;
    }
    return out;
}

}  // namespace gaug
