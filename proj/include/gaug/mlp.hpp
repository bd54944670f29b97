#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gaug/rng.hpp"

namespace gaug {

/// Fully connected network: tanh on hidden layers, linear output.
/// Parameters are one flat vector: per layer, W (out×in, row-major) then b.
class Mlp {
public:
    struct Cache {
        std::vector<std::vector<double>> activations;  // input, each hidden post-tanh, output
    };

    Mlp() = default;
    explicit Mlp(std::vector<std::size_t> layer_sizes);

    std::size_t input_dim() const { return sizes_.front(); }
    std::size_t output_dim() const { return sizes_.back(); }
    std::size_t num_params() const { return params_.size(); }
    const std::vector<std::size_t>& layer_sizes() const { return sizes_; }

    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }

    /// Gaussian init scaled by 1/sqrt(fan_in); zero biases.
    void init(Rng& rng, double gain = 1.0);

    std::vector<double> forward(std::span<const double> x, Cache* cache = nullptr) const;

    /// Accumulates dL/dparams into `grad_params` and returns dL/dx.
    std::vector<double> backward(const Cache& cache, std::span<const double> grad_out,
                                 std::span<double> grad_params) const;

private:
    std::vector<std::size_t> sizes_;
    std::vector<double> params_;
};

/// Adam with bias correction.
class Adam {
public:
    Adam() = default;
    Adam(std::size_t num_params, double lr, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8);

    void step(std::span<double> params, std::span<const double> grad);
    double learning_rate() const { return lr_; }

private:
    double lr_ = 0.0;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    long t_ = 0;
    std::vector<double> m_;
    std::vector<double> v_;
};

}  // namespace gaug
