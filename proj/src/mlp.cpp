#include "gaug/mlp.hpp"

#include <cmath>

#include "gaug/error.hpp"

namespace gaug {

Mlp::Mlp(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2) throw InvalidArgument("Mlp needs at least an input and an output layer");
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        if (sizes_[l] == 0 || sizes_[l + 1] == 0) throw InvalidArgument("Mlp layer of width 0");
        n += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
    }
    params_.assign(n, 0.0);
}

void Mlp::init(Rng& rng, double gain) {
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        const std::size_t in = sizes_[l];
        const std::size_t out = sizes_[l + 1];
        const double scale = gain / std::sqrt(static_cast<double>(in));
        for (std::size_t i = 0; i < in * out; ++i) params_[off + i] = scale * standard_normal(rng);
        off += in * out;
        for (std::size_t i = 0; i < out; ++i) params_[off + i] = 0.0;
        off += out;
    }
}

std::vector<double> Mlp::forward(std::span<const double> x, Cache* cache) const {
    if (x.size() != input_dim()) throw InvalidArgument("Mlp input dimension mismatch");
    std::vector<double> a(x.begin(), x.end());
    if (cache) {
        cache->activations.clear();
        cache->activations.push_back(a);
    }
    std::size_t off = 0;
    const std::size_t layers = sizes_.size() - 1;
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in = sizes_[l];
        const std::size_t out = sizes_[l + 1];
        const double* w = &params_[off];
        const double* b = &params_[off + in * out];
        std::vector<double> next(out);
        for (std::size_t o = 0; o < out; ++o) {
            double s = b[o];
            for (std::size_t i = 0; i < in; ++i) s += w[o * in + i] * a[i];
            next[o] = (l + 1 < layers) ? std::tanh(s) : s;
        }
        off += in * out + out;
        a = std::move(next);
        if (cache) cache->activations.push_back(a);
    }
    return a;
}

std::vector<double> Mlp::backward(const Cache& cache, std::span<const double> grad_out,
                                  std::span<double> grad_params) const {
    if (grad_params.size() != params_.size()) throw InvalidArgument("Mlp gradient buffer size");
    const std::size_t layers = sizes_.size() - 1;
    std::vector<double> delta(grad_out.begin(), grad_out.end());
    std::vector<std::size_t> offsets(layers);
    std::size_t off = 0;
    for (std::size_t l = 0; l < layers; ++l) {
        offsets[l] = off;
        off += sizes_[l] * sizes_[l + 1] + sizes_[l + 1];
    }
    for (std::size_t l = layers; l-- > 0;) {
        const std::size_t in = sizes_[l];
        const std::size_t out = sizes_[l + 1];
        if (l + 1 < layers) {
            // post-activation y = tanh(s): dy/ds = 1 - y^2
            const auto& y = cache.activations[l + 1];
            for (std::size_t o = 0; o < out; ++o) delta[o] *= 1.0 - y[o] * y[o];
        }
        const auto& a = cache.activations[l];
        const double* w = &params_[offsets[l]];
        double* gw = &grad_params[offsets[l]];
        double* gb = gw + in * out;
        std::vector<double> prev(in, 0.0);
        for (std::size_t o = 0; o < out; ++o) {
            const double d = delta[o];
            gb[o] += d;
            for (std::size_t i = 0; i < in; ++i) {
                gw[o * in + i] += d * a[i];
                prev[i] += w[o * in + i] * d;
            }
        }
        delta = std::move(prev);
    }
    return delta;
}

Adam::Adam(std::size_t num_params, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(num_params, 0.0), v_(num_params, 0.0) {
    if (!(lr > 0.0)) throw InvalidArgument("learning rate must be > 0");
}

void Adam::step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) {
        throw InvalidArgument("Adam: parameter count mismatch");
    }
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
        params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
    }
}

}  // namespace gaug
