#include "gpn/flows.hpp"

#include <cmath>

namespace gpn {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

}  // namespace

RadialLayer RadialLayer::init(std::size_t latent_dim, std::mt19937_64& rng) {
    RadialLayer layer;
    std::normal_distribution<double> z0_init(0.0, std::sqrt(0.1));
    layer.z0 = Tensor::zeros({latent_dim}, true);
    for (auto& v : layer.z0->values) v = z0_init(rng);
    layer.log_alpha = Tensor::scalar(0.0, true);
    // softplus(beta_raw) = alpha = 1 makes beta_hat = 0: a near-identity start.
    layer.beta_raw = Tensor::scalar(std::log(std::exp(1.0) - 1.0), true);
    return layer;
}

std::pair<TensorPtr, TensorPtr> radial_transform(Tape& tape, const RadialLayer& layer,
                                                 const TensorPtr& Z) {
    if (Z->rank() != 2 || Z->cols() != layer.z0->shape[0]) {
        throw ShapeError("radial_transform: latent dimension mismatch");
    }
    const double L = static_cast<double>(Z->cols());
    auto alpha = exp(tape, layer.log_alpha);
    auto beta_hat = add(tape, neg(tape, alpha), softplus(tape, layer.beta_raw));

    auto diff = add_bias(tape, Z, neg(tape, layer.z0));          // z - z0
    auto r = sqrt(tape, row_sum(tape, mul(tape, diff, diff)));   // [n]
    auto h = reciprocal(tape, add_scalar_t(tape, r, alpha));     // 1/(alpha + r)
    auto bh = mul_scalar_t(tape, h, beta_hat);                   // beta_hat * h
    auto u = add(tape, Z, col_scale(tape, diff, bh));

    // 1 + bh + b h' r = (1 + bh) - bh * (r h)
    auto one_bh = add_const(tape, bh, 1.0);
    auto inner = sub(tape, one_bh, mul(tape, bh, mul(tape, r, h)));
    auto log_det = add(tape, scale(tape, log(tape, one_bh), L - 1.0), log(tape, inner));
    return {u, log_det};
}

FlowStack FlowStack::init(std::size_t latent_dim, std::size_t n_radial, std::mt19937_64& rng) {
    if (latent_dim < 1) throw ParameterError("FlowStack: latent_dim must be >= 1");
    FlowStack stack;
    stack.latent_dim_ = latent_dim;
    stack.layers_.reserve(n_radial);
    for (std::size_t i = 0; i < n_radial; ++i) {
        stack.layers_.push_back(RadialLayer::init(latent_dim, rng));
    }
    return stack;
}

TensorPtr FlowStack::log_density(Tape& tape, const TensorPtr& Z) const {
    if (Z->rank() != 2 || Z->cols() != latent_dim_) {
        throw ShapeError("FlowStack::log_density: latent dimension mismatch");
    }
    const double L = static_cast<double>(latent_dim_);
    TensorPtr u = Z;
    TensorPtr det_sum;
    for (const auto& layer : layers_) {
        auto [next, log_det] = radial_transform(tape, layer, u);
        u = next;
        det_sum = det_sum ? add(tape, det_sum, log_det) : log_det;
    }
    auto base = add_const(tape, scale(tape, row_sum(tape, mul(tape, u, u)), -0.5),
                          -0.5 * L * kLog2Pi);
    return det_sum ? add(tape, base, det_sum) : base;
}

std::vector<TensorPtr> FlowStack::parameters() const {
    std::vector<TensorPtr> params;
    params.reserve(layers_.size() * 3);
    for (const auto& layer : layers_) {
        params.push_back(layer.z0);
        params.push_back(layer.log_alpha);
        params.push_back(layer.beta_raw);
    }
    return params;
}

ClassConditionalDensity ClassConditionalDensity::init(std::size_t num_classes,
                                                      std::size_t latent_dim,
                                                      std::size_t n_radial,
                                                      std::mt19937_64& rng) {
    if (num_classes < 1) throw ParameterError("ClassConditionalDensity: need >= 1 class");
    ClassConditionalDensity density;
    density.stacks_.reserve(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
        density.stacks_.push_back(FlowStack::init(latent_dim, n_radial, rng));
    }
    return density;
}

TensorPtr ClassConditionalDensity::class_log_densities(Tape& tape, const TensorPtr& Z) const {
    std::vector<TensorPtr> cols;
    cols.reserve(stacks_.size());
    for (const auto& stack : stacks_) {
        cols.push_back(stack.log_density(tape, Z));
    }
    return concat_cols(tape, cols);
}

std::vector<TensorPtr> ClassConditionalDensity::parameters() const {
    std::vector<TensorPtr> params;
    for (const auto& stack : stacks_) {
        auto sp = stack.parameters();
        params.insert(params.end(), sp.begin(), sp.end());
    }
    return params;
}

TensorPtr warmup_loss(Tape& tape, const ClassConditionalDensity& density, const TensorPtr& Z,
                      const std::vector<int>& labels, const std::vector<char>& train_mask) {
    if (labels.size() != Z->rows() || train_mask.size() != Z->rows()) {
        throw ShapeError("warmup_loss: labels and mask must cover every row");
    }
    const std::size_t C = density.num_classes();
    TensorPtr total;
    std::size_t selected = 0;
    for (std::size_t c = 0; c < C; ++c) {
        std::vector<std::size_t> idx;
        for (std::size_t v = 0; v < Z->rows(); ++v) {
            if (train_mask[v] && labels[v] == static_cast<int>(c)) idx.push_back(v);
        }
        if (idx.empty()) continue;
        selected += idx.size();
        auto zc = row_gather(tape, Z, idx);
        auto ll = sum(tape, density.stacks()[c].log_density(tape, zc));
        total = total ? add(tape, total, ll) : ll;
    }
    if (selected == 0) {
        throw ParameterError("warmup_loss: train mask selects no labeled node");
    }
    return neg(tape, total);
}

}  // namespace gpn
