#pragma once

#include <random>
#include <utility>
#include <vector>

#include "gpn/tensor.hpp"

namespace gpn {

// One radial layer u = z + beta_hat * h(alpha, r) * (z - z0) with
// r = |z - z0|, h = 1/(alpha + r). alpha = exp(log_alpha) and
// beta_hat = -alpha + softplus(beta_raw) keep the map bijective.
struct RadialLayer {
    TensorPtr z0;         // [L]
    TensorPtr log_alpha;  // scalar
    TensorPtr beta_raw;   // scalar

    static RadialLayer init(std::size_t latent_dim, std::mt19937_64& rng);
};

// Applies a layer to a batch Z [n x L]. Returns (u [n x L], log_det [n])
// where log_det = (L-1) log(1 + bh) + log(1 + bh + b h' r), h' = -1/(alpha+r)^2.
std::pair<TensorPtr, TensorPtr> radial_transform(Tape& tape, const RadialLayer& layer,
                                                 const TensorPtr& Z);

// Composition of radial layers mapping latent points toward a standard
// normal base; density is the change-of-variables sum, no inversion needed.
class FlowStack {
public:
    static FlowStack init(std::size_t latent_dim, std::size_t n_radial, std::mt19937_64& rng);

    // log p(z) per row: log N(T(z); 0, I) + sum of layer log-dets. [n]
    TensorPtr log_density(Tape& tape, const TensorPtr& Z) const;

    std::vector<TensorPtr> parameters() const;
    std::size_t latent_dim() const { return latent_dim_; }
    std::vector<RadialLayer>& layers() { return layers_; }
    const std::vector<RadialLayer>& layers() const { return layers_; }

private:
    std::size_t latent_dim_ = 0;
    std::vector<RadialLayer> layers_;
};

// One flow per class, uniform class prior p(c) = 1/C.
class ClassConditionalDensity {
public:
    static ClassConditionalDensity init(std::size_t num_classes, std::size_t latent_dim,
                                        std::size_t n_radial, std::mt19937_64& rng);

    // Entry (v, c) = log p(z_v | c). [n x C]
    TensorPtr class_log_densities(Tape& tape, const TensorPtr& Z) const;

    std::vector<TensorPtr> parameters() const;
    std::size_t num_classes() const { return stacks_.size(); }
    std::size_t latent_dim() const { return stacks_.empty() ? 0 : stacks_[0].latent_dim(); }
    std::vector<FlowStack>& stacks() { return stacks_; }
    const std::vector<FlowStack>& stacks() const { return stacks_; }

private:
    std::vector<FlowStack> stacks_;
};

// Negative train-set log likelihood -sum_v log p(z_v | y_v). Pass Z detached
// (requires_grad = false) so only flow parameters receive gradients.
TensorPtr warmup_loss(Tape& tape, const ClassConditionalDensity& density, const TensorPtr& Z,
                      const std::vector<int>& labels, const std::vector<char>& train_mask);

}  // namespace gpn
