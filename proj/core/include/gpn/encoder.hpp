#pragma once

#include <random>
#include <vector>

#include "gpn/tensor.hpp"

namespace gpn {

// MLP feature encoder: linear -> ReLU -> dropout on all but the last layer,
// last layer linear. Glorot-uniform weights, zero biases at init.
class MlpEncoder {
public:
    static MlpEncoder init(std::size_t input_dim, std::size_t hidden_dim, std::size_t latent_dim,
                           std::size_t num_layers, double dropout_p, std::mt19937_64& rng,
                           bool use_bias = true);

    TensorPtr forward(Tape& tape, const TensorPtr& X, bool training, std::mt19937_64& rng) const;

    std::vector<TensorPtr> parameters() const;

    std::size_t input_dim() const { return input_dim_; }
    std::size_t latent_dim() const { return latent_dim_; }
    std::size_t num_layers() const { return weights_.size(); }
    double dropout_p() const { return dropout_p_; }
    bool use_bias() const { return use_bias_; }

    std::vector<TensorPtr>& weights() { return weights_; }
    std::vector<TensorPtr>& biases() { return biases_; }
    const std::vector<TensorPtr>& weights() const { return weights_; }
    const std::vector<TensorPtr>& biases() const { return biases_; }

private:
    std::size_t input_dim_ = 0;
    std::size_t latent_dim_ = 0;
    double dropout_p_ = 0.0;
    bool use_bias_ = true;
    std::vector<TensorPtr> weights_;  // chain D -> H -> ... -> L
    std::vector<TensorPtr> biases_;   // empty when use_bias is false
};

}  // namespace gpn
