#include "gpn/encoder.hpp"

#include <cmath>

namespace gpn {

MlpEncoder MlpEncoder::init(std::size_t input_dim, std::size_t hidden_dim, std::size_t latent_dim,
                            std::size_t num_layers, double dropout_p, std::mt19937_64& rng,
                            bool use_bias) {
    if (input_dim < 1 || hidden_dim < 1 || latent_dim < 1 || num_layers < 1) {
        throw ParameterError("MlpEncoder: dimensions and layer count must be >= 1");
    }
    if (dropout_p < 0.0 || dropout_p >= 1.0) {
        throw ParameterError("MlpEncoder: dropout probability must lie in [0, 1)");
    }
    MlpEncoder enc;
    enc.input_dim_ = input_dim;
    enc.latent_dim_ = latent_dim;
    enc.dropout_p_ = dropout_p;
    enc.use_bias_ = use_bias;
    std::vector<std::size_t> dims{input_dim};
    for (std::size_t l = 1; l < num_layers; ++l) dims.push_back(hidden_dim);
    dims.push_back(latent_dim);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::size_t fan_in = dims[l], fan_out = dims[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> glorot(-limit, limit);
        auto w = Tensor::zeros({fan_in, fan_out}, true);
        for (auto& v : w->values) v = glorot(rng);
        enc.weights_.push_back(std::move(w));
        if (use_bias) {
            enc.biases_.push_back(Tensor::zeros({fan_out}, true));
        }
    }
    return enc;
}

TensorPtr MlpEncoder::forward(Tape& tape, const TensorPtr& X, bool training,
                              std::mt19937_64& rng) const {
    if (X->rank() != 2 || X->cols() != input_dim_) {
        throw ShapeError("MlpEncoder::forward: feature dimension mismatch");
    }
    TensorPtr h = X;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        h = matmul(tape, h, weights_[l]);
        if (use_bias_) h = add_bias(tape, h, biases_[l]);
        if (l + 1 < weights_.size()) {
            h = relu(tape, h);
            h = dropout(tape, h, dropout_p_, training, rng);
        }
    }
    return h;
}

std::vector<TensorPtr> MlpEncoder::parameters() const {
    std::vector<TensorPtr> params = weights_;
    params.insert(params.end(), biases_.begin(), biases_.end());
    return params;
}

}  // namespace gpn
