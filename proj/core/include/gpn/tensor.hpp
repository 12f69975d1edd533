#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gpn/errors.hpp"

namespace gpn {

class Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

// Dense row-major array of 64-bit floats with an optional accumulated
// gradient buffer. Rank 0 (scalar), 1 (vector) or 2 (matrix).
class Tensor {
public:
    std::vector<std::size_t> shape;
    std::vector<double> values;
    bool requires_grad = false;
    std::vector<double> grad;  // same length as values when requires_grad

    Tensor(std::vector<std::size_t> shape_in, bool requires_grad_in);

    static TensorPtr zeros(std::vector<std::size_t> shape, bool requires_grad = false);
    static TensorPtr full(std::vector<std::size_t> shape, double v, bool requires_grad = false);
    static TensorPtr scalar(double v, bool requires_grad = false);
    static TensorPtr from(std::vector<std::size_t> shape, std::vector<double> v,
                          bool requires_grad = false);

    std::size_t size() const { return values.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t rows() const;
    std::size_t cols() const;
    double item() const;
    double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }

    void zero_grad();
    bool all_finite() const;
};

// Scratch adjoint buffers for one backward sweep, keyed by tensor identity.
class Adjoints {
public:
    std::vector<double>& of(const TensorPtr& t);
    const std::vector<double>* find(const Tensor* t) const;

private:
    friend class Tape;
    std::unordered_map<Tensor*, std::vector<double>> buf_;
};

// Ordered record of executed differentiable operations. A tape and the
// tensors flowing through it form a single-owner unit: build the forward
// pass and call backward on one thread. Distinct tapes are independent.
class Tape {
public:
    // Registers the op that produced `out`. `pull` reads out's adjoint and
    // accumulates into the adjoints of the op's inputs.
    void record(const TensorPtr& out, std::function<void(Adjoints&)> pull);

    bool produced(const Tensor* t) const { return produced_.count(t) != 0; }
    std::size_t num_ops() const { return nodes_.size(); }

    // Reverse sweep from a scalar loss. Adjoints are rebuilt from scratch
    // each call and then added into the persistent .grad buffers of every
    // requires_grad tensor touched, so repeated calls accumulate.
    void backward(const TensorPtr& loss);

private:
    std::vector<std::function<void(Adjoints&)>> nodes_;
    std::unordered_set<const Tensor*> produced_;
};

// ---- differentiable operations -------------------------------------------

TensorPtr add(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr sub(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr mul(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr neg(Tape& tape, const TensorPtr& a);
TensorPtr scale(Tape& tape, const TensorPtr& a, double s);
TensorPtr add_const(Tape& tape, const TensorPtr& a, double c);

TensorPtr matmul(Tape& tape, const TensorPtr& a, const TensorPtr& b);
// [n x d] + [d], broadcast over rows.
TensorPtr add_bias(Tape& tape, const TensorPtr& a, const TensorPtr& bias);
// Row i of `a` scaled by s[i].
TensorPtr col_scale(Tape& tape, const TensorPtr& a, const TensorPtr& s);
// Scalar tensor broadcast against every element of `a`.
TensorPtr add_scalar_t(Tape& tape, const TensorPtr& a, const TensorPtr& s);
TensorPtr mul_scalar_t(Tape& tape, const TensorPtr& a, const TensorPtr& s);

TensorPtr relu(Tape& tape, const TensorPtr& x);
// Inverted dropout: zero with probability p, scale survivors by 1/(1-p).
// Identity when p == 0 or not training.
TensorPtr dropout(Tape& tape, const TensorPtr& x, double p, bool training, std::mt19937_64& rng);

TensorPtr log(Tape& tape, const TensorPtr& a);
TensorPtr exp(Tape& tape, const TensorPtr& a);
TensorPtr sqrt(Tape& tape, const TensorPtr& a);
TensorPtr reciprocal(Tape& tape, const TensorPtr& a);
TensorPtr softplus(Tape& tape, const TensorPtr& a);
TensorPtr lgamma(Tape& tape, const TensorPtr& a);   // backward uses digamma
TensorPtr digamma(Tape& tape, const TensorPtr& a);  // backward uses trigamma

TensorPtr sum(Tape& tape, const TensorPtr& a);      // scalar
TensorPtr row_sum(Tape& tape, const TensorPtr& a);  // [n x d] -> [n]
TensorPtr row_gather(Tape& tape, const TensorPtr& a, const std::vector<std::size_t>& rows);
// out[i] = a[i, cols[i]]
TensorPtr take_per_row(Tape& tape, const TensorPtr& a, const std::vector<std::size_t>& cols);
// Stack [n] column vectors into [n x C], in order.
TensorPtr concat_cols(Tape& tape, const std::vector<TensorPtr>& cols);

}  // namespace gpn
