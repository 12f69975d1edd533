#include "gpn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gpn/special.hpp"

namespace gpn {

namespace {

std::size_t shape_size(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void require_same_shape(const TensorPtr& a, const TensorPtr& b, const char* op) {
    if (a->shape != b->shape) {
        throw ShapeError(std::string(op) + ": shape mismatch");
    }
}

void require_matrix(const TensorPtr& a, const char* op) {
    if (a->rank() != 2) {
        throw ShapeError(std::string(op) + ": expected a rank-2 tensor");
    }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape_in, bool requires_grad_in)
    : shape(std::move(shape_in)),
      values(shape_size(shape), 0.0),
      requires_grad(requires_grad_in),
      grad(requires_grad_in ? values.size() : 0, 0.0) {}

TensorPtr Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
    return std::make_shared<Tensor>(std::move(shape), requires_grad);
}

TensorPtr Tensor::full(std::vector<std::size_t> shape, double v, bool requires_grad) {
    auto t = std::make_shared<Tensor>(std::move(shape), requires_grad);
    std::fill(t->values.begin(), t->values.end(), v);
    return t;
}

TensorPtr Tensor::scalar(double v, bool requires_grad) {
    auto t = std::make_shared<Tensor>(std::vector<std::size_t>{}, requires_grad);
    t->values[0] = v;
    return t;
}

TensorPtr Tensor::from(std::vector<std::size_t> shape, std::vector<double> v, bool requires_grad) {
    if (shape_size(shape) != v.size()) {
        throw ShapeError("Tensor::from: value count does not match shape");
    }
    auto t = std::make_shared<Tensor>(std::move(shape), requires_grad);
    t->values = std::move(v);
    return t;
}

std::size_t Tensor::rows() const {
    if (rank() != 2) throw ShapeError("rows(): tensor is not rank 2");
    return shape[0];
}

std::size_t Tensor::cols() const {
    if (rank() != 2) throw ShapeError("cols(): tensor is not rank 2");
    return shape[1];
}

double Tensor::item() const {
    if (size() != 1) throw ShapeError("item(): tensor is not scalar");
    return values[0];
}

void Tensor::zero_grad() {
    std::fill(grad.begin(), grad.end(), 0.0);
}

bool Tensor::all_finite() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

std::vector<double>& Adjoints::of(const TensorPtr& t) {
    auto [it, inserted] = buf_.try_emplace(t.get());
    if (inserted) it->second.assign(t->size(), 0.0);
    return it->second;
}

const std::vector<double>* Adjoints::find(const Tensor* t) const {
    auto it = buf_.find(const_cast<Tensor*>(t));
    return it == buf_.end() ? nullptr : &it->second;
}

void Tape::record(const TensorPtr& out, std::function<void(Adjoints&)> pull) {
    produced_.insert(out.get());
    nodes_.push_back(std::move(pull));
}

void Tape::backward(const TensorPtr& loss) {
    if (loss->size() != 1) {
        throw ShapeError("backward: loss must be scalar");
    }
    if (!produced(loss.get())) {
        throw ShapeError("backward: loss was not produced on this tape");
    }
    Adjoints adj;
    adj.of(loss)[0] = 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        (*it)(adj);
    }
    for (auto& [t, g] : adj.buf_) {
        if (!t->requires_grad) continue;
        for (std::size_t i = 0; i < g.size(); ++i) t->grad[i] += g[i];
    }
}

// ---- op helpers ------------------------------------------------------------

namespace {

bool any_grad(std::initializer_list<const TensorPtr*> ts) {
    for (const TensorPtr* t : ts) {
        if ((*t)->requires_grad) return true;
    }
    return false;
}

// Elementwise unary op; df gives f'(x) from the input value.
TensorPtr unary_op(Tape& tape, const TensorPtr& a, const std::function<double(double)>& f,
                   const std::function<double(double)>& df) {
    auto out = Tensor::zeros(a->shape, a->requires_grad);
    for (std::size_t i = 0; i < a->size(); ++i) out->values[i] = f(a->values[i]);
    if (a->requires_grad) {
        tape.record(out, [a, out, df](Adjoints& adj) {
            auto& ga = adj.of(a);
            const auto* g = adj.find(out.get());
            if (!g) return;
            for (std::size_t i = 0; i < a->size(); ++i) ga[i] += (*g)[i] * df(a->values[i]);
        });
    }
    return out;
}

}  // namespace

TensorPtr add(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape(a, b, "add");
    auto out = Tensor::zeros(a->shape, any_grad({&a, &b}));
    for (std::size_t i = 0; i < a->size(); ++i) out->values[i] = a->values[i] + b->values[i];
    if (out->requires_grad) {
        tape.record(out, [a, b, out](Adjoints& adj) {
            if (a->requires_grad) adj.of(a);
            if (b->requires_grad) adj.of(b);
            const auto* g = adj.find(out.get());
            if (!g) return;
            if (a->requires_grad) {
                auto& ga = adj.of(a);
                for (std::size_t i = 0; i < g->size(); ++i) ga[i] += (*g)[i];
            }
            if (b->requires_grad) {
                auto& gb = adj.of(b);
                for (std::size_t i = 0; i < g->size(); ++i) gb[i] += (*g)[i];
            }
        });
    }
    return out;
}

TensorPtr sub(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape(a, b, "sub");
    auto out = Tensor::zeros(a->shape, any_grad({&a, &b}));
    for (std::size_t i = 0; i < a->size(); ++i) out->values[i] = a->values[i] - b->values[i];
    if (out->requires_grad) {
        tape.record(out, [a, b, out](Adjoints& adj) {
            if (a->requires_grad) adj.of(a);
            if (b->requires_grad) adj.of(b);
            const auto* g = adj.find(out.get());
            if (!g) return;
            if (a->requires_grad) {
                auto& ga = adj.of(a);
                for (std::size_t i = 0; i < g->size(); ++i) ga[i] += (*g)[i];
            }
            if (b->requires_grad) {
                auto& gb = adj.of(b);
                for (std::size_t i = 0; i < g->size(); ++i) gb[i] -= (*g)[i];
            }
        });
    }
    return out;
}

TensorPtr mul(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape(a, b, "mul");
    auto out = Tensor::zeros(a->shape, any_grad({&a, &b}));
    for (std::size_t i = 0; i < a->size(); ++i) out->values[i] = a->values[i] * b->values[i];
    if (out->requires_grad) {
        tape.record(out, [a, b, out](Adjoints& adj) {
            if (a->requires_grad) adj.of(a);
            if (b->requires_grad) adj.of(b);
            const auto* g = adj.find(out.get());
            if (!g) return;
            if (a->requires_grad) {
                auto& ga = adj.of(a);
                for (std::size_t i = 0; i < g->size(); ++i) ga[i] += (*g)[i] * b->values[i];
            }
            if (b->requires_grad) {
                auto& gb = adj.of(b);
                for (std::size_t i = 0; i < g->size(); ++i) gb[i] += (*g)[i] * a->values[i];
            }
        });
    }
    return out;
}

TensorPtr neg(Tape& tape, const TensorPtr& a) {
    return unary_op(tape, a, [](double x) { return -x; }, [](double) { return -1.0; });
}

TensorPtr scale(Tape& tape, const TensorPtr& a, double s) {
    return unary_op(tape, a, [s](double x) { return s * x; }, [s](double) { return s; });
}

TensorPtr add_const(Tape& tape, const TensorPtr& a, double c) {
    return unary_op(tape, a, [c](double x) { return x + c; },
                    [](double) { return 1.0; });
}

TensorPtr matmul(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    require_matrix(a, "matmul");
    require_matrix(b, "matmul");
    const std::size_t m = a->rows(), k = a->cols(), n = b->cols();
    if (b->rows() != k) {
        throw ShapeError("matmul: inner dimensions do not match");
    }
    auto out = Tensor::zeros({m, n}, any_grad({&a, &b}));
    const double* av = a->values.data();
    const double* bv = b->values.data();
    double* ov = out->values.data();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = av[i * k + p];
            if (aip == 0.0) continue;
            const double* brow = bv + p * n;
            double* orow = ov + i * n;
            for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
        }
    }
    if (out->requires_grad) {
        tape.record(out, [a, b, out, m, k, n](Adjoints& adj) {
            if (a->requires_grad) adj.of(a);
            if (b->requires_grad) adj.of(b);
            const auto* g = adj.find(out.get());
            if (!g) return;
            const double* gv = g->data();
            if (a->requires_grad) {
                // dA = G * B^T
                auto& ga = adj.of(a);
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t p = 0; p < k; ++p) {
                        double acc = 0.0;
                        const double* grow = gv + i * n;
                        const double* brow = b->values.data() + p * n;
                        for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
                        ga[i * k + p] += acc;
                    }
                }
            }
            if (b->requires_grad) {
                // dB = A^T * G
                auto& gb = adj.of(b);
                for (std::size_t i = 0; i < m; ++i) {
                    const double* arow = a->values.data() + i * k;
                    const double* grow = gv + i * n;
                    for (std::size_t p = 0; p < k; ++p) {
                        const double aip = arow[p];
                        if (aip == 0.0) continue;
                        double* gbrow = gb.data() + p * n;
                        for (std::size_t j = 0; j < n; ++j) gbrow[j] += aip * grow[j];
                    }
                }
            }
        });
    }
    return out;
}

TensorPtr add_bias(Tape& tape, const TensorPtr& a, const TensorPtr& bias) {
    require_matrix(a, "add_bias");
    if (bias->rank() != 1 || bias->shape[0] != a->cols()) {
        throw ShapeError("add_bias: bias must be a vector matching the column count");
    }
    const std::size_t n = a->rows(), d = a->cols();
    auto out = Tensor::zeros(a->shape, any_grad({&a, &bias}));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            out->values[i * d + j] = a->values[i * d + j] + bias->values[j];
        }
    }
    if (out->requires_grad) {
        tape.record(out, [a, bias, out, n, d](Adjoints& adj) {
            if (a->requires_grad) adj.of(a);
            if (bias->requires_grad) adj.of(bias);
            const auto* g = adj.find(out.get());
            if (!g) return;
            if (a->requires_grad) {
                auto& ga = adj.of(a);
                for (std::size_t i = 0; i < g->size(); ++i) ga[i] += (*g)[i];
            }
            if (bias->requires_grad) {
                auto& gb = adj.of(bias);
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < d; ++j) gb[j] += (*g)[i * d + j];
                }
            }
        });
    }
    return out;
}

TensorPtr col_scale(Tape& tape, const TensorPtr& a, const TensorPtr& s) {
    require_matrix(a, "col_scale");
    if (s->rank() != 1 || s->shape[0] != a->rows()) {
        throw ShapeError("col_scale: scale must be a vector matching the row count");
    }
    const std::size_t n = a->rows(), d = a->cols();
    auto out = Tensor::zeros(a->shape, any_grad({&a, &s}));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            out->values[i * d + j] = a->values[i * d + j] * s->values[i];
        }
    }
    if (out->requires_grad) {
        tape.record(out, [a, s, out, n, d](Adjoints& adj) {
            if (a->requires_grad) adj.of(a);
            if (s->requires_grad) adj.of(s);
            const auto* g = adj.find(out.get());
            if (!g) return;
            if (a->requires_grad) {
                auto& ga = adj.of(a);
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < d; ++j) {
                        ga[i * d + j] += (*g)[i * d + j] * s->values[i];
                    }
                }
            }
            if (s->requires_grad) {
                auto& gs = adj.of(s);
                for (std::size_t i = 0; i < n; ++i) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < d; ++j) {
                        acc += (*g)[i * d + j] * a->values[i * d + j];
                    }
                    gs[i] += acc;
                }
            }
        });
    }
    return out;
}

namespace {

void require_scalar(const TensorPtr& s, const char* op) {
    if (s->size() != 1) {
        throw ShapeError(std::string(op) + ": broadcast operand must be scalar");
    }
}

}  // namespace

TensorPtr add_scalar_t(Tape& tape, const TensorPtr& a, const TensorPtr& s) {
    require_scalar(s, "add_scalar_t");
    auto out = Tensor::zeros(a->shape, any_grad({&a, &s}));
    const double sv = s->values[0];
    for (std::size_t i = 0; i < a->size(); ++i) out->values[i] = a->values[i] + sv;
    if (out->requires_grad) {
        tape.record(out, [a, s, out](Adjoints& adj) {
            if (a->requires_grad) adj.of(a);
            if (s->requires_grad) adj.of(s);
            const auto* g = adj.find(out.get());
            if (!g) return;
            if (a->requires_grad) {
                auto& ga = adj.of(a);
                for (std::size_t i = 0; i < g->size(); ++i) ga[i] += (*g)[i];
            }
            if (s->requires_grad) {
                double acc = 0.0;
                for (double gi : *g) acc += gi;
                adj.of(s)[0] += acc;
            }
        });
    }
    return out;
}

TensorPtr mul_scalar_t(Tape& tape, const TensorPtr& a, const TensorPtr& s) {
    require_scalar(s, "mul_scalar_t");
    auto out = Tensor::zeros(a->shape, any_grad({&a, &s}));
    const double sv = s->values[0];
    for (std::size_t i = 0; i < a->size(); ++i) out->values[i] = a->values[i] * sv;
    if (out->requires_grad) {
        tape.record(out, [a, s, out, sv](Adjoints& adj) {
            if (a->requires_grad) adj.of(a);
            if (s->requires_grad) adj.of(s);
            const auto* g = adj.find(out.get());
            if (!g) return;
            if (a->requires_grad) {
                auto& ga = adj.of(a);
                for (std::size_t i = 0; i < g->size(); ++i) ga[i] += (*g)[i] * sv;
            }
            if (s->requires_grad) {
                double acc = 0.0;
                for (std::size_t i = 0; i < g->size(); ++i) acc += (*g)[i] * a->values[i];
                adj.of(s)[0] += acc;
            }
        });
    }
    return out;
}

TensorPtr relu(Tape& tape, const TensorPtr& x) {
    // Subgradient at 0 is 0.
    return unary_op(tape, x, [](double v) { return v > 0.0 ? v : 0.0; },
                    [](double v) { return v > 0.0 ? 1.0 : 0.0; });
}

TensorPtr dropout(Tape& tape, const TensorPtr& x, double p, bool training, std::mt19937_64& rng) {
    if (p < 0.0 || p >= 1.0) {
        throw ParameterError("dropout: probability must lie in [0, 1)");
    }
    if (!training || p == 0.0) {
        return x;
    }
    auto keep = std::make_shared<std::vector<double>>(x->size());
    std::bernoulli_distribution drop(p);
    const double inv_keep = 1.0 / (1.0 - p);
    for (auto& k : *keep) k = drop(rng) ? 0.0 : inv_keep;
    auto out = Tensor::zeros(x->shape, x->requires_grad);
    for (std::size_t i = 0; i < x->size(); ++i) out->values[i] = x->values[i] * (*keep)[i];
    if (x->requires_grad) {
        tape.record(out, [x, out, keep](Adjoints& adj) {
            auto& gx = adj.of(x);
            const auto* g = adj.find(out.get());
            if (!g) return;
            for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += (*g)[i] * (*keep)[i];
        });
    }
    return out;
}

TensorPtr log(Tape& tape, const TensorPtr& a) {
    return unary_op(tape, a, [](double x) { return std::log(x); },
                    [](double x) { return 1.0 / x; });
}

TensorPtr exp(Tape& tape, const TensorPtr& a) {
    auto out = Tensor::zeros(a->shape, a->requires_grad);
    for (std::size_t i = 0; i < a->size(); ++i) out->values[i] = std::exp(a->values[i]);
    if (a->requires_grad) {
        tape.record(out, [a, out](Adjoints& adj) {
            auto& ga = adj.of(a);
            const auto* g = adj.find(out.get());
            if (!g) return;
            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += (*g)[i] * out->values[i];
        });
    }
    return out;
}

TensorPtr sqrt(Tape& tape, const TensorPtr& a) {
    // Subgradient 0 at the origin so that zero-radius inputs stay finite.
    return unary_op(tape, a, [](double x) { return std::sqrt(x); },
                    [](double x) { return x > 0.0 ? 0.5 / std::sqrt(x) : 0.0; });
}

TensorPtr reciprocal(Tape& tape, const TensorPtr& a) {
    return unary_op(tape, a, [](double x) { return 1.0 / x; },
                    [](double x) { return -1.0 / (x * x); });
}

TensorPtr softplus(Tape& tape, const TensorPtr& a) {
    auto sp = [](double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); };
    auto sig = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
    return unary_op(tape, a, sp, sig);
}

TensorPtr lgamma(Tape& tape, const TensorPtr& a) {
    return unary_op(tape, a, [](double x) { return gpn::lgamma(x); },
                    [](double x) { return gpn::digamma(x); });
}

TensorPtr digamma(Tape& tape, const TensorPtr& a) {
    return unary_op(tape, a, [](double x) { return gpn::digamma(x); },
                    [](double x) { return gpn::trigamma(x); });
}

TensorPtr sum(Tape& tape, const TensorPtr& a) {
    auto out = Tensor::zeros({}, a->requires_grad);
    double acc = 0.0;
    for (double v : a->values) acc += v;
    out->values[0] = acc;
    if (a->requires_grad) {
        tape.record(out, [a, out](Adjoints& adj) {
            auto& ga = adj.of(a);
            const auto* g = adj.find(out.get());
            if (!g) return;
            for (double& gi : ga) gi += (*g)[0];
        });
    }
    return out;
}

TensorPtr row_sum(Tape& tape, const TensorPtr& a) {
    require_matrix(a, "row_sum");
    const std::size_t n = a->rows(), d = a->cols();
    auto out = Tensor::zeros({n}, a->requires_grad);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) acc += a->values[i * d + j];
        out->values[i] = acc;
    }
    if (a->requires_grad) {
        tape.record(out, [a, out, n, d](Adjoints& adj) {
            auto& ga = adj.of(a);
            const auto* g = adj.find(out.get());
            if (!g) return;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < d; ++j) ga[i * d + j] += (*g)[i];
            }
        });
    }
    return out;
}

TensorPtr row_gather(Tape& tape, const TensorPtr& a, const std::vector<std::size_t>& rows) {
    require_matrix(a, "row_gather");
    const std::size_t d = a->cols();
    for (std::size_t r : rows) {
        if (r >= a->rows()) throw InputError("row_gather: row index out of range");
    }
    auto out = Tensor::zeros({rows.size(), d}, a->requires_grad);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::copy_n(a->values.begin() + rows[i] * d, d, out->values.begin() + i * d);
    }
    if (a->requires_grad) {
        tape.record(out, [a, out, rows, d](Adjoints& adj) {
            auto& ga = adj.of(a);
            const auto* g = adj.find(out.get());
            if (!g) return;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                for (std::size_t j = 0; j < d; ++j) ga[rows[i] * d + j] += (*g)[i * d + j];
            }
        });
    }
    return out;
}

TensorPtr take_per_row(Tape& tape, const TensorPtr& a, const std::vector<std::size_t>& cols) {
    require_matrix(a, "take_per_row");
    const std::size_t n = a->rows(), d = a->cols();
    if (cols.size() != n) throw ShapeError("take_per_row: need one column index per row");
    for (std::size_t c : cols) {
        if (c >= d) throw InputError("take_per_row: column index out of range");
    }
    auto out = Tensor::zeros({n}, a->requires_grad);
    for (std::size_t i = 0; i < n; ++i) out->values[i] = a->values[i * d + cols[i]];
    if (a->requires_grad) {
        tape.record(out, [a, out, cols, d](Adjoints& adj) {
            auto& ga = adj.of(a);
            const auto* g = adj.find(out.get());
            if (!g) return;
            for (std::size_t i = 0; i < cols.size(); ++i) ga[i * d + cols[i]] += (*g)[i];
        });
    }
    return out;
}

TensorPtr concat_cols(Tape& tape, const std::vector<TensorPtr>& cols) {
    if (cols.empty()) throw ShapeError("concat_cols: need at least one column");
    const std::size_t n = cols[0]->size();
    bool needs = false;
    for (const auto& c : cols) {
        if (c->rank() != 1 || c->shape[0] != n) {
            throw ShapeError("concat_cols: columns must be equally sized vectors");
        }
        needs = needs || c->requires_grad;
    }
    const std::size_t C = cols.size();
    auto out = Tensor::zeros({n, C}, needs);
    for (std::size_t j = 0; j < C; ++j) {
        for (std::size_t i = 0; i < n; ++i) out->values[i * C + j] = cols[j]->values[i];
    }
    if (needs) {
        tape.record(out, [cols, out, n, C](Adjoints& adj) {
            for (const auto& c : cols) {
                if (c->requires_grad) adj.of(c);
            }
            const auto* g = adj.find(out.get());
            if (!g) return;
            for (std::size_t j = 0; j < C; ++j) {
                if (!cols[j]->requires_grad) continue;
                auto& gc = adj.of(cols[j]);
                for (std::size_t i = 0; i < n; ++i) gc[i] += (*g)[i * C + j];
            }
        });
    }
    return out;
}

}  // namespace gpn
