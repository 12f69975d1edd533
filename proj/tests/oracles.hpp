// Independent reference implementations used to verify the library: finite
// differences, dense linear algebra, exhaustive metric sweeps and Monte
// Carlo estimates. Deliberately brute-force and kept free of the code paths
// they check.
#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "gpn/graph.hpp"
#include "gpn/tensor.hpp"

namespace oracles {

// Max relative error between analytic gradients (from one backward pass of
// `loss`) and central finite differences over every parameter entry.
// rel err = |a - f| / max(|a|, |f|, floor).
double max_grad_rel_err(const std::function<gpn::TensorPtr(gpn::Tape&)>& loss,
                        const std::vector<gpn::TensorPtr>& params, double h = 1e-5,
                        double floor = 1e-6);

// Dense n x n copy of the normalized adjacency (self loops included).
std::vector<double> dense_normalized_adjacency(const gpn::SparseGraph& graph,
                                               gpn::PropagationMode mode);

// Dense truncated power iteration Z <- (1-tau) A Z + tau X, K steps.
std::vector<double> dense_power_iteration(const std::vector<double>& a_hat, std::size_t n,
                                          const std::vector<double>& x, std::size_t dim,
                                          double tau, std::size_t iterations);

// The matrix the truncated iteration applies, i.e. the result of running the
// recurrence on the identity.
std::vector<double> dense_ppr_matrix(const std::vector<double>& a_hat, std::size_t n, double tau,
                                     std::size_t iterations);

// Exact fixed point tau (I - (1-tau) A)^-1 X via Gaussian elimination.
std::vector<double> dense_ppr_solve(const std::vector<double>& a_hat, std::size_t n,
                                    const std::vector<double>& x, std::size_t dim, double tau);

// All-pairs shortest hop counts, -1 for unreachable.
std::vector<std::vector<std::int32_t>> floyd_warshall(const gpn::SparseGraph& graph);

// Trapezoidal ROC curve over every distinct threshold.
double auc_roc_threshold_sweep(std::span<const double> scores, const std::vector<char>& positives);

// Precision/recall step sum over every distinct threshold.
double auc_pr_threshold_sweep(std::span<const double> scores, const std::vector<char>& positives);

// One Dirichlet(alpha) draw via normalized gamma variates.
std::vector<double> sample_dirichlet(std::span<const double> alpha, std::mt19937_64& rng);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

// Monte Carlo E[log Cat(y | p)], p ~ Dir(alpha).
McEstimate mc_expected_log_likelihood(std::span<const double> alpha, std::size_t y,
                                      std::size_t num_samples, std::mt19937_64& rng);

// Monte Carlo H[Dir(alpha)] = -E[log Dir(p; alpha)].
McEstimate mc_dirichlet_entropy(std::span<const double> alpha, std::size_t num_samples,
                                std::mt19937_64& rng);

// log|det J| of a generic R^L -> R^L map via central-difference Jacobian.
double numeric_log_det_jacobian(
    const std::function<std::vector<double>(const std::vector<double>&)>& f,
    const std::vector<double>& z, double h = 1e-6);

// Random connected-ish undirected graph with n nodes and roughly
// edge_factor * n edges.
gpn::SparseGraph random_graph(std::size_t n, double edge_factor, std::mt19937_64& rng);

}  // namespace oracles
