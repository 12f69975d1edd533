#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "gpn/tensor.hpp"

namespace gpn {

// Undirected, unweighted graph in CSR form. Symmetric, no self loops,
// neighbor lists sorted and duplicate free.
struct SparseGraph {
    std::size_t num_nodes = 0;
    std::vector<std::size_t> row_offsets;  // length num_nodes + 1
    std::vector<std::size_t> col_indices;

    std::size_t num_edges() const { return col_indices.size() / 2; }
    std::size_t degree(std::size_t u) const { return row_offsets[u + 1] - row_offsets[u]; }
    std::span<const std::size_t> neighbors(std::size_t u) const {
        return {col_indices.data() + row_offsets[u], degree(u)};
    }
    bool has_edge(std::size_t u, std::size_t v) const;
    // Unique undirected pairs with u < v.
    std::vector<std::pair<std::size_t, std::size_t>> edge_list() const;
};

// Symmetrizes, deduplicates and strips self loops.
SparseGraph from_edge_list(std::size_t num_nodes,
                           const std::vector<std::pair<std::size_t, std::size_t>>& edges);

// Text format: one "u v" pair per line, 0-based indices, '#' comments.
SparseGraph load_edge_list(const std::filesystem::path& path, std::size_t num_nodes);
void save_edge_list(const SparseGraph& graph, const std::filesystem::path& path);

enum class PropagationMode { symmetric, row_stochastic };

// Normalized adjacency with self loops, A_hat = D~^-1/2 (A+I) D~^-1/2 or
// D~^-1 (A+I), plus the teleport/iteration-count schedule for truncated
// personalized-PageRank power iteration.
class PropagationOperator {
public:
    PropagationOperator(const SparseGraph& graph, PropagationMode mode, double teleport,
                        std::size_t iterations);

    std::size_t num_nodes() const { return num_nodes_; }
    PropagationMode mode() const { return mode_; }
    double teleport() const { return teleport_; }
    std::size_t iterations() const { return iterations_; }

    // y = A_hat x for row-major x, y of shape [n x dim]; y is overwritten.
    void apply(const double* x, double* y, std::size_t dim) const;
    // y = A_hat^T x.
    void apply_transpose(const double* x, double* y, std::size_t dim) const;

    // Dense copy of A_hat, for small-n oracles.
    std::vector<double> dense() const;

private:
    std::size_t num_nodes_;
    PropagationMode mode_;
    double teleport_;
    std::size_t iterations_;
    std::vector<std::size_t> row_offsets_;
    std::vector<std::size_t> col_indices_;
    std::vector<double> edge_values_;
    std::vector<double> diag_values_;
};

// Truncated PPR power iteration Z <- (1-tau) A_hat Z + tau X, K steps,
// starting from Z = X. Differentiable through every step. The operator must
// outlive any tape this call recorded onto.
TensorPtr propagate(Tape& tape, const PropagationOperator& op, const TensorPtr& X);

// Same schedule applied with A_hat^T: pushes mass along the walk instead of
// pulling it, so column mass is conserved exactly in row-stochastic mode.
TensorPtr propagate_reverse(Tape& tape, const PropagationOperator& op, const TensorPtr& X);

// Unreachable distance sentinel.
inline constexpr std::int32_t kUnreachable = -1;

// Exact hop counts from each source; result[s][v] is the distance from
// sources[s] to v, kUnreachable if no path exists.
std::vector<std::vector<std::int32_t>> bfs_distances(const SparseGraph& graph,
                                                     const std::vector<std::size_t>& sources);

// Removes floor(fraction * |E|) random undirected edges and inserts the same
// number of uniformly sampled non-existing edges.
SparseGraph perturb_edges_random(const SparseGraph& graph, double fraction, std::mt19937_64& rng);

// DICE: delete intra-class edges, insert inter-class edges, 50/50 budget
// split, uniform sampling, random fallback when no eligible pair remains.
SparseGraph perturb_edges_dice(const SparseGraph& graph, double fraction,
                               const std::vector<int>& labels, std::mt19937_64& rng);

}  // namespace gpn
