// Acceptance suite: runs every shipping criterion at its stated tolerance
// and prints one PASS/FAIL line each. Exits nonzero if any criterion fails.
// The CoraML criterion is optional: it is skipped unless the dataset is
// provided (GPN_CORAML_DIR or ./coraml in the documented directory format).

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "gpn/baselines.hpp"
#include "gpn/experiments.hpp"
#include "gpn/metrics.hpp"
#include "gpn/model.hpp"
#include "gpn/special.hpp"
#include "oracles.hpp"

namespace {

using Clock = std::chrono::steady_clock;

int g_failures = 0;

void report(const std::string& id, bool pass, const std::string& detail, double seconds) {
    std::cout << id << (pass ? "  PASS  " : "  FAIL  ") << detail << "  [" << std::fixed
              << std::setprecision(1) << seconds << "s]\n";
    if (!pass) ++g_failures;
}

void report_skip(const std::string& id, const std::string& reason) {
    std::cout << id << "  SKIP  " << reason << "\n";
}

void run(const std::string& id, const std::function<std::pair<bool, std::string>()>& body) {
    const auto start = Clock::now();
    bool pass = false;
    std::string detail;
    try {
        std::tie(pass, detail) = body();
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    report(id, pass, detail, std::chrono::duration<double>(Clock::now() - start).count());
}

std::string fmt(double v, int precision = 4) {
    std::ostringstream os;
    os << std::setprecision(precision) << v;
    return os.str();
}

// C1: closed-form expected log-likelihood and Dirichlet entropy vs
// 2e5-sample Monte Carlo, 20 random alpha vectors, within 3 standard errors.
std::pair<bool, std::string> criterion_closed_form_loss() {
    std::mt19937_64 rng(1101);
    std::uniform_real_distribution<double> adraw(0.5, 50.0);
    const std::size_t class_counts[] = {2, 3, 5};
    double worst_sigma = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t C = class_counts[trial % 3];
        std::vector<double> alpha(C);
        for (auto& a : alpha) a = adraw(rng);
        const std::size_t y = rng() % C;
        const auto ll = oracles::mc_expected_log_likelihood(alpha, y, 200000, rng);
        const auto ent = oracles::mc_dirichlet_entropy(alpha, 200000, rng);
        const double ll_sigma =
            std::abs(gpn::expected_log_likelihood(alpha, y) - ll.mean) / ll.std_error;
        const double ent_sigma =
            std::abs(gpn::dirichlet_entropy(alpha) - ent.mean) / ent.std_error;
        worst_sigma = std::max({worst_sigma, ll_sigma, ent_sigma});
    }
    return {worst_sigma < 3.0,
            "closed-form loss vs 2e5-sample MC, 20 alphas: worst deviation " +
                fmt(worst_sigma, 3) + " sigma (< 3)"};
}

// C2: end-to-end finite-difference gradient check of the Bayesian loss on a
// 6-node / 2-class toy graph, every parameter, rel err < 1e-4.
std::pair<bool, std::string> criterion_end_to_end_gradient() {
    auto graph = gpn::from_edge_list(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}, {1, 4}});
    std::mt19937_64 rng(1002);
    std::uniform_real_distribution<double> draw(-1.0, 1.0);
    auto x = gpn::Tensor::zeros({6, 3});
    for (auto& v : x->values) v = draw(rng);
    const std::vector<int> labels{0, 0, 1, 1, 0, 1};
    const std::vector<char> mask{1, 1, 1, 0, 1, 1};

    gpn::GpnConfig config;
    config.input_dim = 3;
    config.num_classes = 2;
    config.hidden_dim = 4;
    config.latent_dim = 3;
    config.num_layers = 2;
    config.n_radial = 2;
    config.dropout_p = 0.0;
    config.iterations = 6;
    config.mode = gpn::PropagationMode::symmetric;
    config.init_seed = 7;
    auto model = gpn::GpnModel::init(config);
    auto op = model.make_operator(graph);
    std::mt19937_64 fwd_rng(0);
    const double err = oracles::max_grad_rel_err(
        [&](gpn::Tape& tape) {
            auto fwd = model.forward(tape, op, x, false, fwd_rng);
            return gpn::bayesian_loss(tape, fwd.post, labels, mask, gpn::LossConfig{1e-3});
        },
        model.parameters());
    return {err < 1e-4, "end-to-end FD gradient on 6-node toy: max rel err " + fmt(err, 3) +
                            " (< 1e-4) over " + std::to_string(model.parameters().size()) +
                            " parameter tensors"};
}

// C3: theorem 2, exact: bumping one node's feature evidence by delta moves
// alpha0_agg of every node v by exactly Pi[v,u] * delta (dense PPR oracle),
// 100 random graphs, row-stochastic mode, |err| < 1e-9.
std::pair<bool, std::string> criterion_theorem2() {
    std::mt19937_64 rng(1003);
    std::uniform_real_distribution<double> edraw(0.05, 4.0);
    double worst = 0.0;
    bool all_neighbors_positive = true;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 5 + rng() % 46;  // up to 50
        auto graph = oracles::random_graph(n, 2.0, rng);
        gpn::PropagationOperator op(graph, gpn::PropagationMode::row_stochastic, 0.1, 10);
        auto a_hat =
            oracles::dense_normalized_adjacency(graph, gpn::PropagationMode::row_stochastic);
        auto pi = oracles::dense_ppr_matrix(a_hat, n, 0.1, 10);
        auto beta = gpn::Tensor::zeros({n, 3});
        for (auto& v : beta->values) v = edraw(rng);
        const std::size_t u = rng() % n;
        const double delta = 0.25 + edraw(rng);
        auto bumped = gpn::Tensor::from(beta->shape, beta->values);
        bumped->at(u, rng() % 3) += delta;
        gpn::Tape tape;
        auto ev0 = gpn::make_evidence(tape, beta, op);
        auto ev1 = gpn::make_evidence(tape, bumped, op);
        for (std::size_t v = 0; v < n; ++v) {
            const double got = ev1.alpha0_agg->values[v] - ev0.alpha0_agg->values[v];
            worst = std::max(worst, std::abs(got - pi[v * n + u] * delta));
            if (graph.has_edge(v, u) && got <= 0.0) all_neighbors_positive = false;
        }
    }
    return {worst < 1e-9 && all_neighbors_positive,
            "theorem 2 vs dense PPR oracle, 100 graphs: max |err| " + fmt(worst, 3) +
                " (< 1e-9), neighbor responses all positive"};
}

// C4: theorem 3 part 1: Pi'-weighted entropy lower bound with slack
// >= -1e-9 on 1000 random (graph, evidence) instances.
std::pair<bool, std::string> criterion_theorem3_bound() {
    std::mt19937_64 rng(1004);
    std::uniform_real_distribution<double> edraw(0.05, 4.0);
    double min_slack = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 4 + rng() % 12;
        const std::size_t C = 2 + rng() % 3;
        auto graph = oracles::random_graph(n, 2.0, rng);
        gpn::PropagationOperator op(graph, gpn::PropagationMode::row_stochastic, 0.1, 10);
        auto a_hat =
            oracles::dense_normalized_adjacency(graph, gpn::PropagationMode::row_stochastic);
        auto pi = oracles::dense_ppr_matrix(a_hat, n, 0.1, 10);
        auto beta = gpn::Tensor::zeros({n, C});
        for (auto& v : beta->values) v = edraw(rng);
        gpn::Tape tape;
        auto ev = gpn::make_evidence(tape, beta, op);
        const auto p_ft = gpn::normalized_rows(ev.beta_ft);
        const auto p_agg = gpn::normalized_rows(ev.beta_agg);
        const std::size_t v = rng() % n;
        double denom = 0.0;
        for (std::size_t u = 0; u < n; ++u) denom += pi[v * n + u] * ev.alpha0_ft->values[u];
        double weighted = 0.0;
        for (std::size_t u = 0; u < n; ++u) {
            const double w = pi[v * n + u] * ev.alpha0_ft->values[u] / denom;
            weighted += w * gpn::entropy_cat(std::span<const double>(p_ft.data() + u * C, C));
        }
        const double h_agg =
            gpn::entropy_cat(std::span<const double>(p_agg.data() + v * C, C));
        min_slack = std::min(min_slack, h_agg - weighted);
    }
    return {min_slack >= -1e-9, "theorem 3 part 1 on 1000 instances: min slack " +
                                    fmt(min_slack, 3) + " (>= -1e-9)"};
}

// C5: theorem 3 part 2: transferring eps = 1e-3 of mass off the winning
// class strictly raises the aggregated entropy while the class still wins,
// 100 random instances.
std::pair<bool, std::string> criterion_theorem3_transfer() {
    std::mt19937_64 rng(1005);
    std::uniform_real_distribution<double> edraw(0.2, 4.0);
    const double eps = 1e-3;
    int checked = 0;
    double min_increase = std::numeric_limits<double>::infinity();
    while (checked < 100) {
        const std::size_t n = 4 + rng() % 12;
        const std::size_t C = 2 + rng() % 3;
        auto graph = oracles::random_graph(n, 2.0, rng);
        gpn::PropagationOperator op(graph, gpn::PropagationMode::row_stochastic, 0.1, 10);
        auto a_hat =
            oracles::dense_normalized_adjacency(graph, gpn::PropagationMode::row_stochastic);
        auto pi = oracles::dense_ppr_matrix(a_hat, n, 0.1, 10);
        auto beta = gpn::Tensor::zeros({n, C});
        for (auto& v : beta->values) v = edraw(rng);
        gpn::Tape tape;
        auto ev = gpn::make_evidence(tape, beta, op);
        const auto p_ft = gpn::normalized_rows(ev.beta_ft);
        const auto p_agg = gpn::normalized_rows(ev.beta_agg);
        const std::size_t v = rng() % n;
        const std::size_t u = rng() % n;
        std::span<const double> row(p_agg.data() + v * C, C);
        const auto winner = static_cast<std::size_t>(
            std::max_element(row.begin(), row.end()) - row.begin());
        const auto loser = (winner + 1) % C;
        // need influence, transferable mass and a clear margin
        if (pi[v * n + u] <= 1e-6) continue;
        if (p_ft[u * C + winner] < 10.0 * eps) continue;
        if (row[winner] - row[loser] < 0.05) continue;
        auto beta2 = gpn::Tensor::from(beta->shape, beta->values);
        const double a0u = ev.alpha0_ft->values[u];
        beta2->at(u, winner) -= eps * a0u;
        beta2->at(u, loser) += eps * a0u;
        auto ev2 = gpn::make_evidence(tape, beta2, op);
        const auto p_agg2 = gpn::normalized_rows(ev2.beta_agg);
        std::span<const double> row2(p_agg2.data() + v * C, C);
        const auto winner2 = static_cast<std::size_t>(
            std::max_element(row2.begin(), row2.end()) - row2.begin());
        if (winner2 != winner) return {false, "theorem 3 part 2: winning class flipped"};
        min_increase = std::min(min_increase, gpn::entropy_cat(row2) - gpn::entropy_cat(row));
        ++checked;
    }
    return {min_increase > 0.0, "theorem 3 part 2 on 100 instances: min entropy increase " +
                                    fmt(min_increase, 3) + " (> 0), winner preserved"};
}

// Log-domain feature evidence of single rows, for the theorem 1 check.
double log_alpha0_ft(const gpn::GpnModel& model, const std::vector<double>& x) {
    gpn::Tape tape;
    auto row = gpn::Tensor::from({1, x.size()}, x);
    auto log_dens = model.feature_log_densities(tape, row);
    const double shift = model.budget.log_budget(model.config.num_classes) -
                         std::log(static_cast<double>(model.config.num_classes));
    double max_term = -std::numeric_limits<double>::infinity();
    for (double ld : log_dens->values) max_term = std::max(max_term, ld + shift);
    double acc = 0.0;
    for (double ld : log_dens->values) acc += std::exp(ld + shift - max_term);
    return max_term + std::log(acc);
}

// C6: theorem 1, behavioral: after training with a zero-bias encoder,
// alpha0_ft(delta x) / alpha0_ft(x) < 1e-3 at delta = 1e3 for >= 95% of 200
// random unit directions.
std::pair<bool, std::string> criterion_theorem1() {
    auto data = gpn::make_synthetic_benchmark(100, 4, 8, 0.8, 42);
    auto split = gpn::stratified_split(data, {0.2, 0.2, 0.6}, 42);
    gpn::GpnConfig config;
    config.input_dim = 8;
    config.num_classes = 4;
    config.hidden_dim = 32;
    config.latent_dim = 8;
    config.n_radial = 6;
    config.dropout_p = 0.25;
    config.encoder_bias = false;
    config.init_seed = 42;
    auto model = gpn::GpnModel::init(config);
    gpn::TrainConfig tc;
    tc.schedule.seed = 42;
    tc.schedule.max_epochs = 300;
    gpn::fit(model, data, split, tc);

    std::mt19937_64 rng(1006);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double log_threshold = std::log(1e-3);
    int hits = 0;
    const int total = 200;
    for (int trial = 0; trial < total; ++trial) {
        std::vector<double> x(8);
        double norm = 0.0;
        for (auto& v : x) {
            v = gauss(rng);
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (auto& v : x) v /= norm;
        const double at_one = log_alpha0_ft(model, x);
        std::vector<double> far(x);
        for (auto& v : far) v *= 1e3;
        const double at_far = log_alpha0_ft(model, far);
        if (at_far - at_one < log_threshold) ++hits;
    }
    const double rate = static_cast<double>(hits) / total;
    return {rate >= 0.95, "theorem 1 evidence decay at delta=1e3: " + std::to_string(hits) +
                              "/200 directions below 1e-3 (need >= 190)"};
}

// C7: flow correctness: log-det vs numerical Jacobian on 100 random layers
// (L <= 3, rel err < 1e-6); identity stack reproduces the standard normal to
// 1e-12; L=2 density MC-integrates to 1 +- 0.02.
std::pair<bool, std::string> criterion_flows() {
    std::mt19937_64 rng(1007);
    std::uniform_real_distribution<double> z0_draw(-0.8, 0.8);
    std::uniform_real_distribution<double> la_draw(-0.4, 0.4);
    std::uniform_real_distribution<double> br_draw(-0.5, 1.5);
    std::uniform_real_distribution<double> zdraw(-1.5, 1.5);
    double worst_jac = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t latent = 1 + trial % 3;
        gpn::RadialLayer layer;
        layer.z0 = gpn::Tensor::zeros({latent});
        for (auto& v : layer.z0->values) v = z0_draw(rng);
        layer.log_alpha = gpn::Tensor::scalar(la_draw(rng));
        layer.beta_raw = gpn::Tensor::scalar(br_draw(rng));
        std::vector<double> z(latent);
        for (auto& v : z) v = zdraw(rng);
        gpn::Tape tape;
        auto [u, log_det] = gpn::radial_transform(tape, layer, gpn::Tensor::from({1, latent}, z));
        const double numeric = oracles::numeric_log_det_jacobian(
            [&](const std::vector<double>& p) {
                gpn::Tape t2;
                auto [u2, ld2] =
                    gpn::radial_transform(t2, layer, gpn::Tensor::from({1, latent}, p));
                return u2->values;
            },
            z);
        worst_jac = std::max(worst_jac, std::abs(log_det->values[0] - numeric) /
                                            std::max(std::abs(numeric), 1e-3));
    }

    // identity stack vs standard normal
    std::mt19937_64 init_rng(0);
    auto stack = gpn::FlowStack::init(2, 4, init_rng);
    for (auto& layer : stack.layers()) {
        std::fill(layer.z0->values.begin(), layer.z0->values.end(), 0.0);
    }
    constexpr double kLog2Pi = 1.8378770664093454836;
    double worst_identity = 0.0;
    std::uniform_real_distribution<double> wide(-3.0, 3.0);
    gpn::Tape tape;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> z{wide(rng), wide(rng)};
        auto ld = stack.log_density(tape, gpn::Tensor::from({1, 2}, z));
        const double want = -kLog2Pi - 0.5 * (z[0] * z[0] + z[1] * z[1]);
        worst_identity = std::max(worst_identity, std::abs(ld->values[0] - want));
    }

    // Monte Carlo normalization of a random 2-layer stack on L = 2. The
    // [-8, 8]^2 box holds all but ~1e-5 of the mass; 4e6 uniform samples put
    // the MC standard error near 0.004, well inside the 0.02 tolerance.
    auto mc_stack = gpn::FlowStack::init(2, 2, rng);
    for (auto& layer : mc_stack.layers()) {
        layer.log_alpha->values[0] = la_draw(rng);
        layer.beta_raw->values[0] = 1.0 + br_draw(rng);
    }
    const std::size_t samples = 4000000, batch = 20000;
    std::uniform_real_distribution<double> box(-8.0, 8.0);
    double acc = 0.0;
    for (std::size_t s = 0; s < samples / batch; ++s) {
        std::vector<double> pts(batch * 2);
        for (auto& v : pts) v = box(rng);
        auto ld = mc_stack.log_density(tape, gpn::Tensor::from({batch, 2}, pts));
        for (double v : ld->values) acc += std::exp(v);
    }
    const double integral = 256.0 * acc / static_cast<double>(samples);

    const bool pass =
        worst_jac < 1e-6 && worst_identity < 1e-12 && std::abs(integral - 1.0) < 0.02;
    return {pass, "flows: Jacobian rel err " + fmt(worst_jac, 3) + " (< 1e-6), identity gap " +
                      fmt(worst_identity, 3) + " (< 1e-12), MC integral " + fmt(integral, 4) +
                      " (1 +- 0.02)"};
}

// C8: propagate equals the dense power iteration to 1e-12 on n <= 100, and
// the K=10 truncation error vs the dense solve obeys (1-tau)^(K+1)/tau.
std::pair<bool, std::string> criterion_ppr() {
    std::mt19937_64 rng(1008);
    std::uniform_real_distribution<double> draw(-1.0, 1.0);
    double worst_eq = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 20 + rng() % 81;  // up to 100
        auto graph = oracles::random_graph(n, 2.0, rng);
        const auto mode = trial % 2 == 0 ? gpn::PropagationMode::symmetric
                                         : gpn::PropagationMode::row_stochastic;
        gpn::PropagationOperator op(graph, mode, 0.1, 10);
        auto x = gpn::Tensor::zeros({n, 3});
        for (auto& v : x->values) v = draw(rng);
        gpn::Tape tape;
        auto got = gpn::propagate(tape, op, x);
        auto a_hat = oracles::dense_normalized_adjacency(graph, mode);
        auto want = oracles::dense_power_iteration(a_hat, n, x->values, 3, 0.1, 10);
        for (std::size_t i = 0; i < want.size(); ++i) {
            worst_eq = std::max(worst_eq, std::abs(got->values[i] - want[i]));
        }
    }

    double worst_ratio = 0.0;  // truncation error over the stated bound
    for (double tau : {0.1, 0.2, 0.5}) {
        const double bound = std::pow(1.0 - tau, 11.0) / tau;
        for (int trial = 0; trial < 5; ++trial) {
            const std::size_t n = 10 + rng() % 41;
            auto graph = oracles::random_graph(n, 2.0, rng);
            gpn::PropagationOperator op(graph, gpn::PropagationMode::row_stochastic, tau, 10);
            auto x = gpn::Tensor::zeros({n, 2});
            for (auto& v : x->values) v = 0.5 + 0.5 * draw(rng);  // [0, 1]
            gpn::Tape tape;
            auto truncated = gpn::propagate(tape, op, x);
            auto a_hat =
                oracles::dense_normalized_adjacency(graph, gpn::PropagationMode::row_stochastic);
            auto exact = oracles::dense_ppr_solve(a_hat, n, x->values, 2, tau);
            for (std::size_t i = 0; i < exact.size(); ++i) {
                worst_ratio =
                    std::max(worst_ratio, std::abs(truncated->values[i] - exact[i]) / bound);
            }
        }
    }
    const bool pass = worst_eq < 1e-12 && worst_ratio <= 1.0;
    return {pass, "PPR: max gap to dense power iteration " + fmt(worst_eq, 3) +
                      " (< 1e-12), truncation error at " + fmt(100.0 * worst_ratio, 3) +
                      "% of the (1-tau)^(K+1)/tau bound"};
}

// C9: AUC-ROC/AUC-PR match the exhaustive-threshold oracle on every tried
// case of <= 12 samples including ties, and the hand-computed ECE = 0.4
// two-sample case reproduces exactly.
std::pair<bool, std::string> criterion_metric_oracles() {
    std::mt19937_64 rng(1009);
    const double alphabet[] = {0.1, 0.3, 0.6, 0.9};
    double worst = 0.0;
    std::size_t cases = 0;
    for (std::size_t n = 2; n <= 12; ++n) {
        for (int trial = 0; trial < 500; ++trial) {
            std::vector<double> scores(n);
            std::vector<char> positives(n);
            bool has_pos = false, has_neg = false;
            for (std::size_t i = 0; i < n; ++i) {
                scores[i] = alphabet[rng() % 4];
                positives[i] = rng() % 2 ? 1 : 0;
                (positives[i] ? has_pos : has_neg) = true;
            }
            if (!has_pos || !has_neg) continue;
            ++cases;
            worst = std::max(worst, std::abs(gpn::auc_roc(scores, positives) -
                                             oracles::auc_roc_threshold_sweep(scores, positives)));
            worst = std::max(worst, std::abs(gpn::auc_pr(scores, positives) -
                                             oracles::auc_pr_threshold_sweep(scores, positives)));
        }
    }
    auto probs = gpn::Tensor::from({2, 2}, {0.9, 0.1, 0.7, 0.3});
    const double ece_val = gpn::ece(probs, {0, 0}, {0, 1}, {1, 1}, 10);
    // 0.4 is not an exact double; a few ulps is as exact as it gets
    const bool pass = worst < 1e-12 && std::abs(ece_val - 0.4) < 1e-15;
    return {pass, "metric oracles over " + std::to_string(cases) +
                      " tied cases (n <= 12): max AUC gap " + fmt(worst, 3) +
                      " (< 1e-12), two-sample ECE " + fmt(ece_val, 12) + " (= 0.4)"};
}

gpn::GpnConfig paper_config(std::size_t input_dim, std::size_t num_classes, std::uint64_t seed) {
    gpn::GpnConfig config;
    config.input_dim = input_dim;
    config.num_classes = num_classes;
    config.hidden_dim = 64;
    config.latent_dim = 16;
    config.num_layers = 2;
    config.n_radial = 10;
    config.dropout_p = 0.5;
    config.teleport = 0.1;
    config.iterations = 10;
    config.init_seed = seed;
    return config;
}

// C10: desk-scale end-to-end on the synthetic benchmark, 3 seeds: test
// accuracy >= 0.95; normal perturbation of 10% of test nodes detected by
// epistemic-without-network AUC-ROC >= 0.99; perturbed-node accuracy within
// 5 points of clean accuracy. Uses 32 feature dimensions (unit-Gaussian
// noise rows are then far out of domain, as with the bag-of-words data the
// reference numbers come from), a 10/15/75 split (about 20 labeled nodes
// per class, the label budget the reference protocol gives CoraML) and 20
// warm-up epochs (the flows get a larger share of the much shorter
// desk-scale schedule).
std::pair<bool, std::string> criterion_end_to_end() {
    double acc_sum = 0.0, auc_sum = 0.0, gap_sum = 0.0;
    std::ostringstream per_seed;
    for (std::uint64_t seed : {1, 2, 3}) {
        auto data = gpn::make_synthetic_benchmark(200, 4, 32, 0.8, seed);
        auto split = gpn::stratified_split(data, {0.10, 0.15, 0.75}, seed);
        auto model = gpn::GpnModel::init(paper_config(32, 4, seed));
        gpn::TrainConfig tc;
        tc.schedule.seed = seed;
        tc.schedule.max_epochs = 1500;
        tc.schedule.warmup_epochs = 20;
        gpn::fit(model, data, split, tc);
        auto clean = gpn::evaluate_clean(model, data, split);
        gpn::OodExperiment exp;
        exp.kind = gpn::OodExperiment::Kind::feature_normal;
        exp.fraction = 0.1;
        exp.seed = seed;
        auto ood = gpn::run_ood_experiment(model, data, split, exp);
        const double acc = clean.metrics.at("test_acc");
        const double auc = ood.metrics.at("auc_roc_epist_ft");
        const double gap = std::abs(clean.metrics.at("test_acc") - ood.metrics.at("ood_acc"));
        acc_sum += acc;
        auc_sum += auc;
        gap_sum += gap;
        per_seed << " [seed " << seed << ": acc " << fmt(acc, 3) << ", auc " << fmt(auc, 4)
                 << ", gap " << fmt(100.0 * gap, 2) << "pt]";
    }
    const double acc = acc_sum / 3.0, auc = auc_sum / 3.0, gap = gap_sum / 3.0;
    const bool pass = acc >= 0.95 && auc >= 0.99 && gap <= 0.05;
    return {pass, "synthetic end-to-end, 3 seeds: mean acc " + fmt(acc, 4) +
                      " (>= 0.95), epist-ft AUC " + fmt(auc, 4) + " (>= 0.99), ood acc gap " +
                      fmt(100.0 * gap, 2) + "pt (<= 5)" + per_seed.str()};
}

// C11 (optional): CoraML in the documented format, 3 seeds: clean accuracy
// within +-3.0 points of 81.16 and normal-perturbation epist-ft AUC >= 99.0.
void criterion_coraml() {
    const char* env = std::getenv("GPN_CORAML_DIR");
    std::filesystem::path dir = env ? env : "coraml";
    if (!std::filesystem::exists(dir / "meta.json")) {
        report_skip("C11", "optional CoraML run: dataset not provided (set GPN_CORAML_DIR)");
        return;
    }
    run("C11", [&]() -> std::pair<bool, std::string> {
        auto data = gpn::load_dataset(dir);
        double acc_sum = 0.0, auc_sum = 0.0;
        for (std::uint64_t seed : {1, 2, 3}) {
            auto split = gpn::stratified_split(data, seed);
            auto model =
                gpn::GpnModel::init(paper_config(data.num_features(), data.num_classes, seed));
            gpn::TrainConfig tc;
            tc.schedule.seed = seed;
            tc.schedule.max_epochs = 1000;
            gpn::fit(model, data, split, tc);
            acc_sum += gpn::evaluate_clean(model, data, split).metrics.at("test_acc");
            gpn::OodExperiment exp;
            exp.kind = gpn::OodExperiment::Kind::feature_normal;
            exp.fraction = 0.1;
            exp.seed = seed;
            auc_sum += gpn::run_ood_experiment(model, data, split, exp)
                           .metrics.at("auc_roc_epist_ft");
        }
        const double acc = 100.0 * acc_sum / 3.0, auc = 100.0 * auc_sum / 3.0;
        const bool pass = std::abs(acc - 81.16) <= 3.0 && auc >= 99.0;
        return {pass, "CoraML, 3 seeds: clean acc " + fmt(acc, 4) +
                          " (within 81.16 +- 3.0), epist-ft AUC " + fmt(auc, 4) + " (>= 99.0)"};
    });
}

// C12: GKDE path-graph value to 1e-9 and LP per-class mass conservation vs
// the dense-solve oracle to 1e-9.
std::pair<bool, std::string> criterion_baselines() {
    auto path = gpn::from_edge_list(2, {{0, 1}});
    auto alpha = gpn::gkde_alpha(path, {0, 0}, {0}, 2, {});
    const double gkde_err = std::abs(alpha->at(1, 0) - 1.2419707245191433);

    std::mt19937_64 rng(1012);
    double lp_err = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 10 + rng() % 30;
        auto graph = oracles::random_graph(n, 2.0, rng);
        std::vector<int> labels(n);
        for (auto& l : labels) l = static_cast<int>(rng() % 3);
        labels[0] = 0;
        labels[1] = 1;
        labels[2] = 2;
        std::vector<std::size_t> labeled{0, 1, 2};
        for (std::size_t v = 3; v < n; ++v) {
            if (rng() % 3 == 0) labeled.push_back(v);
        }
        auto lp = gpn::lp_alpha(graph, labels, labeled, 3, {});
        // dense solve conserves each class's mass at exactly 1
        for (std::size_t c = 0; c < 3; ++c) {
            double mass = 0.0;
            for (std::size_t v = 0; v < n; ++v) mass += lp->at(v, c) - 1.0;
            lp_err = std::max(lp_err, std::abs(mass - 1.0));
        }
    }
    const bool pass = gkde_err < 1e-9 && lp_err < 1e-9;
    return {pass, "baselines: GKDE path value err " + fmt(gkde_err, 3) +
                      " (< 1e-9), LP conservation err vs dense oracle " + fmt(lp_err, 3) +
                      " (< 1e-9)"};
}

}  // namespace

int main() {
    std::cout << "acceptance suite\n================\n";
    run("C1 ", criterion_closed_form_loss);
    run("C2 ", criterion_end_to_end_gradient);
    run("C3 ", criterion_theorem2);
    run("C4 ", criterion_theorem3_bound);
    run("C5 ", criterion_theorem3_transfer);
    run("C6 ", criterion_theorem1);
    run("C7 ", criterion_flows);
    run("C8 ", criterion_ppr);
    run("C9 ", criterion_metric_oracles);
    run("C10", criterion_end_to_end);
    criterion_coraml();
    run("C12", criterion_baselines);
    std::cout << (g_failures == 0 ? "all criteria passed\n"
                                  : std::to_string(g_failures) + " criteria FAILED\n");
    return g_failures == 0 ? 0 : 1;
}
