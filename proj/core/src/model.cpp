#include "gpn/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "json.hpp"

namespace gpn {

GpnModel GpnModel::init(const GpnConfig& config) {
    if (config.input_dim < 1 || config.num_classes < 1) {
        throw ParameterError("GpnModel: input_dim and num_classes must be set");
    }
    GpnModel model;
    model.config = config;
    std::mt19937_64 rng(config.init_seed);
    model.encoder = MlpEncoder::init(config.input_dim, config.hidden_dim, config.latent_dim,
                                     config.num_layers, config.dropout_p, rng, config.encoder_bias);
    model.density =
        ClassConditionalDensity::init(config.num_classes, config.latent_dim, config.n_radial, rng);
    model.budget = CertaintyBudget{config.latent_dim, config.budget};
    return model;
}

PropagationOperator GpnModel::make_operator(const SparseGraph& graph) const {
    return PropagationOperator(graph, config.mode, config.teleport, config.iterations);
}

TensorPtr GpnModel::feature_log_densities(Tape& tape, const TensorPtr& X) const {
    std::mt19937_64 unused_rng(0);
    auto z = encoder.forward(tape, X, /*training=*/false, unused_rng);
    return density.class_log_densities(tape, z);
}

GpnModel::Forward GpnModel::forward(Tape& tape, const PropagationOperator& op, const TensorPtr& X,
                                    bool training, std::mt19937_64& rng) const {
    Forward out;
    out.latent = encoder.forward(tape, X, training, rng);
    out.log_dens = density.class_log_densities(tape, out.latent);
    auto beta_ft = feature_evidence(tape, out.log_dens, budget);
    out.evidence = make_evidence(tape, beta_ft, op);
    out.post = make_posterior(tape, out.evidence.beta_agg, config.prior_value);
    return out;
}

std::vector<TensorPtr> GpnModel::parameters() const {
    auto params = encoder.parameters();
    auto flow = density.parameters();
    params.insert(params.end(), flow.begin(), flow.end());
    return params;
}

Evaluation evaluate(const GpnModel& model, const SparseGraph& graph, const TensorPtr& X) {
    Tape tape;
    std::mt19937_64 rng(0);
    auto op = model.make_operator(graph);
    auto fwd = model.forward(tape, op, X, /*training=*/false, rng);
    Evaluation ev;
    ev.alpha = fwd.post.alpha;
    ev.preds = predict(fwd.post);
    ev.p_net = normalized_rows(fwd.post.alpha);
    ev.p_ft = normalized_rows(fwd.evidence.beta_ft);
    ev.alpha0_ft = fwd.evidence.alpha0_ft->values;
    ev.alpha0_agg = fwd.evidence.alpha0_agg->values;
    ev.scores = uncertainty_scores(fwd.post, fwd.evidence);
    return ev;
}

namespace {

std::vector<std::vector<double>> snapshot(const std::vector<TensorPtr>& params) {
    std::vector<std::vector<double>> snap;
    snap.reserve(params.size());
    for (const auto& p : params) snap.push_back(p->values);
    return snap;
}

void restore(const std::vector<TensorPtr>& params, const std::vector<std::vector<double>>& snap) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->values = snap[i];
}

}  // namespace

FitHistory fit(GpnModel& model, const Dataset& data, const SplitSpec& split,
               const TrainConfig& cfg) {
    if (split.count(split.train) == 0 || split.count(split.val) == 0) {
        throw ParameterError("fit: train and validation masks must be non-empty");
    }
    std::mt19937_64 rng(cfg.schedule.seed);
    const auto op = model.make_operator(data.graph);
    const auto flow_params = model.density.parameters();
    const auto encoder_params = model.encoder.parameters();

    // Phase 1: flow warm-up on detached latents, encoder untouched.
    if (cfg.schedule.warmup_epochs > 0) {
        Adam warm_opt({ParamGroup{flow_params, 0.0}}, cfg.lr);
        for (std::size_t epoch = 0; epoch < cfg.schedule.warmup_epochs; ++epoch) {
            Tape zt;
            std::mt19937_64 eval_rng(0);
            auto z = model.encoder.forward(zt, data.features, /*training=*/false, eval_rng);
            auto z_const = Tensor::from(z->shape, z->values);
            Tape tape;
            auto wloss = warmup_loss(tape, model.density, z_const, data.labels, split.train);
            if (!std::isfinite(wloss->item())) {
                throw TrainingError("fit: non-finite warm-up loss at epoch " +
                                    std::to_string(epoch + 1));
            }
            warm_opt.zero_grad();
            tape.backward(wloss);
            warm_opt.step();
        }
    }

    // Phase 2: joint training; patience counts from here.
    Adam opt({ParamGroup{encoder_params, cfg.weight_decay}, ParamGroup{flow_params, 0.0}}, cfg.lr);
    const auto all_params = model.parameters();
    FitHistory history;
    history.best_val = std::numeric_limits<double>::infinity();
    auto best = snapshot(all_params);
    std::size_t since_best = 0;
    for (std::size_t epoch = 1; epoch <= cfg.schedule.max_epochs; ++epoch) {
        Tape tape;
        auto fwd = model.forward(tape, op, data.features, /*training=*/true, rng);
        auto loss = bayesian_loss(tape, fwd.post, data.labels, split.train, cfg.loss);
        const double train_loss = loss->item();
        if (!std::isfinite(train_loss)) {
            throw TrainingError("fit: non-finite training loss at epoch " + std::to_string(epoch));
        }
        opt.zero_grad();
        tape.backward(loss);
        opt.step();

        Tape val_tape;
        std::mt19937_64 val_rng(0);
        auto val_fwd = model.forward(val_tape, op, data.features, /*training=*/false, val_rng);
        const double val_loss =
            bayesian_loss(val_tape, val_fwd.post, data.labels, split.val, cfg.loss)->item();
        if (!std::isfinite(val_loss)) {
            throw TrainingError("fit: non-finite validation loss at epoch " +
                                std::to_string(epoch));
        }
        history.train_loss.push_back(train_loss);
        history.val_loss.push_back(val_loss);
        if (val_loss < history.best_val) {
            history.best_val = val_loss;
            history.best_epoch = epoch;
            best = snapshot(all_params);
            since_best = 0;
        } else {
            ++since_best;
            if (since_best >= cfg.schedule.patience) break;
        }
    }
    restore(all_params, best);
    return history;
}

// ---- checkpoint ------------------------------------------------------------
//
// Newline-terminated JSON header, then one length-prefixed block per
// parameter in declared order (encoder weights/biases, then per class and
// per radial layer z0, log_alpha, beta_raw). Block = u64 LE count followed
// by count f64 LE values.

namespace {

void write_block(std::ofstream& out, const TensorPtr& p) {
    const std::uint64_t count = p->size();
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    out.write(reinterpret_cast<const char*>(p->values.data()),
              static_cast<std::streamsize>(count * sizeof(double)));
}

void read_block(std::ifstream& in, const TensorPtr& p) {
    std::uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&count), sizeof(count));
    if (!in || count != p->size()) {
        throw LoadError("checkpoint: parameter block size mismatch");
    }
    in.read(reinterpret_cast<char*>(p->values.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw LoadError("checkpoint: truncated parameter block");
}

}  // namespace

void GpnModel::save_checkpoint(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("checkpoint: cannot open " + path.string());
    nlohmann::json header{
        {"format", "gpn-checkpoint-v1"},
        {"input_dim", config.input_dim},
        {"num_classes", config.num_classes},
        {"hidden_dim", config.hidden_dim},
        {"latent_dim", config.latent_dim},
        {"num_layers", config.num_layers},
        {"n_radial", config.n_radial},
        {"dropout_p", config.dropout_p},
        {"teleport", config.teleport},
        {"iterations", config.iterations},
        {"mode", config.mode == PropagationMode::symmetric ? "symmetric" : "row_stochastic"},
        {"budget", config.budget == BudgetMode::per_latent ? "per_latent" : "per_latent_times_classes"},
        {"prior_value", config.prior_value},
        {"encoder_bias", config.encoder_bias},
        {"seed", config.init_seed},
    };
    out << header.dump() << '\n';
    for (const auto& p : parameters()) write_block(out, p);
}

GpnModel GpnModel::load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("checkpoint: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw LoadError("checkpoint: missing header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw LoadError("checkpoint header: " + std::string(e.what()));
    }
    if (header.value("format", "") != "gpn-checkpoint-v1") {
        throw LoadError("checkpoint: unknown format");
    }
    GpnConfig config;
    config.input_dim = header["input_dim"].get<std::size_t>();
    config.num_classes = header["num_classes"].get<std::size_t>();
    config.hidden_dim = header["hidden_dim"].get<std::size_t>();
    config.latent_dim = header["latent_dim"].get<std::size_t>();
    config.num_layers = header["num_layers"].get<std::size_t>();
    config.n_radial = header["n_radial"].get<std::size_t>();
    config.dropout_p = header["dropout_p"].get<double>();
    config.teleport = header["teleport"].get<double>();
    config.iterations = header["iterations"].get<std::size_t>();
    config.mode = header["mode"].get<std::string>() == "symmetric"
                      ? PropagationMode::symmetric
                      : PropagationMode::row_stochastic;
    config.budget = header["budget"].get<std::string>() == "per_latent"
                        ? BudgetMode::per_latent
                        : BudgetMode::per_latent_times_classes;
    config.prior_value = header["prior_value"].get<double>();
    config.encoder_bias = header["encoder_bias"].get<bool>();
    config.init_seed = header["seed"].get<std::uint64_t>();
    GpnModel model = init(config);
    for (const auto& p : model.parameters()) read_block(in, p);
    return model;
}

}  // namespace gpn
