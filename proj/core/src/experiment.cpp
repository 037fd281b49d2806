#include "hgp/experiment.hpp"

#include <algorithm>
#include <cmath>

#include "hgp/autodiff.hpp"
#include "hgp/errors.hpp"
#include "hgp/gradcheck.hpp"
#include "hgp/metrics.hpp"
#include "hgp/optim.hpp"
#include "hgp/rng.hpp"
#include "hgp/serialize.hpp"

namespace hgp {

namespace {

std::uint64_t substream_seed(std::uint64_t seed, const std::string& name) {
    return seed ^ Rng::fnv1a(name);
}

std::string cell_name(const std::string& model, const std::string& graph, int horizon) {
    return model + "_" + graph + "_h" + std::to_string(horizon);
}

struct SplitEval {
    double acc = 0.0;
    std::vector<int> truth;
    std::vector<int> predicted;
};

SplitEval evaluate_split(const PoolModel& model, const SampleSet& samples, const RoadGraph& graph,
                         const std::vector<std::size_t>& indices) {
    SplitEval ev;
    for (std::size_t idx : indices) {
        const std::vector<int> pred = predict_grades(model, *samples.tensor, samples.items[idx].t_end,
                                                     samples.window, graph);
        const std::vector<int> truth = samples.labels(idx);
        ev.truth.insert(ev.truth.end(), truth.begin(), truth.end());
        ev.predicted.insert(ev.predicted.end(), pred.begin(), pred.end());
    }
    if (!ev.truth.empty()) ev.acc = accuracy(ev.truth, ev.predicted);
    return ev;
}

}  // namespace

int signal_index(const std::string& name) {
    if (name == "flow") return TrafficTensor::Flow;
    if (name == "occupancy") return TrafficTensor::Occupancy;
    if (name == "speed") return TrafficTensor::Speed;
    throw ConfigError("unknown signal: '" + name + "'");
}

RoadGraph build_graph(GraphKind kind, const Dataset& dataset, std::size_t train_timestamps,
                      const GraphParams& params) {
    switch (kind) {
        case GraphKind::Topo: return topo_graph(dataset.topology);
        case GraphKind::Geo: return geo_graph(dataset.topology);
        case GraphKind::HistPatt: {
            // DTW runs on min-max normalized signals; on raw flow the
            // attenuation rate of 0.1 would collapse every weight to 0.
            const auto [normalized, stats] = minmax_normalize(dataset.tensor, train_timestamps);
            const TrafficTensor train_span = normalized.slice_time(0, train_timestamps);
            return pattern_graph(train_span, signal_index(params.dtw_signal), params.alpha,
                                 params.dtw_window);
        }
        case GraphKind::Attr: {
            const TrafficTensor train_span = dataset.tensor.slice_time(0, train_timestamps);
            return attribute_graph(train_span, dataset.topology, params.beta);
        }
    }
    throw ConfigError("unknown graph kind");
}

ExperimentData prepare_experiment(const ExperimentConfig& config) {
    config.validate();
    ExperimentData data;
    data.dataset = load_dataset(config.signals_csv, config.topology_csv, config.lengths_csv);
    const std::size_t T = data.dataset.tensor.timestamps();
    data.train_timestamps = static_cast<std::size_t>(config.split.train * static_cast<double>(T));
    if (data.train_timestamps == 0) throw ConfigError("config: train split is empty");

    auto [normalized, stats] = minmax_normalize(data.dataset.tensor, data.train_timestamps);
    data.normalized = std::make_shared<TrafficTensor>(std::move(normalized));
    data.stats = stats;

    data.codebook = train_grade_codebook(data.dataset.tensor, config.som, config.classes,
                                         substream_seed(config.seed, "som"));
    data.grades = std::make_shared<GradeMatrix>(grade_dataset(data.dataset.tensor, data.codebook));

    for (const std::string& name : config.graphs) {
        data.graphs.emplace(name, build_graph(graph_kind_from_string(name), data.dataset,
                                              data.train_timestamps, config.graph_params));
    }
    return data;
}

ModelConfig make_model_config(const ExperimentConfig& config, ModelKind kind, std::size_t nodes) {
    ModelConfig mc;
    mc.kind = kind;
    mc.nodes = nodes;
    mc.input_dim = config.window * TrafficTensor::kSignals;
    mc.classes = static_cast<std::size_t>(config.classes);
    switch (kind) {
        case ModelKind::DiffPool:
            mc.layers = config.diffpool.layers;
            mc.node_embedding = config.diffpool.node_embedding;
            mc.hidden = config.diffpool.hidden;
            mc.mlp_hidden = config.diffpool.mlp_hidden;
            mc.blocks = config.diffpool.blocks;
            mc.pool_ratio = config.diffpool.pool_ratio;
            mc.head_hidden_layers = 2;
            break;
        case ModelKind::SagPool:
            mc.layers = config.sagpool.layers;
            mc.node_embedding = config.sagpool.hidden;
            mc.hidden = config.sagpool.hidden;
            mc.mlp_hidden = config.sagpool.mlp_hidden;
            mc.blocks = config.sagpool.blocks;
            mc.pool_ratio = config.sagpool.keep_ratio;
            mc.head_hidden_layers = 2;
            break;
        case ModelKind::GcnBaseline:
        case ModelKind::SageBaseline:
            mc.layers = config.baseline.layers;
            mc.node_embedding = config.baseline.hidden;
            mc.hidden = config.baseline.hidden;
            mc.mlp_hidden = config.baseline.head_hidden;
            mc.blocks = 1;
            mc.pool_ratio = 1.0;
            mc.head_hidden_layers = 1;
            break;
    }
    return mc;
}

std::vector<int> predict_grades(const PoolModel& model, const TrafficTensor& tensor, std::size_t t_end,
                                std::size_t window, const RoadGraph& graph) {
    const ad::Var probs = model_forward(model, tensor, t_end, window, graph);
    const Matrix& p = probs.value();
    std::vector<int> out(p.rows());
    for (std::size_t r = 0; r < p.rows(); ++r) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < p.cols(); ++c)
            if (p(r, c) > p(r, best)) best = c;
        out[r] = static_cast<int>(best) + 1;
    }
    return out;
}

EvalReport train_cell(const ExperimentConfig& config, const ExperimentData& data,
                      const std::string& model_name, const std::string& graph_name, int horizon,
                      std::unique_ptr<PoolModel>* trained) {
    const RoadGraph& graph = data.graphs.at(graph_name);
    const std::size_t nodes = data.dataset.tensor.roads();

    SampleSet samples = make_samples(data.normalized, data.grades, config.window, horizon, config.split);
    const std::vector<std::size_t> train_idx = samples.indices_of(Split::Train);
    const std::vector<std::size_t> val_idx = samples.indices_of(Split::Val);
    const std::vector<std::size_t> test_idx = samples.indices_of(Split::Test);
    if (train_idx.empty()) {
        throw InputError(cell_name(model_name, graph_name, horizon) + ": no training samples (T=" +
                         std::to_string(data.normalized->timestamps()) + ", window=" +
                         std::to_string(config.window) + ", horizon=" + std::to_string(horizon) + ")");
    }

    const std::uint64_t cell_seed =
        substream_seed(config.seed, "cell/" + cell_name(model_name, graph_name, horizon));
    auto model = std::make_unique<PoolModel>(
        make_model_config(config, model_kind_from_string(model_name), nodes), cell_seed);

    AdamConfig adam;
    adam.learning_rate = config.training.learning_rate;
    adam.weight_decay = config.training.weight_decay;
    adam.beta1 = config.training.beta1;
    adam.beta2 = config.training.beta2;
    adam.epsilon = config.training.epsilon;

    Rng shuffle_rng(cell_seed, "shuffle");
    std::vector<std::size_t> order = train_idx;

    const bool use_early_stop = config.training.early_stopping && !val_idx.empty();
    double best_val_acc = -1.0;
    std::size_t stale = 0;
    std::map<std::string, Matrix> best_params;

    for (std::size_t epoch = 0; epoch < config.training.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += config.training.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.training.batch_size);
            ad::Var batch_loss;
            for (std::size_t k = start; k < stop; ++k) {
                const std::size_t idx = order[k];
                const ad::Var probs =
                    model_forward(*model, *samples.tensor, samples.items[idx].t_end, samples.window, graph);
                std::vector<int> targets = samples.labels(idx);
                for (int& t : targets) t -= 1;  // 0-based classes for the loss
                const ad::Var loss = ad::cross_entropy(probs, targets);
                batch_loss = batch_loss.valid() ? ad::add(batch_loss, loss) : loss;
            }
            batch_loss = ad::scale(batch_loss, 1.0 / static_cast<double>(stop - start));
            try {
                ad::backward(batch_loss, model->params());
                adam_step(model->params(), adam);
            } catch (const NumericError& e) {
                throw NumericError(cell_name(model_name, graph_name, horizon) + ": epoch " +
                                   std::to_string(epoch) + ", batch at sample " + std::to_string(start) +
                                   ": " + e.what());
            }
        }
        if (use_early_stop) {
            const SplitEval val = evaluate_split(*model, samples, graph, val_idx);
            if (val.acc > best_val_acc) {
                best_val_acc = val.acc;
                stale = 0;
                best_params.clear();
                for (const auto& [name, p] : model->params()) best_params.emplace(name, p->value);
            } else if (++stale >= config.training.patience) {
                break;
            }
        }
    }
    if (use_early_stop && !best_params.empty()) {
        for (auto& [name, value] : best_params) model->params().get(name).value = value;
    }

    EvalReport report;
    report.model = model_name;
    report.graph = graph_name;
    report.horizon = horizon;
    report.seed = cell_seed;

    const SplitEval train_ev = evaluate_split(*model, samples, graph, train_idx);
    report.train_acc = train_ev.acc;
    const std::vector<std::size_t>& eval_idx = test_idx.empty() ? train_idx : test_idx;
    const SplitEval test_ev = evaluate_split(*model, samples, graph, eval_idx);
    report.acc = test_ev.acc;
    report.confusion = confusion(test_ev.truth, test_ev.predicted, config.classes);
    report.kappa = config.classes >= 2 ? qw_kappa(report.confusion) : 1.0;
    report.sample_count = test_ev.truth.size();

    if (trained != nullptr) *trained = std::move(model);
    return report;
}

std::vector<EvalReport> run_experiment(const ExperimentConfig& config,
                                       const std::filesystem::path* checkpoint_dir,
                                       const std::function<void(const std::string&)>& log) {
    const ExperimentData data = prepare_experiment(config);
    std::vector<EvalReport> reports;
    for (const std::string& model_name : config.models) {
        for (const std::string& graph_name : config.graphs) {
            for (int horizon : config.horizons) {
                if (log) log("training " + cell_name(model_name, graph_name, horizon));
                EvalReport report;
                try {
                    std::unique_ptr<PoolModel> model;
                    report = train_cell(config, data, model_name, graph_name, horizon, &model);
                    if (checkpoint_dir != nullptr) {
                        save_checkpoint(*model, graph_name, horizon,
                                        *checkpoint_dir / cell_name(model_name, graph_name, horizon));
                    }
                } catch (const Error& e) {
                    report = EvalReport{};
                    report.model = model_name;
                    report.graph = graph_name;
                    report.horizon = horizon;
                    report.seed = substream_seed(config.seed,
                                                 "cell/" + cell_name(model_name, graph_name, horizon));
                    report.error = e.what();
                    report.numeric_failure = dynamic_cast<const NumericError*>(&e) != nullptr;
                }
                reports.push_back(std::move(report));
            }
        }
    }
    return reports;
}

EvalReport evaluate_checkpoint(const ExperimentConfig& config, const ExperimentData& data,
                               const std::filesystem::path& checkpoint_dir) {
    Checkpoint meta;
    PoolModel model = load_checkpoint(checkpoint_dir, &meta);
    const auto graph_it = data.graphs.find(meta.graph);
    if (graph_it == data.graphs.end()) {
        throw ConfigError("checkpoint graph kind '" + meta.graph + "' is not built by this config");
    }
    SampleSet samples =
        make_samples(data.normalized, data.grades, config.window, meta.horizon, config.split);
    std::vector<std::size_t> test_idx = samples.indices_of(Split::Test);
    if (test_idx.empty()) test_idx = samples.indices_of(Split::Train);

    EvalReport report;
    report.model = to_string(meta.config.kind);
    report.graph = meta.graph;
    report.horizon = meta.horizon;
    report.seed = meta.seed;
    const SplitEval ev = evaluate_split(model, samples, graph_it->second, test_idx);
    report.acc = ev.acc;
    report.confusion = confusion(ev.truth, ev.predicted, config.classes);
    report.kappa = config.classes >= 2 ? qw_kappa(report.confusion) : 1.0;
    report.sample_count = ev.truth.size();
    const SplitEval train_ev = evaluate_split(model, samples, graph_it->second,
                                              samples.indices_of(Split::Train));
    report.train_acc = train_ev.acc;
    return report;
}

}  // namespace hgp
