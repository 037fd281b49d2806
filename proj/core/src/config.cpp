#include "hgp/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hgp/errors.hpp"
#include "hgp/graph.hpp"
#include "hgp/pooling.hpp"

namespace hgp {

namespace {

using nlohmann::json;

class StrictReader {
  public:
    StrictReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj.is_object()) throw ConfigError("config: " + path_ + " must be an object");
    }

    ~StrictReader() = default;

    template <typename T>
    void get(const char* key, T& out) {
        if (auto it = obj_.find(key); it != obj_.end()) {
            seen_.insert(key);
            try {
                out = it->get<T>();
            } catch (const json::exception&) {
                throw ConfigError("config: bad value for " + join(key));
            }
        }
    }

    bool has_object(const char* key) {
        auto it = obj_.find(key);
        if (it == obj_.end()) return false;
        seen_.insert(key);
        return true;
    }

    const json& object(const char* key) { return obj_.at(key); }

    void finish() const {
        for (const auto& [key, value] : obj_.items()) {
            if (!seen_.count(key)) throw ConfigError("config: unknown key " + join(key));
        }
    }

  private:
    std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

void parse_dataset(const json& obj, ExperimentConfig& cfg) {
    StrictReader r(obj, "dataset");
    r.get("signals", cfg.signals_csv);
    r.get("topology", cfg.topology_csv);
    r.get("lengths", cfg.lengths_csv);
    r.finish();
}

void parse_split(const json& obj, SplitFractions& split) {
    StrictReader r(obj, "split");
    r.get("train", split.train);
    r.get("val", split.val);
    r.get("test", split.test);
    r.finish();
}

void parse_graph_params(const json& obj, GraphParams& gp) {
    StrictReader r(obj, "graph_params");
    r.get("alpha", gp.alpha);
    r.get("beta", gp.beta);
    r.get("dtw_signal", gp.dtw_signal);
    r.get("dtw_window", gp.dtw_window);
    r.finish();
}

void parse_som(const json& obj, SomConfig& som) {
    StrictReader r(obj, "som");
    r.get("grid_rows", som.grid_rows);
    r.get("grid_cols", som.grid_cols);
    r.get("epochs", som.epochs);
    r.finish();
}

void parse_training(const json& obj, TrainingSettings& tr) {
    StrictReader r(obj, "training");
    r.get("learning_rate", tr.learning_rate);
    r.get("weight_decay", tr.weight_decay);
    r.get("beta1", tr.beta1);
    r.get("beta2", tr.beta2);
    r.get("epsilon", tr.epsilon);
    r.get("batch_size", tr.batch_size);
    r.get("epochs", tr.epochs);
    r.get("early_stopping", tr.early_stopping);
    r.get("patience", tr.patience);
    r.finish();
}

void parse_diffpool(const json& obj, DiffPoolSettings& dp) {
    StrictReader r(obj, "diffpool");
    r.get("layers", dp.layers);
    r.get("node_embedding", dp.node_embedding);
    r.get("hidden", dp.hidden);
    r.get("mlp_hidden", dp.mlp_hidden);
    r.get("blocks", dp.blocks);
    r.get("pool_ratio", dp.pool_ratio);
    r.finish();
}

void parse_sagpool(const json& obj, SagPoolSettings& sp) {
    StrictReader r(obj, "sagpool");
    r.get("layers", sp.layers);
    r.get("hidden", sp.hidden);
    r.get("mlp_hidden", sp.mlp_hidden);
    r.get("blocks", sp.blocks);
    r.get("keep_ratio", sp.keep_ratio);
    r.finish();
}

void parse_baseline(const json& obj, BaselineSettings& bl) {
    StrictReader r(obj, "baseline");
    r.get("layers", bl.layers);
    r.get("hidden", bl.hidden);
    r.get("head_hidden", bl.head_hidden);
    r.finish();
}

}  // namespace

void ExperimentConfig::validate() const {
    for (const std::string& g : graphs) graph_kind_from_string(g);
    for (const std::string& m : models) model_kind_from_string(m);
    if (horizons.empty()) throw ConfigError("config: horizons must be non-empty");
    for (int h : horizons)
        if (h < 1) throw ConfigError("config: horizons must be >= 1");
    if (window < 1) throw ConfigError("config: window must be >= 1");
    if (classes < 1) throw ConfigError("config: classes must be >= 1");
    const double s = split.train + split.val + split.test;
    if (std::abs(s - 1.0) > 1e-9) throw ConfigError("config: split fractions must sum to 1");
    if (graph_params.alpha < 0 || graph_params.beta < 0) {
        throw ConfigError("config: alpha and beta must be >= 0");
    }
    if (graph_params.dtw_signal != "flow" && graph_params.dtw_signal != "occupancy" &&
        graph_params.dtw_signal != "speed") {
        throw ConfigError("config: dtw_signal must be flow|occupancy|speed");
    }
    if (training.batch_size < 1) throw ConfigError("config: batch_size must be >= 1");
}

ExperimentConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    StrictReader r(root, "");
    if (r.has_object("dataset")) parse_dataset(r.object("dataset"), cfg);
    r.get("seed", cfg.seed);
    r.get("classes", cfg.classes);
    r.get("window", cfg.window);
    r.get("horizons", cfg.horizons);
    r.get("graphs", cfg.graphs);
    r.get("models", cfg.models);
    if (r.has_object("split")) parse_split(r.object("split"), cfg.split);
    if (r.has_object("graph_params")) parse_graph_params(r.object("graph_params"), cfg.graph_params);
    if (r.has_object("som")) parse_som(r.object("som"), cfg.som);
    if (r.has_object("training")) parse_training(r.object("training"), cfg.training);
    if (r.has_object("diffpool")) parse_diffpool(r.object("diffpool"), cfg.diffpool);
    if (r.has_object("sagpool")) parse_sagpool(r.object("sagpool"), cfg.sagpool);
    if (r.has_object("baseline")) parse_baseline(r.object("baseline"), cfg.baseline);
    r.finish();
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    json root;
    try {
        root = json::parse(buf.str());
    } catch (const json::exception& e) {
        throw ConfigError("config " + path.string() + ": invalid JSON: " + e.what());
    }
    for (const std::string& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("override '" + ov + "' is not of the form dotted.key=value");
        }
        const std::string key = ov.substr(0, eq);
        const std::string value = ov.substr(eq + 1);
        json parsed;
        try {
            parsed = json::parse(value);
        } catch (const json::exception&) {
            parsed = value;  // plain string
        }
        json* cursor = &root;
        std::size_t start = 0;
        while (true) {
            const std::size_t dot = key.find('.', start);
            const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
            if (part.empty()) throw ConfigError("override '" + ov + "' has an empty key segment");
            if (dot == std::string::npos) {
                (*cursor)[part] = parsed;
                break;
            }
            cursor = &(*cursor)[part];
            start = dot + 1;
        }
    }
    return parse_config(root.dump());
}

std::string config_to_json(const ExperimentConfig& c) {
    json root;
    root["dataset"] = {{"signals", c.signals_csv}, {"topology", c.topology_csv}, {"lengths", c.lengths_csv}};
    root["seed"] = c.seed;
    root["classes"] = c.classes;
    root["window"] = c.window;
    root["horizons"] = c.horizons;
    root["graphs"] = c.graphs;
    root["models"] = c.models;
    root["split"] = {{"train", c.split.train}, {"val", c.split.val}, {"test", c.split.test}};
    root["graph_params"] = {{"alpha", c.graph_params.alpha},
                            {"beta", c.graph_params.beta},
                            {"dtw_signal", c.graph_params.dtw_signal},
                            {"dtw_window", c.graph_params.dtw_window}};
    root["som"] = {{"grid_rows", c.som.grid_rows}, {"grid_cols", c.som.grid_cols}, {"epochs", c.som.epochs}};
    root["training"] = {{"learning_rate", c.training.learning_rate},
                        {"weight_decay", c.training.weight_decay},
                        {"beta1", c.training.beta1},
                        {"beta2", c.training.beta2},
                        {"epsilon", c.training.epsilon},
                        {"batch_size", c.training.batch_size},
                        {"epochs", c.training.epochs},
                        {"early_stopping", c.training.early_stopping},
                        {"patience", c.training.patience}};
    root["diffpool"] = {{"layers", c.diffpool.layers},     {"node_embedding", c.diffpool.node_embedding},
                        {"hidden", c.diffpool.hidden},     {"mlp_hidden", c.diffpool.mlp_hidden},
                        {"blocks", c.diffpool.blocks},     {"pool_ratio", c.diffpool.pool_ratio}};
    root["sagpool"] = {{"layers", c.sagpool.layers},
                       {"hidden", c.sagpool.hidden},
                       {"mlp_hidden", c.sagpool.mlp_hidden},
                       {"blocks", c.sagpool.blocks},
                       {"keep_ratio", c.sagpool.keep_ratio}};
    root["baseline"] = {{"layers", c.baseline.layers},
                        {"hidden", c.baseline.hidden},
                        {"head_hidden", c.baseline.head_hidden}};
    return root.dump(2) + "\n";
}

}  // namespace hgp
