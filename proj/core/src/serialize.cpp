#include "hgp/serialize.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "hgp/dataset.hpp"
#include "hgp/errors.hpp"

namespace hgp {

namespace {

using nlohmann::json;

void put_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

void put_f64(std::ofstream& out, double d) {
    const auto bits = std::bit_cast<std::uint64_t>(d);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::ifstream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

}  // namespace

void save_params(const ParamStore& store, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    for (const auto& [name, p] : store) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u32(out, static_cast<std::uint32_t>(p->value.rows()));
        put_u32(out, static_cast<std::uint32_t>(p->value.cols()));
        for (double v : p->value.data()) put_f64(out, v);
    }
}

void load_params(ParamStore& store, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::size_t loaded = 0;
    while (true) {
        const std::uint32_t name_len = get_u32(in);
        if (in.eof()) break;
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        const std::uint32_t rows = get_u32(in);
        const std::uint32_t cols = get_u32(in);
        if (!in) throw InputError(path.string() + ": truncated parameter record");
        if (!store.has(name)) throw InputError(path.string() + ": unexpected parameter '" + name + "'");
        Param& p = store.get(name);
        if (p.value.rows() != rows || p.value.cols() != cols) {
            throw InputError(path.string() + ": parameter '" + name + "' is " + std::to_string(rows) + "x" +
                             std::to_string(cols) + ", expected " + p.value.shape_str());
        }
        for (double& v : p.value.data()) v = get_f64(in);
        if (!in) throw InputError(path.string() + ": truncated data for '" + name + "'");
        p.value.check_finite(name.c_str());
        ++loaded;
    }
    if (loaded != store.size()) {
        throw InputError(path.string() + ": has " + std::to_string(loaded) + " parameters, model expects " +
                         std::to_string(store.size()));
    }
}

void save_codebook(const GradeCodebook& cb, const std::filesystem::path& path) {
    json root;
    root["grid_rows"] = cb.grid_rows;
    root["grid_cols"] = cb.grid_cols;
    root["prototypes"] = json::array();
    for (const auto& p : cb.prototypes) root["prototypes"].push_back({p[0], p[1], p[2]});
    root["feature_min"] = {cb.feat_min[0], cb.feat_min[1], cb.feat_min[2]};
    root["feature_max"] = {cb.feat_max[0], cb.feat_max[1], cb.feat_max[2]};
    root["grade_map"] = cb.grade_map;
    root["classes"] = cb.classes;
    root["seed"] = cb.seed;
    root["epochs"] = cb.epochs;
    root["final_learning_rate"] = cb.final_learning_rate;
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out << root.dump(2) << "\n";
}

GradeCodebook load_codebook(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    json root;
    try {
        in >> root;
    } catch (const json::exception& e) {
        throw InputError(path.string() + ": invalid JSON: " + e.what());
    }
    GradeCodebook cb;
    try {
        cb.grid_rows = root.at("grid_rows").get<std::size_t>();
        cb.grid_cols = root.at("grid_cols").get<std::size_t>();
        for (const auto& p : root.at("prototypes")) {
            cb.prototypes.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
        }
        for (std::size_t d = 0; d < 3; ++d) {
            cb.feat_min[d] = root.at("feature_min").at(d).get<double>();
            cb.feat_max[d] = root.at("feature_max").at(d).get<double>();
        }
        cb.grade_map = root.at("grade_map").get<std::vector<int>>();
        cb.classes = root.at("classes").get<int>();
        cb.seed = root.at("seed").get<std::uint64_t>();
        cb.epochs = root.at("epochs").get<std::size_t>();
        cb.final_learning_rate = root.at("final_learning_rate").get<double>();
    } catch (const json::exception& e) {
        throw InputError(path.string() + ": bad codebook: " + e.what());
    }
    if (cb.prototypes.size() != cb.cells()) throw InputError(path.string() + ": prototype count mismatch");
    return cb;
}

void save_road_graph(const RoadGraph& graph, const std::filesystem::path& csv_path) {
    {
        std::ofstream out(csv_path);
        if (!out) throw InputError("cannot write " + csv_path.string());
        char buf[64];
        for (std::size_t i = 0; i < graph.adjacency.rows(); ++i) {
            for (std::size_t j = 0; j < graph.adjacency.cols(); ++j) {
                std::snprintf(buf, sizeof(buf), "%.17g", graph.adjacency(i, j));
                out << (j ? "," : "") << buf;
            }
            out << '\n';
        }
    }
    json side;
    side["kind"] = to_string(graph.kind);
    if (graph.kind == GraphKind::HistPatt) {
        side["alpha"] = graph.alpha;
        side["window"] = graph.window_hours;
    }
    if (graph.kind == GraphKind::Attr) side["beta"] = graph.beta;
    std::ofstream out(csv_path.string() + ".json");
    if (!out) throw InputError("cannot write " + csv_path.string() + ".json");
    out << side.dump(2) << "\n";
}

RoadGraph load_road_graph(const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw InputError("cannot open " + csv_path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) row.push_back(std::stod(field));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InputError(csv_path.string() + ": empty adjacency");
    Matrix adj(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != adj.cols()) throw InputError(csv_path.string() + ": ragged adjacency");
        for (std::size_t j = 0; j < adj.cols(); ++j) adj(i, j) = rows[i][j];
    }
    adj.check_finite("adjacency");

    RoadGraph g;
    g.adjacency = std::move(adj);
    std::ifstream side(csv_path.string() + ".json");
    if (side) {
        json meta;
        try {
            side >> meta;
            g.kind = graph_kind_from_string(meta.at("kind").get<std::string>());
            if (meta.contains("alpha")) g.alpha = meta.at("alpha").get<double>();
            if (meta.contains("beta")) g.beta = meta.at("beta").get<double>();
            if (meta.contains("window")) g.window_hours = meta.at("window").get<int>();
        } catch (const json::exception& e) {
            throw InputError(csv_path.string() + ".json: bad sidecar: " + e.what());
        }
    }
    return g;
}

void write_grades_csv(const GradeMatrix& grades, const std::vector<std::string>& road_ids,
                      std::int64_t start_hour, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out << "road_id,timestamp,grade\n";
    for (std::size_t r = 0; r < grades.roads; ++r) {
        for (std::size_t t = 0; t < grades.timestamps; ++t) {
            out << road_ids[r] << ',' << format_hour_timestamp(start_hour + static_cast<std::int64_t>(t))
                << ',' << grades.at(r, t) << '\n';
        }
    }
}

void save_checkpoint(const PoolModel& model, const std::string& graph, int horizon,
                     const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const ModelConfig& c = model.config();
    json manifest;
    manifest["kind"] = to_string(c.kind);
    manifest["nodes"] = c.nodes;
    manifest["input_dim"] = c.input_dim;
    manifest["classes"] = c.classes;
    manifest["layers"] = c.layers;
    manifest["node_embedding"] = c.node_embedding;
    manifest["hidden"] = c.hidden;
    manifest["mlp_hidden"] = c.mlp_hidden;
    manifest["blocks"] = c.blocks;
    manifest["pool_ratio"] = c.pool_ratio;
    manifest["head_hidden_layers"] = c.head_hidden_layers;
    manifest["seed"] = model.seed();
    manifest["graph"] = graph;
    manifest["horizon"] = horizon;
    std::ofstream out(dir / "manifest.json");
    if (!out) throw InputError("cannot write " + (dir / "manifest.json").string());
    out << manifest.dump(2) << "\n";
    save_params(model.params(), dir / "params.bin");
}

Checkpoint read_manifest(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw InputError("cannot open " + (dir / "manifest.json").string());
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw InputError((dir / "manifest.json").string() + ": invalid JSON: " + e.what());
    }
    Checkpoint cp;
    try {
        cp.config.kind = model_kind_from_string(manifest.at("kind").get<std::string>());
        cp.config.nodes = manifest.at("nodes").get<std::size_t>();
        cp.config.input_dim = manifest.at("input_dim").get<std::size_t>();
        cp.config.classes = manifest.at("classes").get<std::size_t>();
        cp.config.layers = manifest.at("layers").get<std::size_t>();
        cp.config.node_embedding = manifest.at("node_embedding").get<std::size_t>();
        cp.config.hidden = manifest.at("hidden").get<std::size_t>();
        cp.config.mlp_hidden = manifest.at("mlp_hidden").get<std::size_t>();
        cp.config.blocks = manifest.at("blocks").get<std::size_t>();
        cp.config.pool_ratio = manifest.at("pool_ratio").get<double>();
        cp.config.head_hidden_layers = manifest.at("head_hidden_layers").get<std::size_t>();
        cp.seed = manifest.at("seed").get<std::uint64_t>();
        cp.graph = manifest.at("graph").get<std::string>();
        cp.horizon = manifest.at("horizon").get<int>();
    } catch (const json::exception& e) {
        throw InputError((dir / "manifest.json").string() + ": bad manifest: " + e.what());
    }
    return cp;
}

PoolModel load_checkpoint(const std::filesystem::path& dir, Checkpoint* meta) {
    Checkpoint cp = read_manifest(dir);
    PoolModel model(cp.config, cp.seed);
    load_params(model.params(), dir / "params.bin");
    if (meta != nullptr) *meta = cp;
    return model;
}

}  // namespace hgp
