#include "hgp/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hgp/errors.hpp"

namespace hgp {

namespace {

using nlohmann::json;

std::string cell_tag(const EvalReport& r) {
    return r.model + "_" + r.graph + "_h" + std::to_string(r.horizon);
}

std::string format_metric(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

void emit_report(const std::vector<EvalReport>& reports, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    json root = json::object();
    for (const EvalReport& r : reports) {
        json cell;
        if (r.error.empty()) {
            cell = {{"acc", r.acc},
                    {"kappa", r.kappa},
                    {"train_acc", r.train_acc},
                    {"samples", r.sample_count},
                    {"seed", r.seed}};
        } else {
            cell = {{"error", r.error}, {"seed", r.seed}};
        }
        root[r.model][r.graph][std::to_string(r.horizon)] = cell;
    }
    {
        std::ofstream out(out_dir / "metrics.json");
        if (!out) throw InputError("cannot write " + (out_dir / "metrics.json").string());
        out << root.dump(2) << "\n";
    }

    for (const EvalReport& r : reports) {
        if (!r.error.empty()) continue;
        const auto path = out_dir / ("confusion_" + cell_tag(r) + ".csv");
        std::ofstream out(path);
        if (!out) throw InputError("cannot write " + path.string());
        out << "true";
        for (std::size_t j = 1; j <= r.confusion.classes; ++j) out << ',' << j;
        out << '\n';
        for (std::size_t i = 1; i <= r.confusion.classes; ++i) {
            out << i;
            for (std::size_t j = 1; j <= r.confusion.classes; ++j) out << ',' << r.confusion.at(i, j);
            out << '\n';
        }
    }

    emit_heatmap(reports, out_dir / "heatmap.csv");
}

void emit_heatmap(const std::vector<EvalReport>& reports, const std::filesystem::path& csv_path) {
    std::set<int> horizons;
    for (const EvalReport& r : reports) horizons.insert(r.horizon);
    // Row order: first appearance of each (model, graph) pair.
    std::vector<std::pair<std::string, std::string>> rows;
    std::map<std::pair<std::string, std::string>, std::map<int, const EvalReport*>> cells;
    for (const EvalReport& r : reports) {
        const auto key = std::make_pair(r.model, r.graph);
        if (!cells.count(key)) rows.push_back(key);
        cells[key][r.horizon] = &r;
    }
    std::ofstream out(csv_path);
    if (!out) throw InputError("cannot write " + csv_path.string());
    out << "model,graph";
    for (int h : horizons) out << ",h" << h;
    out << '\n';
    for (const auto& key : rows) {
        out << key.first << ',' << key.second;
        for (int h : horizons) {
            out << ',';
            const auto& row_cells = cells[key];
            if (auto it = row_cells.find(h); it != row_cells.end() && it->second->error.empty()) {
                out << format_metric(it->second->acc) << '|' << format_metric(it->second->kappa);
            }
        }
        out << '\n';
    }
}

std::vector<EvalReport> load_metrics_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    json root;
    try {
        in >> root;
    } catch (const json::exception& e) {
        throw InputError(path.string() + ": invalid JSON: " + e.what());
    }
    std::vector<EvalReport> reports;
    for (const auto& [model, graphs] : root.items()) {
        for (const auto& [graph, horizons] : graphs.items()) {
            for (const auto& [horizon, cell] : horizons.items()) {
                EvalReport r;
                r.model = model;
                r.graph = graph;
                r.horizon = std::stoi(horizon);
                if (cell.contains("error")) {
                    r.error = cell.at("error").get<std::string>();
                } else {
                    r.acc = cell.at("acc").get<double>();
                    r.kappa = cell.at("kappa").get<double>();
                    if (cell.contains("train_acc")) r.train_acc = cell.at("train_acc").get<double>();
                    if (cell.contains("samples")) r.sample_count = cell.at("samples").get<std::size_t>();
                }
                if (cell.contains("seed")) r.seed = cell.at("seed").get<std::uint64_t>();
                reports.push_back(std::move(r));
            }
        }
    }
    return reports;
}

}  // namespace hgp
