// Command-line surface for the traffic-grade prediction pipeline.
// Exit codes: 0 success, 1 verification failure, 2 input/config error,
// 3 numerical failure.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hgp/config.hpp"
#include "hgp/dataset.hpp"
#include "hgp/errors.hpp"
#include "hgp/experiment.hpp"
#include "hgp/gradcheck_suite.hpp"
#include "hgp/graph.hpp"
#include "hgp/report.hpp"
#include "hgp/rng.hpp"
#include "hgp/serialize.hpp"
#include "hgp/som.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitVerification = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

fs::path default_out_dir() {
    if (const char* env = std::getenv("HGP_OUT_DIR"); env != nullptr && *env != '\0') return env;
    return ".";
}

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;
    fs::path out_dir = default_out_dir();
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required = true) {
    auto* c = cmd->add_option("-c,--config", opts.config_path, "experiment config JSON");
    if (config_required) c->required();
    cmd->add_option("-s,--set", opts.overrides, "dotted-key override, e.g. training.epochs=20");
    cmd->add_option("-o,--out", opts.out_dir, "output directory (default $HGP_OUT_DIR or .)");
}

hgp::ExperimentConfig load(const CommonOpts& opts) {
    return hgp::load_config(opts.config_path, opts.overrides);
}

void summarize_graph(const hgp::RoadGraph& graph) {
    const hgp::Matrix& w = graph.adjacency;
    double lo = 1.0, hi = 0.0, sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < w.rows(); ++i) {
        for (std::size_t j = 0; j < w.cols(); ++j) {
            if (i == j) continue;
            lo = std::min(lo, w(i, j));
            hi = std::max(hi, w(i, j));
            sum += w(i, j);
            ++count;
        }
    }
    std::printf("  %-8s off-diagonal min %.4f  max %.4f  mean %.4f\n", to_string(graph.kind).c_str(), lo,
                hi, count ? sum / static_cast<double>(count) : 0.0);
}

int cmd_build_graphs(const CommonOpts& opts) {
    const hgp::ExperimentConfig config = load(opts);
    const hgp::Dataset dataset =
        hgp::load_dataset(config.signals_csv, config.topology_csv, config.lengths_csv);
    const std::size_t train_timestamps = static_cast<std::size_t>(
        config.split.train * static_cast<double>(dataset.tensor.timestamps()));
    fs::create_directories(opts.out_dir);
    std::printf("building 4 graphs over %zu roads (%zu training hours)\n", dataset.tensor.roads(),
                train_timestamps);
    for (hgp::GraphKind kind : {hgp::GraphKind::Topo, hgp::GraphKind::Geo, hgp::GraphKind::HistPatt,
                                hgp::GraphKind::Attr}) {
        const hgp::RoadGraph graph =
            hgp::build_graph(kind, dataset, train_timestamps, config.graph_params);
        hgp::save_road_graph(graph, opts.out_dir / ("adjacency_" + to_string(kind) + ".csv"));
        summarize_graph(graph);
    }
    return kExitOk;
}

int cmd_grade(const CommonOpts& opts) {
    const hgp::ExperimentConfig config = load(opts);
    const hgp::Dataset dataset =
        hgp::load_dataset(config.signals_csv, config.topology_csv, config.lengths_csv);
    const hgp::GradeCodebook codebook = hgp::train_grade_codebook(
        dataset.tensor, config.som, config.classes, config.seed ^ hgp::Rng::fnv1a("som"));
    const hgp::GradeMatrix grades = hgp::grade_dataset(dataset.tensor, codebook);
    fs::create_directories(opts.out_dir);
    hgp::save_codebook(codebook, opts.out_dir / "codebook.json");
    hgp::write_grades_csv(grades, dataset.road_ids, dataset.start_hour, opts.out_dir / "grades.csv");

    std::vector<std::size_t> share(static_cast<std::size_t>(config.classes) + 1, 0);
    for (int g : grades.values) ++share[static_cast<std::size_t>(g)];
    std::printf("grade shares over %zu road-hours:\n", grades.values.size());
    for (int g = 1; g <= config.classes; ++g) {
        std::printf("  grade %d: %5.1f%%\n", g,
                    100.0 * static_cast<double>(share[static_cast<std::size_t>(g)]) /
                        static_cast<double>(grades.values.size()));
    }
    return kExitOk;
}

int report_outcome(const std::vector<hgp::EvalReport>& reports, const fs::path& out_dir) {
    hgp::emit_report(reports, out_dir);
    bool numeric_failure = false;
    for (const hgp::EvalReport& r : reports) {
        if (!r.error.empty()) {
            std::fprintf(stderr, "cell %s/%s/h%d failed: %s\n", r.model.c_str(), r.graph.c_str(),
                         r.horizon, r.error.c_str());
            if (r.numeric_failure) numeric_failure = true;
        } else {
            std::printf("%s %s h%-3d  acc %.4f  kappa %.4f  train_acc %.4f\n", r.model.c_str(),
                        r.graph.c_str(), r.horizon, r.acc, r.kappa, r.train_acc);
        }
    }
    if (numeric_failure) return kExitNumeric;
    for (const hgp::EvalReport& r : reports)
        if (!r.error.empty()) return kExitInput;
    return kExitOk;
}

int cmd_train(const CommonOpts& opts) {
    const hgp::ExperimentConfig config = load(opts);
    const fs::path checkpoints = opts.out_dir / "checkpoints";
    const auto reports = hgp::run_experiment(config, &checkpoints, [](const std::string& msg) {
        std::printf("%s\n", msg.c_str());
        std::fflush(stdout);
    });
    return report_outcome(reports, opts.out_dir);
}

int cmd_evaluate(const CommonOpts& opts, const std::string& checkpoints_arg) {
    const hgp::ExperimentConfig config = load(opts);
    const fs::path root = checkpoints_arg.empty() ? opts.out_dir / "checkpoints" : fs::path(checkpoints_arg);
    if (!fs::is_directory(root)) {
        throw hgp::InputError("no checkpoint directory at " + root.string());
    }
    const hgp::ExperimentData data = hgp::prepare_experiment(config);
    std::vector<hgp::EvalReport> reports;
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty()) throw hgp::InputError("no checkpoints under " + root.string());
    for (const fs::path& dir : dirs) reports.push_back(hgp::evaluate_checkpoint(config, data, dir));
    return report_outcome(reports, opts.out_dir);
}

int cmd_report(const fs::path& out_dir, const std::vector<std::string>& inputs) {
    std::vector<hgp::EvalReport> merged;
    for (const std::string& input : inputs) {
        fs::path path(input);
        if (fs::is_directory(path)) path /= "metrics.json";
        const auto reports = hgp::load_metrics_json(path);
        merged.insert(merged.end(), reports.begin(), reports.end());
    }
    fs::create_directories(out_dir);
    hgp::emit_heatmap(merged, out_dir / "heatmap.csv");
    std::printf("heatmap.csv written from %zu cells\n", merged.size());
    return kExitOk;
}

int cmd_gradcheck(double tolerance, bool sabotage) {
    const auto entries = hgp::gradcheck_suite(tolerance, sabotage);
    bool all_pass = true;
    std::printf("%-18s %-14s %s\n", "component", "max rel error", "status");
    for (const auto& e : entries) {
        std::printf("%-18s %-14.3e %s\n", e.component.c_str(), e.max_rel_error, e.pass ? "ok" : "FAIL");
        all_pass = all_pass && e.pass;
    }
    return all_pass ? kExitOk : kExitVerification;
}

int cmd_synth(const fs::path& out_dir, std::size_t roads, std::size_t days, std::uint64_t seed) {
    const hgp::Dataset dataset = hgp::synth_dataset(roads, days, seed);
    fs::create_directories(out_dir);
    hgp::write_dataset_csv(dataset, out_dir / "signals.csv", out_dir / "topology.csv",
                           out_dir / "lengths.csv");
    std::printf("synthetic dataset: %zu roads, %zu hours -> %s\n", roads, dataset.tensor.timestamps(),
                out_dir.string().c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"citywide traffic-condition-grade prediction with hierarchical graph pooling"};
    app.require_subcommand(1);

    CommonOpts build_opts, grade_opts, train_opts, eval_opts;
    auto* build_cmd = app.add_subcommand("build-graphs", "construct the four road-graph adjacencies");
    add_common(build_cmd, build_opts);
    auto* grade_cmd = app.add_subcommand("grade", "train the SOM labeler and grade the dataset");
    add_common(grade_cmd, grade_opts);
    auto* train_cmd = app.add_subcommand("train", "train and evaluate the model x graph x horizon grid");
    add_common(train_cmd, train_opts);
    auto* eval_cmd = app.add_subcommand("evaluate", "re-evaluate stored checkpoints");
    add_common(eval_cmd, eval_opts);
    std::string checkpoints_arg;
    eval_cmd->add_option("--checkpoints", checkpoints_arg, "checkpoint directory (default <out>/checkpoints)");

    fs::path report_out = default_out_dir();
    std::vector<std::string> report_inputs;
    auto* report_cmd = app.add_subcommand("report", "merge metrics.json files into one heatmap.csv");
    report_cmd->add_option("inputs", report_inputs, "metrics.json files or run directories")->required();
    report_cmd->add_option("-o,--out", report_out, "output directory");

    double tolerance = 1e-5;
    bool sabotage = false;
    auto* gradcheck_cmd = app.add_subcommand("gradcheck", "finite-difference check of every layer and model");
    gradcheck_cmd->add_option("--tolerance", tolerance, "max relative error allowed");
    gradcheck_cmd->add_flag("--sabotage", sabotage, "corrupt one gradient (harness self-test)");

    fs::path synth_out = default_out_dir();
    std::size_t synth_roads = 30, synth_days = 14;
    std::uint64_t synth_seed = 7;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset in the CSV schema");
    synth_cmd->add_option("-n,--roads", synth_roads, "number of roads (>= 2)");
    synth_cmd->add_option("-d,--days", synth_days, "number of days (>= 2)");
    synth_cmd->add_option("--seed", synth_seed, "generator seed");
    synth_cmd->add_option("-o,--out", synth_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (build_cmd->parsed()) return cmd_build_graphs(build_opts);
        if (grade_cmd->parsed()) return cmd_grade(grade_opts);
        if (train_cmd->parsed()) return cmd_train(train_opts);
        if (eval_cmd->parsed()) return cmd_evaluate(eval_opts, checkpoints_arg);
        if (report_cmd->parsed()) return cmd_report(report_out, report_inputs);
        if (gradcheck_cmd->parsed()) return cmd_gradcheck(tolerance, sabotage);
        if (synth_cmd->parsed()) return cmd_synth(synth_out, synth_roads, synth_days, synth_seed);
    } catch (const hgp::NumericError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumeric;
    } catch (const hgp::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return kExitVerification;
    }
    return kExitOk;
}
