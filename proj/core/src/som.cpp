#include "hgp/som.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hgp/errors.hpp"
#include "hgp/rng.hpp"

namespace hgp {

namespace {

double dist_sq(const Sample3& a, const Sample3& b) {
    double s = 0.0;
    for (std::size_t d = 0; d < 3; ++d) {
        const double diff = a[d] - b[d];
        s += diff * diff;
    }
    return s;
}

}  // namespace

Sample3 GradeCodebook::normalize(const Sample3& raw) const {
    Sample3 out;
    for (std::size_t d = 0; d < 3; ++d) {
        const double span = feat_max[d] - feat_min[d];
        out[d] = span > 0.0 ? (raw[d] - feat_min[d]) / span : 0.0;
    }
    return out;
}

GradeCodebook som_train(const std::vector<Sample3>& samples, const SomConfig& cfg, std::uint64_t seed) {
    if (samples.empty()) throw GradingError("som_train: empty sample set");
    if (cfg.grid_rows == 0 || cfg.grid_cols == 0) throw ConfigError("som_train: empty grid");

    GradeCodebook cb;
    cb.grid_rows = cfg.grid_rows;
    cb.grid_cols = cfg.grid_cols;
    cb.seed = seed;
    cb.epochs = cfg.epochs;
    cb.feat_min = {0, 0, 0};
    cb.feat_max = {1, 1, 1};

    Rng rng(seed, "som");
    cb.prototypes.resize(cb.cells());
    for (auto& p : cb.prototypes)
        for (double& v : p) v = rng.uniform();

    const std::size_t total_updates = cfg.epochs * samples.size();
    const double radius0 = static_cast<double>(std::max(cfg.grid_rows, cfg.grid_cols)) / 2.0;
    const double radius1 = 0.5;
    const double lr0 = 0.5, lr1 = 0.01;
    cb.final_learning_rate = total_updates > 0 ? lr1 : lr0;

    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);

    std::size_t update = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t idx : order) {
            const Sample3& x = samples[idx];
            const double progress =
                total_updates > 1 ? static_cast<double>(update) / static_cast<double>(total_updates - 1) : 0.0;
            const double radius = radius0 + (radius1 - radius0) * progress;
            const double lr = lr0 + (lr1 - lr0) * progress;

            std::size_t bmu = 0;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < cb.cells(); ++c) {
                const double d = dist_sq(x, cb.prototypes[c]);
                if (d < best) {
                    best = d;
                    bmu = c;
                }
            }
            const double br = static_cast<double>(bmu / cfg.grid_cols);
            const double bc = static_cast<double>(bmu % cfg.grid_cols);
            const double two_sigma_sq = 2.0 * radius * radius;
            for (std::size_t c = 0; c < cb.cells(); ++c) {
                const double dr = static_cast<double>(c / cfg.grid_cols) - br;
                const double dc = static_cast<double>(c % cfg.grid_cols) - bc;
                const double h = std::exp(-(dr * dr + dc * dc) / two_sigma_sq);
                for (std::size_t d = 0; d < 3; ++d) {
                    cb.prototypes[c][d] += lr * h * (x[d] - cb.prototypes[c][d]);
                }
            }
            ++update;
        }
    }
    return cb;
}

std::size_t som_assign(const GradeCodebook& codebook, const Sample3& sample) {
    std::size_t best_idx = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < codebook.cells(); ++c) {
        const double d = dist_sq(sample, codebook.prototypes[c]);
        if (d < best) {  // strict: ties keep the lowest index
            best = d;
            best_idx = c;
        }
    }
    return best_idx;
}

void order_grades(GradeCodebook& codebook, const std::vector<Sample3>& samples, int classes) {
    if (classes < 1) throw ConfigError("order_grades: classes must be >= 1");
    if (codebook.cells() < static_cast<std::size_t>(classes)) {
        throw GradingError("order_grades: grid of " + std::to_string(codebook.cells()) +
                           " cells is smaller than " + std::to_string(classes) + " grades");
    }

    std::vector<std::size_t> count(codebook.cells(), 0);
    std::vector<double> speed_sum(codebook.cells(), 0.0);
    for (const Sample3& s : samples) {
        const std::size_t c = som_assign(codebook, s);
        ++count[c];
        speed_sum[c] += s[2];
    }

    std::vector<std::size_t> occupied;
    for (std::size_t c = 0; c < codebook.cells(); ++c)
        if (count[c] > 0) occupied.push_back(c);
    if (occupied.size() < static_cast<std::size_t>(classes)) {
        throw GradingError("order_grades: only " + std::to_string(occupied.size()) +
                           " non-empty clusters for " + std::to_string(classes) + " grades");
    }

    // Rank by mean speed, fastest first => grade 1 is freest flow.
    std::sort(occupied.begin(), occupied.end(), [&](std::size_t a, std::size_t b) {
        const double ma = speed_sum[a] / static_cast<double>(count[a]);
        const double mb = speed_sum[b] / static_cast<double>(count[b]);
        if (ma != mb) return ma > mb;
        return a < b;
    });

    // Contiguous rank groups of near-equal sample mass, each non-empty.
    const std::size_t total = samples.size();
    codebook.grade_map.assign(codebook.cells(), 0);
    std::size_t pos = 0;
    std::size_t cumulative = 0;
    for (int g = 1; g <= classes; ++g) {
        const std::size_t groups_left = static_cast<std::size_t>(classes - g);
        const std::size_t target = total * static_cast<std::size_t>(g) / static_cast<std::size_t>(classes);
        while (pos < occupied.size()) {
            codebook.grade_map[occupied[pos]] = g;
            cumulative += count[occupied[pos]];
            ++pos;
            const std::size_t remaining = occupied.size() - pos;
            if (remaining <= groups_left) break;  // later groups need one cluster each
            if (cumulative >= target) break;      // mass quota reached
        }
    }

    // Empty clusters inherit from the nearest non-empty prototype.
    for (std::size_t c = 0; c < codebook.cells(); ++c) {
        if (codebook.grade_map[c] != 0) continue;
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_idx = occupied.front();
        for (std::size_t o : occupied) {
            const double d = dist_sq(codebook.prototypes[c], codebook.prototypes[o]);
            if (d < best) {
                best = d;
                best_idx = o;
            }
        }
        codebook.grade_map[c] = codebook.grade_map[best_idx];
    }
    codebook.classes = classes;
}

GradeCodebook train_grade_codebook(const TrafficTensor& raw, const SomConfig& cfg, int classes,
                                   std::uint64_t seed) {
    if (cfg.grid_rows * cfg.grid_cols < static_cast<std::size_t>(classes)) {
        throw GradingError("grade codebook: grid of " + std::to_string(cfg.grid_rows * cfg.grid_cols) +
                           " cells is smaller than " + std::to_string(classes) + " grades");
    }
    Sample3 lo{0, 0, 0}, hi{0, 0, 0};
    bool first = true;
    std::vector<Sample3> samples;
    samples.reserve(raw.timestamps() * raw.roads());
    for (std::size_t t = 0; t < raw.timestamps(); ++t) {
        for (std::size_t r = 0; r < raw.roads(); ++r) {
            Sample3 s{raw.at(t, r, 0), raw.at(t, r, 1), raw.at(t, r, 2)};
            for (std::size_t d = 0; d < 3; ++d) {
                lo[d] = first ? s[d] : std::min(lo[d], s[d]);
                hi[d] = first ? s[d] : std::max(hi[d], s[d]);
            }
            first = false;
            samples.push_back(s);
        }
    }
    GradeCodebook scratch;
    scratch.feat_min = lo;
    scratch.feat_max = hi;
    for (Sample3& s : samples) s = scratch.normalize(s);

    GradeCodebook cb = som_train(samples, cfg, seed);
    cb.feat_min = lo;
    cb.feat_max = hi;
    order_grades(cb, samples, classes);
    return cb;
}

GradeMatrix grade_dataset(const TrafficTensor& raw, const GradeCodebook& codebook) {
    if (codebook.grade_map.empty()) throw GradingError("grade_dataset: codebook has no grade map");
    GradeMatrix grades;
    grades.roads = raw.roads();
    grades.timestamps = raw.timestamps();
    grades.values.resize(raw.roads() * raw.timestamps());
    for (std::size_t t = 0; t < raw.timestamps(); ++t) {
        for (std::size_t r = 0; r < raw.roads(); ++r) {
            const Sample3 s = codebook.normalize({raw.at(t, r, 0), raw.at(t, r, 1), raw.at(t, r, 2)});
            grades.at(r, t) = codebook.grade_map[som_assign(codebook, s)];
        }
    }
    return grades;
}

}  // namespace hgp
