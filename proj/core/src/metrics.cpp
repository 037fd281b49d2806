#include "hgp/metrics.hpp"

#include <numeric>
#include <string>

#include "hgp/errors.hpp"

namespace hgp {

std::int64_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

double ConfusionMatrix::frequency(std::size_t true_grade, std::size_t pred_grade) const {
    return static_cast<double>(at(true_grade, pred_grade)) / static_cast<double>(total());
}

double ConfusionMatrix::row_marginal(std::size_t true_grade) const {
    std::int64_t s = 0;
    for (std::size_t j = 1; j <= classes; ++j) s += at(true_grade, j);
    return static_cast<double>(s) / static_cast<double>(total());
}

double ConfusionMatrix::col_marginal(std::size_t pred_grade) const {
    std::int64_t s = 0;
    for (std::size_t i = 1; i <= classes; ++i) s += at(i, pred_grade);
    return static_cast<double>(s) / static_cast<double>(total());
}

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& predicted, int classes) {
    if (truth.size() != predicted.size()) {
        throw InputError("confusion: " + std::to_string(truth.size()) + " true vs " +
                         std::to_string(predicted.size()) + " predicted grades");
    }
    if (truth.empty()) throw InputError("confusion: empty grade lists");
    if (classes < 1) throw ConfigError("confusion: classes must be >= 1");
    ConfusionMatrix cm;
    cm.classes = static_cast<std::size_t>(classes);
    cm.counts.assign(cm.classes * cm.classes, 0);
    for (std::size_t k = 0; k < truth.size(); ++k) {
        if (truth[k] < 1 || truth[k] > classes || predicted[k] < 1 || predicted[k] > classes) {
            throw InputError("confusion: grade out of range 1.." + std::to_string(classes) +
                             " at position " + std::to_string(k));
        }
        ++cm.at(static_cast<std::size_t>(truth[k]), static_cast<std::size_t>(predicted[k]));
    }
    return cm;
}

double accuracy(const std::vector<int>& truth, const std::vector<int>& predicted) {
    if (truth.size() != predicted.size()) {
        throw InputError("accuracy: " + std::to_string(truth.size()) + " true vs " +
                         std::to_string(predicted.size()) + " predicted grades");
    }
    if (truth.empty()) throw InputError("accuracy: empty grade lists");
    std::size_t hits = 0;
    for (std::size_t k = 0; k < truth.size(); ++k)
        if (truth[k] == predicted[k]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double qw_kappa(const ConfusionMatrix& cm) {
    if (cm.classes < 2) throw ConfigError("qw_kappa: needs at least 2 classes");
    const double total = static_cast<double>(cm.total());
    if (total == 0.0) throw InputError("qw_kappa: empty confusion matrix");
    // Accumulate over raw counts and divide once, so a perfectly diagonal
    // matrix yields P_o = total/total = 1 and kappa = 1 exactly.
    std::vector<double> row_counts(cm.classes, 0.0), col_counts(cm.classes, 0.0);
    for (std::size_t i = 1; i <= cm.classes; ++i) {
        for (std::size_t j = 1; j <= cm.classes; ++j) {
            row_counts[i - 1] += static_cast<double>(cm.at(i, j));
            col_counts[j - 1] += static_cast<double>(cm.at(i, j));
        }
    }
    const double denom = static_cast<double>(cm.classes - 1);
    double observed_num = 0.0, expected_num = 0.0;
    for (std::size_t i = 1; i <= cm.classes; ++i) {
        for (std::size_t j = 1; j <= cm.classes; ++j) {
            const double d = (static_cast<double>(i) - static_cast<double>(j)) / denom;
            const double w = 1.0 - d * d;
            observed_num += w * static_cast<double>(cm.at(i, j));
            expected_num += w * row_counts[i - 1] * col_counts[j - 1];
        }
    }
    const double observed = observed_num / total;
    const double expected = expected_num / (total * total);
    const double chance_gap = 1.0 - expected;
    if (chance_gap <= 1e-15) {
        // Both marginals collapsed onto one grade; agreement is all or nothing.
        return observed >= 1.0 - 1e-15 ? 1.0 : 0.0;
    }
    return (observed - expected) / chance_gap;
}

}  // namespace hgp
