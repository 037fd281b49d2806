#pragma once

#include <cstdint>
#include <vector>

namespace hgp {

// Class x Class tally, counts[true][pred], grades 1-based.
struct ConfusionMatrix {
    std::size_t classes = 0;
    std::vector<std::int64_t> counts;

    std::int64_t at(std::size_t true_grade, std::size_t pred_grade) const {
        return counts[(true_grade - 1) * classes + (pred_grade - 1)];
    }
    std::int64_t& at(std::size_t true_grade, std::size_t pred_grade) {
        return counts[(true_grade - 1) * classes + (pred_grade - 1)];
    }
    std::int64_t total() const;
    double frequency(std::size_t true_grade, std::size_t pred_grade) const;
    double row_marginal(std::size_t true_grade) const;
    double col_marginal(std::size_t pred_grade) const;
};

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& predicted, int classes);

// Fraction of exact matches.
double accuracy(const std::vector<int>& truth, const std::vector<int>& predicted);

// Quadratic weighted kappa with agreement weights
// w(i,j) = 1 - ((i - j) / (Class - 1))^2:
//   P_o = sum w(i,j) p(i,j),  P_e = sum w(i,j) p(i,.) p(.,j),
//   kappa = (P_o - P_e) / (1 - P_e).
// The degenerate P_e = 1 case returns 1 when P_o = 1, else 0.
double qw_kappa(const ConfusionMatrix& cm);

}  // namespace hgp
