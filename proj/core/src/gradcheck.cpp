#include "hgp/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "hgp/errors.hpp"

namespace hgp {

double grad_check(const std::function<ad::Var()>& f, ParamStore& store, double step) {
    ad::Var root = f();
    ad::backward(root, store);

    // Snapshot the analytic gradients before the probing passes overwrite them.
    std::vector<Matrix> analytic;
    for (auto& [name, p] : store) analytic.push_back(p->grad);

    double max_rel = 0.0;
    std::size_t pi = 0;
    for (auto& [name, p] : store) {
        auto theta = p->value.data();
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double saved = theta[i];
            theta[i] = saved + step;
            const double up = f().value()(0, 0);
            theta[i] = saved - step;
            const double down = f().value()(0, 0);
            theta[i] = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double exact = analytic[pi].data()[i];
            const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-12});
            max_rel = std::max(max_rel, std::abs(exact - numeric) / denom);
        }
        ++pi;
    }
    return max_rel;
}

}  // namespace hgp
