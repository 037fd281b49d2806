#include "hgp/optim.hpp"

#include <cmath>

#include "hgp/errors.hpp"

namespace hgp {

void adam_step(ParamStore& store, const AdamConfig& cfg) {
    for (auto& [name, p] : store) {
        if (!p->grad_ready) {
            throw ConfigError("adam_step: no gradient for parameter '" + name + "' (run backward first)");
        }
    }
    for (auto& [name, p] : store) {
        p->step += 1;
        const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p->step));
        const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p->step));
        auto theta = p->value.data();
        auto grad = p->grad.data();
        auto m = p->moment1.data();
        auto v = p->moment2.data();
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double g = grad[i] + cfg.weight_decay * theta[i];
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            theta[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
        }
        p->value.check_finite(("adam_step: " + name).c_str());
        p->grad_ready = false;
    }
}

}  // namespace hgp
