#pragma once

#include "hgp/param_store.hpp"

namespace hgp {

struct AdamConfig {
    double learning_rate = 5e-4;
    double weight_decay = 1e-3;  // coupled L2: added to the gradient as wd * theta
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Bias-corrected Adam update over every parameter of the store. Requires
// gradients populated by backward(); throws ConfigError otherwise. Consumes
// the grad_ready flags so two steps cannot share one backward pass.
void adam_step(ParamStore& store, const AdamConfig& cfg);

}  // namespace hgp
