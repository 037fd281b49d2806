#pragma once

#include <functional>

#include "hgp/autodiff.hpp"
#include "hgp/param_store.hpp"

namespace hgp {

// Compares analytic gradients against central finite differences for every
// parameter entry of the store. f rebuilds the scalar loss graph from the
// store's current values. Returns the maximum relative error
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-12).
// The caller is responsible for evaluating away from ReLU/max knots.
double grad_check(const std::function<ad::Var()>& f, ParamStore& store, double step = 1e-6);

}  // namespace hgp
