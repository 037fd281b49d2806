#include "hgp/param_store.hpp"

#include <cmath>

#include "hgp/errors.hpp"

namespace hgp {

Param& ParamStore::create(const std::string& name, std::size_t rows, std::size_t cols) {
    if (params_.count(name)) throw ConfigError("duplicate parameter name: " + name);
    auto p = std::make_unique<Param>(name, Matrix(rows, cols));
    Param& ref = *p;
    params_.emplace(name, std::move(p));
    return ref;
}

Param& ParamStore::create_glorot(const std::string& name, std::size_t rows, std::size_t cols, Rng& rng) {
    Param& p = create(name, rows, cols);
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (double& v : p.value.data()) v = rng.uniform(-bound, bound);
    return p;
}

Param& ParamStore::get(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw ConfigError("unknown parameter: " + name);
    return *it->second;
}

const Param& ParamStore::get(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw ConfigError("unknown parameter: " + name);
    return *it->second;
}

void ParamStore::zero_grads() {
    for (auto& [name, p] : params_) {
        for (double& g : p->grad.data()) g = 0.0;
        p->grad_ready = false;
    }
}

}  // namespace hgp
