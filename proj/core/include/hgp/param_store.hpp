#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>

#include "hgp/matrix.hpp"
#include "hgp/rng.hpp"

namespace hgp {

// One trainable matrix with its gradient buffer and Adam state.
struct Param {
    std::string name;
    Matrix value;
    Matrix grad;
    Matrix moment1;
    Matrix moment2;
    std::int64_t step = 0;
    bool grad_ready = false;  // set by backward(), consumed by adam_step()

    explicit Param(std::string n, Matrix v)
        : name(std::move(n)),
          value(std::move(v)),
          grad(value.rows(), value.cols()),
          moment1(value.rows(), value.cols()),
          moment2(value.rows(), value.cols()) {}
};

// Named trainable parameters. std::map keeps iteration (and therefore
// serialization and update order) deterministic.
class ParamStore {
  public:
    Param& create(const std::string& name, std::size_t rows, std::size_t cols);

    // Uniform in +-sqrt(6 / (fan_in + fan_out)).
    Param& create_glorot(const std::string& name, std::size_t rows, std::size_t cols, Rng& rng);

    Param& get(const std::string& name);
    const Param& get(const std::string& name) const;
    bool has(const std::string& name) const { return params_.count(name) > 0; }
    std::size_t size() const { return params_.size(); }

    void zero_grads();

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

  private:
    std::map<std::string, std::unique_ptr<Param>> params_;
};

}  // namespace hgp
