#pragma once

#include <cstddef>
#include <vector>

namespace hgp {

// T x n x m array of hourly road signals, t-major layout. m is fixed at 3:
// flow (vehicles/hour), occupancy (fraction), speed (km/h).
class TrafficTensor {
  public:
    static constexpr std::size_t kSignals = 3;
    enum Signal : int { Flow = 0, Occupancy = 1, Speed = 2 };

    TrafficTensor() = default;
    TrafficTensor(std::size_t timestamps, std::size_t roads)
        : timestamps_(timestamps), roads_(roads), data_(timestamps * roads * kSignals, 0.0) {}

    std::size_t timestamps() const { return timestamps_; }
    std::size_t roads() const { return roads_; }

    double at(std::size_t t, std::size_t road, std::size_t signal) const {
        return data_[(t * roads_ + road) * kSignals + signal];
    }
    double& at(std::size_t t, std::size_t road, std::size_t signal) {
        return data_[(t * roads_ + road) * kSignals + signal];
    }

    // One road's single-signal series over [t0, t0 + len).
    std::vector<double> series(std::size_t road, std::size_t signal, std::size_t t0, std::size_t len) const {
        std::vector<double> out(len);
        for (std::size_t k = 0; k < len; ++k) out[k] = at(t0 + k, road, signal);
        return out;
    }

    TrafficTensor slice_time(std::size_t t0, std::size_t len) const {
        TrafficTensor out(len, roads_);
        for (std::size_t t = 0; t < len; ++t)
            for (std::size_t r = 0; r < roads_; ++r)
                for (std::size_t s = 0; s < kSignals; ++s) out.at(t, r, s) = at(t0 + t, r, s);
        return out;
    }

    const std::vector<double>& raw() const { return data_; }

  private:
    std::size_t timestamps_ = 0;
    std::size_t roads_ = 0;
    std::vector<double> data_;
};

}  // namespace hgp
