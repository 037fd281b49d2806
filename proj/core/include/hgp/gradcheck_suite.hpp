#pragma once

#include <string>
#include <vector>

namespace hgp {

struct GradCheckEntry {
    std::string component;
    double max_rel_error = 0.0;
    bool pass = false;
};

// Finite-difference verification of every layer kind, both pooling blocks,
// both full models and both baselines at fixed seeds and small dimensions.
// `sabotage` routes one gradient through a deliberately wrong backward rule
// so the failure path of the harness itself stays testable.
std::vector<GradCheckEntry> gradcheck_suite(double tolerance = 1e-5, bool sabotage = false);

}  // namespace hgp
