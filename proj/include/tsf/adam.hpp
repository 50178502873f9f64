#pragma once

#include <span>
#include <string>
#include <vector>

#include "tsf/tensor.hpp"

namespace tsf {

// Adam with bias correction. Moment buffers are lazily sized to the parameter
// list on the first step and stay shape-congruent afterwards.
struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long long step = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
};

// One update over `params` using each tensor's grad buffer. `names` (when
// given) is parallel to `params` and only used for diagnostics. A non-finite
// gradient aborts the update with InstabilityError so the run can be marked
// failed instead of silently drifting.
void adam_step(std::span<Tensor* const> params, AdamState& state,
               std::span<const std::string> names = {});

}  // namespace tsf
