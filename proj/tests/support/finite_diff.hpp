#pragma once

// Central finite-difference gradient oracle, independent of the tape's
// backward rules by construction: it only calls the forward path.

#include <cmath>
#include <functional>
#include <vector>

#include "tsf/tensor.hpp"

namespace tsf::test {

// d f / d x[i] for every element of x, with f re-run per probe.
inline std::vector<double> finite_diff(const std::function<double()>& f, Tensor& x,
                                       double step = 1e-5) {
    std::vector<double> grad(x.numel());
    for (std::size_t i = 0; i < x.numel(); ++i) {
        const double saved = x.data[i];
        x.data[i] = saved + step;
        const double hi = f();
        x.data[i] = saved - step;
        const double lo = f();
        x.data[i] = saved;
        grad[i] = (hi - lo) / (2.0 * step);
    }
    return grad;
}

// Max relative error between analytic and numeric gradients, ignoring entries
// where both are tiny (|.| < floor) since relative error is meaningless there.
inline double max_rel_error(const std::vector<double>& analytic,
                            const std::vector<double>& numeric, double floor = 1e-6) {
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double a = analytic[i];
        const double n = numeric[i];
        const double mag = std::max(std::abs(a), std::abs(n));
        if (mag < floor) continue;
        worst = std::max(worst, std::abs(a - n) / mag);
    }
    return worst;
}

}  // namespace tsf::test
