#include "tsf/adam.hpp"

#include <cmath>

#include "tsf/errors.hpp"
#include "tsf/kernels.hpp"

namespace tsf {

void adam_step(std::span<Tensor* const> params, AdamState& state,
               std::span<const std::string> names) {
    if (!(state.lr > 0.0)) throw ParamError("adam: learning rate must be > 0");
    if (state.m.empty()) {
        state.m.resize(params.size());
        state.v.resize(params.size());
        for (std::size_t p = 0; p < params.size(); ++p) {
            state.m[p].assign(params[p]->numel(), 0.0);
            state.v[p].assign(params[p]->numel(), 0.0);
        }
    }
    if (state.m.size() != params.size()) {
        throw ShapeError("adam: state tracks " + std::to_string(state.m.size()) +
                         " parameters, got " + std::to_string(params.size()));
    }
    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& t = *params[p];
        if (t.grad.size() != t.data.size()) {
            throw ShapeError("adam: parameter " + std::to_string(p) + " has no gradient buffer");
        }
        if (state.m[p].size() != t.numel()) {
            throw ShapeError("adam: moment buffer size mismatch for parameter " + std::to_string(p));
        }
        for (double g : t.grad) {
            if (!std::isfinite(g)) {
                const std::string label =
                    p < names.size() ? names[p] : ("#" + std::to_string(p));
                throw InstabilityError("adam: non-finite gradient in parameter " + label +
                                       " at step " + std::to_string(state.step + 1));
            }
        }
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    const auto& ops = kernels::active();
    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& t = *params[p];
        ops.adam_update(t.data.data(), t.grad.data(), state.m[p].data(), state.v[p].data(),
                        t.numel(), state.lr, state.beta1, state.beta2, state.eps, bc1, bc2);
    }
}

}  // namespace tsf
