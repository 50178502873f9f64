#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "tsf/dataset.hpp"
#include "tsf/rng.hpp"

namespace tsf::narma {

// NARMA coefficient set. The zero pattern of the coupling matrix `c` is the
// ground-truth dependency graph: c[i*n+j] weights control j's effect on
// state i.
struct ScenarioSpec {
    int scenario_id = 0;
    int n = 2;
    int m = 10;
    std::vector<double> a;  // per state
    std::vector<double> b;
    std::vector<double> d;
    std::vector<double> c;  // n*n row-major
    double overflow_guard = 1e6;

    double coupling(int i, int j) const { return c[static_cast<std::size_t>(i) * n + j]; }
    bool coupled(int i, int j) const { return coupling(i, j) != 0.0; }
};

// The four two-variable scenarios. Cross-couplings: scenario 1 has none,
// scenario 2 has u1->x2, scenario 3 has u2->x1, scenario 4 has both.
ScenarioSpec scenario_preset(int scenario_id);
std::map<int, ScenarioSpec> scenario_catalog();

struct ControlRegime {
    double alpha_low = 0.4;
    double alpha_high = 0.7;
    bool ood = false;  // draw alpha from U(0,1), rejecting [iid_low, iid_high]
    double iid_low = 0.4;
    double iid_high = 0.7;
};

struct ControlDraw {
    std::vector<double> u;  // [2][len]
    double alpha = 0.0;
};

// u1,t ~ U(0,1); k_t ~ U(0,1); u2,t = alpha*u1,t + (1-alpha)*k_t, with alpha
// drawn once per series. alpha is the correlation factor between the two
// controls.
ControlDraw sample_controls(const ControlRegime& regime, int length, Rng& rng);

// Runs the coupled recursion over `length` steps and returns x as [n][length].
// States are zero for t <= m; controls must span [0, length). Trajectories
// exceeding the overflow guard raise InstabilityError naming the coefficients.
std::vector<double> simulate(const ScenarioSpec& spec, std::span<const double> controls,
                             int length);

// One emitted series: controls drawn per regime, recursion run over
// warmup+length steps, the first max(m, 50) warm-up steps discarded.
Series generate_series(const ScenarioSpec& spec, const ControlRegime& regime, int length,
                       int series_id, Rng& rng);

}  // namespace tsf::narma
