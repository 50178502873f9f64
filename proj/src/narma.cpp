#include "tsf/narma.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tsf/errors.hpp"

namespace tsf::narma {

namespace {

ScenarioSpec base_spec(int id) {
    ScenarioSpec s;
    s.scenario_id = id;
    s.n = 2;
    s.m = 10;
    // With U(0,1) controls and couplings up to 1.5+0.15, b=0.05 has no fixed
    // point and every trajectory diverges; b=0.01 is stable across all four
    // coupling patterns while keeping the recurrent nonlinearity active.
    s.a = {0.3, 0.3};
    s.b = {0.01, 0.01};
    s.d = {0.1, 0.1};
    return s;
}

}  // namespace

ScenarioSpec scenario_preset(int scenario_id) {
    ScenarioSpec s = base_spec(scenario_id);
    switch (scenario_id) {
        case 1: s.c = {1.5, 0.0, 0.0, 0.55}; break;
        case 2: s.c = {1.5, 0.0, 0.5, 0.55}; break;
        case 3: s.c = {1.5, 0.15, 0.0, 0.55}; break;
        case 4: s.c = {1.5, 0.15, 0.5, 0.55}; break;
        default:
            throw ParamError("unknown scenario_id " + std::to_string(scenario_id) +
                             " (expected 1..4)");
    }
    return s;
}

std::map<int, ScenarioSpec> scenario_catalog() {
    std::map<int, ScenarioSpec> out;
    for (int id = 1; id <= 4; ++id) out.emplace(id, scenario_preset(id));
    return out;
}

ControlDraw sample_controls(const ControlRegime& regime, int length, Rng& rng) {
    if (length < 1) throw ParamError("sample_controls: length must be >= 1");
    if (!(regime.alpha_low < regime.alpha_high) && !regime.ood) {
        throw ParamError("sample_controls: degenerate alpha bounds");
    }
    ControlDraw draw;
    if (regime.ood) {
        // Rejection-sample U(0,1) outside the IID interval.
        double alpha = rng.uniform();
        while (alpha >= regime.iid_low && alpha <= regime.iid_high) alpha = rng.uniform();
        draw.alpha = alpha;
    } else {
        draw.alpha = rng.uniform(regime.alpha_low, regime.alpha_high);
    }
    // k is redrawn per step: alpha then acts as a correlation factor between
    // the two controls (corr 0 at alpha=0, corr 1 at alpha=1) and u2 keeps
    // full support at every alpha. A per-series k would instead make u2 a
    // deterministic affine image of u1 within each series.
    draw.u.resize(2 * static_cast<std::size_t>(length));
    for (int t = 0; t < length; ++t) {
        const double u1 = rng.uniform();
        const double k = rng.uniform();
        draw.u[t] = u1;
        draw.u[length + t] = draw.alpha * u1 + (1.0 - draw.alpha) * k;
    }
    return draw;
}

std::vector<double> simulate(const ScenarioSpec& spec, std::span<const double> controls,
                             int length) {
    const int n = spec.n;
    const int m = spec.m;
    if (m < 1 || n < 1) throw ParamError("narma: m and n must be >= 1");
    if (length <= m) throw ParamError("narma: length must exceed m");
    if (controls.size() != static_cast<std::size_t>(n) * length) {
        throw ParamError("narma: controls must cover n*length samples");
    }
    std::vector<double> x(static_cast<std::size_t>(n) * length, 0.0);
    auto xv = [&](int i, int t) -> double& { return x[static_cast<std::size_t>(i) * length + t]; };
    auto uv = [&](int j, int t) { return controls[static_cast<std::size_t>(j) * length + t]; };

    for (int t = m; t + 1 < length; ++t) {
        for (int i = 0; i < n; ++i) {
            double window_sum = 0.0;
            for (int k = t - m; k <= t; ++k) window_sum += xv(i, k);
            double forcing = 0.0;
            for (int j = 0; j < n; ++j) forcing += spec.coupling(i, j) * uv(j, t) * uv(j, t - m);
            const double next =
                spec.a[i] * xv(i, t) + spec.b[i] * xv(i, t) * window_sum + forcing + spec.d[i];
            if (!std::isfinite(next) || std::abs(next) > spec.overflow_guard) {
                std::ostringstream msg;
                msg << "narma: trajectory diverged at t=" << t + 1 << " state " << i
                    << " (scenario " << spec.scenario_id << ", a=" << spec.a[i]
                    << ", b=" << spec.b[i] << ", d=" << spec.d[i] << ", c_row=[";
                for (int j = 0; j < n; ++j) msg << (j ? "," : "") << spec.coupling(i, j);
                msg << "])";
                throw InstabilityError(msg.str());
            }
            xv(i, t + 1) = next;
        }
    }
    return x;
}

Series generate_series(const ScenarioSpec& spec, const ControlRegime& regime, int length,
                       int series_id, Rng& rng) {
    const int warmup = std::max(spec.m, 50);
    const int total = length + warmup;
    if (spec.n != 2) throw ParamError("narma control sampling is defined for n=2");
    const ControlDraw draw = sample_controls(regime, total, rng);
    const std::vector<double> x = simulate(spec, draw.u, total);

    Series out;
    out.id = series_id;
    out.n = spec.n;
    out.len = length;
    out.alpha = draw.alpha;
    out.x.resize(static_cast<std::size_t>(spec.n) * length);
    out.u.resize(static_cast<std::size_t>(spec.n) * length);
    for (int d = 0; d < spec.n; ++d) {
        for (int t = 0; t < length; ++t) {
            out.x[static_cast<std::size_t>(d) * length + t] =
                x[static_cast<std::size_t>(d) * total + warmup + t];
            out.u[static_cast<std::size_t>(d) * length + t] =
                draw.u[static_cast<std::size_t>(d) * total + warmup + t];
        }
    }
    return out;
}

}  // namespace tsf::narma
