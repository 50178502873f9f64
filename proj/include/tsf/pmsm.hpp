#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "tsf/dataset.hpp"
#include "tsf/rng.hpp"

namespace tsf::pmsm {

// d-q frame motor constants plus the discretization step and safety bounds.
struct MotorParams {
    double resistance = 4.9;  // ohm
    double l_d = 79e-3;       // henry
    double l_q = 113e-3;      // henry
    double psi = 0.165;       // weber
    double dt = 1e-5;         // seconds
    double u_max = 12.0;      // volt
    double i_max = 50.0;      // ampere

    // Positivity plus a spectral-radius check of the discrete update matrix at
    // the fastest rotor speed the dataset will use.
    void validate(double omega_max) const;
};

// Quadrants of the (u_d, u_q) plane: IID draws from {1, 3}, OOD from {2, 4}.
enum class Regime { iid, ood };

// Explicit-Euler integration of the d-q current dynamics with rotor speed
// held constant. Inputs are voltage series of equal length; element t of the
// result holds the currents at step t, with i[t+1] stepped from u[t].
std::pair<std::vector<double>, std::vector<double>> simulate_motor(
    const MotorParams& params, std::span<const double> u_d, std::span<const double> u_q,
    double omega, double i_d0 = 0.0, double i_q0 = 0.0);

// Piecewise-constant voltage profiles with per-step jitter, signs confined to
// the regime's quadrants for the whole series.
struct Excitation {
    int dwell_min = 3;
    int dwell_max = 10;
    double mag_low_frac = 0.1;   // of u_max
    double mag_high_frac = 0.95;
    double jitter_frac = 0.02;
    // Fraction of dwells that drive both axes with one shared magnitude; the
    // rest draw independent magnitudes. Signs always follow the regime
    // quadrants; this only correlates the observed |u_d|, |u_q|.
    double mag_correlation = 1.0;
    // When set, the q-axis magnitude follows the d-axis magnitude of the
    // previous dwell instead of the current one.
    bool mag_lagged = false;
    // One jitter innovation per step applied to both magnitudes, so the two
    // voltages co-move sample to sample within a regime. Per-axis jitter
    // otherwise.
    bool jitter_shared = false;
    // Flux-dominated speeds: omega*psi well above u_max keeps the current
    // operating region essentially quadrant-independent, so OOD controls
    // change the joint drive pattern without moving the states off-chart.
    double omega_min = 150.0;
    double omega_max = 250.0;
};

struct ControlProfile {
    std::vector<double> u_d;
    std::vector<double> u_q;
    double omega = 0.0;
};

ControlProfile sample_quadrant_controls(const Excitation& exc, const MotorParams& params,
                                        Regime regime, int length, Rng& rng);

// Full series: sampled controls driven through the simulator.
Series generate_series(const MotorParams& params, const Excitation& exc, Regime regime,
                       int length, int series_id, Rng& rng);

}  // namespace tsf::pmsm
