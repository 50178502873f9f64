#include "tsf/pmsm.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "tsf/errors.hpp"

namespace tsf::pmsm {

void MotorParams::validate(double omega_max) const {
    if (resistance <= 0 || l_d <= 0 || l_q <= 0 || psi <= 0 || dt <= 0 || u_max <= 0 ||
        i_max <= 0) {
        throw ParamError("motor params must all be strictly positive");
    }
    // Homogeneous part of the Euler update:
    //   [1 - dt*R/Ld      dt*w*Lq/Ld ]
    //   [-dt*w*Ld/Lq    1 - dt*R/Lq  ]
    const double a11 = 1.0 - dt * resistance / l_d;
    const double a12 = dt * omega_max * l_q / l_d;
    const double a21 = -dt * omega_max * l_d / l_q;
    const double a22 = 1.0 - dt * resistance / l_q;
    const double tr = a11 + a22;
    const double det = a11 * a22 - a12 * a21;
    const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr - 4.0 * det, 0.0));
    const double rho = std::max(std::abs((tr + disc) / 2.0), std::abs((tr - disc) / 2.0));
    if (rho >= 1.0) {
        throw ParamError("motor params unstable at omega=" + std::to_string(omega_max) +
                         ": spectral radius " + std::to_string(rho) + " >= 1; reduce dt");
    }
}

std::pair<std::vector<double>, std::vector<double>> simulate_motor(
    const MotorParams& params, std::span<const double> u_d, std::span<const double> u_q,
    double omega, double i_d0, double i_q0) {
    if (u_d.size() != u_q.size() || u_d.empty()) {
        throw ParamError("simulate_motor: voltage series must be equal-length and non-empty");
    }
    for (std::size_t t = 0; t < u_d.size(); ++t) {
        if (std::abs(u_d[t]) > params.u_max || std::abs(u_q[t]) > params.u_max) {
            throw ParamError("simulate_motor: |u| exceeds u_max at step " + std::to_string(t));
        }
    }
    const std::size_t steps = u_d.size();
    std::vector<double> i_d(steps), i_q(steps);
    i_d[0] = i_d0;
    i_q[0] = i_q0;
    for (std::size_t t = 0; t + 1 < steps; ++t) {
        const double did =
            (u_d[t] - params.resistance * i_d[t] + omega * params.l_q * i_q[t]) / params.l_d;
        const double diq =
            (u_q[t] - params.resistance * i_q[t] - omega * params.l_d * i_d[t] -
             omega * params.psi) /
            params.l_q;
        i_d[t + 1] = i_d[t] + params.dt * did;
        i_q[t + 1] = i_q[t] + params.dt * diq;
        if (!std::isfinite(i_d[t + 1]) || !std::isfinite(i_q[t + 1]) ||
            std::abs(i_d[t + 1]) > params.i_max || std::abs(i_q[t + 1]) > params.i_max) {
            throw InstabilityError("simulate_motor: |i| exceeded i_max=" +
                                   std::to_string(params.i_max) + " at step " +
                                   std::to_string(t + 1));
        }
    }
    return {std::move(i_d), std::move(i_q)};
}

ControlProfile sample_quadrant_controls(const Excitation& exc, const MotorParams& params,
                                        Regime regime, int length, Rng& rng) {
    if (length < 1) throw ParamError("sample_quadrant_controls: length must be >= 1");
    if (exc.dwell_min < 1 || exc.dwell_max < exc.dwell_min) {
        throw ParamError("sample_quadrant_controls: bad dwell range");
    }
    ControlProfile p;
    p.omega = rng.uniform(exc.omega_min, exc.omega_max);
    p.u_d.resize(length);
    p.u_q.resize(length);
    double prev_mag_d = rng.uniform(exc.mag_low_frac, exc.mag_high_frac) * params.u_max;
    const double jitter = exc.jitter_frac * params.u_max;
    int t = 0;
    while (t < length) {
        const int dwell = exc.dwell_min +
                          static_cast<int>(rng.uniform_index(
                              static_cast<std::size_t>(exc.dwell_max - exc.dwell_min + 1)));
        // IID: quadrants 1 (+,+) and 3 (-,-). OOD: 2 (-,+) and 4 (+,-).
        const bool flip = rng.uniform() < 0.5;
        double sign_d, sign_q;
        if (regime == Regime::iid) {
            sign_d = flip ? -1.0 : 1.0;
            sign_q = sign_d;
        } else {
            sign_d = flip ? -1.0 : 1.0;
            sign_q = -sign_d;
        }
        const double mag_d = rng.uniform(exc.mag_low_frac, exc.mag_high_frac) * params.u_max;
        const double mag_ind = rng.uniform(exc.mag_low_frac, exc.mag_high_frac) * params.u_max;
        const double mag_ref = exc.mag_lagged ? prev_mag_d : mag_d;
        // Mixture: most dwells drive both axes with one shared magnitude, the
        // rest are independent excursions.
        const double mag_q = rng.uniform() < exc.mag_correlation ? mag_ref : mag_ind;
        prev_mag_d = mag_d;
        const double mag_floor = 0.02 * params.u_max;
        for (int s = 0; s < dwell && t < length; ++s, ++t) {
            const double jd = rng.uniform(-jitter, jitter);
            const double jq = exc.jitter_shared ? jd : rng.uniform(-jitter, jitter);
            const double vd = std::clamp(mag_d + jd, mag_floor, params.u_max);
            const double vq = std::clamp(mag_q + jq, mag_floor, params.u_max);
            p.u_d[t] = sign_d * vd;
            p.u_q[t] = sign_q * vq;
        }
    }
    return p;
}

Series generate_series(const MotorParams& params, const Excitation& exc, Regime regime,
                       int length, int series_id, Rng& rng) {
    params.validate(exc.omega_max);
    const ControlProfile prof = sample_quadrant_controls(exc, params, regime, length, rng);
    auto [i_d, i_q] = simulate_motor(params, prof.u_d, prof.u_q, prof.omega);

    Series out;
    out.id = series_id;
    out.n = 2;
    out.len = length;
    out.omega = prof.omega;
    out.x.resize(2 * static_cast<std::size_t>(length));
    out.u.resize(2 * static_cast<std::size_t>(length));
    for (int t = 0; t < length; ++t) {
        out.x[t] = i_d[t];
        out.x[length + t] = i_q[t];
        out.u[t] = prof.u_d[t];
        out.u[length + t] = prof.u_q[t];
    }
    return out;
}

}  // namespace tsf::pmsm
