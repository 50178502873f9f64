#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tsf/rng.hpp"

namespace tsf {

// One multivariate trajectory: n state channels and n control channels over
// `len` steps, row-major [channel][time]. `alpha` is the control-correlation
// factor of the generating draw (NARMA) and `omega` the rotor speed (PMSM);
// whichever does not apply stays NaN.
struct Series {
    int id = 0;
    int n = 0;
    int len = 0;
    std::vector<double> x;  // n * len
    std::vector<double> u;  // n * len
    double alpha = std::numeric_limits<double>::quiet_NaN();
    double omega = std::numeric_limits<double>::quiet_NaN();

    double x_at(int dim, int t) const { return x[static_cast<std::size_t>(dim) * len + t]; }
    double u_at(int dim, int t) const { return u[static_cast<std::size_t>(dim) * len + t]; }
};

struct SeriesSet {
    int n = 0;
    std::vector<Series> series;
};

// Per-channel min-max statistics fitted on the training split and reused
// verbatim for every other split.
struct Normalization {
    std::vector<double> x_min, x_max, u_min, u_max;

    static Normalization fit(const SeriesSet& train);
    double norm_x(int dim, double v) const;
    double norm_u(int dim, double v) const;
};

// Batched temporal segments. All values are normalized. Windows share the
// index origin: x_past and u_past cover series steps [s, s+T), x_future and
// u_future cover [s+T, s+T+M).
struct SegmentBatch {
    int n = 0;
    int t_len = 0;   // T
    int horizon = 0; // M
    std::vector<double> x_past;    // [count, n, T]
    std::vector<double> u_past;    // [count, n, T]
    std::vector<double> u_future;  // [count, n, M]
    std::vector<double> x_future;  // [count, n, M]

    int count() const {
        const std::size_t row = static_cast<std::size_t>(n) * t_len;
        return row == 0 ? 0 : static_cast<int>(x_past.size() / row);
    }
    SegmentBatch gather(std::span<const int> idx) const;
};

// Cuts `count` windows with uniformly sampled starts, round-robin across the
// set's series. Throws ParamError when any series is shorter than T + M.
SegmentBatch make_segments(const SeriesSet& set, const Normalization& norm, int t_len,
                           int horizon, int count, std::uint64_t seed);

}  // namespace tsf
