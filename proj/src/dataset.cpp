#include "tsf/dataset.hpp"

#include <algorithm>

#include "tsf/errors.hpp"

namespace tsf {

Normalization Normalization::fit(const SeriesSet& train) {
    if (train.series.empty()) throw ParamError("normalization: empty training set");
    const int n = train.n;
    Normalization s;
    s.x_min.assign(n, std::numeric_limits<double>::infinity());
    s.x_max.assign(n, -std::numeric_limits<double>::infinity());
    s.u_min.assign(n, std::numeric_limits<double>::infinity());
    s.u_max.assign(n, -std::numeric_limits<double>::infinity());
    for (const Series& sr : train.series) {
        for (int d = 0; d < n; ++d) {
            for (int t = 0; t < sr.len; ++t) {
                s.x_min[d] = std::min(s.x_min[d], sr.x_at(d, t));
                s.x_max[d] = std::max(s.x_max[d], sr.x_at(d, t));
                s.u_min[d] = std::min(s.u_min[d], sr.u_at(d, t));
                s.u_max[d] = std::max(s.u_max[d], sr.u_at(d, t));
            }
        }
    }
    return s;
}

namespace {
double minmax(double v, double lo, double hi) {
    const double range = hi - lo;
    if (range < 1e-12) return 0.0;  // constant channel
    return (v - lo) / range;
}
}  // namespace

double Normalization::norm_x(int dim, double v) const { return minmax(v, x_min[dim], x_max[dim]); }
double Normalization::norm_u(int dim, double v) const { return minmax(v, u_min[dim], u_max[dim]); }

SegmentBatch SegmentBatch::gather(std::span<const int> idx) const {
    SegmentBatch out;
    out.n = n;
    out.t_len = t_len;
    out.horizon = horizon;
    const std::size_t past_row = static_cast<std::size_t>(n) * t_len;
    const std::size_t fut_row = static_cast<std::size_t>(n) * horizon;
    out.x_past.resize(idx.size() * past_row);
    out.u_past.resize(idx.size() * past_row);
    out.x_future.resize(idx.size() * fut_row);
    out.u_future.resize(idx.size() * fut_row);
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const std::size_t src = static_cast<std::size_t>(idx[r]);
        std::copy_n(x_past.begin() + src * past_row, past_row, out.x_past.begin() + r * past_row);
        std::copy_n(u_past.begin() + src * past_row, past_row, out.u_past.begin() + r * past_row);
        std::copy_n(x_future.begin() + src * fut_row, fut_row, out.x_future.begin() + r * fut_row);
        std::copy_n(u_future.begin() + src * fut_row, fut_row, out.u_future.begin() + r * fut_row);
    }
    return out;
}

SegmentBatch make_segments(const SeriesSet& set, const Normalization& norm, int t_len,
                           int horizon, int count, std::uint64_t seed) {
    if (t_len < 1 || horizon < 1) throw ParamError("make_segments: T and M must be >= 1");
    if (count < 1) throw ParamError("make_segments: count must be >= 1");
    if (set.series.empty()) throw ParamError("make_segments: empty series set");
    const int span = t_len + horizon;
    for (const Series& sr : set.series) {
        if (sr.len < span) {
            throw ParamError("make_segments: series " + std::to_string(sr.id) + " has length " +
                             std::to_string(sr.len) + " < T+M = " + std::to_string(span));
        }
    }

    Rng rng(seed, streams::kWindows);
    SegmentBatch out;
    out.n = set.n;
    out.t_len = t_len;
    out.horizon = horizon;
    const std::size_t past_row = static_cast<std::size_t>(set.n) * t_len;
    const std::size_t fut_row = static_cast<std::size_t>(set.n) * horizon;
    out.x_past.reserve(count * past_row);
    out.u_past.reserve(count * past_row);
    out.x_future.reserve(count * fut_row);
    out.u_future.reserve(count * fut_row);

    for (int c = 0; c < count; ++c) {
        const Series& sr = set.series[static_cast<std::size_t>(c) % set.series.size()];
        const int start =
            static_cast<int>(rng.uniform_index(static_cast<std::size_t>(sr.len - span + 1)));
        for (int d = 0; d < set.n; ++d) {
            for (int t = 0; t < t_len; ++t) {
                out.x_past.push_back(norm.norm_x(d, sr.x_at(d, start + t)));
                out.u_past.push_back(norm.norm_u(d, sr.u_at(d, start + t)));
            }
        }
        for (int d = 0; d < set.n; ++d) {
            for (int t = 0; t < horizon; ++t) {
                out.x_future.push_back(norm.norm_x(d, sr.x_at(d, start + t_len + t)));
                out.u_future.push_back(norm.norm_u(d, sr.u_at(d, start + t_len + t)));
            }
        }
    }
    return out;
}

}  // namespace tsf
