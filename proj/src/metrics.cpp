#include "tsf/metrics.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "tsf/errors.hpp"
#include "tsf/rng.hpp"

namespace tsf::metrics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Accumulates squared errors per (step, dim) over all segments.
struct SqAccum {
    int horizon = 0, n = 0;
    std::vector<double> sums;  // [horizon][n]
    long long count = 0;       // segments

    void init(int h, int dims) {
        horizon = h;
        n = dims;
        sums.assign(static_cast<std::size_t>(h) * dims, 0.0);
        count = 0;
    }
    void add_batch(model::Forecaster& model, const SegmentBatch& mb) {
        Tape tape;
        const auto roll = model.rollout(tape, mb, horizon);
        const int B = mb.count();
        const int M = mb.horizon;
        for (int k = 0; k < horizon; ++k) {
            const auto pred = tape.val(roll.step_pred[static_cast<std::size_t>(k)]);
            for (int b = 0; b < B; ++b) {
                for (int d = 0; d < n; ++d) {
                    const double truth =
                        mb.x_future[(static_cast<std::size_t>(b) * n + d) * M + k];
                    const double p = pred[static_cast<std::size_t>(b) * n + d];
                    const double e = p - truth;
                    double& slot = sums[static_cast<std::size_t>(k) * n + d];
                    if (!std::isfinite(e)) {
                        slot = kInf;
                    } else if (std::isfinite(slot)) {
                        slot += e * e;
                    }
                }
            }
        }
        count += B;
    }
};

void for_each_batch(const SegmentBatch& segments, int eval_batch,
                    const std::function<void(const SegmentBatch&)>& fn) {
    const int count = segments.count();
    int done = 0;
    while (done < count) {
        const int take = std::min(eval_batch, count - done);
        std::vector<int> idx(static_cast<std::size_t>(take));
        std::iota(idx.begin(), idx.end(), done);
        fn(segments.gather(idx));
        done += take;
    }
}

ForecastEval finish(const SqAccum& acc) {
    ForecastEval ev;
    ev.horizon = acc.horizon;
    ev.n = acc.n;
    ev.per_step_per_dim.resize(acc.sums.size());
    ev.per_step.resize(static_cast<std::size_t>(acc.horizon));
    for (int k = 0; k < acc.horizon; ++k) {
        double step_sum = 0.0;
        for (int d = 0; d < acc.n; ++d) {
            const double s = acc.sums[static_cast<std::size_t>(k) * acc.n + d];
            ev.per_step_per_dim[static_cast<std::size_t>(k) * acc.n + d] =
                std::isfinite(s) ? s / static_cast<double>(acc.count) : kInf;
            step_sum += s;
        }
        ev.per_step[static_cast<std::size_t>(k)] =
            std::isfinite(step_sum) ? step_sum / static_cast<double>(acc.count * acc.n) : kInf;
    }
    double total = 0.0;
    for (double v : ev.per_step) total += v;
    ev.mean = std::isfinite(total) ? total / static_cast<double>(acc.horizon) : kInf;
    return ev;
}

}  // namespace

ForecastEval evaluate_forecast(model::Forecaster& model, const SegmentBatch& segments,
                               int horizon, int eval_batch) {
    if (horizon < 1) throw ParamError("evaluate_forecast: horizon must be >= 1");
    if (segments.horizon < horizon) {
        throw ParamError("evaluate_forecast: segments carry " +
                         std::to_string(segments.horizon) + " future steps, need " +
                         std::to_string(horizon));
    }
    if (segments.count() == 0) throw ParamError("evaluate_forecast: empty segment batch");
    SqAccum acc;
    acc.init(horizon, segments.n);
    for_each_batch(segments, eval_batch,
                   [&](const SegmentBatch& mb) { acc.add_batch(model, mb); });
    return finish(acc);
}

void assert_intervention_premise(const narma::ScenarioSpec& spec, int state_i, int control_j) {
    if (state_i < 0 || state_i >= spec.n || control_j < 0 || control_j >= spec.n) {
        throw ParamError("intervention: state/control index out of range");
    }
    if (spec.coupled(state_i, control_j)) {
        throw UsageError("intervention premise fails: c[" + std::to_string(state_i + 1) + "][" +
                         std::to_string(control_j + 1) + "] != 0 in scenario " +
                         std::to_string(spec.scenario_id));
    }
}

std::vector<InterventionPoint> intervention_curve(model::Forecaster& model,
                                                  const SegmentBatch& segments, int control_j,
                                                  int state_i, std::span<const double> stds,
                                                  int horizon, std::uint64_t noise_seed) {
    if (segments.horizon < horizon) {
        throw ParamError("intervention: segments too short for horizon");
    }
    std::vector<InterventionPoint> curve;
    curve.reserve(stds.size());
    const int count = segments.count();
    const int n = segments.n;
    const int M = segments.horizon;
    for (std::size_t s = 0; s < stds.size(); ++s) {
        SegmentBatch noisy = segments;
        if (stds[s] != 0.0) {
            Rng rng(noise_seed, streams::kNoiseBase + s);
            for (int seg = 0; seg < count; ++seg) {
                double* row =
                    noisy.u_future.data() + (static_cast<std::size_t>(seg) * n + control_j) * M;
                for (int t = 0; t < M; ++t) row[t] += stds[s] * rng.gaussian();
            }
        }
        const ForecastEval ev = evaluate_forecast(model, noisy, horizon);
        double acc = 0.0;
        for (int k = 0; k < horizon; ++k) acc += ev.step_dim(k, state_i);
        curve.push_back({stds[s], std::isfinite(acc) ? acc / horizon : kInf});
    }
    return curve;
}

std::vector<double> horizon_curve(model::Forecaster& model, const SegmentBatch& segments,
                                  int max_horizon) {
    const ForecastEval ev = evaluate_forecast(model, segments, max_horizon);
    std::vector<double> curve(static_cast<std::size_t>(max_horizon));
    double run = 0.0;
    for (int h = 0; h < max_horizon; ++h) {
        run += ev.per_step[static_cast<std::size_t>(h)];
        curve[static_cast<std::size_t>(h)] =
            std::isfinite(run) ? run / static_cast<double>(h + 1) : kInf;
    }
    return curve;
}

std::vector<TrajectoryDump> dump_trajectories(model::Forecaster& model,
                                              const SegmentBatch& segments, int horizon,
                                              int count) {
    const int take = std::min(count, segments.count());
    std::vector<TrajectoryDump> out;
    if (take == 0) return out;
    std::vector<int> idx(static_cast<std::size_t>(take));
    std::iota(idx.begin(), idx.end(), 0);
    const SegmentBatch mb = segments.gather(idx);
    Tape tape;
    const auto roll = model.rollout(tape, mb, horizon);
    const int n = mb.n;
    const int M = mb.horizon;
    for (int seg = 0; seg < take; ++seg) {
        TrajectoryDump d;
        d.segment = seg;
        d.truth.resize(static_cast<std::size_t>(horizon) * n);
        d.prediction.resize(static_cast<std::size_t>(horizon) * n);
        for (int k = 0; k < horizon; ++k) {
            const auto pred = tape.val(roll.step_pred[static_cast<std::size_t>(k)]);
            for (int dim = 0; dim < n; ++dim) {
                d.truth[static_cast<std::size_t>(k) * n + dim] =
                    mb.x_future[(static_cast<std::size_t>(seg) * n + dim) * M + k];
                d.prediction[static_cast<std::size_t>(k) * n + dim] =
                    pred[static_cast<std::size_t>(seg) * n + dim];
            }
        }
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace tsf::metrics
