#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tsf/dataset.hpp"
#include "tsf/model.hpp"
#include "tsf/narma.hpp"

namespace tsf::metrics {

struct ForecastEval {
    std::vector<double> per_step;          // MSE per rollout step, all dims
    std::vector<double> per_step_per_dim;  // [horizon][n]
    double mean = 0.0;                     // average of per_step
    int horizon = 0;
    int n = 0;

    double step_dim(int step, int dim) const {
        return per_step_per_dim[static_cast<std::size_t>(step) * n + dim];
    }
};

// Rolls every segment out to `horizon` and reports squared-error means.
// Non-finite predictions map the affected entries to +inf rather than NaN so
// orderings stay well-defined.
ForecastEval evaluate_forecast(model::Forecaster& model, const SegmentBatch& segments,
                               int horizon, int eval_batch = 128);

// Throws UsageError unless control j is a non-cause of state i (c_ij == 0).
void assert_intervention_premise(const narma::ScenarioSpec& spec, int state_i, int control_j);

struct InterventionPoint {
    double noise_std = 0.0;
    double mse = 0.0;  // MSE of the probed state over the rollout
};

// Adds zero-mean Gaussian noise of each std to control j's future window only
// (targets untouched) and reports the probed state's `horizon`-step MSE. The
// same noise_seed yields the same noise for every model evaluated.
std::vector<InterventionPoint> intervention_curve(model::Forecaster& model,
                                                  const SegmentBatch& segments, int control_j,
                                                  int state_i, std::span<const double> stds,
                                                  int horizon, std::uint64_t noise_seed);

// Cumulative mean MSE per horizon 1..max_horizon.
std::vector<double> horizon_curve(model::Forecaster& model, const SegmentBatch& segments,
                                  int max_horizon);

struct TrajectoryDump {
    int segment = 0;
    // [horizon][n] truth and prediction, normalized units.
    std::vector<double> truth;
    std::vector<double> prediction;
};

std::vector<TrajectoryDump> dump_trajectories(model::Forecaster& model,
                                              const SegmentBatch& segments, int horizon,
                                              int count);

}  // namespace tsf::metrics
