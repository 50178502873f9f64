#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsf/dataset.hpp"
#include "tsf/model.hpp"

namespace tsf::train {

struct Settings {
    int epochs = 30;
    int batch_size = 64;
    int horizon = 5;  // training rollout M
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double val_fraction = 0.1;
    // Step decay: lr multiplied by lr_decay_factor once lr_decay_fraction of
    // the epochs have run. Factor 1 disables it.
    double lr_decay_factor = 0.1;
    double lr_decay_fraction = 0.7;
    // Proximal L1 shrinkage applied after each Adam step; consolidates
    // collinear routes instead of spreading weight across them. 0 disables.
    double l1 = 0.0;
};

struct Result {
    std::vector<double> train_loss;  // per epoch
    std::vector<double> val_loss;    // per epoch (NaN when no val split)
    long long steps = 0;
    bool failed = false;
    std::string failure;
};

// Minimizes the M-step rollout loss (mean of per-step MSEs) with Adam over
// shuffled minibatches. Deterministic given (model init, segments, seed). A
// non-finite loss or gradient marks the run failed instead of continuing.
Result fit(model::Forecaster& model, const SegmentBatch& segments, const Settings& settings,
           std::uint64_t seed);

// Forward-only rollout loss over a segment batch.
double rollout_loss(model::Forecaster& model, const SegmentBatch& segments, int horizon,
                    int eval_batch = 256);

}  // namespace tsf::train
