#include "tsf/train.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "tsf/adam.hpp"
#include "tsf/errors.hpp"

namespace tsf::train {

namespace {

// Mean of per-step MSEs over the rollout.
Var build_loss(model::Forecaster& model, Tape& tape, const SegmentBatch& batch, int horizon) {
    const auto roll = model.rollout(tape, batch, horizon);
    const int B = batch.count();
    const int n = batch.n;
    const int M = batch.horizon;
    Var total = -1;
    for (int k = 0; k < horizon; ++k) {
        // Target x_{t+k+1}: column k of the future block.
        std::vector<double> target(static_cast<std::size_t>(B) * n);
        for (int b = 0; b < B; ++b) {
            for (int d = 0; d < n; ++d) {
                target[static_cast<std::size_t>(b) * n + d] =
                    batch.x_future[(static_cast<std::size_t>(b) * n + d) * M + k];
            }
        }
        Var t_in = tape.input({B, n}, target);
        Var step = tape.mse(roll.step_pred[static_cast<std::size_t>(k)], t_in);
        total = k == 0 ? step : tape.add(total, step);
    }
    return tape.scale(total, 1.0 / static_cast<double>(horizon));
}

std::vector<int> iota(int count) {
    std::vector<int> v(static_cast<std::size_t>(count));
    std::iota(v.begin(), v.end(), 0);
    return v;
}

}  // namespace

double rollout_loss(model::Forecaster& model, const SegmentBatch& segments, int horizon,
                    int eval_batch) {
    const int count = segments.count();
    if (count == 0) return std::numeric_limits<double>::quiet_NaN();
    double acc = 0.0;
    int done = 0;
    while (done < count) {
        const int take = std::min(eval_batch, count - done);
        std::vector<int> idx(static_cast<std::size_t>(take));
        std::iota(idx.begin(), idx.end(), done);
        const SegmentBatch mb = segments.gather(idx);
        Tape tape;
        const Var loss = build_loss(model, tape, mb, horizon);
        acc += tape.scalar_val(loss) * take;
        done += take;
    }
    return acc / count;
}

Result fit(model::Forecaster& model, const SegmentBatch& segments, const Settings& settings,
           std::uint64_t seed) {
    if (settings.batch_size < 1) throw ParamError("train: batch_size must be >= 1");
    if (settings.horizon < 1) throw ParamError("train: horizon must be >= 1");
    if (settings.horizon > segments.horizon) {
        throw ParamError("train: segments carry " + std::to_string(segments.horizon) +
                         " target steps, horizon " + std::to_string(settings.horizon));
    }

    Result res;
    const int count = segments.count();
    if (count == 0) throw ParamError("train: empty segment batch");

    // Deterministic validation split carved off the front of one shuffle.
    std::vector<int> order = iota(count);
    Rng split_rng(seed, streams::kValSplit);
    split_rng.shuffle(order);
    const int val_count =
        std::min(count - 1, static_cast<int>(std::lround(settings.val_fraction * count)));
    std::vector<int> val_idx(order.begin(), order.begin() + val_count);
    std::vector<int> train_idx(order.begin() + val_count, order.end());
    const SegmentBatch val_set =
        val_count > 0 ? segments.gather(val_idx) : SegmentBatch{};

    AdamState adam;
    adam.lr = settings.lr;
    adam.beta1 = settings.beta1;
    adam.beta2 = settings.beta2;
    adam.eps = settings.eps;
    const auto tensors = model.param_tensors();
    const auto names = model.param_names();

    const int decay_epoch = static_cast<int>(settings.lr_decay_fraction * settings.epochs);
    for (int epoch = 0; epoch < settings.epochs; ++epoch) {
        adam.lr = epoch >= decay_epoch ? settings.lr * settings.lr_decay_factor : settings.lr;
        Rng shuffle_rng(seed, streams::kEpochShuffleBase + static_cast<std::uint64_t>(epoch));
        shuffle_rng.shuffle(train_idx);
        double epoch_loss = 0.0;
        int seen = 0;
        for (std::size_t start = 0; start < train_idx.size(); start += settings.batch_size) {
            const std::size_t stop =
                std::min(train_idx.size(), start + static_cast<std::size_t>(settings.batch_size));
            const std::span<const int> mb_idx(train_idx.data() + start, stop - start);
            const SegmentBatch mb = segments.gather(mb_idx);
            Tape tape;
            const Var loss = build_loss(model, tape, mb, settings.horizon);
            const double lv = tape.scalar_val(loss);
            if (!std::isfinite(lv)) {
                res.failed = true;
                res.failure = "non-finite training loss at epoch " + std::to_string(epoch) +
                              ", step " + std::to_string(res.steps);
                return res;
            }
            model.zero_grads();
            tape.backward(loss);
            try {
                adam_step(tensors, adam, names);
                if (settings.l1 > 0.0) {
                    const double shrink = adam.lr * settings.l1;
                    for (Tensor* p : tensors) {
                        for (double& w : p->data) {
                            if (w > shrink) {
                                w -= shrink;
                            } else if (w < -shrink) {
                                w += shrink;
                            } else {
                                w = 0.0;
                            }
                        }
                    }
                }
            } catch (const InstabilityError& e) {
                res.failed = true;
                res.failure = e.what();
                return res;
            }
            res.steps += 1;
            epoch_loss += lv * static_cast<double>(mb_idx.size());
            seen += static_cast<int>(mb_idx.size());
        }
        res.train_loss.push_back(seen > 0 ? epoch_loss / seen
                                          : std::numeric_limits<double>::quiet_NaN());
        res.val_loss.push_back(val_count > 0
                                   ? rollout_loss(model, val_set, settings.horizon)
                                   : std::numeric_limits<double>::quiet_NaN());
    }
    return res;
}

}  // namespace tsf::train
