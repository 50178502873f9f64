#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "tsf/dataset.hpp"
#include "tsf/experiment.hpp"
#include "tsf/narma.hpp"

namespace tsf::runner {

// A dataset ready for training/evaluation: normalized segment batches plus
// the manifest they were cut from.
struct Dataset {
    nlohmann::json manifest;
    Normalization norm;
    SegmentBatch train;
    SegmentBatch test_iid;
    SegmentBatch test_ood;
    bool is_narma = false;
    narma::ScenarioSpec scenario;  // valid when is_narma
    std::string data_hash;
};

struct RawSplits {
    SeriesSet train;
    SeriesSet test_iid;
    SeriesSet test_ood;
};

// Deterministic generation of the three raw splits per the config.
RawSplits generate_raw(const experiment::ExperimentConfig& cfg);

// Generate and write train/test_iid/test_ood CSVs plus manifest.json into
// `data_dir`. Byte-idempotent for identical config.
void write_dataset(const experiment::ExperimentConfig& cfg,
                   const std::filesystem::path& data_dir);

// Load a generated dataset; validates the manifest's config fingerprint and
// data hash (StaleDataError on mismatch or missing files) and recuts segments
// deterministically.
Dataset load_dataset(const experiment::ExperimentConfig& cfg,
                     const std::filesystem::path& data_dir);

// One (variant, seed) training job: trains, computes forecast metrics, and
// writes checkpoint.bin, loss_trace.csv, metrics.json and resolved_config.json
// into run_dir. Diverged runs write a failed-run marker instead of aborting.
void train_run(const experiment::ExperimentConfig& cfg, const Dataset& data,
               model::VariantId variant, std::uint64_t seed,
               const std::filesystem::path& run_dir);

// Aggregates run metrics and computes intervention/horizon/trajectory curves
// from checkpoints; writes aggregate.json and the CSV table analogues into
// report_dir.
void evaluate_runs(const experiment::ExperimentConfig& cfg, const Dataset& data,
                   const std::vector<std::filesystem::path>& run_dirs,
                   const std::filesystem::path& report_dir);

// Standard layout below the experiment's output dir.
std::filesystem::path data_dir(const std::filesystem::path& out_root);
std::filesystem::path run_dir(const std::filesystem::path& out_root, model::VariantId variant,
                              std::uint64_t seed);
std::filesystem::path report_dir(const std::filesystem::path& out_root);

}  // namespace tsf::runner
