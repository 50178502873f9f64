#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsf/model.hpp"
#include "tsf/pmsm.hpp"

namespace tsf::experiment {

struct DatasetSection {
    std::string kind = "narma";  // narma | pmsm-sim | pmsm-csv
    int scenario_id = 1;         // narma
    std::string csv_path;        // pmsm-csv
    double csv_train_fraction = 0.8;  // pmsm-csv: IID series split
    int train_segments = 2000;
    int test_segments = 500;
    int train_series = 500;
    int test_series = 100;
    int series_length = 60;
    int t_len = 11;    // segment length T
    int horizon = 5;   // future steps M stored per segment
    std::uint64_t seed = 1;
    // narma coefficients (per-state values replicated)
    double coeff_a = 0.3;
    double coeff_b = 0.01;
    double coeff_d = 0.1;
    double iid_alpha_low = 0.4;
    double iid_alpha_high = 0.7;
    // pmsm-sim
    pmsm::MotorParams motor;
    pmsm::Excitation excitation;
};

struct ModelSection {
    std::vector<model::VariantId> variants = {model::VariantId::baseline,
                                              model::VariantId::baseline_sc,
                                              model::VariantId::ours_hd, model::VariantId::ours};
    int width = 8;
    int enc_channels = 32;
    int sep_channels = 16;
    int enc_kernel = 3;
    std::vector<int> enc_dilations = {1, 2, 4};
    int mlp_hidden = 128;
};

struct TrainingSection {
    int epochs = 30;
    int batch_size = 8;
    int horizon = 5;  // training rollout M
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double val_fraction = 0.1;
    double lr_decay_factor = 0.1;
    double lr_decay_fraction = 0.7;
    double l1 = 1e-2;
};

struct InterventionPair {
    int control = 0;  // 1-based control index j (perturbed)
    int state = 0;    // 1-based state index i (probed)
};

struct EvaluationSection {
    std::vector<int> horizons = {1, 5};  // forecast MSE protocols
    int max_horizon = 0;                 // 0 disables the horizon sweep
    std::vector<InterventionPair> intervention_pairs;
    std::vector<double> noise_stds = {0.0, 0.1, 0.25, 0.5, 1.0};
    int trajectory_segments = 4;
};

struct ExperimentConfig {
    DatasetSection dataset;
    ModelSection model;
    TrainingSection training;
    EvaluationSection evaluation;
    std::string output_dir = "out";
};

// Strict schema: unknown keys and wrong types raise ConfigError naming the
// offending field. Defaults fill anything omitted.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::filesystem::path& path);
void validate(const ExperimentConfig& c);

// Fingerprint of the dataset section; manifests store it so stale data is
// detected before training.
std::string dataset_fingerprint(const ExperimentConfig& c);

// Output root: $TSF_OUT_ROOT (when set) prefixes relative output dirs.
std::filesystem::path resolve_output_dir(const ExperimentConfig& c);

// Presets for the reproduce command: narma-1..4 and pmsm at full, desk or
// smoke scale.
ExperimentConfig preset(const std::string& experiment_id, const std::string& scale);

model::ModelConfig model_config(const ExperimentConfig& c, model::VariantId variant);

}  // namespace tsf::experiment
