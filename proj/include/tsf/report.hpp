#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace tsf::report {

struct ForecastEntry {
    double iid = 0.0;
    double ood = 0.0;
    double relative = 0.0;  // (ood - iid) / iid
};

struct RunMetrics {
    std::string variant;
    std::uint64_t seed = 0;
    std::string status = "ok";  // ok | failed
    std::string failure;
    std::string manifest_hash;
    std::map<int, ForecastEntry> forecast;  // keyed by horizon protocol
    double final_train_loss = 0.0;
    double final_val_loss = 0.0;
    long long steps = 0;
};

nlohmann::json to_json(const RunMetrics& m);
RunMetrics run_metrics_from_json(const nlohmann::json& j);
void save_run_metrics(const std::filesystem::path& path, const RunMetrics& m);
RunMetrics load_run_metrics(const std::filesystem::path& path);

struct Stat {
    double mean = 0.0;
    double stddev = 0.0;  // sample (n-1); 0 for a single value
};

Stat mean_std(const std::vector<double>& v);

struct InterventionCurve {
    int control = 0;  // 1-based
    int state = 0;
    std::vector<double> stds;
    std::vector<double> mse_mean;  // across seeds
};

struct VariantAggregate {
    std::string variant;
    int seeds_ok = 0;
    std::vector<std::uint64_t> failed_seeds;
    std::map<int, std::map<std::string, Stat>> forecast;  // horizon -> {iid, ood, relative}
    std::vector<InterventionCurve> intervention;
    std::vector<double> horizon_mse;  // accumulated OOD MSE per horizon
};

struct Aggregate {
    std::string manifest_hash;
    std::map<std::string, VariantAggregate> variants;
};

// Across-seed means/stds of the per-run metrics. Failed runs are excluded and
// listed. Throws AggregateError when no run succeeded.
Aggregate aggregate_runs(const std::vector<RunMetrics>& runs);

nlohmann::json to_json(const Aggregate& a);

}  // namespace tsf::report
