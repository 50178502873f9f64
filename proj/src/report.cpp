#include "tsf/report.hpp"

#include <cmath>
#include <fstream>

#include "tsf/errors.hpp"

namespace tsf::report {

using nlohmann::json;

json to_json(const RunMetrics& m) {
    json fc = json::object();
    for (const auto& [h, entry] : m.forecast) {
        fc[std::to_string(h)] = {
            {"iid", entry.iid}, {"ood", entry.ood}, {"relative", entry.relative}};
    }
    return json{{"variant", m.variant},
                {"seed", m.seed},
                {"status", m.status},
                {"failure", m.failure},
                {"manifest_hash", m.manifest_hash},
                {"forecast", fc},
                {"final_train_loss", m.final_train_loss},
                {"final_val_loss", m.final_val_loss},
                {"steps", m.steps}};
}

RunMetrics run_metrics_from_json(const json& j) {
    RunMetrics m;
    m.variant = j.at("variant").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.status = j.at("status").get<std::string>();
    m.failure = j.value("failure", "");
    m.manifest_hash = j.value("manifest_hash", "");
    for (const auto& [key, entry] : j.at("forecast").items()) {
        ForecastEntry fe;
        fe.iid = entry.at("iid").get<double>();
        fe.ood = entry.at("ood").get<double>();
        fe.relative = entry.at("relative").get<double>();
        m.forecast[std::stoi(key)] = fe;
    }
    m.final_train_loss = j.value("final_train_loss", 0.0);
    m.final_val_loss = j.value("final_val_loss", 0.0);
    m.steps = j.value("steps", 0LL);
    return m;
}

void save_run_metrics(const std::filesystem::path& path, const RunMetrics& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_json(m).dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

RunMetrics load_run_metrics(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw FormatError("bad metrics JSON: " + path.string());
    return run_metrics_from_json(j);
}

Stat mean_std(const std::vector<double>& v) {
    Stat s;
    if (v.empty()) return s;
    double acc = 0.0;
    for (double x : v) acc += x;
    s.mean = acc / static_cast<double>(v.size());
    if (v.size() > 1) {
        double sq = 0.0;
        for (double x : v) sq += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(sq / static_cast<double>(v.size() - 1));
    }
    return s;
}

Aggregate aggregate_runs(const std::vector<RunMetrics>& runs) {
    Aggregate agg;
    std::map<std::string, std::vector<const RunMetrics*>> ok;
    for (const auto& r : runs) {
        if (!agg.manifest_hash.empty() && !r.manifest_hash.empty() &&
            agg.manifest_hash != r.manifest_hash) {
            throw AggregateError("runs were computed on different dataset manifests");
        }
        if (agg.manifest_hash.empty()) agg.manifest_hash = r.manifest_hash;
        auto& va = agg.variants[r.variant];
        va.variant = r.variant;
        if (r.status == "ok") {
            ok[r.variant].push_back(&r);
            va.seeds_ok += 1;
        } else {
            va.failed_seeds.push_back(r.seed);
        }
    }
    int total_ok = 0;
    for (const auto& [variant, list] : ok) {
        total_ok += static_cast<int>(list.size());
        auto& va = agg.variants[variant];
        if (list.empty()) continue;
        for (const auto& [h, _] : list.front()->forecast) {
            std::vector<double> iid, ood, rel;
            for (const RunMetrics* r : list) {
                const auto it = r->forecast.find(h);
                if (it == r->forecast.end()) continue;
                iid.push_back(it->second.iid);
                ood.push_back(it->second.ood);
                rel.push_back(it->second.relative);
            }
            va.forecast[h]["iid"] = mean_std(iid);
            va.forecast[h]["ood"] = mean_std(ood);
            va.forecast[h]["relative"] = mean_std(rel);
        }
    }
    if (total_ok == 0) throw AggregateError("no successful runs to aggregate");
    return agg;
}

json to_json(const Aggregate& a) {
    json variants = json::object();
    for (const auto& [name, va] : a.variants) {
        json fc = json::object();
        for (const auto& [h, stats] : va.forecast) {
            json entry = json::object();
            for (const auto& [metric, st] : stats) {
                entry[metric] = {{"mean", st.mean}, {"stddev", st.stddev}};
            }
            fc[std::to_string(h)] = entry;
        }
        json curves = json::array();
        for (const auto& c : va.intervention) {
            curves.push_back({{"control", c.control},
                              {"state", c.state},
                              {"stds", c.stds},
                              {"mse_mean", c.mse_mean}});
        }
        variants[name] = {{"seeds_ok", va.seeds_ok},
                          {"failed_seeds", va.failed_seeds},
                          {"forecast", fc},
                          {"intervention", curves},
                          {"horizon_mse", va.horizon_mse}};
    }
    return json{{"manifest_hash", a.manifest_hash}, {"variants", variants}};
}

}  // namespace tsf::report
