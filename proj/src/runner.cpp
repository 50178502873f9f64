#include "tsf/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>

#include "tsf/csv.hpp"
#include "tsf/errors.hpp"
#include "tsf/hash.hpp"
#include "tsf/metrics.hpp"
#include "tsf/pmsm.hpp"
#include "tsf/report.hpp"
#include "tsf/train.hpp"

namespace tsf::runner {

using experiment::ExperimentConfig;
using nlohmann::json;

namespace {

// JSON has no inf/nan; cap so orderings survive serialization.
double json_safe(double v) {
    if (std::isnan(v)) return std::numeric_limits<double>::max();
    if (std::isinf(v)) {
        return v > 0 ? std::numeric_limits<double>::max() : std::numeric_limits<double>::lowest();
    }
    return v;
}

std::uint64_t window_seed(const ExperimentConfig& cfg, int split_index) {
    return cfg.dataset.seed * 1000003ULL + static_cast<std::uint64_t>(split_index);
}

json scenario_to_json(const narma::ScenarioSpec& s) {
    return json{{"scenario_id", s.scenario_id}, {"n", s.n},           {"m", s.m},
                {"a", s.a},                     {"b", s.b},           {"d", s.d},
                {"c", s.c},                     {"overflow_guard", s.overflow_guard}};
}

narma::ScenarioSpec scenario_from_json(const json& j) {
    narma::ScenarioSpec s;
    s.scenario_id = j.at("scenario_id").get<int>();
    s.n = j.at("n").get<int>();
    s.m = j.at("m").get<int>();
    s.a = j.at("a").get<std::vector<double>>();
    s.b = j.at("b").get<std::vector<double>>();
    s.d = j.at("d").get<std::vector<double>>();
    s.c = j.at("c").get<std::vector<double>>();
    s.overflow_guard = j.at("overflow_guard").get<double>();
    return s;
}

json norm_to_json(const Normalization& n) {
    return json{{"x_min", n.x_min}, {"x_max", n.x_max}, {"u_min", n.u_min}, {"u_max", n.u_max}};
}

Normalization norm_from_json(const json& j) {
    Normalization n;
    n.x_min = j.at("x_min").get<std::vector<double>>();
    n.x_max = j.at("x_max").get<std::vector<double>>();
    n.u_min = j.at("u_min").get<std::vector<double>>();
    n.u_max = j.at("u_max").get<std::vector<double>>();
    return n;
}

narma::ScenarioSpec scenario_from_config(const ExperimentConfig& cfg) {
    narma::ScenarioSpec spec = narma::scenario_preset(cfg.dataset.scenario_id);
    spec.a.assign(static_cast<std::size_t>(spec.n), cfg.dataset.coeff_a);
    spec.b.assign(static_cast<std::size_t>(spec.n), cfg.dataset.coeff_b);
    spec.d.assign(static_cast<std::size_t>(spec.n), cfg.dataset.coeff_d);
    return spec;
}

SeriesSet narma_split(const narma::ScenarioSpec& spec, const ExperimentConfig& cfg,
                      bool ood, int series_count, std::uint64_t stream) {
    narma::ControlRegime regime;
    regime.alpha_low = cfg.dataset.iid_alpha_low;
    regime.alpha_high = cfg.dataset.iid_alpha_high;
    regime.iid_low = cfg.dataset.iid_alpha_low;
    regime.iid_high = cfg.dataset.iid_alpha_high;
    regime.ood = ood;
    Rng rng(cfg.dataset.seed, stream);
    SeriesSet set;
    set.n = spec.n;
    for (int i = 0; i < series_count; ++i) {
        set.series.push_back(
            narma::generate_series(spec, regime, cfg.dataset.series_length, i, rng));
    }
    return set;
}

SeriesSet motor_split(const ExperimentConfig& cfg, pmsm::Regime regime, int series_count,
                      std::uint64_t stream) {
    Rng rng(cfg.dataset.seed, stream);
    SeriesSet set;
    set.n = 2;
    for (int i = 0; i < series_count; ++i) {
        set.series.push_back(pmsm::generate_series(cfg.dataset.motor, cfg.dataset.excitation,
                                                   regime, cfg.dataset.series_length, i, rng));
    }
    return set;
}

// pmsm-csv: series sorted into pools by quadrant sign; the IID pool is split
// into train/test by csv_train_fraction in file order.
RawSplits split_csv_series(const ExperimentConfig& cfg, const SeriesSet& all) {
    RawSplits out;
    out.train.n = out.test_iid.n = out.test_ood.n = all.n;
    SeriesSet iid_pool;
    iid_pool.n = all.n;
    for (const Series& sr : all.series) {
        int pos = 0, neg = 0;
        for (int t = 0; t < sr.len; ++t) {
            const double prod = sr.u_at(0, t) * sr.u_at(1, t);
            if (prod > 0) {
                ++pos;
            } else if (prod < 0) {
                ++neg;
            }
        }
        if (pos > 0 && neg > 0) {
            throw FormatError("csv series " + std::to_string(sr.id) +
                              " mixes control quadrants; cannot split IID/OOD");
        }
        if (neg > 0) {
            out.test_ood.series.push_back(sr);
        } else {
            iid_pool.series.push_back(sr);
        }
    }
    if (iid_pool.series.empty()) throw FormatError("csv has no IID (quadrant 1/3) series");
    if (out.test_ood.series.empty()) throw FormatError("csv has no OOD (quadrant 2/4) series");
    const int train_count = std::max(
        1, std::min(static_cast<int>(iid_pool.series.size()) - 1,
                    static_cast<int>(cfg.dataset.csv_train_fraction *
                                     static_cast<double>(iid_pool.series.size()))));
    for (int i = 0; i < static_cast<int>(iid_pool.series.size()); ++i) {
        if (i < train_count) {
            out.train.series.push_back(iid_pool.series[static_cast<std::size_t>(i)]);
        } else {
            out.test_iid.series.push_back(iid_pool.series[static_cast<std::size_t>(i)]);
        }
    }
    return out;
}

csv::SchemaKind schema_kind(const ExperimentConfig& cfg) {
    return cfg.dataset.kind == "narma" ? csv::SchemaKind::narma : csv::SchemaKind::motor;
}

}  // namespace

RawSplits generate_raw(const ExperimentConfig& cfg) {
    const auto& ds = cfg.dataset;
    if (ds.kind == "narma") {
        const narma::ScenarioSpec spec = scenario_from_config(cfg);
        RawSplits out;
        out.train = narma_split(spec, cfg, false, ds.train_series, streams::kControls + 0);
        out.test_iid = narma_split(spec, cfg, false, ds.test_series, streams::kControls + 1);
        out.test_ood = narma_split(spec, cfg, true, ds.test_series, streams::kControls + 2);
        return out;
    }
    if (ds.kind == "pmsm-sim") {
        ds.motor.validate(ds.excitation.omega_max);
        RawSplits out;
        out.train = motor_split(cfg, pmsm::Regime::iid, ds.train_series, streams::kControls + 0);
        out.test_iid =
            motor_split(cfg, pmsm::Regime::iid, ds.test_series, streams::kControls + 1);
        out.test_ood =
            motor_split(cfg, pmsm::Regime::ood, ds.test_series, streams::kControls + 2);
        return out;
    }
    if (ds.kind == "pmsm-csv") {
        const SeriesSet all = csv::read_motor(ds.csv_path);
        return split_csv_series(cfg, all);
    }
    throw ConfigError("unknown dataset kind " + ds.kind);
}

std::filesystem::path data_dir(const std::filesystem::path& out_root) { return out_root / "data"; }

std::filesystem::path run_dir(const std::filesystem::path& out_root, model::VariantId variant,
                              std::uint64_t seed) {
    return out_root / "runs" / (model::to_string(variant) + "-s" + std::to_string(seed));
}

std::filesystem::path report_dir(const std::filesystem::path& out_root) {
    return out_root / "report";
}

void write_dataset(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    const RawSplits raw = generate_raw(cfg);
    const Normalization norm = Normalization::fit(raw.train);
    const csv::SchemaKind kind = schema_kind(cfg);

    const std::string train_txt = csv::serialize(raw.train, kind);
    const std::string iid_txt = csv::serialize(raw.test_iid, kind);
    const std::string ood_txt = csv::serialize(raw.test_ood, kind);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = fnv1a64({train_txt.data(), train_txt.size()}, h);
    h = fnv1a64({iid_txt.data(), iid_txt.size()}, h);
    h = fnv1a64({ood_txt.data(), ood_txt.size()}, h);
    char hex[32];
    std::snprintf(hex, sizeof(hex), "fnv1a64:%016llx", static_cast<unsigned long long>(h));

    auto dump = [&](const char* name, const std::string& body) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw IoError("cannot write " + (dir / name).string());
        out.write(body.data(), static_cast<std::streamsize>(body.size()));
        if (!out) throw IoError("write failed: " + (dir / name).string());
    };
    dump("train.csv", train_txt);
    dump("test_iid.csv", iid_txt);
    dump("test_ood.csv", ood_txt);

    json manifest;
    manifest["format"] = "tsf-dataset";
    manifest["version"] = 1;
    manifest["kind"] = cfg.dataset.kind;
    manifest["fingerprint"] = experiment::dataset_fingerprint(cfg);
    manifest["seed"] = cfg.dataset.seed;
    manifest["n"] = 2;
    manifest["t_len"] = cfg.dataset.t_len;
    manifest["horizon"] = cfg.dataset.horizon;
    if (cfg.dataset.kind == "narma") {
        manifest["scenario"] = scenario_to_json(scenario_from_config(cfg));
    } else if (cfg.dataset.kind == "pmsm-sim") {
        manifest["motor"] = {{"resistance", cfg.dataset.motor.resistance},
                             {"l_d", cfg.dataset.motor.l_d},
                             {"l_q", cfg.dataset.motor.l_q},
                             {"psi", cfg.dataset.motor.psi},
                             {"dt", cfg.dataset.motor.dt},
                             {"u_max", cfg.dataset.motor.u_max},
                             {"i_max", cfg.dataset.motor.i_max},
                             {"omega_min", cfg.dataset.excitation.omega_min},
                             {"omega_max", cfg.dataset.excitation.omega_max}};
    }
    manifest["normalization"] = norm_to_json(norm);
    manifest["splits"] = {
        {"train",
         {{"file", "train.csv"},
          {"series", raw.train.series.size()},
          {"segments", cfg.dataset.train_segments},
          {"window_seed", window_seed(cfg, 0)}}},
        {"test_iid",
         {{"file", "test_iid.csv"},
          {"series", raw.test_iid.series.size()},
          {"segments", cfg.dataset.test_segments},
          {"window_seed", window_seed(cfg, 1)}}},
        {"test_ood",
         {{"file", "test_ood.csv"},
          {"series", raw.test_ood.series.size()},
          {"segments", cfg.dataset.test_segments},
          {"window_seed", window_seed(cfg, 2)}}}};
    manifest["data_hash"] = hex;

    std::ofstream mout(dir / "manifest.json", std::ios::binary);
    if (!mout) throw IoError("cannot write manifest.json");
    mout << manifest.dump(2) << "\n";
    if (!mout) throw IoError("manifest write failed");
}

Dataset load_dataset(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    const auto manifest_path = dir / "manifest.json";
    if (!std::filesystem::exists(manifest_path)) {
        throw StaleDataError("dataset not generated: missing " + manifest_path.string());
    }
    std::ifstream in(manifest_path);
    json manifest = json::parse(in, nullptr, false);
    if (manifest.is_discarded()) throw FormatError("bad manifest JSON: " + manifest_path.string());

    if (manifest.value("fingerprint", "") != experiment::dataset_fingerprint(cfg)) {
        throw StaleDataError("dataset manifest does not match config (regenerate with the "
                             "current dataset section)");
    }

    const std::filesystem::path files[3] = {dir / "train.csv", dir / "test_iid.csv",
                                            dir / "test_ood.csv"};
    for (const auto& f : files) {
        if (!std::filesystem::exists(f)) throw StaleDataError("missing dataset file " + f.string());
    }
    const std::string actual = hash_files(files);
    if (actual != manifest.value("data_hash", "")) {
        throw StaleDataError("dataset files do not match manifest hash (expected " +
                             manifest.value("data_hash", std::string("?")) + ", got " + actual +
                             ")");
    }

    Dataset out;
    out.manifest = manifest;
    out.data_hash = manifest.at("data_hash").get<std::string>();
    out.norm = norm_from_json(manifest.at("normalization"));
    out.is_narma = manifest.at("kind").get<std::string>() == "narma";
    if (out.is_narma) out.scenario = scenario_from_json(manifest.at("scenario"));

    const bool narma_kind = out.is_narma;
    const SeriesSet train = narma_kind ? csv::read_narma(files[0]) : csv::read_motor(files[0]);
    const SeriesSet iid = narma_kind ? csv::read_narma(files[1]) : csv::read_motor(files[1]);
    const SeriesSet ood = narma_kind ? csv::read_narma(files[2]) : csv::read_motor(files[2]);

    const int t_len = manifest.at("t_len").get<int>();
    const int horizon = manifest.at("horizon").get<int>();
    const json& splits = manifest.at("splits");
    out.train = make_segments(train, out.norm, t_len, horizon,
                              splits.at("train").at("segments").get<int>(),
                              splits.at("train").at("window_seed").get<std::uint64_t>());
    out.test_iid = make_segments(iid, out.norm, t_len, horizon,
                                 splits.at("test_iid").at("segments").get<int>(),
                                 splits.at("test_iid").at("window_seed").get<std::uint64_t>());
    out.test_ood = make_segments(ood, out.norm, t_len, horizon,
                                 splits.at("test_ood").at("segments").get<int>(),
                                 splits.at("test_ood").at("window_seed").get<std::uint64_t>());
    return out;
}

void train_run(const ExperimentConfig& cfg, const Dataset& data, model::VariantId variant,
               std::uint64_t seed, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    model::Forecaster fc(experiment::model_config(cfg, variant), seed);
    train::Settings settings;
    settings.epochs = cfg.training.epochs;
    settings.batch_size = cfg.training.batch_size;
    settings.horizon = cfg.training.horizon;
    settings.lr = cfg.training.lr;
    settings.beta1 = cfg.training.beta1;
    settings.beta2 = cfg.training.beta2;
    settings.eps = cfg.training.eps;
    settings.val_fraction = cfg.training.val_fraction;
    settings.lr_decay_factor = cfg.training.lr_decay_factor;
    settings.lr_decay_fraction = cfg.training.lr_decay_fraction;
    settings.l1 = cfg.training.l1;

    const train::Result result = train::fit(fc, data.train, settings, seed);

    {
        std::ofstream trace(dir / "loss_trace.csv", std::ios::binary);
        if (!trace) throw IoError("cannot write loss_trace.csv");
        trace << "epoch,train_loss,val_loss\n";
        for (std::size_t e = 0; e < result.train_loss.size(); ++e) {
            trace << e << ',' << csv::format_double(result.train_loss[e]) << ','
                  << csv::format_double(result.val_loss[e]) << '\n';
        }
    }

    report::RunMetrics metrics;
    metrics.variant = model::to_string(variant);
    metrics.seed = seed;
    metrics.manifest_hash = data.data_hash;
    metrics.steps = result.steps;
    metrics.final_train_loss =
        result.train_loss.empty() ? 0.0 : json_safe(result.train_loss.back());
    metrics.final_val_loss = result.val_loss.empty() ? 0.0 : json_safe(result.val_loss.back());

    if (result.failed) {
        metrics.status = "failed";
        metrics.failure = result.failure;
        std::cerr << "[tsf] warning: run " << metrics.variant << " seed " << seed
                  << " failed: " << result.failure << "\n";
    } else {
        for (int h : cfg.evaluation.horizons) {
            const auto ev_iid = metrics::evaluate_forecast(fc, data.test_iid, h);
            const auto ev_ood = metrics::evaluate_forecast(fc, data.test_ood, h);
            report::ForecastEntry entry;
            entry.iid = json_safe(ev_iid.mean);
            entry.ood = json_safe(ev_ood.mean);
            entry.relative = json_safe(entry.iid != 0.0
                                           ? (entry.ood - entry.iid) / entry.iid
                                           : (entry.ood == 0.0 ? 0.0
                                                               : std::numeric_limits<double>::max()));
            metrics.forecast[h] = entry;
        }
        json extra;
        extra["manifest_hash"] = data.data_hash;
        extra["normalization"] = norm_to_json(data.norm);
        extra["kind"] = cfg.dataset.kind;
        fc.save(dir / "checkpoint.bin", extra);
    }
    report::save_run_metrics(dir / "metrics.json", metrics);

    json resolved = experiment::config_to_json(cfg);
    resolved["run"] = {{"variant", model::to_string(variant)}, {"seed", seed}};
    std::ofstream rcfg(dir / "resolved_config.json", std::ios::binary);
    if (!rcfg) throw IoError("cannot write resolved_config.json");
    rcfg << resolved.dump(2) << "\n";
}

void evaluate_runs(const ExperimentConfig& cfg, const Dataset& data,
                   const std::vector<std::filesystem::path>& run_dirs,
                   const std::filesystem::path& rep_dir) {
    if (run_dirs.empty()) throw AggregateError("no run directories to evaluate");
    std::vector<report::RunMetrics> all;
    std::vector<std::pair<report::RunMetrics, std::filesystem::path>> ok_runs;
    for (const auto& rd : run_dirs) {
        const auto mpath = rd / "metrics.json";
        if (!std::filesystem::exists(mpath)) {
            std::cerr << "[tsf] warning: skipping " << rd << " (no metrics.json)\n";
            continue;
        }
        report::RunMetrics m = report::load_run_metrics(mpath);
        all.push_back(m);
        if (m.status == "ok" && std::filesystem::exists(rd / "checkpoint.bin")) {
            ok_runs.emplace_back(std::move(m), rd);
        }
    }
    report::Aggregate agg = report::aggregate_runs(all);

    const int interv_horizon = cfg.training.horizon;
    const int traj_horizon = std::min(data.train.horizon, 15);

    // Curves per variant, averaged entrywise across successful seeds.
    std::map<std::string, std::vector<const std::pair<report::RunMetrics,
                                                      std::filesystem::path>*>> by_variant;
    for (const auto& pr : ok_runs) by_variant[pr.first.variant].push_back(&pr);

    std::error_code ec;
    std::filesystem::create_directories(rep_dir, ec);
    if (ec) throw IoError("cannot create " + rep_dir.string() + ": " + ec.message());

    std::ofstream interv_csv(rep_dir / "intervention.csv", std::ios::binary);
    interv_csv << "variant,control,state,noise_std,mse\n";
    std::ofstream horizon_csv(rep_dir / "horizon.csv", std::ios::binary);
    horizon_csv << "variant,horizon,accumulated_ood_mse\n";
    std::ofstream traj_csv(rep_dir / "trajectories.csv", std::ios::binary);
    traj_csv << "variant,seed,segment,step,dim,truth,prediction\n";

    for (auto& [variant, runs] : by_variant) {
        auto& va = agg.variants[variant];
        std::vector<std::vector<double>> horizon_acc;
        std::map<std::pair<int, int>, std::vector<std::vector<double>>> interv_acc;

        bool dumped_traj = false;
        for (const auto* pr : runs) {
            model::Forecaster fc = model::Forecaster::load(pr->second / "checkpoint.bin");

            if (data.is_narma) {
                for (const auto& pair : cfg.evaluation.intervention_pairs) {
                    metrics::assert_intervention_premise(data.scenario, pair.state - 1,
                                                         pair.control - 1);
                    const auto curve = metrics::intervention_curve(
                        fc, data.test_iid, pair.control - 1, pair.state - 1,
                        cfg.evaluation.noise_stds, interv_horizon, cfg.dataset.seed);
                    std::vector<double> vals;
                    vals.reserve(curve.size());
                    for (const auto& pt : curve) vals.push_back(pt.mse);
                    interv_acc[{pair.control, pair.state}].push_back(std::move(vals));
                }
            }
            if (cfg.evaluation.max_horizon > 0) {
                horizon_acc.push_back(
                    metrics::horizon_curve(fc, data.test_ood, cfg.evaluation.max_horizon));
            }
            if (!dumped_traj && cfg.evaluation.trajectory_segments > 0) {
                const auto dumps = metrics::dump_trajectories(
                    fc, data.test_ood, traj_horizon, cfg.evaluation.trajectory_segments);
                for (const auto& d : dumps) {
                    for (int k = 0; k < traj_horizon; ++k) {
                        for (int dim = 0; dim < data.train.n; ++dim) {
                            traj_csv << variant << ',' << pr->first.seed << ',' << d.segment
                                     << ',' << k + 1 << ',' << dim + 1 << ','
                                     << csv::format_double(
                                            d.truth[static_cast<std::size_t>(k) * data.train.n +
                                                    dim])
                                     << ','
                                     << csv::format_double(
                                            d.prediction[static_cast<std::size_t>(k) *
                                                             data.train.n +
                                                         dim])
                                     << '\n';
                        }
                    }
                }
                dumped_traj = true;
            }
        }

        auto average = [](const std::vector<std::vector<double>>& rows) {
            std::vector<double> mean;
            if (rows.empty()) return mean;
            mean.assign(rows.front().size(), 0.0);
            for (const auto& r : rows) {
                for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += r[i];
            }
            for (double& v : mean) v = json_safe(v / static_cast<double>(rows.size()));
            return mean;
        };

        for (const auto& [key, rows] : interv_acc) {
            report::InterventionCurve curve;
            curve.control = key.first;
            curve.state = key.second;
            curve.stds = cfg.evaluation.noise_stds;
            curve.mse_mean = average(rows);
            for (std::size_t i = 0; i < curve.stds.size(); ++i) {
                interv_csv << variant << ',' << curve.control << ',' << curve.state << ','
                           << csv::format_double(curve.stds[i]) << ','
                           << csv::format_double(curve.mse_mean[i]) << '\n';
            }
            va.intervention.push_back(std::move(curve));
        }
        va.horizon_mse = average(horizon_acc);
        for (std::size_t h = 0; h < va.horizon_mse.size(); ++h) {
            horizon_csv << variant << ',' << h + 1 << ','
                        << csv::format_double(va.horizon_mse[h]) << '\n';
        }
    }

    // Table analogues: single-step (table1) and 5-step (table2) protocols.
    auto write_table = [&](const char* name, int h) {
        std::ofstream t(rep_dir / name, std::ios::binary);
        t << "variant,mse_iid,mse_ood,relative_error,seeds_ok\n";
        for (const auto& [variant, va] : agg.variants) {
            const auto it = va.forecast.find(h);
            if (it == va.forecast.end()) continue;
            t << variant << ',' << csv::format_double(it->second.at("iid").mean) << ','
              << csv::format_double(it->second.at("ood").mean) << ','
              << csv::format_double(it->second.at("relative").mean) << ',' << va.seeds_ok
              << '\n';
        }
    };
    for (int h : cfg.evaluation.horizons) {
        if (h == 1) write_table("table1.csv", 1);
        if (h == 5) write_table("table2.csv", 5);
    }

    std::ofstream aout(rep_dir / "aggregate.json", std::ios::binary);
    if (!aout) throw IoError("cannot write aggregate.json");
    aout << report::to_json(agg).dump(2) << "\n";
    if (!aout) throw IoError("aggregate write failed");
}

}  // namespace tsf::runner
