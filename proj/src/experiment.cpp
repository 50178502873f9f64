#include "tsf/experiment.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "tsf/errors.hpp"
#include "tsf/hash.hpp"

namespace tsf::experiment {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& section,
                    const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError("section '" + section + "' must be an object");
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) {
            throw ConfigError("unknown key '" + key + "' in section '" + section + "'");
        }
    }
}

template <class T>
void read_field(const json& obj, const std::string& section, const std::string& key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad value for '" + key + "' in section '" + section + "'");
    }
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
    reject_unknown(j, "<root>", {"dataset", "model", "training", "evaluation", "output_dir"});
    ExperimentConfig c;
    read_field(j, "<root>", "output_dir", c.output_dir);

    if (j.contains("dataset")) {
        const json& d = j.at("dataset");
        reject_unknown(d, "dataset",
                       {"kind", "scenario_id", "csv_path", "csv_train_fraction",
                        "train_segments", "test_segments", "train_series", "test_series",
                        "series_length", "t_len", "horizon", "seed", "coeff_a", "coeff_b",
                        "coeff_d", "iid_alpha_low", "iid_alpha_high", "motor", "excitation"});
        auto& ds = c.dataset;
        read_field(d, "dataset", "kind", ds.kind);
        read_field(d, "dataset", "scenario_id", ds.scenario_id);
        read_field(d, "dataset", "csv_path", ds.csv_path);
        read_field(d, "dataset", "csv_train_fraction", ds.csv_train_fraction);
        read_field(d, "dataset", "train_segments", ds.train_segments);
        read_field(d, "dataset", "test_segments", ds.test_segments);
        read_field(d, "dataset", "train_series", ds.train_series);
        read_field(d, "dataset", "test_series", ds.test_series);
        read_field(d, "dataset", "series_length", ds.series_length);
        read_field(d, "dataset", "t_len", ds.t_len);
        read_field(d, "dataset", "horizon", ds.horizon);
        read_field(d, "dataset", "seed", ds.seed);
        read_field(d, "dataset", "coeff_a", ds.coeff_a);
        read_field(d, "dataset", "coeff_b", ds.coeff_b);
        read_field(d, "dataset", "coeff_d", ds.coeff_d);
        read_field(d, "dataset", "iid_alpha_low", ds.iid_alpha_low);
        read_field(d, "dataset", "iid_alpha_high", ds.iid_alpha_high);
        if (d.contains("motor")) {
            const json& m = d.at("motor");
            reject_unknown(m, "dataset.motor",
                           {"resistance", "l_d", "l_q", "psi", "dt", "u_max", "i_max"});
            read_field(m, "dataset.motor", "resistance", ds.motor.resistance);
            read_field(m, "dataset.motor", "l_d", ds.motor.l_d);
            read_field(m, "dataset.motor", "l_q", ds.motor.l_q);
            read_field(m, "dataset.motor", "psi", ds.motor.psi);
            read_field(m, "dataset.motor", "dt", ds.motor.dt);
            read_field(m, "dataset.motor", "u_max", ds.motor.u_max);
            read_field(m, "dataset.motor", "i_max", ds.motor.i_max);
        }
        if (d.contains("excitation")) {
            const json& e = d.at("excitation");
            reject_unknown(e, "dataset.excitation",
                           {"dwell_min", "dwell_max", "mag_low_frac", "mag_high_frac",
                            "jitter_frac", "mag_correlation", "mag_lagged", "jitter_shared",
                            "omega_min", "omega_max"});
            read_field(e, "dataset.excitation", "dwell_min", ds.excitation.dwell_min);
            read_field(e, "dataset.excitation", "dwell_max", ds.excitation.dwell_max);
            read_field(e, "dataset.excitation", "mag_low_frac", ds.excitation.mag_low_frac);
            read_field(e, "dataset.excitation", "mag_high_frac", ds.excitation.mag_high_frac);
            read_field(e, "dataset.excitation", "jitter_frac", ds.excitation.jitter_frac);
            read_field(e, "dataset.excitation", "mag_correlation",
                       ds.excitation.mag_correlation);
            read_field(e, "dataset.excitation", "mag_lagged", ds.excitation.mag_lagged);
            read_field(e, "dataset.excitation", "jitter_shared", ds.excitation.jitter_shared);
            read_field(e, "dataset.excitation", "omega_min", ds.excitation.omega_min);
            read_field(e, "dataset.excitation", "omega_max", ds.excitation.omega_max);
        }
    }

    if (j.contains("model")) {
        const json& m = j.at("model");
        reject_unknown(m, "model",
                       {"variants", "width", "enc_channels", "sep_channels", "enc_kernel",
                        "enc_dilations", "mlp_hidden"});
        auto& ms = c.model;
        if (m.contains("variants")) {
            ms.variants.clear();
            for (const auto& v : m.at("variants")) {
                try {
                    ms.variants.push_back(model::variant_from_string(v.get<std::string>()));
                } catch (const Error& e) {
                    throw ConfigError(std::string("bad value in 'variants': ") + e.what());
                }
            }
        }
        read_field(m, "model", "width", ms.width);
        read_field(m, "model", "enc_channels", ms.enc_channels);
        read_field(m, "model", "sep_channels", ms.sep_channels);
        read_field(m, "model", "enc_kernel", ms.enc_kernel);
        read_field(m, "model", "enc_dilations", ms.enc_dilations);
        read_field(m, "model", "mlp_hidden", ms.mlp_hidden);
    }

    if (j.contains("training")) {
        const json& t = j.at("training");
        reject_unknown(t, "training",
                       {"epochs", "batch_size", "horizon", "seeds", "lr", "beta1", "beta2",
                        "eps", "val_fraction", "lr_decay_factor", "lr_decay_fraction",
                        "l1"});
        auto& ts = c.training;
        read_field(t, "training", "epochs", ts.epochs);
        read_field(t, "training", "batch_size", ts.batch_size);
        read_field(t, "training", "horizon", ts.horizon);
        read_field(t, "training", "seeds", ts.seeds);
        read_field(t, "training", "lr", ts.lr);
        read_field(t, "training", "beta1", ts.beta1);
        read_field(t, "training", "beta2", ts.beta2);
        read_field(t, "training", "eps", ts.eps);
        read_field(t, "training", "val_fraction", ts.val_fraction);
        read_field(t, "training", "lr_decay_factor", ts.lr_decay_factor);
        read_field(t, "training", "lr_decay_fraction", ts.lr_decay_fraction);
        read_field(t, "training", "l1", ts.l1);
    }

    if (j.contains("evaluation")) {
        const json& e = j.at("evaluation");
        reject_unknown(e, "evaluation",
                       {"horizons", "max_horizon", "intervention_pairs", "noise_stds",
                        "trajectory_segments"});
        auto& es = c.evaluation;
        read_field(e, "evaluation", "horizons", es.horizons);
        read_field(e, "evaluation", "max_horizon", es.max_horizon);
        read_field(e, "evaluation", "noise_stds", es.noise_stds);
        read_field(e, "evaluation", "trajectory_segments", es.trajectory_segments);
        if (e.contains("intervention_pairs")) {
            es.intervention_pairs.clear();
            for (const auto& p : e.at("intervention_pairs")) {
                reject_unknown(p, "evaluation.intervention_pairs[]", {"control", "state"});
                InterventionPair pair;
                read_field(p, "intervention_pairs", "control", pair.control);
                read_field(p, "intervention_pairs", "state", pair.state);
                es.intervention_pairs.push_back(pair);
            }
        }
    }

    validate(c);
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json variants = json::array();
    for (auto v : c.model.variants) variants.push_back(model::to_string(v));
    json pairs = json::array();
    for (const auto& p : c.evaluation.intervention_pairs) {
        pairs.push_back({{"control", p.control}, {"state", p.state}});
    }
    return json{
        {"dataset",
         {{"kind", c.dataset.kind},
          {"scenario_id", c.dataset.scenario_id},
          {"csv_path", c.dataset.csv_path},
          {"csv_train_fraction", c.dataset.csv_train_fraction},
          {"train_segments", c.dataset.train_segments},
          {"test_segments", c.dataset.test_segments},
          {"train_series", c.dataset.train_series},
          {"test_series", c.dataset.test_series},
          {"series_length", c.dataset.series_length},
          {"t_len", c.dataset.t_len},
          {"horizon", c.dataset.horizon},
          {"seed", c.dataset.seed},
          {"coeff_a", c.dataset.coeff_a},
          {"coeff_b", c.dataset.coeff_b},
          {"coeff_d", c.dataset.coeff_d},
          {"iid_alpha_low", c.dataset.iid_alpha_low},
          {"iid_alpha_high", c.dataset.iid_alpha_high},
          {"motor",
           {{"resistance", c.dataset.motor.resistance},
            {"l_d", c.dataset.motor.l_d},
            {"l_q", c.dataset.motor.l_q},
            {"psi", c.dataset.motor.psi},
            {"dt", c.dataset.motor.dt},
            {"u_max", c.dataset.motor.u_max},
            {"i_max", c.dataset.motor.i_max}}},
          {"excitation",
           {{"dwell_min", c.dataset.excitation.dwell_min},
            {"dwell_max", c.dataset.excitation.dwell_max},
            {"mag_low_frac", c.dataset.excitation.mag_low_frac},
            {"mag_high_frac", c.dataset.excitation.mag_high_frac},
            {"jitter_frac", c.dataset.excitation.jitter_frac},
            {"mag_correlation", c.dataset.excitation.mag_correlation},
            {"mag_lagged", c.dataset.excitation.mag_lagged},
            {"jitter_shared", c.dataset.excitation.jitter_shared},
            {"omega_min", c.dataset.excitation.omega_min},
            {"omega_max", c.dataset.excitation.omega_max}}}}},
        {"model",
         {{"variants", variants},
          {"width", c.model.width},
          {"enc_channels", c.model.enc_channels},
          {"sep_channels", c.model.sep_channels},
          {"enc_kernel", c.model.enc_kernel},
          {"enc_dilations", c.model.enc_dilations},
          {"mlp_hidden", c.model.mlp_hidden}}},
        {"training",
         {{"epochs", c.training.epochs},
          {"batch_size", c.training.batch_size},
          {"horizon", c.training.horizon},
          {"seeds", c.training.seeds},
          {"lr", c.training.lr},
          {"beta1", c.training.beta1},
          {"beta2", c.training.beta2},
          {"eps", c.training.eps},
          {"val_fraction", c.training.val_fraction},
          {"lr_decay_factor", c.training.lr_decay_factor},
          {"lr_decay_fraction", c.training.lr_decay_fraction},
          {"l1", c.training.l1}}},
        {"evaluation",
         {{"horizons", c.evaluation.horizons},
          {"max_horizon", c.evaluation.max_horizon},
          {"intervention_pairs", pairs},
          {"noise_stds", c.evaluation.noise_stds},
          {"trajectory_segments", c.evaluation.trajectory_segments}}},
        {"output_dir", c.output_dir}};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config is not valid JSON: " + path.string());
    return config_from_json(j);
}

void validate(const ExperimentConfig& c) {
    const auto& ds = c.dataset;
    if (ds.kind != "narma" && ds.kind != "pmsm-sim" && ds.kind != "pmsm-csv") {
        throw ConfigError("dataset.kind must be narma|pmsm-sim|pmsm-csv, got '" + ds.kind + "'");
    }
    if (ds.kind == "narma" && (ds.scenario_id < 1 || ds.scenario_id > 4)) {
        throw ConfigError("dataset.scenario_id must be in 1..4, got " +
                          std::to_string(ds.scenario_id));
    }
    if (ds.kind == "pmsm-csv" && ds.csv_path.empty()) {
        throw ConfigError("dataset.csv_path required for kind pmsm-csv");
    }
    if (ds.train_segments < 1 || ds.test_segments < 1) {
        throw ConfigError("dataset segment counts must be >= 1");
    }
    if (ds.t_len < 1 || ds.horizon < 1) throw ConfigError("dataset t_len and horizon must be >= 1");
    if (ds.series_length < ds.t_len + ds.horizon) {
        throw ConfigError("dataset.series_length must be >= t_len + horizon");
    }
    if (!(ds.iid_alpha_low < ds.iid_alpha_high) || ds.iid_alpha_low < 0 ||
        ds.iid_alpha_high > 1) {
        throw ConfigError("dataset IID alpha interval must satisfy 0 <= low < high <= 1");
    }
    if (c.model.variants.empty()) throw ConfigError("model.variants must not be empty");
    if (c.training.seeds.empty()) throw ConfigError("training.seeds must not be empty");
    {
        std::set<std::uint64_t> uniq(c.training.seeds.begin(), c.training.seeds.end());
        if (uniq.size() != c.training.seeds.size()) {
            throw ConfigError("training.seeds must be distinct");
        }
    }
    if (c.training.horizon < 1 || c.training.horizon > ds.horizon) {
        throw ConfigError("training.horizon must be in [1, dataset.horizon]");
    }
    if (c.training.epochs < 0) throw ConfigError("training.epochs must be >= 0");
    if (!(c.training.lr > 0)) throw ConfigError("training.lr must be > 0");
    if (c.training.val_fraction < 0 || c.training.val_fraction >= 1) {
        throw ConfigError("training.val_fraction must be in [0, 1)");
    }
    for (int h : c.evaluation.horizons) {
        if (h < 1 || h > ds.horizon) {
            throw ConfigError("evaluation.horizons entries must be in [1, dataset.horizon]");
        }
    }
    if (c.evaluation.max_horizon < 0 || c.evaluation.max_horizon > ds.horizon) {
        throw ConfigError("evaluation.max_horizon must be in [0, dataset.horizon]");
    }
    for (const auto& p : c.evaluation.intervention_pairs) {
        if (p.control < 1 || p.control > 2 || p.state < 1 || p.state > 2) {
            throw ConfigError("intervention pair indices are 1-based and must be 1 or 2");
        }
    }
    if (c.output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

std::string dataset_fingerprint(const ExperimentConfig& c) {
    const std::string txt = config_to_json(c).at("dataset").dump();
    return hash_string({txt.data(), txt.size()});
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& c) {
    std::filesystem::path out(c.output_dir);
    const char* root = std::getenv("TSF_OUT_ROOT");
    if (root && *root && out.is_relative()) return std::filesystem::path(root) / out;
    return out;
}

model::ModelConfig model_config(const ExperimentConfig& c, model::VariantId variant) {
    model::ModelConfig mc;
    mc.variant = variant;
    mc.n = 2;
    mc.t_len = c.dataset.t_len;
    mc.width = c.model.width;
    mc.enc_channels = c.model.enc_channels;
    mc.sep_channels = c.model.sep_channels;
    mc.enc_kernel = c.model.enc_kernel;
    mc.enc_dilations = c.model.enc_dilations;
    mc.mlp_hidden = c.model.mlp_hidden;
    return mc;
}

ExperimentConfig preset(const std::string& experiment_id, const std::string& scale) {
    ExperimentConfig c;
    int scenario = 0;
    if (experiment_id == "pmsm") {
        scenario = -1;
    } else if (experiment_id.rfind("narma-", 0) == 0 && experiment_id.size() == 7 &&
               experiment_id[6] >= '1' && experiment_id[6] <= '4') {
        scenario = experiment_id[6] - '0';
    } else {
        throw ConfigError("unknown experiment id '" + experiment_id +
                          "' (expected narma-1..narma-4 or pmsm)");
    }
    if (scale != "full" && scale != "desk" && scale != "smoke") {
        throw ConfigError("unknown scale '" + scale + "' (expected full|desk|smoke)");
    }

    if (scenario > 0) {
        c.dataset.kind = "narma";
        c.dataset.scenario_id = scenario;
        c.dataset.t_len = 11;
        c.dataset.horizon = 5;
        c.dataset.series_length = 60;
        // Intervention pairs follow the scenario's zero couplings.
        if (scenario == 1) {
            c.evaluation.intervention_pairs = {{2, 1}, {1, 2}};
        } else if (scenario == 2) {
            c.evaluation.intervention_pairs = {{2, 1}};
        } else if (scenario == 3) {
            c.evaluation.intervention_pairs = {{1, 2}};
        }
        c.evaluation.max_horizon = 0;
        c.evaluation.horizons = {1, 5};
    } else {
        c.dataset.kind = "pmsm-sim";
        c.dataset.t_len = 10;
        c.dataset.horizon = 50;
        c.dataset.series_length = 400;
        c.evaluation.max_horizon = 50;
        c.evaluation.horizons = {1, 5};
    }

    if (scale == "full") {
        c.dataset.train_segments = scenario > 0 ? 8000 : 4000;
        c.dataset.test_segments = scenario > 0 ? 2000 : 1000;
        c.dataset.train_series = scenario > 0 ? 2000 : 400;
        c.dataset.test_series = scenario > 0 ? 400 : 100;
        c.training.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
        c.training.epochs = 30;
    } else if (scale == "desk") {
        c.dataset.train_segments = scenario > 0 ? 2000 : 1000;
        c.dataset.test_segments = scenario > 0 ? 500 : 300;
        c.dataset.train_series = scenario > 0 ? 500 : 100;
        c.dataset.test_series = scenario > 0 ? 100 : 30;
        c.training.seeds = {1, 2, 3};
        c.training.epochs = 30;
    } else {  // smoke
        c.dataset.train_segments = 200;
        c.dataset.test_segments = 100;
        c.dataset.train_series = 50;
        c.dataset.test_series = 20;
        c.training.seeds = {1};
        c.training.epochs = 2;
        if (scenario < 0) {
            c.dataset.horizon = 10;
            c.evaluation.max_horizon = 10;
        }
    }
    // The motor variants separate more slowly; give them a longer budget.
    if (scenario < 0 && scale != "smoke") c.training.epochs = 60;
    c.output_dir = experiment_id + "-" + scale;
    validate(c);
    return c;
}

}  // namespace tsf::experiment
