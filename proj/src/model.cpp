#include "tsf/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "tsf/errors.hpp"
#include "tsf/rng.hpp"

namespace tsf::model {

using nlohmann::json;

std::string to_string(VariantId v) {
    switch (v) {
        case VariantId::baseline: return "baseline";
        case VariantId::baseline_sc: return "baseline_sc";
        case VariantId::ours_hd: return "ours_hd";
        case VariantId::ours: return "ours";
    }
    throw ParamError("bad variant id");
}

VariantId variant_from_string(const std::string& name) {
    if (name == "baseline") return VariantId::baseline;
    if (name == "baseline_sc") return VariantId::baseline_sc;
    if (name == "ours_hd") return VariantId::ours_hd;
    if (name == "ours") return VariantId::ours;
    throw ParamError("unknown variant '" + name +
                     "' (expected baseline|baseline_sc|ours_hd|ours)");
}

bool has_separate_controls(VariantId v) { return v != VariantId::baseline; }
bool has_structured_transition(VariantId v) {
    return v == VariantId::ours_hd || v == VariantId::ours;
}
bool has_hard_decoder(VariantId v) { return v == VariantId::ours_hd; }

int Forecaster::add_param(const std::string& name, Shape shape, int fan_in, Rng& rng) {
    Tensor t = Tensor::zeros(std::move(shape));
    if (fan_in > 0) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (double& v : t.data) v = rng.uniform(-bound, bound);
    }
    t.ensure_grad();
    params_.push_back({name, std::move(t)});
    return static_cast<int>(params_.size() - 1);
}

Forecaster::Linear Forecaster::add_linear(const std::string& name, int in, int out, Rng& rng) {
    Linear lin;
    lin.w = add_param(name + ".w", {in, out}, in, rng);
    lin.b = add_param(name + ".b", {out}, 0, rng);
    return lin;
}

Forecaster::Encoder Forecaster::add_encoder(const std::string& name, int c_in, int c_out,
                                            int hidden, Rng& rng) {
    Encoder enc;
    const int layers = static_cast<int>(cfg_.enc_dilations.size());
    const int k = cfg_.enc_kernel;
    for (int l = 0; l < layers; ++l) {
        const int in_ch = l == 0 ? c_in : hidden;
        const int out_ch = l == layers - 1 ? c_out : hidden;
        ConvLayer layer;
        layer.dilation = cfg_.enc_dilations[static_cast<std::size_t>(l)];
        layer.w = add_param(name + ".conv" + std::to_string(l) + ".w", {out_ch, in_ch, k},
                            in_ch * k, rng);
        layer.b = add_param(name + ".conv" + std::to_string(l) + ".b", {out_ch, 1}, 0, rng);
        enc.layers.push_back(layer);
    }
    return enc;
}

Forecaster::Forecaster(ModelConfig cfg, std::uint64_t init_seed) : cfg_(std::move(cfg)) {
    if (cfg_.n < 1 || cfg_.width < 1 || cfg_.t_len < 1) {
        throw ParamError("model config: n, width and t_len must be >= 1");
    }
    if (cfg_.enc_dilations.empty()) throw ParamError("model config: need encoder layers");
    Rng rng(init_seed, streams::kParamInit);
    const int n = cfg_.n;
    const int latent = cfg_.latent();

    state_enc_ = add_encoder("state_enc", n, latent, cfg_.enc_channels, rng);
    if (has_separate_controls(cfg_.variant)) {
        for (int c = 0; c < n; ++c) {
            ctrl_enc_sep_.push_back(add_encoder("ctrl_enc" + std::to_string(c), 1, cfg_.width,
                                                cfg_.sep_channels, rng));
        }
    } else {
        ctrl_enc_common_ = add_encoder("ctrl_enc", n, latent, cfg_.enc_channels, rng);
    }
    if (has_structured_transition(cfg_.variant)) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                f1_.push_back(add_linear(
                    "trans.f1." + std::to_string(i + 1) + "." + std::to_string(j + 1),
                    2 * cfg_.width, cfg_.width, rng));
            }
        }
        for (int j = 0; j < n; ++j) {
            f2_.push_back(
                add_linear("trans.f2." + std::to_string(j + 1), latent, cfg_.width, rng));
        }
    } else {
        const int hidden = cfg_.mlp_hidden_or_default();
        mlp1_ = add_linear("trans.mlp1", 2 * latent, hidden, rng);
        mlp2_ = add_linear("trans.mlp2", hidden, latent, rng);
    }
    if (has_hard_decoder(cfg_.variant)) {
        for (int j = 0; j < n; ++j) {
            dec_hard_.push_back(add_linear("dec" + std::to_string(j + 1), cfg_.width, 1, rng));
        }
    } else {
        dec_common_ = add_linear("dec", latent, n, rng);
    }
}

std::vector<Tensor*> Forecaster::param_tensors() {
    std::vector<Tensor*> out;
    out.reserve(params_.size());
    for (auto& p : params_) out.push_back(&p.value);
    return out;
}

std::vector<std::string> Forecaster::param_names() const {
    std::vector<std::string> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(p.name);
    return out;
}

std::size_t Forecaster::param_count() const {
    std::size_t total = 0;
    for (const auto& p : params_) total += p.value.numel();
    return total;
}

std::size_t Forecaster::transition_param_count() const {
    std::size_t total = 0;
    for (const auto& p : params_) {
        if (p.name.rfind("trans.", 0) == 0) total += p.value.numel();
    }
    return total;
}

void Forecaster::zero_grads() {
    for (auto& p : params_) p.value.zero_grad();
}

Var Forecaster::run_linear(Tape& t, const Linear& lin, Var x) {
    return t.add(t.matmul(x, t.leaf(p(lin.w))), t.leaf(p(lin.b)));
}

Var Forecaster::run_encoder(Tape& t, const Encoder& enc, Var input) {
    Var h = input;
    for (std::size_t l = 0; l < enc.layers.size(); ++l) {
        const ConvLayer& layer = enc.layers[l];
        h = t.conv1d_causal(h, t.leaf(p(layer.w)), layer.dilation);
        h = t.add(h, t.leaf(p(layer.b)));
        if (l + 1 < enc.layers.size()) h = t.relu(h);
    }
    return t.last_timestep(h);
}

Var Forecaster::encode_state(Tape& t, Var x_past) {
    const Shape& s = t.shape(x_past);
    if (s.size() != 3 || s[1] != cfg_.n) {
        throw ShapeError("encode_state expects [batch, n, T], got " + shape_str(s));
    }
    return run_encoder(t, state_enc_, x_past);
}

Var Forecaster::encode_controls_common(Tape& t, Var u_win) {
    if (ctrl_enc_common_.layers.empty()) {
        throw UsageError("variant " + to_string(cfg_.variant) + " has no common control encoder");
    }
    const Shape& s = t.shape(u_win);
    if (s.size() != 3 || s[1] != cfg_.n) {
        throw ShapeError("encode_controls_common expects [batch, n, T], got " + shape_str(s));
    }
    return run_encoder(t, ctrl_enc_common_, u_win);
}

Var Forecaster::encode_controls_separate(Tape& t, std::span<const Var> per_control) {
    if (ctrl_enc_sep_.empty()) {
        throw UsageError("variant " + to_string(cfg_.variant) +
                         " has no separate control encoders");
    }
    if (static_cast<int>(per_control.size()) != cfg_.n) {
        throw ConfigError("encode_controls_separate: got " +
                          std::to_string(per_control.size()) + " windows for n=" +
                          std::to_string(cfg_.n) + " encoders");
    }
    std::vector<Var> blocks;
    blocks.reserve(per_control.size());
    for (int c = 0; c < cfg_.n; ++c) {
        const Shape& s = t.shape(per_control[static_cast<std::size_t>(c)]);
        if (s.size() != 3 || s[1] != 1) {
            throw ShapeError("separate control window must be [batch, 1, T], got " +
                             shape_str(s));
        }
        blocks.push_back(
            run_encoder(t, ctrl_enc_sep_[static_cast<std::size_t>(c)],
                        per_control[static_cast<std::size_t>(c)]));
    }
    return t.concat(blocks, 1);
}

Var Forecaster::encode_controls(Tape& t, const std::vector<double>& u_win, int batch) {
    const int n = cfg_.n;
    const int T = cfg_.t_len;
    if (u_win.size() != static_cast<std::size_t>(batch) * n * T) {
        throw ShapeError("control window buffer size mismatch");
    }
    if (!has_separate_controls(cfg_.variant)) {
        return encode_controls_common(t, t.input({batch, n, T}, u_win));
    }
    std::vector<Var> per_control;
    std::vector<double> chan(static_cast<std::size_t>(batch) * T);
    for (int c = 0; c < n; ++c) {
        for (int b = 0; b < batch; ++b) {
            std::memcpy(chan.data() + static_cast<std::size_t>(b) * T,
                        u_win.data() + (static_cast<std::size_t>(b) * n + c) * T,
                        static_cast<std::size_t>(T) * sizeof(double));
        }
        per_control.push_back(t.input({batch, 1, T}, chan));
    }
    return encode_controls_separate(t, per_control);
}

Var Forecaster::transition_mlp(Tape& t, Var z, Var h) {
    if (mlp1_.w < 0) {
        throw UsageError("variant " + to_string(cfg_.variant) + " has no MLP transition");
    }
    const std::vector<Var> zh = {z, h};
    Var x = t.concat(zh, 1);
    x = t.relu(run_linear(t, mlp1_, x));
    return run_linear(t, mlp2_, x);
}

Var Forecaster::transition_structured(Tape& t, Var z, Var h) {
    if (f1_.empty()) {
        throw UsageError("variant " + to_string(cfg_.variant) + " has no structured transition");
    }
    const int n = cfg_.n;
    const int L = cfg_.width;
    std::vector<Var> pair_cat(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const std::vector<Var> zi_hi = {t.slice_cols(z, i * L, (i + 1) * L),
                                        t.slice_cols(h, i * L, (i + 1) * L)};
        pair_cat[static_cast<std::size_t>(i)] = t.concat(zi_hi, 1);
    }
    std::vector<Var> out_blocks(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        std::vector<Var> contributions(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            contributions[static_cast<std::size_t>(i)] = t.relu(run_linear(
                t, f1_[static_cast<std::size_t>(i * n + j)], pair_cat[static_cast<std::size_t>(i)]));
        }
        Var collected = t.concat(contributions, 1);
        out_blocks[static_cast<std::size_t>(j)] =
            run_linear(t, f2_[static_cast<std::size_t>(j)], collected);
    }
    return t.concat(out_blocks, 1);
}

Var Forecaster::transition(Tape& t, Var z, Var h) {
    return has_structured_transition(cfg_.variant) ? transition_structured(t, z, h)
                                                   : transition_mlp(t, z, h);
}

Var Forecaster::decode_common(Tape& t, Var zt) {
    if (dec_common_.w < 0) {
        throw UsageError("variant " + to_string(cfg_.variant) + " has no common decoder");
    }
    return run_linear(t, dec_common_, zt);
}

Var Forecaster::decode_hard(Tape& t, Var zt) {
    if (dec_hard_.empty()) {
        throw UsageError("variant " + to_string(cfg_.variant) + " has no hard decoder");
    }
    if (static_cast<int>(dec_hard_.size()) != cfg_.n) {
        throw ConfigError("hard decoder parameter count mismatch");
    }
    const int L = cfg_.width;
    std::vector<Var> outs(static_cast<std::size_t>(cfg_.n));
    for (int j = 0; j < cfg_.n; ++j) {
        Var block = t.slice_cols(zt, j * L, (j + 1) * L);
        outs[static_cast<std::size_t>(j)] = run_linear(t, dec_hard_[static_cast<std::size_t>(j)], block);
    }
    return t.concat(outs, 1);
}

Var Forecaster::decode(Tape& t, Var zt) {
    return has_hard_decoder(cfg_.variant) ? decode_hard(t, zt) : decode_common(t, zt);
}

Forecaster::Rollout Forecaster::rollout(Tape& t, const SegmentBatch& batch, int horizon) {
    if (batch.n != cfg_.n || batch.t_len != cfg_.t_len) {
        throw ShapeError("segment batch does not match model dims (n=" + std::to_string(batch.n) +
                         ", T=" + std::to_string(batch.t_len) + ")");
    }
    const int B = batch.count();
    Var x_past = t.input({B, cfg_.n, cfg_.t_len}, batch.x_past);
    Var z = encode_state(t, x_past);
    return rollout_from(t, z, batch, 0, horizon);
}

Forecaster::Rollout Forecaster::rollout_from(Tape& t, Var z0, const SegmentBatch& batch,
                                             int first_step, int horizon) {
    if (horizon < 1) throw ParamError("rollout: horizon must be >= 1");
    if (first_step < 0) throw ParamError("rollout: first_step must be >= 0");
    if (first_step + horizon - 1 > batch.horizon) {
        throw ParamError("rollout: segments carry " + std::to_string(batch.horizon) +
                         " future control steps, need " +
                         std::to_string(first_step + horizon - 1));
    }
    const int B = batch.count();
    const int n = cfg_.n;
    const int T = cfg_.t_len;
    const int M = batch.horizon;

    Rollout out;
    out.step_pred.reserve(static_cast<std::size_t>(horizon));
    Var z = z0;
    std::vector<double> win(static_cast<std::size_t>(B) * n * T);
    for (int i = first_step + 1; i <= first_step + horizon; ++i) {
        // Control window for step i covers series offsets [i-1, T+i-1): the
        // trailing T controls known at forecast time t+i-1.
        for (int b = 0; b < B; ++b) {
            for (int c = 0; c < n; ++c) {
                double* dst = win.data() + (static_cast<std::size_t>(b) * n + c) * T;
                for (int tau = 0; tau < T; ++tau) {
                    const int g = i - 1 + tau;
                    dst[tau] = g < T
                                   ? batch.u_past[(static_cast<std::size_t>(b) * n + c) * T + g]
                                   : batch.u_future[(static_cast<std::size_t>(b) * n + c) * M +
                                                    (g - T)];
                }
            }
        }
        Var h = encode_controls(t, win, B);
        z = transition(t, z, h);
        out.step_pred.push_back(decode(t, z));
    }
    out.final_z = z;
    return out;
}

namespace {

json config_to_json(const ModelConfig& c) {
    return json{{"variant", to_string(c.variant)},
                {"n", c.n},
                {"t_len", c.t_len},
                {"width", c.width},
                {"enc_channels", c.enc_channels},
                {"sep_channels", c.sep_channels},
                {"enc_kernel", c.enc_kernel},
                {"enc_dilations", c.enc_dilations},
                {"mlp_hidden", c.mlp_hidden}};
}

ModelConfig config_from_json(const json& j) {
    ModelConfig c;
    c.variant = variant_from_string(j.at("variant").get<std::string>());
    c.n = j.at("n").get<int>();
    c.t_len = j.at("t_len").get<int>();
    c.width = j.at("width").get<int>();
    c.enc_channels = j.at("enc_channels").get<int>();
    c.sep_channels = j.at("sep_channels").get<int>();
    c.enc_kernel = j.at("enc_kernel").get<int>();
    c.enc_dilations = j.at("enc_dilations").get<std::vector<int>>();
    c.mlp_hidden = j.at("mlp_hidden").get<int>();
    return c;
}

constexpr char kMagic[8] = {'T', 'S', 'F', 'C', 'K', 'P', 'T', '1'};

}  // namespace

void Forecaster::save(const std::filesystem::path& path, const json& extra) const {
    json header;
    header["format"] = "tsf-checkpoint";
    header["version"] = 1;
    header["config"] = config_to_json(cfg_);
    json ptable = json::array();
    std::size_t offset = 0;
    for (const auto& p : params_) {
        ptable.push_back({{"name", p.name}, {"shape", p.value.shape}, {"offset", offset}});
        offset += p.value.numel();
    }
    header["params"] = ptable;
    header["extra"] = extra;
    const std::string htxt = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint " + path.string());
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t hlen = htxt.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(htxt.data(), static_cast<std::streamsize>(htxt.size()));
    for (const auto& p : params_) {
        out.write(reinterpret_cast<const char*>(p.value.data.data()),
                  static_cast<std::streamsize>(p.value.numel() * sizeof(double)));
    }
    if (!out) throw IoError("checkpoint write failed: " + path.string());
}

Forecaster Forecaster::load(const std::filesystem::path& path, json* extra_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw FormatError("not a checkpoint file: " + path.string());
    }
    std::uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    std::string htxt(hlen, '\0');
    in.read(htxt.data(), static_cast<std::streamsize>(hlen));
    if (!in) throw FormatError("truncated checkpoint header: " + path.string());
    json header = json::parse(htxt, nullptr, false);
    if (header.is_discarded()) throw FormatError("bad checkpoint header JSON: " + path.string());

    Forecaster model(config_from_json(header.at("config")), 0);
    const json& ptable = header.at("params");
    if (ptable.size() != model.params_.size()) {
        throw FormatError("checkpoint parameter table size mismatch");
    }
    for (std::size_t i = 0; i < model.params_.size(); ++i) {
        const json& entry = ptable[i];
        Param& p = model.params_[i];
        if (entry.at("name").get<std::string>() != p.name ||
            entry.at("shape").get<Shape>() != p.value.shape) {
            throw FormatError("checkpoint parameter mismatch at index " + std::to_string(i));
        }
        in.read(reinterpret_cast<char*>(p.value.data.data()),
                static_cast<std::streamsize>(p.value.numel() * sizeof(double)));
        if (!in) throw FormatError("truncated checkpoint blob: " + path.string());
    }
    if (extra_out) *extra_out = header.value("extra", json::object());
    return model;
}

}  // namespace tsf::model
