#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsf/dataset.hpp"
#include "tsf/tape.hpp"

namespace tsf::model {

// The four architecture variants. They differ only in inductive bias:
//   baseline     common control encoder + MLP transition + common decoder
//   baseline_sc  separate control encoders + MLP transition + common decoder
//   ours_hd      separate control encoders + structured transition + per-state decoders
//   ours         separate control encoders + structured transition + common decoder
enum class VariantId { baseline, baseline_sc, ours_hd, ours };

std::string to_string(VariantId v);
VariantId variant_from_string(const std::string& name);
bool has_separate_controls(VariantId v);
bool has_structured_transition(VariantId v);
bool has_hard_decoder(VariantId v);

struct ModelConfig {
    VariantId variant = VariantId::baseline;
    int n = 2;        // state = control dimension
    int t_len = 11;   // encoder window T
    int width = 8;    // L, per-variable representation width
    int enc_channels = 16;  // hidden channels, state + common control encoders
    int sep_channels = 8;   // hidden channels, each separate control encoder
    int enc_kernel = 3;
    std::vector<int> enc_dilations = {1, 2, 4};
    int mlp_hidden = 0;  // 0 -> 2*n*width

    int latent() const { return n * width; }
    int mlp_hidden_or_default() const { return mlp_hidden > 0 ? mlp_hidden : 2 * n * width; }
};

struct Param {
    std::string name;
    Tensor value;
};

class Forecaster {
public:
    // Kaiming-style uniform fan-in init for weights, zero biases, drawn from
    // the given seed in a fixed parameter order.
    Forecaster(ModelConfig cfg, std::uint64_t init_seed);

    const ModelConfig& config() const { return cfg_; }
    std::vector<Param>& params() { return params_; }
    const std::vector<Param>& params() const { return params_; }
    std::vector<Tensor*> param_tensors();
    std::vector<std::string> param_names() const;
    std::size_t param_count() const;             // total scalar parameters
    std::size_t transition_param_count() const;  // transition model only
    void zero_grads();

    // Encoders. Windows are [batch, channels, T]; representations are
    // [batch, n*L] with block i (columns [i*L, (i+1)*L)) belonging to
    // variable i.
    Var encode_state(Tape& t, Var x_past);
    Var encode_controls_common(Tape& t, Var u_win);
    Var encode_controls_separate(Tape& t, std::span<const Var> per_control);  // n x [B,1,T]
    // Dispatches on the variant; `u_win` is [B, n, T] raw window data.
    Var encode_controls(Tape& t, const std::vector<double>& u_win, int batch);

    // Transition models: ([B,nL], [B,nL]) -> [B,nL].
    Var transition_mlp(Tape& t, Var z, Var h);
    Var transition_structured(Tape& t, Var z, Var h);
    Var transition(Tape& t, Var z, Var h);

    // Decoders: [B,nL] -> [B,n].
    Var decode_common(Tape& t, Var zt);
    Var decode_hard(Tape& t, Var zt);
    Var decode(Tape& t, Var zt);

    struct Rollout {
        std::vector<Var> step_pred;  // horizon entries of [B,n]
        Var final_z = -1;
    };

    // M-step latent rollout over a segment batch: encode x_past once, then per
    // step i (1-based) re-encode the control window ending at t+i-1 and feed
    // the predicted latent back. The state encoder never sees predictions.
    Rollout rollout(Tape& t, const SegmentBatch& batch, int horizon);

    // Continue from a saved latent: steps first_step+1 .. first_step+horizon.
    // rollout(b, a+b_steps) and rollout(b, a) + rollout_from(final_z, a, b_steps)
    // produce bit-identical predictions.
    Rollout rollout_from(Tape& t, Var z0, const SegmentBatch& batch, int first_step, int horizon);

    // Checkpoint: JSON header (config, parameter table, caller extras) + raw
    // little-endian f64 blob in parameter-table order.
    void save(const std::filesystem::path& path, const nlohmann::json& extra) const;
    static Forecaster load(const std::filesystem::path& path, nlohmann::json* extra_out = nullptr);

private:
    struct Linear {
        int w = -1, b = -1;
    };
    struct ConvLayer {
        int w = -1, b = -1;
        int dilation = 1;
    };
    struct Encoder {
        std::vector<ConvLayer> layers;
    };

    int add_param(const std::string& name, Shape shape, int fan_in, Rng& rng);
    Linear add_linear(const std::string& name, int in, int out, Rng& rng);
    Encoder add_encoder(const std::string& name, int c_in, int c_out, int hidden, Rng& rng);
    Var run_encoder(Tape& t, const Encoder& enc, Var input);
    Var run_linear(Tape& t, const Linear& lin, Var x);
    Tensor& p(int idx) { return params_[static_cast<std::size_t>(idx)].value; }

    ModelConfig cfg_;
    std::vector<Param> params_;

    Encoder state_enc_;
    Encoder ctrl_enc_common_;
    std::vector<Encoder> ctrl_enc_sep_;
    Linear mlp1_, mlp2_;
    std::vector<Linear> f1_;  // n*n entries, f1_[i*n+j]
    std::vector<Linear> f2_;  // n entries
    Linear dec_common_;
    std::vector<Linear> dec_hard_;
};

}  // namespace tsf::model
