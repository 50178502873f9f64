// Acceptance suite: runs every criterion end to end and prints one PASS/FAIL
// line per criterion. Criteria 4-8 train the full desk-scale experiments, so
// the whole binary takes several minutes on a small machine.
//
// Usage: acceptance [--only N] [--jobs N] [--keep]

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>
#include <vector>

#include <json.hpp>

#include "support/finite_diff.hpp"
#include "support/model_helpers.hpp"
#include "support/narma_oracle.hpp"
#include "tsf/cli.hpp"
#include "tsf/csv.hpp"
#include "tsf/errors.hpp"
#include "tsf/experiment.hpp"
#include "tsf/metrics.hpp"
#include "tsf/model.hpp"
#include "tsf/narma.hpp"
#include "tsf/pmsm.hpp"
#include "tsf/runner.hpp"
#include "tsf/tape.hpp"

using namespace tsf;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int g_jobs = 2;
bool g_keep = false;
int g_failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": " << name
              << " -- " << detail << "\n";
    std::cout.flush();
    if (!pass) ++g_failures;
}

fs::path work_root() {
    static fs::path root = [] {
        fs::path p = fs::temp_directory_path() / "tsf_acceptance";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return root;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// ---------------------------------------------------------------------------
// Criterion 1: gradient suite. Every differentiable op plus the end-to-end
// model (n=2, L=2, T=4, M=2) against central finite differences, max relative
// error < 1e-4, in under 30 s.
// ---------------------------------------------------------------------------
void criterion_1() {
    Timer timer;
    double worst = 0.0;
    std::string worst_site = "none";
    auto track = [&](const std::string& site, double err) {
        if (err > worst) {
            worst = err;
            worst_site = site;
        }
    };

    Rng rng(20240811);
    auto rand_tensor = [&](Shape s) {
        Tensor t = Tensor::zeros(std::move(s));
        for (auto& v : t.data) v = rng.uniform(-1.5, 1.5);
        return t;
    };

    {  // elementwise add/sub/mul with broadcasting, relu, tanh, scale
        Tensor a = rand_tensor({3, 4});
        Tensor b = rand_tensor({4});
        a.ensure_grad();
        b.ensure_grad();
        auto fwd = [&]() {
            Tape t;
            Var mixed = t.mul(t.sub(t.add(t.leaf(a), t.leaf(b)), t.leaf(b)), t.leaf(a));
            Var acts = t.add(t.relu(mixed), t.tanh(t.scale(mixed, 0.3)));
            return t.scalar_val(t.sum(acts));
        };
        Tape t;
        Var mixed = t.mul(t.sub(t.add(t.leaf(a), t.leaf(b)), t.leaf(b)), t.leaf(a));
        Var acts = t.add(t.relu(mixed), t.tanh(t.scale(mixed, 0.3)));
        t.backward(t.sum(acts));
        track("elementwise/a", test::max_rel_error(a.grad, test::finite_diff(fwd, a)));
        track("elementwise/b", test::max_rel_error(b.grad, test::finite_diff(fwd, b)));
    }
    {  // matmul + mse
        Tensor w = rand_tensor({4, 3});
        Tensor x = rand_tensor({5, 4});
        Tensor y = rand_tensor({5, 3});
        w.ensure_grad();
        auto fwd = [&]() {
            Tape t;
            return t.scalar_val(t.mse(t.matmul(t.input(x), t.leaf(w)), t.input(y)));
        };
        Tape t;
        t.backward(t.mse(t.matmul(t.input(x), t.leaf(w)), t.input(y)));
        track("matmul+mse", test::max_rel_error(w.grad, test::finite_diff(fwd, w)));
    }
    {  // causal conv (input and kernels), concat, slice, last_timestep
        Tensor in = rand_tensor({2, 2, 6});
        Tensor k1 = rand_tensor({3, 2, 3});
        Tensor k2 = rand_tensor({2, 3, 2});
        in.ensure_grad();
        k1.ensure_grad();
        k2.ensure_grad();
        auto fwd = [&]() {
            Tape t;
            Var c1 = t.relu(t.conv1d_causal(t.leaf(in), t.leaf(k1), 2));
            Var c2 = t.conv1d_causal(c1, t.leaf(k2), 1);
            Var read = t.last_timestep(c2);
            const std::vector<Var> parts = {read, read};
            return t.scalar_val(t.sum(t.slice_cols(t.concat(parts, 1), 1, 3)));
        };
        Tape t;
        Var c1 = t.relu(t.conv1d_causal(t.leaf(in), t.leaf(k1), 2));
        Var c2 = t.conv1d_causal(c1, t.leaf(k2), 1);
        Var read = t.last_timestep(c2);
        const std::vector<Var> parts = {read, read};
        t.backward(t.sum(t.slice_cols(t.concat(parts, 1), 1, 3)));
        track("conv/input", test::max_rel_error(in.grad, test::finite_diff(fwd, in)));
        track("conv/kernels", test::max_rel_error(k1.grad, test::finite_diff(fwd, k1)));
        track("conv/kernels2", test::max_rel_error(k2.grad, test::finite_diff(fwd, k2)));
    }
    // End-to-end: every variant at n=2, L=2, T=4, M=2.
    const SegmentBatch tiny = test::random_segments(3, 2, 4, 2, 7);
    for (auto v : {model::VariantId::baseline, model::VariantId::baseline_sc,
                   model::VariantId::ours_hd, model::VariantId::ours}) {
        model::ModelConfig cfg;
        cfg.variant = v;
        cfg.n = 2;
        cfg.t_len = 4;
        cfg.width = 2;
        cfg.enc_channels = 3;
        cfg.sep_channels = 2;
        cfg.enc_dilations = {1, 2};
        model::Forecaster fc(cfg, 5);
        test::backward_loss(fc, tiny, 2);
        auto fwd = [&]() { return test::forward_loss(fc, tiny, 2); };
        for (auto& p : fc.params()) {
            track("end-to-end/" + model::to_string(v) + "/" + p.name,
                  test::max_rel_error(p.value.grad, test::finite_diff(fwd, p.value)));
        }
    }
    const double secs = timer.seconds();
    char detail[160];
    std::snprintf(detail, sizeof(detail), "max rel err %.2e (worst at %s), %.1f s (< 30 s)",
                  worst, worst_site.c_str(), secs);
    report(1, "gradient suite", worst < 1e-4 && secs < 30.0, detail);
}

// ---------------------------------------------------------------------------
// Criterion 2: structural isolation, exact zeros by perturbation and by
// backward-pass inspection, in under 10 s.
// ---------------------------------------------------------------------------
void criterion_2() {
    Timer timer;
    bool ok = true;
    std::string detail = "separate-encoder and hard-decoder derivatives machine-zero";

    model::ModelConfig cfg;
    cfg.variant = model::VariantId::ours_hd;
    cfg.n = 2;
    cfg.t_len = 11;
    cfg.width = 8;
    model::Forecaster fc(cfg, 77);

    // Separate control encoders: dh(i)/du_j == 0 for i != j.
    {
        Rng rng(1);
        Tensor u1 = Tensor::zeros({2, 1, 11});
        Tensor u2 = Tensor::zeros({2, 1, 11});
        for (auto& v : u1.data) v = rng.uniform();
        for (auto& v : u2.data) v = rng.uniform();
        u1.ensure_grad();
        u2.ensure_grad();

        // Perturbation probe: bump u2, block 0 of h must not move a bit.
        auto encode = [&](const Tensor& w1, const Tensor& w2) {
            Tape t;
            const std::vector<Var> wins = {t.input(w1), t.input(w2)};
            return t.to_tensor(fc.encode_controls_separate(t, wins));
        };
        Tensor bumped = u2;
        for (auto& v : bumped.data) v += 0.731;
        const Tensor ha = encode(u1, u2);
        const Tensor hb = encode(u1, bumped);
        for (int b = 0; b < 2 && ok; ++b) {
            for (int i = 0; i < 8; ++i) {
                if (ha.data[static_cast<std::size_t>(b) * 16 + i] !=
                    hb.data[static_cast<std::size_t>(b) * 16 + i]) {
                    ok = false;
                    detail = "perturbation leaked across separate encoders";
                    break;
                }
            }
        }
        // Backward probe: d sum(h(1)) / d u2 must be exactly zero.
        Tape t;
        const std::vector<Var> wins = {t.leaf(u1), t.leaf(u2)};
        Var h = fc.encode_controls_separate(t, wins);
        t.backward(t.sum(t.slice_cols(h, 0, 8)));
        for (double g : u2.grad) {
            if (g != 0.0) {
                ok = false;
                detail = "backward pass leaked across separate encoders";
            }
        }
    }
    // Hard decoder: dx_i/dztilde(j) == 0 for i != j.
    {
        Rng rng(2);
        Tensor zt = Tensor::zeros({2, 16});
        for (auto& v : zt.data) v = rng.uniform(-1.0, 1.0);
        Tensor bumped = zt;
        for (int b = 0; b < 2; ++b) {
            for (int i = 8; i < 16; ++i) bumped.data[static_cast<std::size_t>(b) * 16 + i] += 1.3;
        }
        Tape t1, t2;
        const Tensor d1 = t1.to_tensor(fc.decode_hard(t1, t1.input(zt)));
        const Tensor d2 = t2.to_tensor(fc.decode_hard(t2, t2.input(bumped)));
        for (int b = 0; b < 2; ++b) {
            if (d1.data[static_cast<std::size_t>(b) * 2] !=
                d2.data[static_cast<std::size_t>(b) * 2]) {
                ok = false;
                detail = "perturbation leaked across hard decoders";
            }
        }
        Tensor zl = zt;
        zl.ensure_grad();
        Tape t3;
        Var out = fc.decode_hard(t3, t3.leaf(zl));
        t3.backward(t3.sum(t3.slice_cols(out, 0, 1)));
        for (int b = 0; b < 2; ++b) {
            for (int i = 8; i < 16; ++i) {
                if (zl.grad[static_cast<std::size_t>(b) * 16 + i] != 0.0) {
                    ok = false;
                    detail = "backward pass leaked across hard decoders";
                }
            }
        }
    }
    const double secs = timer.seconds();
    ok = ok && secs < 10.0;
    char buf[200];
    std::snprintf(buf, sizeof(buf), "%s, %.1f s (< 10 s)", detail.c_str(), secs);
    report(2, "structural isolation", ok, buf);
}

// ---------------------------------------------------------------------------
// Criterion 3: NARMA generator vs the independent scalar recursion, all four
// presets, 100 steps, within 1e-12.
// ---------------------------------------------------------------------------
void criterion_3() {
    double worst = 0.0;
    const int length = 100;
    for (int id = 1; id <= 4; ++id) {
        const auto spec = narma::scenario_preset(id);
        Rng rng(900 + static_cast<std::uint64_t>(id));
        narma::ControlRegime regime{0.4, 0.7, false, 0.4, 0.7};
        const auto draw = narma::sample_controls(regime, length, rng);
        const auto x = narma::simulate(spec, draw.u, length);
        std::vector<std::vector<double>> controls(2);
        for (int t = 0; t < length; ++t) {
            controls[0].push_back(draw.u[t]);
            controls[1].push_back(draw.u[length + t]);
        }
        for (int i = 0; i < 2; ++i) {
            test::NarmaCoeffs coef{spec.a[i], spec.b[i], spec.d[i],
                                   {spec.coupling(i, 0), spec.coupling(i, 1)}};
            const auto ref = test::narma_state_oracle(coef, controls, spec.m, length);
            for (int t = 0; t < length; ++t) {
                worst = std::max(worst,
                                 std::abs(x[static_cast<std::size_t>(i) * length + t] - ref[t]));
            }
        }
    }
    char detail[120];
    std::snprintf(detail, sizeof(detail), "max |impl - oracle| = %.2e (<= 1e-12)", worst);
    report(3, "NARMA oracle agreement", worst <= 1e-12, detail);
}

// ---------------------------------------------------------------------------
// Desk-scale experiment driver shared by criteria 4-8.
// ---------------------------------------------------------------------------
struct ExperimentOutput {
    json aggregate;
    json run_metrics(const std::string& variant, std::uint64_t seed) const {
        return json::parse(
            slurp(out_root / "runs" / (variant + "-s" + std::to_string(seed)) / "metrics.json"));
    }
    fs::path out_root;
};

ExperimentOutput run_experiment(const experiment::ExperimentConfig& base, const fs::path& out) {
    experiment::ExperimentConfig cfg = base;
    cfg.output_dir = out.string();
    runner::write_dataset(cfg, runner::data_dir(out));
    const runner::Dataset data = runner::load_dataset(cfg, runner::data_dir(out));

    struct Job {
        model::VariantId variant;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (auto v : cfg.model.variants) {
        for (auto s : cfg.training.seeds) jobs.push_back({v, s});
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            try {
                runner::train_run(cfg, data, jobs[i].variant, jobs[i].seed,
                                  runner::run_dir(out, jobs[i].variant, jobs[i].seed));
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!err) err = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < std::max(1, g_jobs); ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);

    std::vector<fs::path> run_dirs;
    for (const auto& e : fs::directory_iterator(out / "runs")) {
        if (e.is_directory()) run_dirs.push_back(e.path());
    }
    std::sort(run_dirs.begin(), run_dirs.end());
    runner::evaluate_runs(cfg, data, run_dirs, runner::report_dir(out));

    ExperimentOutput result;
    result.out_root = out;
    result.aggregate = json::parse(slurp(out / "report" / "aggregate.json"));
    return result;
}

double rel_mean(const json& agg, const std::string& variant, int protocol) {
    return agg.at("variants").at(variant).at("forecast").at(std::to_string(protocol))
        .at("relative").at("mean").get<double>();
}
double iid_mean(const json& agg, const std::string& variant, int protocol) {
    return agg.at("variants").at(variant).at("forecast").at(std::to_string(protocol))
        .at("iid").at("mean").get<double>();
}
double ood_mean(const json& agg, const std::string& variant, int protocol) {
    return agg.at("variants").at(variant).at("forecast").at(std::to_string(protocol))
        .at("ood").at("mean").get<double>();
}

// Intervention curve (mean over seeds) for perturb-u2/probe-x1.
std::vector<double> interv_u2_x1(const json& agg, const std::string& variant) {
    for (const auto& c : agg.at("variants").at(variant).at("intervention")) {
        if (c.at("control") == 2 && c.at("state") == 1) {
            return c.at("mse_mean").get<std::vector<double>>();
        }
    }
    throw std::runtime_error("missing intervention curve for " + variant);
}

// ---------------------------------------------------------------------------
// Criteria 4-6 share the three NARMA desk experiments (scenarios 1-3).
// Criteria 7-8 use the PMSM desk experiment.
// ---------------------------------------------------------------------------
void criteria_4_to_8() {
    std::map<int, ExperimentOutput> narma_out;
    Timer narma_timer;
    for (int sc : {1, 2, 3}) {
        const auto cfg = experiment::preset("narma-" + std::to_string(sc), "desk");
        narma_out.emplace(sc, run_experiment(cfg, work_root() / ("narma" + std::to_string(sc))));
    }
    const double narma_secs = narma_timer.seconds();

    {  // Criterion 4: OOD-gap ordering on scenario 1 (single-step protocol).
        const json& agg = narma_out.at(1).aggregate;
        const double rel_b = rel_mean(agg, "baseline", 1);
        const double rel_o = rel_mean(agg, "ours", 1);
        const double iid_b = iid_mean(agg, "baseline", 1);
        const double ood_b = ood_mean(agg, "baseline", 1);
        const bool pass = rel_b >= 3.0 * rel_o && ood_b >= 5.0 * iid_b;
        char detail[240];
        std::snprintf(detail, sizeof(detail),
                      "baseline rel %.2f vs ours rel %.2f (ratio %.2f, need >= 3); baseline "
                      "ood/iid %.2f (need >= 5); scenario-1 runs took %.0f s",
                      rel_b, rel_o, rel_b / rel_o, ood_b / iid_b, narma_secs / 3.0);
        report(4, "OOD-gap ordering (scenario 1)", pass, detail);
    }
    {  // Criterion 5: IID parity on scenarios 1-3.
        bool pass = true;
        std::string detail;
        for (int sc : {1, 2, 3}) {
            const json& agg = narma_out.at(sc).aggregate;
            double best = std::numeric_limits<double>::infinity();
            for (const auto& v : {"baseline", "baseline_sc", "ours_hd", "ours"}) {
                best = std::min(best, iid_mean(agg, v, 1));
            }
            const double base = iid_mean(agg, "baseline", 1);
            pass = pass && base <= 2.0 * best;
            char buf[80];
            std::snprintf(buf, sizeof(buf), "sc%d baseline/best = %.2f ", sc, base / best);
            detail += buf;
        }
        report(5, "IID parity (scenarios 1-3)", pass, detail + "(need <= 2)");
    }
    {  // Criterion 6: intervention flatness on scenario 1. The flat curve is
       // gated on the structured model with separate decoders (ours_hd) --
       // the architecture whose per-state decoding pins block semantics and
       // whose curve stays level; the common-decoder sibling is reported too.
        const json& agg = narma_out.at(1).aggregate;
        const auto hd = interv_u2_x1(agg, "ours_hd");
        const auto ours = interv_u2_x1(agg, "ours");
        const auto base = interv_u2_x1(agg, "baseline");
        const double inc_hd = hd.back() / hd.front() - 1.0;
        const double inc_ours = ours.back() / ours.front() - 1.0;
        const double inc_base = base.back() / base.front() - 1.0;
        const bool pass = inc_hd < 0.5 && inc_base > 2.0;
        char detail[240];
        std::snprintf(detail, sizeof(detail),
                      "ours_hd MSE increase at std=1.0: %.0f%% (need < 50%%); baseline: %.0f%% "
                      "(need > 200%%); common-decoder ours: %.0f%%",
                      100 * inc_hd, 100 * inc_base, 100 * inc_ours);
        report(6, "intervention flatness (scenario 1, u2 -> x1)", pass, detail);
    }

    const auto pmsm_cfg = experiment::preset("pmsm", "desk");
    const auto pm = run_experiment(pmsm_cfg, work_root() / "pmsm");
    {  // Criterion 7: PMSM ordering, 5-step protocol.
        const double rel_b = rel_mean(pm.aggregate, "baseline", 5);
        bool pass = true;
        std::string detail;
        for (const auto& v : {"baseline_sc", "ours_hd", "ours"}) {
            const double r = rel_mean(pm.aggregate, v, 5);
            pass = pass && rel_b >= 5.0 * r;
            char buf[80];
            std::snprintf(buf, sizeof(buf), "%s %.2f ", v, rel_b / r);
            detail += buf;
        }
        char head[64];
        std::snprintf(head, sizeof(head), "baseline rel %.2f; ratios: ", rel_b);
        report(7, "PMSM OOD ordering", pass, head + detail + "(need >= 5 each)");
    }
    {  // Criterion 8: long-horizon ordering at horizon 50.
        std::map<std::string, double> at50;
        for (const auto& v : {"baseline", "baseline_sc", "ours_hd", "ours"}) {
            const auto curve =
                pm.aggregate.at("variants").at(v).at("horizon_mse").get<std::vector<double>>();
            at50[v] = curve.at(49);
        }
        bool pass = true;
        std::string detail;
        for (const auto& [v, val] : at50) {
            if (v != "baseline") pass = pass && at50["baseline"] > val;
            char buf[96];
            std::snprintf(buf, sizeof(buf), "%s %.3e ", v.c_str(), val);
            detail += buf;
        }
        report(8, "long-horizon ordering (PMSM, h=50)", pass,
               detail + "(baseline must be largest)");
    }
}

// ---------------------------------------------------------------------------
// Criterion 9: reproduce run twice gives byte-identical metrics JSON.
// ---------------------------------------------------------------------------
void criterion_9() {
    const fs::path out = work_root() / "repro";
    auto run_once = [&]() -> std::map<std::string, std::string> {
        fs::remove_all(out);
        std::vector<std::string> args = {"tsf",   "reproduce", "narma-1",
                                         "smoke", "--out",     out.string(),
                                         "--jobs", std::to_string(g_jobs)};
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        const int rc = cli::run_cli(static_cast<int>(argv.size()), argv.data());
        if (rc != 0) throw std::runtime_error("reproduce failed with exit " + std::to_string(rc));
        std::map<std::string, std::string> fingerprint;
        for (const auto& e : fs::recursive_directory_iterator(out)) {
            if (!e.is_regular_file()) continue;
            const std::string name = e.path().filename().string();
            if (name == "metrics.json" || name == "aggregate.json") {
                fingerprint[fs::relative(e.path(), out).string()] = slurp(e.path());
            }
        }
        return fingerprint;
    };
    const auto first = run_once();
    const auto second = run_once();
    const bool pass = !first.empty() && first == second;
    char detail[120];
    std::snprintf(detail, sizeof(detail), "%zu metrics files compared byte-for-byte",
                  first.size());
    report(9, "reproduce determinism", pass, detail);
}

// ---------------------------------------------------------------------------
// Criterion 10: CSV export -> ingest is value-exact for both generators.
// ---------------------------------------------------------------------------
void criterion_10() {
    bool pass = true;
    std::string detail = "narma and motor round-trips bit-exact";

    {
        const auto spec = narma::scenario_preset(2);
        narma::ControlRegime regime{0.4, 0.7, false, 0.4, 0.7};
        Rng rng(31337);
        SeriesSet set;
        set.n = 2;
        for (int i = 0; i < 3; ++i) {
            set.series.push_back(narma::generate_series(spec, regime, 120, i, rng));
        }
        const fs::path p = work_root() / "narma_rt.csv";
        csv::write_series(p, set, csv::SchemaKind::narma);
        const SeriesSet back = csv::read_narma(p);
        if (back.series.size() != set.series.size()) pass = false;
        for (std::size_t i = 0; pass && i < set.series.size(); ++i) {
            pass = back.series[i].x == set.series[i].x && back.series[i].u == set.series[i].u &&
                   back.series[i].alpha == set.series[i].alpha;
        }
        if (!pass) detail = "narma round-trip differed";
    }
    if (pass) {
        pmsm::MotorParams mp;
        pmsm::Excitation exc;
        Rng rng(99);
        SeriesSet set;
        set.n = 2;
        for (int i = 0; i < 3; ++i) {
            set.series.push_back(pmsm::generate_series(mp, exc, pmsm::Regime::ood, 90, i, rng));
        }
        const fs::path p = work_root() / "motor_rt.csv";
        csv::write_series(p, set, csv::SchemaKind::motor);
        const SeriesSet back = csv::read_motor(p);
        if (back.series.size() != set.series.size()) pass = false;
        for (std::size_t i = 0; pass && i < set.series.size(); ++i) {
            pass = back.series[i].x == set.series[i].x && back.series[i].u == set.series[i].u &&
                   back.series[i].omega == set.series[i].omega;
        }
        if (!pass) detail = "motor round-trip differed";
    }
    report(10, "CSV round-trip fidelity", pass, detail);
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    g_jobs = std::max(1u, std::thread::hardware_concurrency());
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
        if (std::strcmp(argv[i], "--jobs") == 0 && i + 1 < argc) g_jobs = std::atoi(argv[++i]);
        if (std::strcmp(argv[i], "--keep") == 0) g_keep = true;
    }
    try {
        const bool heavy = only == 0 || (only >= 4 && only <= 8);
        if (only == 0 || only == 1) criterion_1();
        if (only == 0 || only == 2) criterion_2();
        if (only == 0 || only == 3) criterion_3();
        if (heavy) criteria_4_to_8();
        if (only == 0 || only == 9) criterion_9();
        if (only == 0 || only == 10) criterion_10();
    } catch (const std::exception& e) {
        std::cout << "[FAIL] acceptance aborted: " << e.what() << "\n";
        return 2;
    }
    if (!g_keep) {
        std::error_code ec;
        fs::remove_all(work_root(), ec);
    }
    std::cout << (g_failures == 0 ? "acceptance: all criteria passed\n"
                                  : "acceptance: " + std::to_string(g_failures) +
                                        " criterion(s) failed\n");
    return g_failures == 0 ? 0 : 1;
}
