// Command-line front end: dataset generation, training, evaluation,
// quantization, and the model comparison benchmark. Every run writes its
// resolved configuration into the output directory, and the process exits 0
// only after all declared outputs exist and re-validate against their
// format magics.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rfmtl/channel.hpp"
#include "rfmtl/checkpoint.hpp"
#include "rfmtl/dataset.hpp"
#include "rfmtl/errors.hpp"
#include "rfmtl/eval.hpp"
#include "rfmtl/kernels.hpp"
#include "rfmtl/mtl.hpp"
#include "rfmtl/quantize.hpp"
#include "rfmtl/train.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using namespace rfmtl;

namespace {

// "start:stop:step" (inclusive endpoints) or a single value, in dB.
std::vector<double> parse_snr_grid(const std::string& text) {
    std::vector<double> out;
    const auto c1 = text.find(':');
    if (c1 == std::string::npos) {
        out.push_back(std::stod(text));
        return out;
    }
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos)
        throw ConfigError("SNR grid must be start:stop:step or a single value");
    const double start = std::stod(text.substr(0, c1));
    const double stop = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    const double step = std::stod(text.substr(c2 + 1));
    if (!(step > 0.0)) throw ConfigError("SNR grid step must be positive");
    for (double v = start; v <= stop + 1e-9; v += step) out.push_back(v);
    if (out.empty()) throw ConfigError("SNR grid is empty");
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open for writing: " + path.string());
    os << text;
    if (!os) throw FormatError("write failed: " + path.string());
}

void check_magic(const fs::path& path, const std::string& magic) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("declared output missing: " + path.string());
    std::string got(magic.size(), '\0');
    is.read(got.data(), (std::streamsize)got.size());
    if ((std::size_t)is.gcount() != magic.size() || got != magic)
        throw FormatError("output failed magic validation: " + path.string());
}

void check_nonempty(const fs::path& path) {
    if (!fs::exists(path) || fs::file_size(path) == 0)
        throw FormatError("declared output missing or empty: " + path.string());
}

std::string fmt_db(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

struct GenArgs {
    std::string mode = "awgn";
    std::string snr = "-20:18:2";
    std::size_t per_cell = 100;
    std::uint64_t seed = 1;
    std::string out = "run-gen";
};

int cmd_gen(const GenArgs& a) {
    GenConfig cfg;
    if (a.mode == "awgn")
        cfg.mode = ImpairmentMode::Awgn;
    else if (a.mode == "dynamic")
        cfg.mode = ImpairmentMode::Dynamic;
    else
        throw ConfigError("unknown mode: " + a.mode + " (expected awgn or dynamic)");
    cfg.snr_grid_db = parse_snr_grid(a.snr);
    cfg.per_cell = a.per_cell;
    cfg.seed = a.seed;

    fs::create_directories(a.out);
    const fs::path ds_path = fs::path(a.out) / "dataset.rfmtl1";
    const DatasetContainer ds = build_dataset(cfg);
    save_dataset(ds, ds_path.string());

    ordered_json rc;
    rc["command"] = "gen";
    rc["mode"] = a.mode;
    rc["snr_grid_db"] = cfg.snr_grid_db;
    rc["per_cell"] = cfg.per_cell;
    rc["seed"] = cfg.seed;
    rc["examples"] = ds.size();
    rc["outputs"] = {ds_path.string()};
    write_text(fs::path(a.out) / "resolved_config.json", rc.dump(2));

    check_magic(ds_path, "RFMTL1");
    check_nonempty(fs::path(a.out) / "resolved_config.json");
    std::printf("gen: %zu examples -> %s\n", ds.size(), ds_path.string().c_str());
    return 0;
}

struct TrainArgs {
    std::string data;
    std::string out = "run-train";
    std::uint64_t seed = 1;
    int epochs = 30;
    int patience = 5;
    std::size_t batch = 64;
    float lr = 0.001f;
    float w_mod = 0.2f;
    float w_sig = 0.8f;
    std::size_t c_sh = 8, c_m = 4, f_m = 256, c_s = 4, f_s = 256;
};

int cmd_train(const TrainArgs& a) {
    const DatasetContainer ds = load_dataset(a.data);
    const TensorDataset train_set = to_tensor_dataset(ds, Split::Train);
    const TensorDataset val_set = to_tensor_dataset(ds, Split::Val);

    MtlConfig mc;
    mc.c_sh = a.c_sh;
    mc.c_m = a.c_m;
    mc.f_m = a.f_m;
    mc.c_s = a.c_s;
    mc.f_s = a.f_s;
    const LossWeights w{a.w_mod, a.w_sig};
    TrainConfig tc;
    tc.max_epochs = a.epochs;
    tc.patience = a.patience;
    tc.batch_size = a.batch;
    tc.lr = a.lr;
    tc.seed = a.seed;

    ModelGraph model = build_model(mc, a.seed);
    const TrainResult res = train(std::move(model), train_set, val_set, tc, w);

    fs::create_directories(a.out);
    const fs::path ckpt = fs::path(a.out) / "model.rfmtlw";
    const fs::path hist = fs::path(a.out) / "history.csv";
    save_checkpoint(res.model, ckpt.string());
    write_history_csv(hist.string(), res.history);

    ordered_json rc;
    rc["command"] = "train";
    rc["data"] = a.data;
    rc["seed"] = a.seed;
    rc["max_epochs"] = tc.max_epochs;
    rc["patience"] = tc.patience;
    rc["batch_size"] = tc.batch_size;
    rc["lr"] = tc.lr;
    rc["w_mod"] = w.w_m;
    rc["w_sig"] = w.w_s;
    rc["arch"] = {{"c_sh", mc.c_sh}, {"c_m", mc.c_m}, {"f_m", mc.f_m},
                  {"c_s", mc.c_s},   {"f_s", mc.f_s}};
    rc["best_epoch"] = res.best_epoch;
    rc["best_val_loss"] = res.best_val_loss;
    rc["diverged"] = res.diverged;
    rc["outputs"] = {ckpt.string(), hist.string()};
    write_text(fs::path(a.out) / "resolved_config.json", rc.dump(2));

    check_magic(ckpt, "RFMTLW1");
    check_nonempty(hist);
    if (res.diverged) {
        std::fprintf(stderr, "train: run diverged; best snapshot saved\n");
        return 1;
    }
    std::printf("train: best epoch %d, val loss %.6f -> %s\n", res.best_epoch, res.best_val_loss,
                ckpt.string().c_str());
    return 0;
}

struct EvalArgs {
    std::string model;
    std::string data;
    std::vector<double> snr = {-2.0, 0.0, 10.0};
    std::string out = "run-eval";
};

int cmd_eval(const EvalArgs& a) {
    const ModelGraph model = load_checkpoint(a.model);
    const DatasetContainer ds = load_dataset(a.data);
    const TensorDataset test_set = to_tensor_dataset(ds, Split::Test);

    fs::create_directories(a.out);
    const auto rows = accuracy_by_snr(model, test_set);
    const fs::path acc_path = fs::path(a.out) / "accuracy_by_snr.csv";
    write_snr_accuracy_csv(acc_path.string(), rows);

    std::vector<std::string> outputs = {acc_path.string()};
    for (double snr : a.snr) {
        for (const auto& [task, tag] :
             {std::pair{Task::Modulation, "mod"}, std::pair{Task::SignalClass, "sig"}}) {
            const ConfusionMatrix cm = confusion(model, test_set, task, snr);
            const fs::path p =
                fs::path(a.out) / ("confusion_" + std::string(tag) + "_" + fmt_db(snr) + "dB.csv");
            cm.write_csv(p.string());
            outputs.push_back(p.string());
        }
    }

    ordered_json rc;
    rc["command"] = "eval";
    rc["model"] = a.model;
    rc["data"] = a.data;
    rc["confusion_snr_db"] = a.snr;
    rc["outputs"] = outputs;
    write_text(fs::path(a.out) / "resolved_config.json", rc.dump(2));

    for (const std::string& p : outputs) check_nonempty(p);
    std::printf("eval: %zu SNR cells -> %s\n", rows.size(), a.out.c_str());
    return 0;
}

struct QuantArgs {
    std::string model;
    std::string data;
    std::string out = "run-quantize";
    std::string calib = "percentile";
    int qat_epochs = 0;
    int qat_patience = 2;
    std::uint64_t seed = 1;
    float w_mod = 0.2f;
    float w_sig = 0.8f;
};

int cmd_quantize(const QuantArgs& a) {
    const ModelGraph model = load_checkpoint(a.model);
    const DatasetContainer ds = load_dataset(a.data);
    const TensorDataset val_set = to_tensor_dataset(ds, Split::Val);
    const CalibMode mode = calib_mode_from_name(a.calib);

    const RangeMap ranges = calibrate_activations(model, val_set, mode);
    const QuantizedModel ptq = quantize_model(model, ranges, mode);

    fs::create_directories(a.out);
    const fs::path ptq_path = fs::path(a.out) / "model_int8_ptq.rfmtlq";
    save_quantized(ptq, ptq_path.string());
    std::vector<std::string> outputs = {ptq_path.string()};

    if (a.qat_epochs == 1)
        throw ConfigError("--qat-epochs must be 0 (pure post-training) or >= 2 so early "
                          "stopping has room to act");
    if (a.qat_epochs > 0) {
        const TensorDataset train_set = to_tensor_dataset(ds, Split::Train);
        TrainConfig tc;
        tc.max_epochs = a.qat_epochs;
        tc.patience = std::min(a.qat_patience, a.qat_epochs - 1);
        tc.seed = a.seed;
        const LossWeights w{a.w_mod, a.w_sig};
        const TrainResult qat = qat_finetune(model, train_set, val_set, tc, w, ranges);
        const QuantizedModel qat_model = quantize_model(qat.model, ranges, mode);
        const fs::path qat_path = fs::path(a.out) / "model_int8_qat.rfmtlq";
        save_quantized(qat_model, qat_path.string());
        outputs.push_back(qat_path.string());
    }

    const SizeReport rep = size_report(model, ptq, a.model, ptq_path.string());
    const fs::path rep_path = fs::path(a.out) / "size_report.json";
    write_text(rep_path, rep.to_json());
    outputs.push_back(rep_path.string());

    ordered_json rc;
    rc["command"] = "quantize";
    rc["model"] = a.model;
    rc["data"] = a.data;
    rc["calibration"] = a.calib;
    rc["qat_epochs"] = a.qat_epochs;
    rc["seed"] = a.seed;
    rc["outputs"] = outputs;
    write_text(fs::path(a.out) / "resolved_config.json", rc.dump(2));

    for (const std::string& p : outputs)
        if (p.size() > 7 && p.substr(p.size() - 7) == ".rfmtlq") check_magic(p, "RFMTLQ1");
    check_nonempty(rep_path);
    std::printf("quantize: weight payload ratio %.2fx -> %s\n", rep.weight_payload_ratio,
                a.out.c_str());
    return 0;
}

struct BenchArgs {
    std::string model;  // optional trained checkpoint for the canonical row
    std::string data;   // optional dataset for accuracy columns
    std::string out = "run-bench";
    std::size_t frames = 50;
    std::size_t reps = 3;
    std::uint64_t seed = 1;
};

int cmd_bench(const BenchArgs& a) {
    MtlConfig canonical;
    MtlConfig wide2 = canonical;
    wide2.c_sh = 16;
    wide2.c_m = wide2.c_s = 8;
    wide2.f_m = wide2.f_s = 512;
    MtlConfig wide4 = canonical;
    wide4.c_sh = 32;
    wide4.c_m = wide4.c_s = 16;
    wide4.f_m = wide4.f_s = 1024;

    ModelGraph m_canon =
        a.model.empty() ? build_model(canonical, a.seed) : load_checkpoint(a.model);
    ModelGraph m_wide2 = build_model(wide2, a.seed);
    ModelGraph m_wide4 = build_model(wide4, a.seed);

    TensorDataset test_set;
    const bool have_data = !a.data.empty();
    if (have_data) test_set = to_tensor_dataset(load_dataset(a.data), Split::Test);

    const std::vector<NamedModel> models = {{"mtl-canonical", &m_canon},
                                            {"wide-2x", &m_wide2},
                                            {"wide-4x", &m_wide4}};
    const auto reports =
        compare_models(models, 2, have_data ? &test_set : nullptr, a.frames, a.reps);

    fs::create_directories(a.out);
    const fs::path rep_path = fs::path(a.out) / "compare_models.json";
    write_text(rep_path, model_reports_json(reports));

    ordered_json rc;
    rc["command"] = "bench";
    rc["model"] = a.model;
    rc["data"] = a.data;
    rc["latency_frames"] = a.frames;
    rc["latency_reps"] = a.reps;
    rc["baseline"] = "wide-4x";
    rc["outputs"] = {rep_path.string()};
    write_text(fs::path(a.out) / "resolved_config.json", rc.dump(2));

    std::printf("%-14s %12s %14s %12s %10s %10s\n", "model", "mac_flops", "profiler_flops",
                "params", "median_ms", "vs_base");
    for (const ModelReport& r : reports)
        std::printf("%-14s %12zu %14zu %12zu %10.3f %9.2f%%\n", r.name.c_str(), r.cost.mac_flops,
                    r.cost.profiler_style_flops(), r.params.total(), r.latency.median_ms,
                    r.flops_reduction_pct);

    check_nonempty(rep_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    kern::apply_thread_cap_from_env();
    CLI::App app{"RF multi-task dataset/model toolkit"};
    app.require_subcommand(1);

    GenArgs ga;
    auto* gen = app.add_subcommand("gen", "synthesize a labeled IQ dataset");
    gen->add_option("--mode", ga.mode, "awgn or dynamic")->capture_default_str();
    gen->add_option("--snr", ga.snr, "SNR grid start:stop:step in dB, or one value")
        ->capture_default_str();
    gen->add_option("--per-cell", ga.per_cell, "frames per (waveform, SNR) cell")
        ->capture_default_str();
    gen->add_option("--seed", ga.seed, "generation seed")->capture_default_str();
    gen->add_option("--out", ga.out, "output directory")->capture_default_str();

    TrainArgs ta;
    auto* tr = app.add_subcommand("train", "train the two-headed classifier");
    tr->add_option("--data", ta.data, "dataset file")->required();
    tr->add_option("--out", ta.out, "output directory")->capture_default_str();
    tr->add_option("--seed", ta.seed, "init/shuffle seed")->capture_default_str();
    tr->add_option("--epochs", ta.epochs, "max epochs")->capture_default_str();
    tr->add_option("--patience", ta.patience, "early-stop patience")->capture_default_str();
    tr->add_option("--batch", ta.batch, "batch size")->capture_default_str();
    tr->add_option("--lr", ta.lr, "Adam learning rate")->capture_default_str();
    tr->add_option("--w-mod", ta.w_mod, "modulation loss weight")->capture_default_str();
    tr->add_option("--w-sig", ta.w_sig, "signal-class loss weight")->capture_default_str();
    tr->add_option("--c-sh", ta.c_sh, "shared conv kernels")->capture_default_str();
    tr->add_option("--c-m", ta.c_m, "modulation conv kernels")->capture_default_str();
    tr->add_option("--f-m", ta.f_m, "modulation dense width")->capture_default_str();
    tr->add_option("--c-s", ta.c_s, "signal conv kernels")->capture_default_str();
    tr->add_option("--f-s", ta.f_s, "signal dense width")->capture_default_str();

    EvalArgs ea;
    auto* ev = app.add_subcommand("eval", "per-SNR accuracy and confusion matrices");
    ev->add_option("--model", ea.model, "float checkpoint")->required();
    ev->add_option("--data", ea.data, "dataset file")->required();
    ev->add_option("--snr", ea.snr, "confusion-matrix SNR points (dB)")->capture_default_str();
    ev->add_option("--out", ea.out, "output directory")->capture_default_str();

    QuantArgs qa;
    auto* qn = app.add_subcommand("quantize", "post-training INT8, optional QAT");
    qn->add_option("--model", qa.model, "float checkpoint")->required();
    qn->add_option("--data", qa.data, "dataset file (validation split calibrates)")->required();
    qn->add_option("--out", qa.out, "output directory")->capture_default_str();
    qn->add_option("--calib", qa.calib, "percentile or minmax")->capture_default_str();
    qn->add_option("--qat-epochs", qa.qat_epochs, "0 = pure post-training quantization")
        ->capture_default_str();
    qn->add_option("--qat-patience", qa.qat_patience, "QAT early-stop patience")
        ->capture_default_str();
    qn->add_option("--seed", qa.seed, "QAT shuffle seed")->capture_default_str();
    qn->add_option("--w-mod", qa.w_mod, "modulation loss weight")->capture_default_str();
    qn->add_option("--w-sig", qa.w_sig, "signal-class loss weight")->capture_default_str();

    BenchArgs ba;
    auto* bn = app.add_subcommand("bench", "compute/memory/latency comparison table");
    bn->add_option("--model", ba.model, "optional trained checkpoint for the canonical row");
    bn->add_option("--data", ba.data, "optional dataset for accuracy columns");
    bn->add_option("--out", ba.out, "output directory")->capture_default_str();
    bn->add_option("--frames", ba.frames, "latency frames per repetition")->capture_default_str();
    bn->add_option("--reps", ba.reps, "latency repetitions")->capture_default_str();
    bn->add_option("--seed", ba.seed, "init seed for untrained rows")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(ga);
        if (tr->parsed()) return cmd_train(ta);
        if (ev->parsed()) return cmd_eval(ea);
        if (qn->parsed()) return cmd_quantize(qa);
        if (bn->parsed()) return cmd_bench(ba);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
