// bcsr: bandwidth extension for bone-conduction speech.
//
// Subcommands: synth, train, finetune, infer, quantize, eval, bench.
// Every command is deterministic given --seed (wall-clock latency figures
// aside); exit code 0 on success, 1 with a one-line error otherwise.

#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "bcsr/audio_io.hpp"
#include "bcsr/dataset.hpp"
#include "bcsr/dsp.hpp"
#include "bcsr/metrics.hpp"
#include "bcsr/model.hpp"
#include "bcsr/pipeline.hpp"
#include "bcsr/quant.hpp"
#include "bcsr/training.hpp"

namespace {

struct RunConfig {
    std::string variant = "ats";
    std::string manifest, out_path, in_path, model_path, init_model, history_path, report_path;
    std::string latency_path, model_config_path;
    bool variant_given = false;
    bool shift_given = false;
    uint64_t seed = 0;
    int epochs = 100;
    int batch = 64;
    double lr = 1e-4;
    double shift_fraction = 0.25;
    int threads = 0;  // 0 = hardware concurrency
    int count = 20;
    int noise_count = 0;
    double seconds = 3.0;
    bool quantized = false;
};

int effective_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

bcsr::Model trained_or_fresh(const RunConfig& cfg, bool finetune,
                             const std::vector<bcsr::TrainExample>& dataset) {
    if (finetune) {
        // fine-tuning continues from an existing model with its statistics
        return bcsr::load_model(cfg.init_model);
    }
    bcsr::ModelConfig mc;
    if (!cfg.model_config_path.empty()) mc = bcsr::load_model_config(cfg.model_config_path);
    if (cfg.variant_given || cfg.model_config_path.empty())
        mc.variant = bcsr::variant_from_name(cfg.variant);
    if (cfg.shift_given || cfg.model_config_path.empty())
        mc.shift_fraction = cfg.shift_fraction;
    bcsr::Model m = bcsr::build(mc);
    std::mt19937_64 rng(cfg.seed);
    bcsr::init_weights(m, rng);
    bcsr::compute_norm_stats(dataset, m.norm_mean, m.norm_std);
    return m;
}

int run_training(const RunConfig& cfg, bool finetune) {
    auto dataset = bcsr::load_dataset(cfg.manifest);
    bcsr::Model m = trained_or_fresh(cfg, finetune, dataset);

    bcsr::TrainOptions opts;
    opts.epochs = cfg.epochs;
    opts.batch = cfg.batch;
    opts.seed = cfg.seed;
    opts.threads = effective_threads(cfg.threads);
    opts.adam.lr = cfg.lr;
    const std::vector<double> history = bcsr::train(m, dataset, opts);

    bcsr::save_model(m, cfg.out_path);
    if (!cfg.history_path.empty()) bcsr::write_loss_history_csv(cfg.history_path, history);
    std::printf("%s: %zu examples, %d epochs, final loss %.6f -> %s\n",
                finetune ? "finetune" : "train", dataset.size(), cfg.epochs,
                history.empty() ? 0.0 : history.back(), cfg.out_path.c_str());
    return 0;
}

int run_infer(const RunConfig& cfg) {
    const bool quantized = cfg.quantized || bcsr::is_quantized_model_file(cfg.model_path);
    bcsr::LatencyReport rep =
        bcsr::process_file(cfg.model_path, cfg.in_path, cfg.out_path, quantized);
    if (!cfg.latency_path.empty()) bcsr::write_latency_csv(cfg.latency_path, rep);
    std::printf("infer: %zu frames, mean %.3f ms/frame (rtf %.4f) -> %s\n", rep.frames.size(),
                rep.mean_total_ms, rep.real_time_factor, cfg.out_path.c_str());
    return 0;
}

int run_quantize(const RunConfig& cfg) {
    bcsr::Model m = bcsr::load_model(cfg.model_path);

    // calibration features from the manifest inputs, normalized like inference
    std::vector<bcsr::LogPowerFeatures> calib;
    for (const auto& [in_path, tgt] : bcsr::read_manifest(cfg.manifest)) {
        bcsr::AudioBuffer in = bcsr::read_wav(in_path);
        if (tgt.empty()) in = bcsr::simulate_bcm(in);
        for (const auto& frame : bcsr::frame_stream(in)) {
            bcsr::LogPowerFeatures lp = bcsr::log_power(bcsr::stft_frame(frame));
            bcsr::LogPowerFeatures body;
            body.bins = lp.bins - 1;
            body.frames = lp.frames;
            body.values.assign(lp.values.begin() + lp.frames, lp.values.end());
            for (auto& v : body.values) v = (v - m.norm_mean) / m.norm_std;
            calib.push_back(std::move(body));
        }
    }

    bcsr::QuantizedModel qm = bcsr::quantize_model(m, calib);
    bcsr::save_quantized_model(qm, cfg.out_path);
    std::printf("quantize: %zu calibration frames -> %s\n", calib.size(), cfg.out_path.c_str());
    return 0;
}

int run_eval(const RunConfig& cfg) {
    const bool quantized = cfg.quantized || bcsr::is_quantized_model_file(cfg.model_path);
    bcsr::Model fm;
    bcsr::QuantizedModel qm;
    if (quantized)
        qm = bcsr::load_quantized_model(cfg.model_path);
    else
        fm = bcsr::load_model(cfg.model_path);

    bcsr::EvalReport report;
    for (const auto& [in_path, tgt_path] : bcsr::read_manifest(cfg.manifest)) {
        bcsr::AudioBuffer input = bcsr::read_wav(in_path);
        bcsr::AudioBuffer reference;
        if (tgt_path.empty()) {
            reference = input;
            input = bcsr::simulate_bcm(reference);
        } else {
            reference = bcsr::read_wav(tgt_path);
        }

        bcsr::AudioBuffer enhanced;
        if (quantized) {
            bcsr::StreamState state(qm);
            enhanced = bcsr::process_buffer(state, input);
        } else {
            bcsr::StreamState state(fm);
            enhanced = bcsr::process_buffer(state, input);
        }

        bcsr::EvalRow row;
        row.id = std::filesystem::path(in_path).filename().string();
        row.lsd_input = bcsr::lsd(reference, input);
        row.lsd_enhanced = bcsr::lsd(reference, enhanced);
        row.snr_enhanced = bcsr::spectral_snr(reference, enhanced);
        report.rows.push_back(row);
    }
    report.finalize();
    if (!cfg.report_path.empty()) bcsr::write_eval_csv(cfg.report_path, report);
    std::printf("eval: %zu utterances, mean LSD input %.4f -> enhanced %.4f\n",
                report.rows.size(), report.mean_lsd_input, report.mean_lsd_enhanced);
    return 0;
}

int run_bench(const RunConfig& cfg) {
    const char* names[] = {"ats", "1d", "mixed", "hybrid", "2d_v1", "2d_v2"};
    std::printf("%-8s %10s %14s %14s %10s\n", "variant", "params", "flops", "ms/frame", "rtf");

    FILE* csv = nullptr;
    if (!cfg.out_path.empty()) {
        csv = std::fopen(cfg.out_path.c_str(), "w");
        if (!csv) {
            std::fprintf(stderr, "error: cannot create %s\n", cfg.out_path.c_str());
            return 1;
        }
        std::fprintf(csv, "variant,params,flops,mean_ms_per_frame,real_time_factor\n");
    }

    const bcsr::AudioBuffer probe = bcsr::synth_utterance(cfg.seed, 2.0);
    for (const char* name : names) {
        bcsr::ModelConfig mc;
        mc.variant = bcsr::variant_from_name(name);
        mc.shift_fraction = cfg.shift_fraction;
        bcsr::Model m = bcsr::build(mc);
        std::mt19937_64 rng(cfg.seed);
        bcsr::init_weights(m, rng);
        m.norm_mean = -10.0;
        m.norm_std = 5.0;

        bcsr::StreamState state(m);
        bcsr::process_buffer(state, probe);
        const bcsr::LatencyReport rep = state.latency_report();

        std::printf("%-8s %10zu %14zu %14.3f %10.5f\n", name, bcsr::count_params(m),
                    bcsr::count_flops(m), rep.mean_total_ms, rep.real_time_factor);
        if (csv)
            std::fprintf(csv, "%s,%zu,%zu,%.5f,%.6f\n", name, bcsr::count_params(m),
                         bcsr::count_flops(m), rep.mean_total_ms, rep.real_time_factor);
    }
    if (csv) std::fclose(csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Real-time bandwidth extension for bone-conduction speech"};
    app.require_subcommand(1);
    app.set_config("--config");

    RunConfig cfg;

    auto* synth = app.add_subcommand("synth", "Generate a synthetic paired dataset");
    synth->add_option("--out", cfg.out_path, "output directory")->required();
    synth->add_option("--count", cfg.count, "number of utterances")->capture_default_str();
    synth->add_option("--noise-count", cfg.noise_count, "number of noise tracks (also writes noisy mixes)");
    synth->add_option("--seconds", cfg.seconds, "utterance length in seconds")->capture_default_str();
    synth->add_option("--seed", cfg.seed, "random seed")->capture_default_str();

    auto add_train_opts = [&cfg](CLI::App* c) {
        c->add_option("--manifest", cfg.manifest, "dataset manifest")->required();
        c->add_option("--out", cfg.out_path, "output model file")->required();
        c->add_option("--epochs", cfg.epochs, "training epochs")->capture_default_str();
        c->add_option("--batch", cfg.batch, "batch size")->capture_default_str();
        c->add_option("--lr", cfg.lr, "Adam learning rate")->capture_default_str();
        c->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
        c->add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
        c->add_option("--history", cfg.history_path, "loss history CSV");
    };
    auto* train = app.add_subcommand("train", "Train a model from scratch");
    add_train_opts(train);
    train->add_option("--variant", cfg.variant, "2d_v1|2d_v2|hybrid|mixed|1d|ats")
        ->capture_default_str();
    train->add_option("--shift-fraction", cfg.shift_fraction, "temporal shift fraction")
        ->capture_default_str();
    train->add_option("--model-config", cfg.model_config_path,
                      "architecture key-value file (flags still override)");

    auto* finetune = app.add_subcommand("finetune", "Continue training an existing model");
    add_train_opts(finetune);
    finetune->add_option("--init-model", cfg.init_model, "model to start from")->required();

    auto* infer = app.add_subcommand("infer", "Enhance a 16 kHz WAV file");
    infer->add_option("--model", cfg.model_path, "model file")->required();
    infer->add_option("--in", cfg.in_path, "input WAV")->required();
    infer->add_option("--out", cfg.out_path, "output WAV")->required();
    infer->add_flag("--quantized", cfg.quantized, "use the integer inference path");
    infer->add_option("--latency-csv", cfg.latency_path, "per-frame latency CSV");

    auto* quantize = app.add_subcommand("quantize", "Quantize a model to int16");
    quantize->add_option("--model", cfg.model_path, "float model file")->required();
    quantize->add_option("--out", cfg.out_path, "quantized model file")->required();
    quantize->add_option("--manifest", cfg.manifest, "calibration manifest")->required();

    auto* eval = app.add_subcommand("eval", "LSD report against references");
    eval->add_option("--model", cfg.model_path, "model file")->required();
    eval->add_option("--manifest", cfg.manifest, "evaluation manifest")->required();
    eval->add_option("--report", cfg.report_path, "report CSV");
    eval->add_flag("--quantized", cfg.quantized, "use the integer inference path");

    auto* bench = app.add_subcommand("bench", "Params/FLOPs/latency for all variants");
    bench->add_option("--out", cfg.out_path, "benchmark CSV");
    bench->add_option("--seed", cfg.seed, "random seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            bcsr::SynthOptions opts;
            opts.count = cfg.count;
            opts.noise_count = cfg.noise_count;
            opts.seconds = cfg.seconds;
            opts.seed = cfg.seed;
            bcsr::generate_dataset(cfg.out_path, opts);
            std::printf("synth: %d utterances -> %s\n", cfg.count, cfg.out_path.c_str());
            return 0;
        }
        if (train->parsed()) {
            cfg.variant_given = train->count("--variant") > 0;
            cfg.shift_given = train->count("--shift-fraction") > 0;
            return run_training(cfg, false);
        }
        if (finetune->parsed()) return run_training(cfg, true);
        if (infer->parsed()) return run_infer(cfg);
        if (quantize->parsed()) return run_quantize(cfg);
        if (eval->parsed()) return run_eval(cfg);
        if (bench->parsed()) return run_bench(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
