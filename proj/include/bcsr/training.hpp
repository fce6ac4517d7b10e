#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "bcsr/audio_io.hpp"
#include "bcsr/dsp.hpp"
#include "bcsr/model.hpp"

namespace bcsr {

// One aligned frame pair: raw (unnormalized) natural-log power grids,
// 257 x 9, band-limited input and full-band target.
struct TrainExample {
    LogPowerFeatures input_log;
    LogPowerFeatures target_log;
};

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig cfg;
    std::vector<double> m;
    std::vector<double> v;
    int64_t step = 0;

    explicit AdamState(size_t n = 0, AdamConfig c = {}) : cfg(c), m(n, 0.0), v(n, 0.0) {}
};

// Standard bias-corrected Adam update on a flat parameter vector.
void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& state);

// L1 on log-spectrograms plus L1 on log-mel-spectrograms (filterbank applied
// to linear power, then re-logged), both mean-reduced. Returns the loss and
// its subgradient wrt the output grid.
struct LossResult {
    double value = 0.0;
    std::vector<double> grad;  // same layout as the output grid
};
LossResult spectral_l1_loss(const LogPowerFeatures& output_log, const LogPowerFeatures& target_log,
                            const std::vector<double>& mel, int n_mels);

// Band-limits clean speech the way a bone-conduction pickup does: 255-tap
// Hamming windowed-sinc low-pass, group delay compensated so the output stays
// sample-aligned with the input.
AudioBuffer simulate_bcm(const AudioBuffer& clean, double cutoff_hz = 2000.0);

// Sums speech with noise scaled to an exact SNR in dB.
AudioBuffer mix_at_snr(const AudioBuffer& speech, const AudioBuffer& noise, double snr_db);
// SNR drawn from N(18, 3.5) dB per call.
AudioBuffer augment_noise(const AudioBuffer& speech, const AudioBuffer& noise,
                          std::mt19937_64& rng);
double sample_snr_db(std::mt19937_64& rng);

struct TrainOptions {
    int epochs = 100;
    int batch = 64;
    uint64_t seed = 0;
    int threads = 1;
    AdamConfig adam;
};

// Minibatch training with per-epoch shuffling from the seed. Per-example
// gradients are reduced in example order, so the loss history is identical
// for any thread count. Returns mean loss per epoch.
std::vector<double> train(Model& m, const std::vector<TrainExample>& dataset,
                          const TrainOptions& opts);

// Forward + loss for one example with the DC row passed through from the
// input; used by train() and by evaluation probes.
struct ExampleResult {
    double loss = 0.0;
    LogPowerFeatures output_log;  // raw 257 x 9
};
ExampleResult run_example(const Model& m, const TrainExample& ex, const std::vector<double>& mel,
                          int n_mels, ForwardTape* tape, Tensor* grad_out);

// Global scalar mean/std over every input log-power value in the dataset.
void compute_norm_stats(const std::vector<TrainExample>& dataset, double& mean, double& stddev);

// Cuts aligned 2048-sample frames from an input/target pair and converts
// them to raw log-power grids.
std::vector<TrainExample> make_examples(const AudioBuffer& input, const AudioBuffer& target);

// Dataset manifests: one entry per line, either "input.wav target.wav" or a
// single clean path (the input is then derived with simulate_bcm). Paths are
// resolved relative to the manifest location.
std::vector<std::pair<std::string, std::string>> read_manifest(const std::string& path);
std::vector<TrainExample> load_dataset(const std::string& manifest_path);

void write_loss_history_csv(const std::string& path, const std::vector<double>& history);

}  // namespace bcsr
