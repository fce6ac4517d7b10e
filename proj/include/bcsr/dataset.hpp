#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bcsr/audio_io.hpp"

namespace bcsr {

// Speech-like synthetic utterance: harmonic series with a wandering
// fundamental, formant-shaped amplitudes and a syllabic envelope. Harmonics
// inside the band-limiting filter's transition band are muted so the
// clean/band-limited split is well conditioned.
AudioBuffer synth_utterance(uint64_t seed, double seconds = 3.0, int sample_rate = 16000);

// Low-passed colored noise standing in for ambient pickup.
AudioBuffer synth_noise(uint64_t seed, double seconds = 3.0, int sample_rate = 16000);

struct SynthOptions {
    int count = 20;
    int noise_count = 0;
    double seconds = 3.0;
    uint64_t seed = 0;
    double snr_mean_db = 18.0;  // noisy-manifest mixes draw SNR ~ N(18, 3.5)
};

// Writes clean_NN.wav / bcm_NN.wav pairs plus manifest.txt; with noise_count
// > 0 also noise_NN.wav, noisy mixes and manifest_noisy.txt.
void generate_dataset(const std::string& dir, const SynthOptions& opts);

}  // namespace bcsr
