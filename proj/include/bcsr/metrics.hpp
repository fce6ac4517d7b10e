#pragma once

#include <string>
#include <vector>

#include "bcsr/audio_io.hpp"

namespace bcsr {

// Reported when two signals are spectrally identical.
inline constexpr double kSnrCapDb = 200.0;

// Log-spectral distance: per-frame RMS over frequency of the difference of
// base-10 log-power spectra (X = log10 |S|^2), averaged over frames. S is an
// STFT with 2048-point frames, hop 1024, Hann window.
double lsd(const AudioBuffer& ref, const AudioBuffer& test);

// Same distance on precomputed base-10 log-power grids (bins x frames).
double lsd_grids(const std::vector<double>& ref, const std::vector<double>& test, int bins,
                 int frames);

// 10*log10(sum |S_ref|^2 / sum |S_ref - S_test|^2) over the same STFT grids,
// capped at kSnrCapDb.
double spectral_snr(const AudioBuffer& ref, const AudioBuffer& test);

// Plain energy-ratio SNR over two equal-length value arrays (used for
// comparing feature grids between inference paths).
double snr_db(const std::vector<double>& ref, const std::vector<double>& test);

struct EvalRow {
    std::string id;
    double lsd_input = 0.0;
    double lsd_enhanced = 0.0;
    double snr_enhanced = 0.0;
};

struct EvalReport {
    std::vector<EvalRow> rows;
    double mean_lsd_input = 0.0;
    double mean_lsd_enhanced = 0.0;

    void finalize();
};

void write_eval_csv(const std::string& path, const EvalReport& report);

}  // namespace bcsr
