#pragma once

#include <complex>
#include <vector>

#include "bcsr/audio_io.hpp"

namespace bcsr {

// Power floor applied before taking logs, so silence maps to ln(1e-10)
// instead of -inf.
inline constexpr double kLogPowerFloor = 1e-10;

enum class WindowKind { Hann, Blackman };

// Complex STFT grid, bins x frames, bin-major: data[f * frames + t].
struct Spectrogram {
    int bins = 0;    // fft_size / 2 + 1
    int frames = 0;
    int fft_size = 0;
    int hop = 0;
    WindowKind window = WindowKind::Hann;
    std::vector<std::complex<double>> data;

    std::complex<double>& at(int f, int t) { return data[static_cast<size_t>(f) * frames + t]; }
    const std::complex<double>& at(int f, int t) const {
        return data[static_cast<size_t>(f) * frames + t];
    }
};

// Real log-power grid with the same layout as Spectrogram, plus the global
// standardization statistics once normalize() has been applied.
struct LogPowerFeatures {
    int bins = 0;
    int frames = 0;
    std::vector<double> values;
    double norm_mean = 0.0;
    double norm_std = 1.0;

    double& at(int f, int t) { return values[static_cast<size_t>(f) * frames + t]; }
    double at(int f, int t) const { return values[static_cast<size_t>(f) * frames + t]; }
};

// w[i] = 0.5 - 0.5*cos(2*pi*i/N) with N = n (periodic) or n-1 (symmetric).
// The periodic window is built so that w[i] + w[i + n/2] == 1 holds exactly,
// which overlap-add at 50% relies on.
std::vector<double> hann_window(int n, bool periodic = true);

// Classic three-term Blackman; offered as the alternative analysis window
// for larger FFT configurations. Not constant-overlap-add at 50%, so only
// the pointwise-normalized stft/istft pair uses it, never overlap_add.
std::vector<double> blackman_window(int n, bool periodic = true);

std::vector<double> make_window(WindowKind kind, int n, bool periodic = true);

// In-place radix-2 FFT; length must be a power of two. The inverse transform
// scales by 1/N.
void fft(std::vector<std::complex<double>>& x, bool inverse = false);

// Centered STFT of one frame: the frame is reflect-padded by fft_size/2 on
// each side, windowed (periodic), and transformed. A 2048-point frame with
// fft_size 512 and hop 256 yields 257 x 9. The _into form reuses the
// output's storage, so steady-state streaming does not allocate.
Spectrogram stft_frame(const std::vector<double>& frame, int fft_size = 512, int hop = 256,
                       WindowKind window = WindowKind::Hann);
void stft_frame_into(const std::vector<double>& frame, int fft_size, int hop, Spectrogram& out,
                     WindowKind window = WindowKind::Hann);

// Inverse of stft_frame: conjugate-symmetric extension, inverse FFT,
// synthesis-windowed overlap-add with pointwise COLA normalization, then the
// reflect pads are dropped.
std::vector<double> istft_frame(const Spectrogram& spec, int frame_len = 2048);
void istft_frame_into(const Spectrogram& spec, int frame_len, std::vector<double>& out);

// Plain sliding STFT over a whole signal (no centering): frames at offsets
// 0, hop, 2*hop, ... with fft_size == window length; the tail is zero-padded
// to complete the last frame. Used by the evaluation metrics.
Spectrogram stft_signal(const AudioBuffer& buf, int fft_size = 2048, int hop = 1024);

// values = ln(max(|bin|^2, floor)). Normalization fields are left unset.
LogPowerFeatures log_power(const Spectrogram& spec, double floor = kLogPowerFloor);
void log_power_into(const Spectrogram& spec, double floor, LogPowerFeatures& out);

// (v - mean) / std elementwise; records the statistics on the result.
LogPowerFeatures normalize(const LogPowerFeatures& f, double mean, double stddev);
LogPowerFeatures denormalize(const LogPowerFeatures& f, double mean, double stddev);

// Triangular mel filterbank, n_mels x (fft_size/2 + 1) row-major, centers
// equally spaced on m = 2595*log10(1 + f/700), rows area-normalized by
// 2 / (right_edge_hz - left_edge_hz).
std::vector<double> mel_filterbank(int n_mels = 40, int fft_size = 512, double sample_rate = 16000.0,
                                   double fmin = 0.0, double fmax = 8000.0);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Windowed overlap-add resynthesis: each frame is multiplied by a periodic
// Hann of its length and accumulated at multiples of hop (hop = len/2, where
// the shifted windows sum to 1).
AudioBuffer overlap_add(const std::vector<std::vector<double>>& frames, int hop = 1024,
                        int sample_rate = 16000);

}  // namespace bcsr
