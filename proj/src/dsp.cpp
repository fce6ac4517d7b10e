#include "bcsr/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <list>
#include <numbers>
#include <stdexcept>

namespace bcsr {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_power_of_two(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Mirror index without repeating the edge sample (numpy 'reflect').
int reflect_index(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * (n - 1) - i;
    }
    return i;
}

}  // namespace

std::vector<double> hann_window(int n, bool periodic) {
    if (n < 2) throw std::invalid_argument("hann_window: n must be >= 2");
    std::vector<double> w(n);
    if (periodic && n % 2 == 0) {
        // Second half derived from the first so the half-shifted sum is 1
        // bit-exactly (the COLA identity overlap-add depends on).
        const int half = n / 2;
        for (int i = 0; i < half; ++i) w[i] = 0.5 - 0.5 * std::cos(kTwoPi * i / n);
        for (int i = half; i < n; ++i) w[i] = 1.0 - w[i - half];
    } else {
        const double denom = periodic ? n : n - 1;
        for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(kTwoPi * i / denom);
    }
    return w;
}

void fft(std::vector<std::complex<double>>& x, bool inverse) {
    const size_t n = x.size();
    if (!is_power_of_two(n)) throw std::invalid_argument("fft: length must be a power of two");
    if (n == 1) return;

    // bit-reversal permutation
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }

    const double sign = inverse ? 1.0 : -1.0;
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * kTwoPi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = x[i + k];
                std::complex<double> v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        const double inv_n = 1.0 / static_cast<double>(n);
        for (auto& v : x) v *= inv_n;
    }
}

std::vector<double> blackman_window(int n, bool periodic) {
    if (n < 2) throw std::invalid_argument("blackman_window: n must be >= 2");
    std::vector<double> w(n);
    const double denom = periodic ? n : n - 1;
    for (int i = 0; i < n; ++i)
        w[i] = 0.42 - 0.5 * std::cos(kTwoPi * i / denom) + 0.08 * std::cos(2.0 * kTwoPi * i / denom);
    return w;
}

std::vector<double> make_window(WindowKind kind, int n, bool periodic) {
    return kind == WindowKind::Blackman ? blackman_window(n, periodic) : hann_window(n, periodic);
}

namespace {

// cached analysis/synthesis windows; thread_local keeps the dsp entry points
// safe for concurrent use on distinct data, the list keeps references stable
const std::vector<double>& cached_window(WindowKind kind, int n) {
    thread_local std::list<std::tuple<WindowKind, int, std::vector<double>>> cache;
    for (const auto& [k, len, w] : cache)
        if (k == kind && len == n) return w;
    cache.emplace_back(kind, n, make_window(kind, n, true));
    return std::get<2>(cache.back());
}

}  // namespace

void stft_frame_into(const std::vector<double>& frame, int fft_size, int hop, Spectrogram& spec,
                     WindowKind window_kind) {
    const int n = static_cast<int>(frame.size());
    if (fft_size < 2 || !is_power_of_two(static_cast<size_t>(fft_size)))
        throw std::invalid_argument("stft_frame: fft_size must be a power of two >= 2");
    if (hop <= 0 || n % hop != 0)
        throw std::invalid_argument("stft_frame: frame length must be divisible by hop");
    if (n < fft_size) throw std::invalid_argument("stft_frame: frame shorter than fft_size");

    const int pad = fft_size / 2;
    const int n_frames = n / hop + 1;
    const int bins = fft_size / 2 + 1;
    const std::vector<double>& window = cached_window(window_kind, fft_size);

    spec.bins = bins;
    spec.frames = n_frames;
    spec.fft_size = fft_size;
    spec.hop = hop;
    spec.window = window_kind;
    spec.data.resize(static_cast<size_t>(bins) * n_frames);

    thread_local std::vector<std::complex<double>> buf;
    buf.resize(fft_size);
    for (int t = 0; t < n_frames; ++t) {
        const int start = t * hop - pad;  // position in the unpadded frame
        for (int i = 0; i < fft_size; ++i) {
            const double v = frame[reflect_index(start + i, n)];
            buf[i] = std::complex<double>(v * window[i], 0.0);
        }
        fft(buf, false);
        for (int f = 0; f < bins; ++f) spec.at(f, t) = buf[f];
    }
}

Spectrogram stft_frame(const std::vector<double>& frame, int fft_size, int hop,
                       WindowKind window_kind) {
    Spectrogram spec;
    stft_frame_into(frame, fft_size, hop, spec, window_kind);
    return spec;
}

void istft_frame_into(const Spectrogram& spec, int frame_len, std::vector<double>& out) {
    const int fft_size = spec.fft_size;
    const int hop = spec.hop;
    if (spec.bins != fft_size / 2 + 1)
        throw std::invalid_argument("istft_frame: bins inconsistent with fft_size");
    if (spec.frames != frame_len / hop + 1)
        throw std::invalid_argument("istft_frame: frame count inconsistent with frame_len");

    const int pad = fft_size / 2;
    const int padded_len = frame_len + fft_size;
    const std::vector<double>& window = cached_window(spec.window, fft_size);

    thread_local std::vector<double> acc, wsum;
    thread_local std::vector<std::complex<double>> buf;
    acc.assign(padded_len, 0.0);
    wsum.assign(padded_len, 0.0);
    buf.resize(fft_size);

    for (int t = 0; t < spec.frames; ++t) {
        for (int f = 0; f < spec.bins; ++f) buf[f] = spec.at(f, t);
        for (int f = spec.bins; f < fft_size; ++f) buf[f] = std::conj(spec.at(fft_size - f, t));
        fft(buf, true);
        const int off = t * hop;
        for (int i = 0; i < fft_size; ++i) {
            acc[off + i] += buf[i].real() * window[i];
            wsum[off + i] += window[i] * window[i];
        }
    }

    out.resize(frame_len);
    for (int i = 0; i < frame_len; ++i) {
        const double d = wsum[pad + i];
        out[i] = d > 1e-12 ? acc[pad + i] / d : 0.0;
    }
}

std::vector<double> istft_frame(const Spectrogram& spec, int frame_len) {
    std::vector<double> out;
    istft_frame_into(spec, frame_len, out);
    return out;
}

Spectrogram stft_signal(const AudioBuffer& buf, int fft_size, int hop) {
    if (fft_size < 2 || !is_power_of_two(static_cast<size_t>(fft_size)))
        throw std::invalid_argument("stft_signal: fft_size must be a power of two >= 2");
    if (hop <= 0) throw std::invalid_argument("stft_signal: hop must be > 0");
    if (buf.samples.empty()) throw std::invalid_argument("stft_signal: empty signal");

    const long n = static_cast<long>(buf.samples.size());
    const long n_frames = n <= fft_size ? 1 : (n - fft_size + hop - 1) / hop + 1;
    const int bins = fft_size / 2 + 1;
    const std::vector<double> window = hann_window(fft_size, true);

    Spectrogram spec;
    spec.bins = bins;
    spec.frames = static_cast<int>(n_frames);
    spec.fft_size = fft_size;
    spec.hop = hop;
    spec.data.resize(static_cast<size_t>(bins) * n_frames);

    std::vector<std::complex<double>> fbuf(fft_size);
    for (long t = 0; t < n_frames; ++t) {
        const long off = t * hop;
        for (int i = 0; i < fft_size; ++i) {
            const double v = off + i < n ? buf.samples[off + i] : 0.0;
            fbuf[i] = std::complex<double>(v * window[i], 0.0);
        }
        fft(fbuf, false);
        for (int f = 0; f < bins; ++f) spec.at(f, static_cast<int>(t)) = fbuf[f];
    }
    return spec;
}

void log_power_into(const Spectrogram& spec, double floor, LogPowerFeatures& f) {
    if (floor <= 0.0) throw std::invalid_argument("log_power: floor must be > 0");
    f.bins = spec.bins;
    f.frames = spec.frames;
    f.values.resize(spec.data.size());
    for (size_t i = 0; i < spec.data.size(); ++i)
        f.values[i] = std::log(std::max(std::norm(spec.data[i]), floor));
}

LogPowerFeatures log_power(const Spectrogram& spec, double floor) {
    LogPowerFeatures f;
    log_power_into(spec, floor, f);
    return f;
}

LogPowerFeatures normalize(const LogPowerFeatures& f, double mean, double stddev) {
    if (stddev <= 0.0) throw std::invalid_argument("normalize: std must be > 0");
    LogPowerFeatures out = f;
    for (auto& v : out.values) v = (v - mean) / stddev;
    out.norm_mean = mean;
    out.norm_std = stddev;
    return out;
}

LogPowerFeatures denormalize(const LogPowerFeatures& f, double mean, double stddev) {
    if (stddev <= 0.0) throw std::invalid_argument("denormalize: std must be > 0");
    LogPowerFeatures out = f;
    for (auto& v : out.values) v = v * stddev + mean;
    out.norm_mean = 0.0;
    out.norm_std = 1.0;
    return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_filterbank(int n_mels, int fft_size, double sample_rate, double fmin,
                                   double fmax) {
    if (n_mels < 1) throw std::invalid_argument("mel_filterbank: n_mels must be >= 1");
    if (fmin < 0 || fmax <= fmin || fmax > sample_rate / 2)
        throw std::invalid_argument("mel_filterbank: invalid frequency range");

    const int bins = fft_size / 2 + 1;
    const double hz_per_bin = sample_rate / fft_size;

    // n_mels + 2 edge points equally spaced in mel
    std::vector<double> edges_hz(n_mels + 2);
    const double mel_lo = hz_to_mel(fmin), mel_hi = hz_to_mel(fmax);
    for (int m = 0; m < n_mels + 2; ++m)
        edges_hz[m] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * m / (n_mels + 1));

    std::vector<double> fb(static_cast<size_t>(n_mels) * bins, 0.0);
    for (int m = 0; m < n_mels; ++m) {
        const double left = edges_hz[m], center = edges_hz[m + 1], right = edges_hz[m + 2];
        const double area_norm = 2.0 / (right - left);
        for (int k = 0; k < bins; ++k) {
            const double hz = k * hz_per_bin;
            double w = 0.0;
            if (hz > left && hz < center)
                w = (hz - left) / (center - left);
            else if (hz >= center && hz < right)
                w = (right - hz) / (right - center);
            fb[static_cast<size_t>(m) * bins + k] = w * area_norm;
        }
    }
    return fb;
}

AudioBuffer overlap_add(const std::vector<std::vector<double>>& frames, int hop, int sample_rate) {
    AudioBuffer out;
    out.sample_rate = sample_rate;
    if (frames.empty()) return out;

    const int len = static_cast<int>(frames[0].size());
    if (hop * 2 != len) throw std::invalid_argument("overlap_add: hop must be len/2");
    for (const auto& fr : frames)
        if (static_cast<int>(fr.size()) != len)
            throw std::invalid_argument("overlap_add: frame length mismatch");

    const std::vector<double> window = hann_window(len, true);
    out.samples.assign(static_cast<size_t>(frames.size() - 1) * hop + len, 0.0);
    for (size_t k = 0; k < frames.size(); ++k) {
        const size_t off = k * hop;
        for (int i = 0; i < len; ++i) out.samples[off + i] += frames[k][i] * window[i];
    }
    return out;
}

}  // namespace bcsr
