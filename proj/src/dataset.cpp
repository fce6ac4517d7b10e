#include "bcsr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

#include "bcsr/training.hpp"

namespace bcsr {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

uint64_t item_seed(uint64_t seed, uint64_t salt, uint64_t index) {
    uint64_t x = seed ^ (salt * 0x9e3779b97f4a7c15ULL) ^ (index + 1) * 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 30;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

// The band-limiting filter transitions around its 2 kHz cutoff; harmonics
// placed there would sit half-attenuated in the "band-limited" signal, so
// the generator leaves that region empty.
constexpr double kNotchLow = 1800.0;
constexpr double kNotchHigh = 2400.0;

}  // namespace

AudioBuffer synth_utterance(uint64_t seed, double seconds, int sample_rate) {
    std::mt19937_64 rng(seed);
    const size_t n = static_cast<size_t>(seconds * sample_rate);

    const double f0 = uniform(rng, 105.0, 235.0);
    const double vibrato_rate = uniform(rng, 0.4, 2.2);
    const double vibrato_depth = uniform(rng, 0.01, 0.035);  // relative
    const double syllable_rate = uniform(rng, 2.0, 5.0);
    const double syllable_phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);

    // formant-like spectral bumps; the upper two keep real energy above 2 kHz
    const double centers[4] = {uniform(rng, 350, 800), uniform(rng, 1000, 1700),
                               uniform(rng, 2700, 3700), uniform(rng, 4500, 6500)};
    const double widths[4] = {170, 260, 420, 700};
    const double gains[4] = {1.0, 0.65, 0.5, 0.35};

    const double nyquist_guard = 0.47 * sample_rate;
    const int n_harmonics = static_cast<int>(nyquist_guard / f0);

    std::vector<double> amp(n_harmonics + 1, 0.0);
    std::vector<double> phase(n_harmonics + 1, 0.0);
    for (int k = 1; k <= n_harmonics; ++k) {
        const double fk = k * f0;
        if (fk > kNotchLow && fk < kNotchHigh) continue;
        double shape = 0.02;
        for (int j = 0; j < 4; ++j) {
            const double d = (fk - centers[j]) / widths[j];
            shape += gains[j] * std::exp(-0.5 * d * d);
        }
        amp[k] = shape / std::pow(static_cast<double>(k), 0.35);
        phase[k] = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    }

    AudioBuffer buf;
    buf.sample_rate = sample_rate;
    buf.samples.assign(n, 0.0);

    const double dt = 1.0 / sample_rate;
    std::vector<double> inst_phase(n_harmonics + 1);
    for (int k = 1; k <= n_harmonics; ++k) inst_phase[k] = phase[k];

    for (size_t i = 0; i < n; ++i) {
        const double t = i * dt;
        const double f_now =
            f0 * (1.0 + vibrato_depth * std::sin(2.0 * std::numbers::pi * vibrato_rate * t));
        double v = 0.0;
        for (int k = 1; k <= n_harmonics; ++k) {
            if (amp[k] == 0.0) continue;
            inst_phase[k] += 2.0 * std::numbers::pi * k * f_now * dt;
            v += amp[k] * std::sin(inst_phase[k]);
        }
        const double syl =
            std::sin(std::numbers::pi * syllable_rate * t + syllable_phase);
        const double envelope = 0.25 + 0.75 * syl * syl;
        const double edge = std::min({1.0, t / 0.05, (seconds - t) / 0.05});
        buf.samples[i] = v * envelope * std::max(edge, 0.0);
    }

    double peak = 0.0;
    for (double s : buf.samples) peak = std::max(peak, std::abs(s));
    if (peak > 0.0) {
        const double norm = 0.5 / peak;
        for (double& s : buf.samples) s *= norm;
    }
    return buf;
}

AudioBuffer synth_noise(uint64_t seed, double seconds, int sample_rate) {
    std::mt19937_64 rng(seed);
    const size_t n = static_cast<size_t>(seconds * sample_rate);

    AudioBuffer buf;
    buf.sample_rate = sample_rate;
    buf.samples.assign(n, 0.0);

    // white noise through a leaky integrator gives a low-weighted spectrum,
    // roughly like rumble picked up through contact
    const double alpha = 0.92;
    double state = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double white = uniform(rng, -1.0, 1.0);
        state = alpha * state + (1.0 - alpha) * white;
        buf.samples[i] = state * 6.0 + white * 0.08;
    }

    double acc = 0.0;
    for (double s : buf.samples) acc += s * s;
    const double rms = std::sqrt(acc / std::max<size_t>(n, 1));
    if (rms > 0.0)
        for (double& s : buf.samples) s *= 0.1 / rms;
    return buf;
}

void generate_dataset(const std::string& dir, const SynthOptions& opts) {
    if (opts.count < 1) throw std::invalid_argument("generate_dataset: count must be >= 1");
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);

    std::ofstream manifest(base / "manifest.txt");
    if (!manifest) throw std::runtime_error("cannot create manifest in " + dir);

    char name[64];
    std::vector<AudioBuffer> bcm_signals;
    for (int i = 0; i < opts.count; ++i) {
        const AudioBuffer clean = synth_utterance(item_seed(opts.seed, 1, i), opts.seconds);
        const AudioBuffer bcm = simulate_bcm(clean);
        std::snprintf(name, sizeof(name), "clean_%03d.wav", i);
        write_wav((base / name).string(), clean);
        const std::string clean_name = name;
        std::snprintf(name, sizeof(name), "bcm_%03d.wav", i);
        write_wav((base / name).string(), bcm);
        manifest << name << " " << clean_name << "\n";
        if (opts.noise_count > 0) bcm_signals.push_back(bcm);
    }

    if (opts.noise_count > 0) {
        std::vector<AudioBuffer> noises;
        for (int j = 0; j < opts.noise_count; ++j) {
            AudioBuffer noise = synth_noise(item_seed(opts.seed, 2, j), opts.seconds);
            std::snprintf(name, sizeof(name), "noise_%03d.wav", j);
            write_wav((base / name).string(), noise);
            // the pickup band-limits ambient noise the same way it does speech
            noises.push_back(simulate_bcm(noise));
        }

        std::ofstream noisy_manifest(base / "manifest_noisy.txt");
        if (!noisy_manifest) throw std::runtime_error("cannot create noisy manifest in " + dir);
        std::mt19937_64 rng(item_seed(opts.seed, 3, 0));
        for (int i = 0; i < opts.count; ++i) {
            const AudioBuffer& noise = noises[i % noises.size()];
            const AudioBuffer noisy = augment_noise(bcm_signals[i], noise, rng);
            std::snprintf(name, sizeof(name), "bcm_noisy_%03d.wav", i);
            write_wav((base / name).string(), noisy);
            const std::string noisy_name = name;
            std::snprintf(name, sizeof(name), "clean_%03d.wav", i);
            noisy_manifest << noisy_name << " " << name << "\n";
        }
    }
}

}  // namespace bcsr
