#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bcsr/metrics.hpp"

using namespace bcsr;

namespace {

AudioBuffer tone(double freq, double seconds, double amp = 0.4, int sr = 16000) {
    AudioBuffer b;
    b.sample_rate = sr;
    b.samples.resize(static_cast<size_t>(seconds * sr));
    for (size_t i = 0; i < b.samples.size(); ++i)
        b.samples[i] = amp * std::sin(2.0 * std::numbers::pi * freq * i / sr);
    return b;
}

AudioBuffer noise_buffer(uint64_t seed, size_t n, double amp, int sr = 16000) {
    std::mt19937_64 rng(seed);
    AudioBuffer b;
    b.sample_rate = sr;
    b.samples.resize(n);
    for (auto& v : b.samples)
        v = amp * (2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0);
    return b;
}

}  // namespace

TEST_CASE("lsd of a signal with itself is zero") {
    AudioBuffer x = tone(440.0, 1.0);
    CHECK(lsd(x, x) == 0.0);
}

TEST_CASE("lsd is symmetric") {
    AudioBuffer a = tone(440.0, 1.0);
    AudioBuffer b = tone(523.25, 1.0);
    CHECK(lsd(a, b) == doctest::Approx(lsd(b, a)).epsilon(1e-12));
}

TEST_CASE("scaling amplitude by 10 gives LSD exactly 2 in log10-power units") {
    // power scales by 100 in every bin, so each frame contributes
    // sqrt(mean(log10(100)^2)) = 2, constant across frames. Broadband noise
    // keeps every bin above the log floor in both signals.
    AudioBuffer x = noise_buffer(3, 32768, 0.5);
    AudioBuffer y = x;
    for (auto& v : y.samples) v *= 10.0;
    CHECK(lsd(x, y) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("lsd rejects mismatched signals") {
    AudioBuffer a = tone(440.0, 1.0);
    AudioBuffer b = tone(440.0, 0.5);
    CHECK_THROWS(lsd(a, b));
    AudioBuffer empty;
    CHECK_THROWS(lsd(empty, empty));
}

TEST_CASE("lsd is invariant to a whole-hop shift of both signals") {
    // periodic signals with period dividing the hop give identical frames
    const double freq = 1000.0;  // 16 samples per period; 1024 % 16 == 0
    AudioBuffer a = tone(freq, 2.0, 0.4);
    AudioBuffer b = tone(freq, 2.0, 0.1);

    AudioBuffer a_shift, b_shift;
    a_shift.sample_rate = b_shift.sample_rate = 16000;
    const int hop = 1024;
    a_shift.samples.assign(a.samples.begin() + hop, a.samples.end());
    b_shift.samples.assign(b.samples.begin() + hop, b.samples.end());
    a.samples.resize(a_shift.samples.size());
    b.samples.resize(b_shift.samples.size());

    CHECK(lsd(a, b) == doctest::Approx(lsd(a_shift, b_shift)).epsilon(1e-9));
}

TEST_CASE("lsd decreases as the test grid approaches the reference") {
    std::mt19937_64 rng(81);
    const int bins = 64, frames = 5;
    std::vector<double> ref(bins * frames), far(bins * frames), near(bins * frames);
    for (size_t i = 0; i < ref.size(); ++i) {
        ref[i] = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
        const double offset = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) + 0.5;
        far[i] = ref[i] + offset;
        near[i] = ref[i] + 0.25 * offset;
    }
    CHECK(lsd_grids(ref, near, bins, frames) < lsd_grids(ref, far, bins, frames));
    CHECK(lsd_grids(ref, ref, bins, frames) == 0.0);
}

TEST_CASE("spectral_snr endpoints") {
    AudioBuffer x = tone(440.0, 1.0);
    SUBCASE("identical signals cap at 200 dB") { CHECK(spectral_snr(x, x) == kSnrCapDb); }
    SUBCASE("zero test signal gives 0 dB") {
        AudioBuffer zero = x;
        std::fill(zero.samples.begin(), zero.samples.end(), 0.0);
        CHECK(spectral_snr(x, zero) == doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("spectral_snr matches the constructed noise level") {
    AudioBuffer x = noise_buffer(5, 32768, 0.5);
    for (double noise_amp : {0.05, 0.005}) {
        AudioBuffer n = noise_buffer(17, x.samples.size(), noise_amp);
        AudioBuffer y = x;
        for (size_t i = 0; i < y.samples.size(); ++i) y.samples[i] += n.samples[i];

        // analytic SNR of uniform noise added to uniform signal
        double sig = 0.0, err = 0.0;
        for (size_t i = 0; i < x.samples.size(); ++i) {
            sig += x.samples[i] * x.samples[i];
            err += n.samples[i] * n.samples[i];
        }
        const double expected = 10.0 * std::log10(sig / err);
        CHECK(spectral_snr(x, y) == doctest::Approx(expected).epsilon(0.06));
    }
}

TEST_CASE("snr_db on plain arrays") {
    std::vector<double> ref{1.0, -2.0, 3.0};
    CHECK(snr_db(ref, ref) == kSnrCapDb);
    std::vector<double> off{1.1, -2.1, 3.1};
    const double expected = 10.0 * std::log10((1.0 + 4.0 + 9.0) / (3 * 0.01));
    CHECK(snr_db(ref, off) == doctest::Approx(expected).epsilon(1e-6));
    CHECK_THROWS(snr_db(ref, {1.0}));
}

TEST_CASE("eval report aggregates means") {
    EvalReport rep;
    rep.rows.push_back({"a", 4.0, 2.0, 30.0});
    rep.rows.push_back({"b", 6.0, 3.0, 40.0});
    rep.finalize();
    CHECK(rep.mean_lsd_input == doctest::Approx(5.0));
    CHECK(rep.mean_lsd_enhanced == doctest::Approx(2.5));
}
