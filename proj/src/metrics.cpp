#include "bcsr/metrics.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "bcsr/dsp.hpp"

namespace bcsr {

namespace {

constexpr double kLn10 = 2.302585092994046;

// base-10 log-power grid of the metric STFT (2048-point frames, hop 1024)
LogPowerFeatures metric_grid(const AudioBuffer& buf) {
    LogPowerFeatures f = log_power(stft_signal(buf, 2048, 1024));
    for (auto& v : f.values) v /= kLn10;
    return f;
}

}  // namespace

double lsd_grids(const std::vector<double>& ref, const std::vector<double>& test, int bins,
                 int frames) {
    if (ref.size() != test.size() ||
        ref.size() != static_cast<size_t>(bins) * static_cast<size_t>(frames))
        throw std::invalid_argument("lsd_grids: shape mismatch");
    double acc = 0.0;
    for (int t = 0; t < frames; ++t) {
        double sq = 0.0;
        for (int k = 0; k < bins; ++k) {
            const double d = ref[static_cast<size_t>(k) * frames + t] -
                             test[static_cast<size_t>(k) * frames + t];
            sq += d * d;
        }
        acc += std::sqrt(sq / bins);
    }
    return acc / frames;
}

double lsd(const AudioBuffer& ref, const AudioBuffer& test) {
    if (ref.samples.size() != test.samples.size())
        throw std::invalid_argument("lsd: length mismatch");
    if (ref.samples.empty()) throw std::invalid_argument("lsd: empty signals");
    if (ref.sample_rate != test.sample_rate)
        throw std::invalid_argument("lsd: sample rate mismatch");
    const LogPowerFeatures a = metric_grid(ref);
    const LogPowerFeatures b = metric_grid(test);
    return lsd_grids(a.values, b.values, a.bins, a.frames);
}

double spectral_snr(const AudioBuffer& ref, const AudioBuffer& test) {
    if (ref.samples.size() != test.samples.size())
        throw std::invalid_argument("spectral_snr: length mismatch");
    if (ref.samples.empty()) throw std::invalid_argument("spectral_snr: empty signals");

    const Spectrogram a = stft_signal(ref, 2048, 1024);
    const Spectrogram b = stft_signal(test, 2048, 1024);
    double sig = 0.0, err = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        sig += std::norm(a.data[i]);
        err += std::norm(a.data[i] - b.data[i]);
    }
    if (err <= 0.0) return kSnrCapDb;
    if (sig <= 0.0) return 0.0;
    return std::min(kSnrCapDb, 10.0 * std::log10(sig / err));
}

double snr_db(const std::vector<double>& ref, const std::vector<double>& test) {
    if (ref.size() != test.size()) throw std::invalid_argument("snr_db: length mismatch");
    double sig = 0.0, err = 0.0;
    for (size_t i = 0; i < ref.size(); ++i) {
        sig += ref[i] * ref[i];
        const double d = ref[i] - test[i];
        err += d * d;
    }
    if (err <= 0.0) return kSnrCapDb;
    if (sig <= 0.0) return 0.0;
    return std::min(kSnrCapDb, 10.0 * std::log10(sig / err));
}

void EvalReport::finalize() {
    mean_lsd_input = 0.0;
    mean_lsd_enhanced = 0.0;
    if (rows.empty()) return;
    for (const auto& r : rows) {
        mean_lsd_input += r.lsd_input;
        mean_lsd_enhanced += r.lsd_enhanced;
    }
    mean_lsd_input /= rows.size();
    mean_lsd_enhanced /= rows.size();
}

void write_eval_csv(const std::string& path, const EvalReport& report) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot create eval report: " + path);
    f << "utterance,lsd_input,lsd_enhanced,spectral_snr_enhanced_db\n";
    for (const auto& r : report.rows)
        f << r.id << "," << r.lsd_input << "," << r.lsd_enhanced << "," << r.snr_enhanced << "\n";
    f << "mean," << report.mean_lsd_input << "," << report.mean_lsd_enhanced << ",\n";
}

}  // namespace bcsr
