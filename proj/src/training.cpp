#include "bcsr/training.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace bcsr {

namespace {

double rms(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return v.empty() ? 0.0 : std::sqrt(acc / v.size());
}

// Box-Muller; one fresh pair per call, second value discarded for simplicity.
double normal_sample(std::mt19937_64& rng) {
    double u1 = 0.0;
    do {
        u1 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    } while (u1 <= 0.0);
    const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& state) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw std::invalid_argument("adam_step: size mismatch");
    const auto& c = state.cfg;
    ++state.step;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
    for (size_t i = 0; i < params.size(); ++i) {
        state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * grads[i];
        state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * grads[i] * grads[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
}

LossResult spectral_l1_loss(const LogPowerFeatures& output_log, const LogPowerFeatures& target_log,
                            const std::vector<double>& mel, int n_mels) {
    if (output_log.bins != target_log.bins || output_log.frames != target_log.frames)
        throw std::invalid_argument("loss: shape mismatch");
    const int K = output_log.bins, T = output_log.frames;
    if (static_cast<int>(mel.size()) != n_mels * K)
        throw std::invalid_argument("loss: filterbank shape mismatch");

    LossResult res;
    res.grad.assign(static_cast<size_t>(K) * T, 0.0);

    // L1 on log-spectrograms, mean reduced
    double l1 = 0.0;
    const double inv_kt = 1.0 / (static_cast<double>(K) * T);
    for (size_t i = 0; i < output_log.values.size(); ++i) {
        const double d = output_log.values[i] - target_log.values[i];
        l1 += std::abs(d);
        res.grad[i] = (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) * inv_kt;
    }
    l1 *= inv_kt;

    // perceptual term: filterbank applied to linear power, re-logged
    std::vector<double> p_out(output_log.values.size()), p_tgt(target_log.values.size());
    for (size_t i = 0; i < p_out.size(); ++i) {
        p_out[i] = std::exp(output_log.values[i]);
        p_tgt[i] = std::exp(target_log.values[i]);
    }
    double lmel = 0.0;
    const double inv_mt = 1.0 / (static_cast<double>(n_mels) * T);
    for (int m = 0; m < n_mels; ++m) {
        const double* w = &mel[static_cast<size_t>(m) * K];
        for (int t = 0; t < T; ++t) {
            double mo = 0.0, mt = 0.0;
            for (int k = 0; k < K; ++k) {
                mo += w[k] * p_out[static_cast<size_t>(k) * T + t];
                mt += w[k] * p_tgt[static_cast<size_t>(k) * T + t];
            }
            const bool floored = mo <= kLogPowerFloor;
            const double lo = std::log(std::max(mo, kLogPowerFloor));
            const double lt = std::log(std::max(mt, kLogPowerFloor));
            const double d = lo - lt;
            lmel += std::abs(d);
            if (!floored && d != 0.0) {
                const double s = (d > 0.0 ? 1.0 : -1.0) * inv_mt / mo;
                for (int k = 0; k < K; ++k) {
                    const size_t i = static_cast<size_t>(k) * T + t;
                    res.grad[i] += s * w[k] * p_out[i];
                }
            }
        }
    }
    lmel *= inv_mt;

    res.value = l1 + lmel;
    return res;
}

AudioBuffer simulate_bcm(const AudioBuffer& clean, double cutoff_hz) {
    constexpr int kTaps = 255;
    const int half = kTaps / 2;
    const double fc = cutoff_hz / clean.sample_rate;  // normalized

    // Hamming-windowed sinc, normalized to unit DC gain
    std::vector<double> taps(kTaps);
    double sum = 0.0;
    for (int i = 0; i < kTaps; ++i) {
        const int k = i - half;
        const double sinc = k == 0 ? 2.0 * fc
                                   : std::sin(2.0 * std::numbers::pi * fc * k) /
                                         (std::numbers::pi * k);
        const double hamming =
            0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (kTaps - 1));
        taps[i] = sinc * hamming;
        sum += taps[i];
    }
    for (double& t : taps) t /= sum;

    // convolve with the group delay folded in, so y[n] lines up with x[n]
    const long n = static_cast<long>(clean.samples.size());
    AudioBuffer out;
    out.sample_rate = clean.sample_rate;
    out.samples.assign(clean.samples.size(), 0.0);
    for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < kTaps; ++j) {
            const long src = i + half - j;
            if (src >= 0 && src < n) acc += taps[j] * clean.samples[src];
        }
        out.samples[i] = acc;
    }
    return out;
}

AudioBuffer mix_at_snr(const AudioBuffer& speech, const AudioBuffer& noise, double snr_db) {
    const double speech_rms = rms(speech.samples);
    if (speech_rms <= 0.0) throw std::invalid_argument("mix_at_snr: silent speech");
    if (noise.samples.empty()) throw std::invalid_argument("mix_at_snr: empty noise");

    // wrap the noise to cover the speech
    std::vector<double> n(speech.samples.size());
    for (size_t i = 0; i < n.size(); ++i) n[i] = noise.samples[i % noise.samples.size()];
    const double noise_rms = rms(n);
    if (noise_rms <= 0.0) throw std::invalid_argument("mix_at_snr: silent noise");

    const double scale = speech_rms / (noise_rms * std::pow(10.0, snr_db / 20.0));
    AudioBuffer out;
    out.sample_rate = speech.sample_rate;
    out.samples.resize(speech.samples.size());
    for (size_t i = 0; i < n.size(); ++i) out.samples[i] = speech.samples[i] + scale * n[i];
    return out;
}

double sample_snr_db(std::mt19937_64& rng) { return 18.0 + 3.5 * normal_sample(rng); }

AudioBuffer augment_noise(const AudioBuffer& speech, const AudioBuffer& noise,
                          std::mt19937_64& rng) {
    return mix_at_snr(speech, noise, sample_snr_db(rng));
}

ExampleResult run_example(const Model& m, const TrainExample& ex, const std::vector<double>& mel,
                          int n_mels, ForwardTape* tape, Tensor* grad_out) {
    const int bins = ex.input_log.bins;  // 257
    const int T = ex.input_log.frames;
    const int body = bins - 1;

    // normalize and drop the DC row
    LogPowerFeatures in_body;
    in_body.bins = body;
    in_body.frames = T;
    in_body.values.resize(static_cast<size_t>(body) * T);
    for (size_t i = 0; i < in_body.values.size(); ++i)
        in_body.values[i] = (ex.input_log.values[T + i] - m.norm_mean) / m.norm_std;

    ForwardTape local;
    ForwardTape& tp = tape ? *tape : local;
    forward_all(m, features_to_tensor(in_body), tp);
    const Tensor& net_out = tp.acts.back();

    // reassemble 257 x T: input DC row passed through, body denormalized
    ExampleResult res;
    res.output_log.bins = bins;
    res.output_log.frames = T;
    res.output_log.values.resize(ex.input_log.values.size());
    for (int t = 0; t < T; ++t) res.output_log.values[t] = ex.input_log.values[t];
    for (size_t i = 0; i < net_out.data.size(); ++i)
        res.output_log.values[T + i] = net_out.data[i] * m.norm_std + m.norm_mean;

    LossResult loss = spectral_l1_loss(res.output_log, ex.target_log, mel, n_mels);
    res.loss = loss.value;

    if (grad_out) {
        // chain through denormalization; the DC row carries no gradient
        Tensor g(1, body, T);
        for (size_t i = 0; i < g.data.size(); ++i) g.data[i] = loss.grad[T + i] * m.norm_std;
        *grad_out = std::move(g);
    }
    return res;
}

std::vector<double> train(Model& m, const std::vector<TrainExample>& dataset,
                          const TrainOptions& opts) {
    if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
    if (opts.batch < 1 || opts.epochs < 0) throw std::invalid_argument("train: bad options");
    if (m.norm_std <= 0.0) throw std::invalid_argument("train: model norm stats unset");

    const int n_mels = 40;
    const std::vector<double> mel = mel_filterbank(n_mels);
    const size_t n_params = count_params(m);
    AdamState adam(n_params, opts.adam);
    std::vector<double> params(n_params), grads(n_params);
    gather_params(m, params);

    std::mt19937_64 rng(opts.seed);
    std::vector<size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);

    const int threads = std::max(1, opts.threads);
    std::vector<double> history;
    history.reserve(opts.epochs);

    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        // Fisher-Yates from the run seed
        for (size_t i = order.size(); i > 1; --i) {
            const size_t j = rng() % i;
            std::swap(order[i - 1], order[j]);
        }

        double epoch_loss = 0.0;
        size_t seen = 0;
        for (size_t start = 0; start < order.size(); start += opts.batch) {
            const size_t count = std::min<size_t>(opts.batch, order.size() - start);

            // per-example gradients into fixed slots; reduced in example
            // order below so the result is thread-count independent
            std::vector<std::vector<double>> ex_grads(count);
            std::vector<double> ex_loss(count, 0.0);

            auto job = [&](size_t lo, size_t hi) {
                Model local = m;  // copy: gradients accumulate per worker
                scatter_params(local, params);
                ForwardTape tape;
                for (size_t e = lo; e < hi; ++e) {
                    zero_grad(local);
                    Tensor grad_out;
                    ExampleResult r = run_example(local, dataset[order[start + e]], mel, n_mels,
                                                  &tape, &grad_out);
                    backward(local, tape, grad_out);
                    gather_grads(local, ex_grads[e]);
                    ex_loss[e] = r.loss;
                }
            };

            if (threads == 1 || count == 1) {
                job(0, count);
            } else {
                const size_t per = (count + threads - 1) / threads;
                std::vector<std::thread> pool;
                for (size_t lo = 0; lo < count; lo += per)
                    pool.emplace_back(job, lo, std::min(lo + per, count));
                for (auto& th : pool) th.join();
            }

            std::fill(grads.begin(), grads.end(), 0.0);
            for (size_t e = 0; e < count; ++e) {
                for (size_t i = 0; i < n_params; ++i) grads[i] += ex_grads[e][i];
                epoch_loss += ex_loss[e];
            }
            const double inv = 1.0 / static_cast<double>(count);
            for (auto& g : grads) g *= inv;
            seen += count;

            adam_step(params, grads, adam);
        }
        scatter_params(m, params);
        history.push_back(epoch_loss / static_cast<double>(seen));
    }
    return history;
}

void compute_norm_stats(const std::vector<TrainExample>& dataset, double& mean, double& stddev) {
    double sum = 0.0, sq = 0.0;
    size_t n = 0;
    for (const auto& ex : dataset) {
        for (double v : ex.input_log.values) {
            sum += v;
            sq += v * v;
            ++n;
        }
    }
    if (n == 0) throw std::invalid_argument("compute_norm_stats: empty dataset");
    mean = sum / n;
    const double var = std::max(sq / n - mean * mean, 1e-12);
    stddev = std::sqrt(var);
}

std::vector<TrainExample> make_examples(const AudioBuffer& input, const AudioBuffer& target) {
    if (input.samples.size() != target.samples.size())
        throw std::invalid_argument("make_examples: length mismatch");
    auto in_frames = frame_stream(input);
    auto tgt_frames = frame_stream(target);
    std::vector<TrainExample> out;
    out.reserve(in_frames.size());
    for (size_t k = 0; k < in_frames.size(); ++k) {
        TrainExample ex;
        ex.input_log = log_power(stft_frame(in_frames[k]));
        ex.target_log = log_power(stft_frame(tgt_frames[k]));
        out.push_back(std::move(ex));
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> read_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open manifest: " + path);
    const auto base = std::filesystem::path(path).parent_path();

    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string a, b;
        ss >> a >> b;
        if (a.empty()) continue;
        auto resolve = [&base](const std::string& p) {
            std::filesystem::path fp(p);
            return fp.is_absolute() ? fp.string() : (base / fp).string();
        };
        pairs.emplace_back(resolve(a), b.empty() ? std::string() : resolve(b));
    }
    if (pairs.empty()) throw std::runtime_error("empty manifest: " + path);
    return pairs;
}

std::vector<TrainExample> load_dataset(const std::string& manifest_path) {
    std::vector<TrainExample> all;
    for (const auto& [in_path, tgt_path] : read_manifest(manifest_path)) {
        if (tgt_path.empty()) {
            // clean-only entry: derive the band-limited input
            AudioBuffer clean = read_wav(in_path);
            AudioBuffer bcm = simulate_bcm(clean);
            auto ex = make_examples(bcm, clean);
            all.insert(all.end(), ex.begin(), ex.end());
        } else {
            auto ex = make_examples(read_wav(in_path), read_wav(tgt_path));
            all.insert(all.end(), ex.begin(), ex.end());
        }
    }
    return all;
}

void write_loss_history_csv(const std::string& path, const std::vector<double>& history) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot create loss history file: " + path);
    f << "epoch,mean_loss\n";
    for (size_t i = 0; i < history.size(); ++i) f << i + 1 << "," << history[i] << "\n";
}

}  // namespace bcsr
