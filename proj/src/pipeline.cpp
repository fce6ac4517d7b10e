#include "bcsr/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "bcsr/dsp.hpp"

namespace bcsr {

namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
}

constexpr double kHopDeadlineMs = 64.0;  // hop / sample rate at 16 kHz

}  // namespace

StreamState::StreamState(const Model& model)
    : model_(&model), norm_mean_(model.norm_mean), norm_std_(model.norm_std) {
    if (norm_std_ <= 0.0) throw std::invalid_argument("StreamState: model norm stats unset");
    init_buffers();
}

StreamState::StreamState(const QuantizedModel& qmodel)
    : qmodel_(&qmodel), norm_mean_(qmodel.norm_mean), norm_std_(qmodel.norm_std) {
    if (norm_std_ <= 0.0) throw std::invalid_argument("StreamState: model norm stats unset");
    init_buffers();
}

void StreamState::init_buffers() {
    carry_.assign(hop_, 0.0);
    windowed_.resize(frame_len_);
    synth_window_ = hann_window(frame_len_, true);
    // keep the telemetry log allocation-free for long sessions
    latency_log_.reserve(8192);
}

void StreamState::infer(const LogPowerFeatures& normalized_input, LogPowerFeatures& out) {
    if (model_) {
        in_tensor_.channels = 1;
        in_tensor_.bins = normalized_input.bins;
        in_tensor_.frames = normalized_input.frames;
        in_tensor_.data = normalized_input.values;
        forward_all(*model_, in_tensor_, tape_);
        const Tensor& y = tape_.acts.back();
        out.bins = y.bins;
        out.frames = y.frames;
        out.values = y.data;
    } else {
        forward_quantized_all(*qmodel_, normalized_input, qtape_);
        const size_t last = qmodel_->nodes.size() - 1;
        out.bins = qtape_.bins[last];
        out.frames = qtape_.frames[last];
        out.values.resize(qtape_.acts[last].size());
        const double scale = std::ldexp(1.0, -qmodel_->act_exp[last]);
        for (size_t i = 0; i < out.values.size(); ++i)
            out.values[i] = qtape_.acts[last][i] * scale;
    }
}

void StreamState::process_frame(const std::vector<double>& frame, std::span<double> out) {
    if (static_cast<int>(frame.size()) != frame_len_)
        throw std::invalid_argument("process_frame: expected a full frame");
    if (static_cast<int>(out.size()) != hop_)
        throw std::invalid_argument("process_frame: output must hold one hop");

    const auto t0 = Clock::now();

    // analysis: spectrogram, log power, normalization, DC row removed
    stft_frame_into(frame, 512, 256, spec_);
    log_power_into(spec_, kLogPowerFloor, full_log_);
    const int T = spec_.frames;
    body_.bins = spec_.bins - 1;
    body_.frames = T;
    body_.values.resize(static_cast<size_t>(body_.bins) * T);
    for (size_t i = 0; i < body_.values.size(); ++i)
        body_.values[i] = (full_log_.values[T + i] - norm_mean_) / norm_std_;

    const auto t1 = Clock::now();

    infer(body_, net_out_);

    const auto t2 = Clock::now();

    // resynthesis: reattach DC, back to linear magnitude, input phase kept
    out_spec_ = spec_;  // DC row and phase reused as-is
    for (int f = 1; f < spec_.bins; ++f) {
        for (int t = 0; t < T; ++t) {
            const double log_p =
                net_out_.values[static_cast<size_t>(f - 1) * T + t] * norm_std_ + norm_mean_;
            const double mag = std::exp(0.5 * log_p);
            const std::complex<double> z = spec_.at(f, t);
            const double in_mag = std::abs(z);
            out_spec_.at(f, t) = in_mag > 0.0 ? z * (mag / in_mag) : std::complex<double>(0.0);
        }
    }
    istft_frame_into(out_spec_, frame_len_, synth_);

    // overlap-add with the synthesis window; emit the completed hop
    for (int i = 0; i < frame_len_; ++i) windowed_[i] = synth_[i] * synth_window_[i];
    for (int i = 0; i < hop_; ++i) {
        out[i] = carry_[i] + windowed_[i];
        carry_[i] = windowed_[hop_ + i];
    }

    const auto t3 = Clock::now();

    FrameLatency lat;
    lat.pre_ms = ms_between(t0, t1);
    lat.infer_ms = ms_between(t1, t2);
    lat.post_ms = ms_between(t2, t3);
    lat.total_ms = ms_between(t0, t3);
    latency_log_.push_back(lat);
}

std::vector<double> StreamState::process_frame(const std::vector<double>& frame) {
    std::vector<double> out(hop_);
    process_frame(frame, out);
    return out;
}

LatencyReport StreamState::latency_report() const {
    LatencyReport rep;
    rep.frames = latency_log_;
    rep.finalize();
    return rep;
}

void LatencyReport::finalize() {
    mean_total_ms = p95_total_ms = mean_pre_ms = mean_infer_ms = mean_post_ms = 0.0;
    real_time_factor = 0.0;
    if (frames.empty()) return;
    std::vector<double> totals;
    totals.reserve(frames.size());
    for (const auto& f : frames) {
        mean_pre_ms += f.pre_ms;
        mean_infer_ms += f.infer_ms;
        mean_post_ms += f.post_ms;
        mean_total_ms += f.total_ms;
        totals.push_back(f.total_ms);
    }
    const double n = static_cast<double>(frames.size());
    mean_pre_ms /= n;
    mean_infer_ms /= n;
    mean_post_ms /= n;
    mean_total_ms /= n;
    std::sort(totals.begin(), totals.end());
    p95_total_ms = totals[static_cast<size_t>(0.95 * (totals.size() - 1))];
    real_time_factor = mean_total_ms / kHopDeadlineMs;
}

void write_latency_csv(const std::string& path, const LatencyReport& report) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot create latency report: " + path);
    f << "frame_index,pre_ms,infer_ms,post_ms,total_ms\n";
    for (size_t i = 0; i < report.frames.size(); ++i) {
        const auto& r = report.frames[i];
        f << i << "," << r.pre_ms << "," << r.infer_ms << "," << r.post_ms << "," << r.total_ms
          << "\n";
    }
    f << "summary,mean_total_ms=" << report.mean_total_ms
      << ",p95_total_ms=" << report.p95_total_ms
      << ",real_time_factor=" << report.real_time_factor << "\n";
}

AudioBuffer process_buffer(StreamState& state, const AudioBuffer& in) {
    if (in.sample_rate != 16000)
        throw std::invalid_argument("process_buffer: expected 16 kHz input");

    const auto frames = frame_stream(in, state.frame_length(), state.hop_length());
    const int hop = state.hop_length();
    AudioBuffer out;
    out.sample_rate = in.sample_rate;
    out.samples.assign(frames.size() * hop, 0.0);
    for (size_t k = 0; k < frames.size(); ++k)
        state.process_frame(frames[k], {out.samples.data() + k * hop, static_cast<size_t>(hop)});
    out.samples.resize(in.samples.size());
    return out;
}

LatencyReport process_file(const std::string& model_path, const std::string& in_path,
                           const std::string& out_path, bool quantized) {
    AudioBuffer in = read_wav(in_path);
    if (in.sample_rate != 16000)
        throw std::runtime_error("input must be 16 kHz, got " + std::to_string(in.sample_rate) +
                                 " Hz: " + in_path);

    if (quantized) {
        QuantizedModel qm = load_quantized_model(model_path);
        StreamState state(qm);
        write_wav(out_path, process_buffer(state, in));
        return state.latency_report();
    }
    Model m = load_model(model_path);
    StreamState state(m);
    write_wav(out_path, process_buffer(state, in));
    return state.latency_report();
}

}  // namespace bcsr
