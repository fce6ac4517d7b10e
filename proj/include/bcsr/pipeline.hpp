#pragma once

#include <span>
#include <string>
#include <vector>

#include "bcsr/audio_io.hpp"
#include "bcsr/model.hpp"
#include "bcsr/quant.hpp"

namespace bcsr {

struct FrameLatency {
    double pre_ms = 0.0;
    double infer_ms = 0.0;
    double post_ms = 0.0;
    double total_ms = 0.0;
};

struct LatencyReport {
    std::vector<FrameLatency> frames;
    double mean_total_ms = 0.0;
    double p95_total_ms = 0.0;
    double mean_pre_ms = 0.0;
    double mean_infer_ms = 0.0;
    double mean_post_ms = 0.0;
    // mean frame time over the 64 ms hop deadline; < 1 means real-time.
    double real_time_factor = 0.0;

    void finalize();
};

void write_latency_csv(const std::string& path, const LatencyReport& report);

// Streaming state for one audio stream: frames arrive every hop (1024
// samples at 16 kHz); each call emits the hop whose overlap just completed,
// so the output trails the input by one frame (2048 samples, 128 ms).
// Exactly one of model/qmodel drives inference. Scratch buffers persist
// across frames, so steady-state processing does not allocate.
class StreamState {
  public:
    explicit StreamState(const Model& model);
    explicit StreamState(const QuantizedModel& qmodel);

    // frame must hold frame_length() samples (hop new + hop carried over).
    // Emits hop_length() completed output samples. The span form writes into
    // caller storage and performs no allocation in the steady state.
    void process_frame(const std::vector<double>& frame, std::span<double> out);
    std::vector<double> process_frame(const std::vector<double>& frame);

    int frame_length() const { return frame_len_; }
    int hop_length() const { return hop_; }
    const std::vector<FrameLatency>& latency_log() const { return latency_log_; }
    LatencyReport latency_report() const;

  private:
    void init_buffers();
    void infer(const LogPowerFeatures& normalized_input, LogPowerFeatures& out);

    const Model* model_ = nullptr;
    const QuantizedModel* qmodel_ = nullptr;
    double norm_mean_ = 0.0;
    double norm_std_ = 1.0;
    int frame_len_ = 2048;
    int hop_ = 1024;

    std::vector<double> carry_;  // pending second half of the previous frame
    std::vector<FrameLatency> latency_log_;

    // reused scratch
    ForwardTape tape_;
    QuantTape qtape_;
    Tensor in_tensor_;
    Spectrogram spec_, out_spec_;
    LogPowerFeatures full_log_, body_, net_out_;
    std::vector<double> synth_;
    std::vector<double> windowed_;
    std::vector<double> synth_window_;
};

// Runs a whole buffer through the stream; output has the input's length.
AudioBuffer process_buffer(StreamState& state, const AudioBuffer& in);

// WAV in, enhanced WAV out. Inputs must be 16 kHz. quantized selects the
// integer path and requires the model file to be a quantized container.
LatencyReport process_file(const std::string& model_path, const std::string& in_path,
                           const std::string& out_path, bool quantized);

}  // namespace bcsr
