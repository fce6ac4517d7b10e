#pragma once

#include <string>
#include <vector>

namespace bcsr {

// Mono PCM signal with amplitudes in [-1, 1].
struct AudioBuffer {
    std::vector<double> samples;
    int sample_rate = 16000;

    double duration_seconds() const {
        return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

// Reads a 16-bit PCM RIFF/WAVE file. Walks chunks, so files with LIST/JUNK
// chunks before the data chunk parse fine. Multi-channel files keep channel 0
// (a warning goes to stderr). Samples are scaled by 1/32768.
AudioBuffer read_wav(const std::string& path);

// Writes mono 16-bit PCM. Samples are rounded and saturated to int16.
void write_wav(const std::string& path, const AudioBuffer& buf);

// Splits the buffer into frames of frame_len starting at multiples of hop.
// The final partial frame is zero-padded so every input sample is covered.
std::vector<std::vector<double>> frame_stream(const AudioBuffer& buf,
                                              int frame_len = 2048,
                                              int hop = 1024);

}  // namespace bcsr
