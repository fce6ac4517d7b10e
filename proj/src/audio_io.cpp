#include "bcsr/audio_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace bcsr {

namespace {

uint32_t read_u32(std::istream& s) {
    unsigned char b[4];
    s.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

uint16_t read_u16(std::istream& s) {
    unsigned char b[2];
    s.read(reinterpret_cast<char*>(b), 2);
    return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

void write_u32(std::ostream& s, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    s.write(reinterpret_cast<char*>(b), 4);
}

void write_u16(std::ostream& s, uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    s.write(reinterpret_cast<char*>(b), 2);
}

}  // namespace

AudioBuffer read_wav(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open WAV file: " + path);

    char tag[4];
    f.read(tag, 4);
    if (!f || std::memcmp(tag, "RIFF", 4) != 0)
        throw std::runtime_error("not a RIFF file: " + path);
    read_u32(f);  // riff size, unused
    f.read(tag, 4);
    if (!f || std::memcmp(tag, "WAVE", 4) != 0)
        throw std::runtime_error("not a WAVE file: " + path);

    uint16_t format = 0, channels = 0, bits = 0;
    uint32_t sample_rate = 0;
    bool have_fmt = false;

    while (f.read(tag, 4)) {
        uint32_t chunk_size = read_u32(f);
        if (!f) break;
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            if (chunk_size < 16) throw std::runtime_error("malformed fmt chunk: " + path);
            format = read_u16(f);
            channels = read_u16(f);
            sample_rate = read_u32(f);
            read_u32(f);  // byte rate
            read_u16(f);  // block align
            bits = read_u16(f);
            if (chunk_size > 16) f.seekg(chunk_size - 16, std::ios::cur);
            if (chunk_size & 1) f.seekg(1, std::ios::cur);
            have_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            if (!have_fmt) throw std::runtime_error("data chunk before fmt chunk: " + path);
            if (format != 1) throw std::runtime_error("unsupported WAV codec (PCM only): " + path);
            if (bits != 16) throw std::runtime_error("unsupported bit depth (16-bit only): " + path);
            if (channels == 0) throw std::runtime_error("malformed fmt chunk: " + path);
            if (chunk_size == 0) throw std::runtime_error("zero-length data chunk: " + path);
            if (channels > 1)
                std::fprintf(stderr, "warning: %s has %u channels, using channel 0\n",
                             path.c_str(), channels);

            size_t total = chunk_size / 2;
            size_t n = total / channels;
            std::vector<int16_t> raw(total);
            f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(total * 2));
            if (!f) throw std::runtime_error("truncated data chunk: " + path);

            AudioBuffer buf;
            buf.sample_rate = static_cast<int>(sample_rate);
            buf.samples.resize(n);
            for (size_t i = 0; i < n; ++i)
                buf.samples[i] = raw[i * channels] / 32768.0;
            return buf;
        } else {
            // LIST, JUNK, anything else: skip (chunks are padded to even size)
            f.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
        }
    }
    throw std::runtime_error("no data chunk found: " + path);
}

void write_wav(const std::string& path, const AudioBuffer& buf) {
    if (buf.sample_rate <= 0) throw std::invalid_argument("write_wav: sample_rate must be > 0");
    for (double v : buf.samples)
        if (!std::isfinite(v)) throw std::invalid_argument("write_wav: non-finite sample");

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot create WAV file: " + path);

    const uint32_t data_bytes = static_cast<uint32_t>(buf.samples.size() * 2);
    f.write("RIFF", 4);
    write_u32(f, 36 + data_bytes);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    write_u32(f, 16);
    write_u16(f, 1);  // PCM
    write_u16(f, 1);  // mono
    write_u32(f, static_cast<uint32_t>(buf.sample_rate));
    write_u32(f, static_cast<uint32_t>(buf.sample_rate) * 2);
    write_u16(f, 2);
    write_u16(f, 16);
    f.write("data", 4);
    write_u32(f, data_bytes);

    for (double v : buf.samples) {
        double scaled = std::round(v * 32768.0);
        if (scaled > 32767.0) scaled = 32767.0;
        if (scaled < -32768.0) scaled = -32768.0;
        int16_t q = static_cast<int16_t>(scaled);
        unsigned char b[2] = {static_cast<unsigned char>(q & 0xff),
                              static_cast<unsigned char>((q >> 8) & 0xff)};
        f.write(reinterpret_cast<char*>(b), 2);
    }
    if (!f) throw std::runtime_error("I/O failure writing WAV: " + path);
}

std::vector<std::vector<double>> frame_stream(const AudioBuffer& buf, int frame_len, int hop) {
    if (frame_len <= 0) throw std::invalid_argument("frame_stream: frame_len must be > 0");
    if (frame_len % 2 != 0) throw std::invalid_argument("frame_stream: frame_len must be even");
    if (hop != frame_len / 2) throw std::invalid_argument("frame_stream: hop must be frame_len/2");

    const size_t n = buf.samples.size();
    const size_t n_frames = n == 0 ? 0 : (n + hop - 1) / hop;
    std::vector<std::vector<double>> frames;
    frames.reserve(n_frames);
    for (size_t k = 0; k < n_frames; ++k) {
        std::vector<double> frame(frame_len, 0.0);
        size_t off = k * hop;
        size_t take = std::min(static_cast<size_t>(frame_len), n - off);
        for (size_t i = 0; i < take; ++i) frame[i] = buf.samples[off + i];
        frames.push_back(std::move(frame));
    }
    return frames;
}

}  // namespace bcsr
