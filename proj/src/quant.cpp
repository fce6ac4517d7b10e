#include "bcsr/quant.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace bcsr {

namespace {

constexpr char kMagic[4] = {'B', 'C', 'S', 'Q'};
constexpr uint32_t kVersion = 1;

int16_t saturate16(int64_t v) {
    if (v > 32767) return 32767;
    if (v < -32768) return -32768;
    return static_cast<int16_t>(v);
}

// floor-rounding rescale by 2^-shift; shift may be negative (upscale)
int64_t shift_floor(int64_t v, int shift) {
    if (v == 0) return 0;
    if (shift >= 0) return shift >= 63 ? (v < 0 ? -1 : 0) : (v >> shift);
    const int up = -shift;
    if (up >= 63) throw std::overflow_error("quantized rescale overflow");
    return v << up;
}

int16_t quantize_value(double x, int exponent) {
    const double scaled = std::floor(std::ldexp(x, exponent));
    if (scaled > 32767.0) return 32767;
    if (scaled < -32768.0) return -32768;
    return static_cast<int16_t>(scaled);
}

void write_u32(std::ostream& s, uint32_t v) { s.write(reinterpret_cast<char*>(&v), 4); }
void write_i32(std::ostream& s, int32_t v) { s.write(reinterpret_cast<char*>(&v), 4); }
void write_f64(std::ostream& s, double v) { s.write(reinterpret_cast<char*>(&v), 8); }
uint32_t read_u32(std::istream& s) {
    uint32_t v = 0;
    s.read(reinterpret_cast<char*>(&v), 4);
    if (!s) throw std::runtime_error("quantized model file truncated");
    return v;
}
int32_t read_i32(std::istream& s) {
    int32_t v = 0;
    s.read(reinterpret_cast<char*>(&v), 4);
    if (!s) throw std::runtime_error("quantized model file truncated");
    return v;
}
double read_f64(std::istream& s) {
    double v = 0;
    s.read(reinterpret_cast<char*>(&v), 8);
    if (!s) throw std::runtime_error("quantized model file truncated");
    return v;
}

}  // namespace

int pow2_exponent(double max_abs) {
    if (max_abs <= 0.0) return 0;
    return 15 - static_cast<int>(std::ceil(std::log2(max_abs)));
}

QuantizedArray quantize_array(const std::vector<double>& x) {
    QuantizedArray q;
    double max_abs = 0.0;
    for (double v : x) max_abs = std::max(max_abs, std::abs(v));
    if (max_abs == 0.0) {
        q.exponent = 0;
        q.values.assign(x.size(), 0);
        return q;
    }
    q.exponent = pow2_exponent(max_abs);
    q.values.resize(x.size());
    for (size_t i = 0; i < x.size(); ++i) q.values[i] = quantize_value(x[i], q.exponent);
    return q;
}

QuantizedModel quantize_model(const Model& m, const std::vector<LogPowerFeatures>& calibration) {
    if (calibration.empty()) throw std::invalid_argument("quantize_model: empty calibration set");

    QuantizedModel qm;
    qm.config = m.config;
    qm.norm_mean = m.norm_mean;
    qm.norm_std = m.norm_std;
    qm.nodes = m.nodes;

    for (const auto& p : m.convs) {
        QuantizedConv qc;
        qc.out_channels = p.out_channels;
        qc.in_channels = p.in_channels;
        qc.k_f = p.k_f;
        qc.k_t = p.k_t;
        QuantizedArray w = quantize_array(p.weights);
        QuantizedArray b = quantize_array(p.bias);
        qc.weights = std::move(w.values);
        qc.w_exp = w.exponent;
        qc.bias = std::move(b.values);
        qc.b_exp = b.exponent;
        qm.convs.push_back(std::move(qc));
    }

    // calibrate max|activation| per node over the calibration set
    std::vector<double> max_abs(m.nodes.size(), 0.0);
    ForwardTape tape;
    for (const auto& f : calibration) {
        forward_all(m, features_to_tensor(f), tape);
        for (size_t i = 0; i < tape.acts.size(); ++i)
            for (double v : tape.acts[i].data)
                max_abs[i] = std::max(max_abs[i], std::abs(v));
    }

    // conv outputs and the input get calibrated exponents; data-movement
    // nodes inherit so no requantization happens inside them
    qm.act_exp.assign(m.nodes.size(), 0);
    for (size_t i = 0; i < m.nodes.size(); ++i) {
        const Node& node = m.nodes[i];
        switch (node.kind) {
            case OpKind::Input:
            case OpKind::Conv:
                qm.act_exp[i] = max_abs[i] > 0.0 ? pow2_exponent(max_abs[i]) : 15;
                break;
            case OpKind::Concat:
                qm.act_exp[i] = std::min(qm.act_exp[node.in0], qm.act_exp[node.in1]);
                break;
            default:
                qm.act_exp[i] = qm.act_exp[node.in0];
                break;
        }
    }
    return qm;
}

void forward_quantized_all(const QuantizedModel& qm, const LogPowerFeatures& f, QuantTape& tape) {
    if (f.bins != qm.config.input_bins || f.frames != qm.config.frames)
        throw std::invalid_argument("forward_quantized: feature shape mismatch");

    const size_t n = qm.nodes.size();
    tape.acts.resize(n);
    tape.channels.assign(n, 0);
    tape.bins.assign(n, 0);
    tape.frames.assign(n, 0);

    auto shape = [&tape](size_t i, int c, int fb, int t) {
        tape.channels[i] = c;
        tape.bins[i] = fb;
        tape.frames[i] = t;
        tape.acts[i].resize(static_cast<size_t>(c) * fb * t);
    };

    // quantize the input grid
    shape(0, 1, f.bins, f.frames);
    for (size_t i = 0; i < f.values.size(); ++i)
        tape.acts[0][i] = quantize_value(f.values[i], qm.act_exp[0]);

    for (size_t i = 1; i < n; ++i) {
        const Node& node = qm.nodes[i];
        const auto& x = tape.acts[node.in0];
        const int C = tape.channels[node.in0], F = tape.bins[node.in0], T = tape.frames[node.in0];
        auto& out = tape.acts[i];

        switch (node.kind) {
            case OpKind::Conv: {
                const QuantizedConv& p = qm.convs[node.conv];
                const int e_in = qm.act_exp[node.in0];
                const int e_out = qm.act_exp[i];
                const int acc_exp = e_in + p.w_exp;
                const int bias_shift = acc_exp - p.b_exp;  // align bias into the accumulator
                const int out_shift = acc_exp - e_out;
                const int pf = p.k_f / 2, pt = p.k_t / 2;
                shape(i, p.out_channels, F, T);
                for (int co = 0; co < p.out_channels; ++co) {
                    for (int fb = 0; fb < F; ++fb) {
                        for (int t = 0; t < T; ++t) {
                            int64_t acc = shift_floor(p.bias[co], -bias_shift);
                            for (int ci = 0; ci < p.in_channels; ++ci)
                                for (int ki = 0; ki < p.k_f; ++ki) {
                                    const int sf = fb + ki - pf;
                                    if (sf < 0 || sf >= F) continue;
                                    for (int kj = 0; kj < p.k_t; ++kj) {
                                        const int st = t + kj - pt;
                                        if (st < 0 || st >= T) continue;
                                        const int64_t w =
                                            p.weights[((static_cast<size_t>(co) * p.in_channels +
                                                        ci) * p.k_f + ki) * p.k_t + kj];
                                        acc += w * x[(static_cast<size_t>(ci) * F + sf) * T + st];
                                    }
                                }
                            out[(static_cast<size_t>(co) * F + fb) * T + t] =
                                saturate16(shift_floor(acc, out_shift));
                        }
                    }
                }
                break;
            }
            case OpKind::Relu:
                shape(i, C, F, T);
                for (size_t k = 0; k < x.size(); ++k) out[k] = std::max<int16_t>(0, x[k]);
                break;
            case OpKind::MaxPoolF:
                shape(i, C, F / 2, T);
                for (int c = 0; c < C; ++c)
                    for (int fb = 0; fb < F / 2; ++fb)
                        for (int t = 0; t < T; ++t) {
                            const int16_t a = x[(static_cast<size_t>(c) * F + 2 * fb) * T + t];
                            const int16_t b = x[(static_cast<size_t>(c) * F + 2 * fb + 1) * T + t];
                            out[(static_cast<size_t>(c) * (F / 2) + fb) * T + t] = b > a ? b : a;
                        }
                break;
            case OpKind::UpsampleF:
                shape(i, C, 2 * F, T);
                for (int c = 0; c < C; ++c)
                    for (int fb = 0; fb < F; ++fb)
                        for (int t = 0; t < T; ++t) {
                            const int16_t v = x[(static_cast<size_t>(c) * F + fb) * T + t];
                            out[(static_cast<size_t>(c) * 2 * F + 2 * fb) * T + t] = v;
                            out[(static_cast<size_t>(c) * 2 * F + 2 * fb + 1) * T + t] = v;
                        }
                break;
            case OpKind::Concat: {
                const auto& y = tape.acts[node.in1];
                const int Cy = tape.channels[node.in1];
                const int e_out = qm.act_exp[i];
                const int sa = qm.act_exp[node.in0] - e_out;
                const int sb = qm.act_exp[node.in1] - e_out;
                shape(i, C + Cy, F, T);
                for (size_t k = 0; k < x.size(); ++k)
                    out[k] = saturate16(shift_floor(x[k], sa));
                for (size_t k = 0; k < y.size(); ++k)
                    out[x.size() + k] = saturate16(shift_floor(y[k], sb));
                break;
            }
            case OpKind::TemporalShift: {
                // same split rule as the float path; integers only move
                const int d = shift_channel_count(C, qm.config.shift_fraction);
                shape(i, C, F, T);
                for (int c = 0; c < C; ++c) {
                    const int dt = c < d / 2 ? -1 : (c < d ? 1 : 0);
                    for (int fb = 0; fb < F; ++fb) {
                        const int16_t* src = &x[(static_cast<size_t>(c) * F + fb) * T];
                        int16_t* dst = &out[(static_cast<size_t>(c) * F + fb) * T];
                        if (dt == 0) {
                            std::copy(src, src + T, dst);
                        } else if (dt == -1) {
                            dst[0] = 0;
                            std::copy(src, src + T - 1, dst + 1);
                        } else {
                            std::copy(src + 1, src + T, dst);
                            dst[T - 1] = 0;
                        }
                    }
                }
                break;
            }
            case OpKind::Input:
                throw std::logic_error("forward_quantized: unexpected input node");
        }
    }
}

LogPowerFeatures forward_quantized(const QuantizedModel& qm, const LogPowerFeatures& f) {
    QuantTape tape;
    forward_quantized_all(qm, f, tape);
    const size_t last = qm.nodes.size() - 1;
    LogPowerFeatures out;
    out.bins = tape.bins[last];
    out.frames = tape.frames[last];
    out.values.resize(tape.acts[last].size());
    const double scale = std::ldexp(1.0, -qm.act_exp[last]);
    for (size_t i = 0; i < out.values.size(); ++i) out.values[i] = tape.acts[last][i] * scale;
    return out;
}

void save_quantized_model(const QuantizedModel& qm, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot create quantized model file: " + path);

    f.write(kMagic, 4);
    write_u32(f, kVersion);
    write_u32(f, static_cast<uint32_t>(qm.config.variant));
    write_u32(f, static_cast<uint32_t>(qm.config.depth()));
    for (int c : qm.config.encoder_channels) write_u32(f, static_cast<uint32_t>(c));
    write_f64(f, qm.config.shift_fraction);
    write_u32(f, static_cast<uint32_t>(qm.config.input_bins));
    write_u32(f, static_cast<uint32_t>(qm.config.frames));
    write_f64(f, qm.norm_mean);
    write_f64(f, qm.norm_std);

    write_u32(f, static_cast<uint32_t>(qm.act_exp.size()));
    for (int e : qm.act_exp) write_i32(f, e);

    write_u32(f, static_cast<uint32_t>(qm.convs.size()));
    for (const auto& p : qm.convs) {
        write_u32(f, static_cast<uint32_t>(p.out_channels));
        write_u32(f, static_cast<uint32_t>(p.in_channels));
        write_u32(f, static_cast<uint32_t>(p.k_f));
        write_u32(f, static_cast<uint32_t>(p.k_t));
        write_i32(f, p.w_exp);
        write_i32(f, p.b_exp);
        f.write(reinterpret_cast<const char*>(p.weights.data()),
                static_cast<std::streamsize>(p.weights.size() * 2));
        f.write(reinterpret_cast<const char*>(p.bias.data()),
                static_cast<std::streamsize>(p.bias.size() * 2));
    }
    if (!f) throw std::runtime_error("I/O failure writing quantized model: " + path);
}

QuantizedModel load_quantized_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open quantized model file: " + path);

    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("bad quantized model magic: " + path);
    const uint32_t version = read_u32(f);
    if (version != kVersion)
        throw std::runtime_error("unsupported quantized model version " +
                                 std::to_string(version) + ": " + path);

    QuantizedModel qm;
    qm.config.variant = static_cast<Variant>(read_u32(f));
    const uint32_t depth = read_u32(f);
    if (depth == 0 || depth > 16)
        throw std::runtime_error("corrupt quantized model header: " + path);
    qm.config.encoder_channels.resize(depth);
    for (auto& c : qm.config.encoder_channels) c = static_cast<int>(read_u32(f));
    qm.config.shift_fraction = read_f64(f);
    qm.config.input_bins = static_cast<int>(read_u32(f));
    qm.config.frames = static_cast<int>(read_u32(f));
    qm.norm_mean = read_f64(f);
    qm.norm_std = read_f64(f);

    // rebuild the graph from the config; shapes must agree with the blobs
    Model skeleton = build(qm.config);
    qm.nodes = skeleton.nodes;

    const uint32_t n_exp = read_u32(f);
    if (n_exp != qm.nodes.size())
        throw std::runtime_error("quantized model node count mismatch: " + path);
    qm.act_exp.resize(n_exp);
    for (auto& e : qm.act_exp) e = read_i32(f);

    const uint32_t n_convs = read_u32(f);
    if (n_convs != skeleton.convs.size())
        throw std::runtime_error("quantized model layer count mismatch: " + path);
    qm.convs.resize(n_convs);
    for (size_t i = 0; i < n_convs; ++i) {
        QuantizedConv& p = qm.convs[i];
        p.out_channels = static_cast<int>(read_u32(f));
        p.in_channels = static_cast<int>(read_u32(f));
        p.k_f = static_cast<int>(read_u32(f));
        p.k_t = static_cast<int>(read_u32(f));
        if (p.out_channels != skeleton.convs[i].out_channels ||
            p.in_channels != skeleton.convs[i].in_channels || p.k_f != skeleton.convs[i].k_f ||
            p.k_t != skeleton.convs[i].k_t)
            throw std::runtime_error("quantized model layer shape mismatch: " + path);
        p.w_exp = read_i32(f);
        p.b_exp = read_i32(f);
        p.weights.resize(static_cast<size_t>(p.out_channels) * p.in_channels * p.k_f * p.k_t);
        p.bias.resize(p.out_channels);
        f.read(reinterpret_cast<char*>(p.weights.data()),
               static_cast<std::streamsize>(p.weights.size() * 2));
        f.read(reinterpret_cast<char*>(p.bias.data()),
               static_cast<std::streamsize>(p.bias.size() * 2));
        if (!f) throw std::runtime_error("quantized model file truncated: " + path);
    }
    return qm;
}

bool is_quantized_model_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) return false;
    char magic[4];
    f.read(magic, 4);
    return f && std::memcmp(magic, kMagic, 4) == 0;
}

}  // namespace bcsr
