#include "bcsr/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bcsr {

namespace {

constexpr char kMagic[4] = {'B', 'C', 'S', 'R'};
constexpr uint32_t kVersion = 1;

enum class ConvKind { OneD, TwoD };

// Block index runs over [DB1..DBn, UB1..UBn, output conv].
ConvKind conv_kind_for_block(Variant v, int block_index, int depth) {
    switch (v) {
        case Variant::TwoDV1:
        case Variant::TwoDV2:
            return ConvKind::TwoD;
        case Variant::OneD:
        case Variant::Ats:
            return ConvKind::OneD;
        case Variant::Hybrid:
            // alternate per block, 2D first
            return block_index % 2 == 0 ? ConvKind::TwoD : ConvKind::OneD;
        case Variant::Mixed:
            // temporal mixing only in the shallow blocks: first two DBs and
            // last two UBs stay 2D, the middle of the network is 1D
            return block_index < 2 || (block_index >= 2 * depth - 2 && block_index < 2 * depth)
                       ? ConvKind::TwoD
                       : ConvKind::OneD;
    }
    return ConvKind::OneD;
}

void write_bytes(std::ostream& s, const void* p, size_t n) {
    s.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void write_u32(std::ostream& s, uint32_t v) { write_bytes(s, &v, 4); }
void write_f32(std::ostream& s, float v) { write_bytes(s, &v, 4); }
void write_f64(std::ostream& s, double v) { write_bytes(s, &v, 8); }

uint32_t read_u32(std::istream& s) {
    uint32_t v = 0;
    s.read(reinterpret_cast<char*>(&v), 4);
    if (!s) throw std::runtime_error("model file truncated");
    return v;
}
float read_f32(std::istream& s) {
    float v = 0;
    s.read(reinterpret_cast<char*>(&v), 4);
    if (!s) throw std::runtime_error("model file truncated");
    return v;
}
double read_f64(std::istream& s) {
    double v = 0;
    s.read(reinterpret_cast<char*>(&v), 8);
    if (!s) throw std::runtime_error("model file truncated");
    return v;
}

}  // namespace

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::TwoDV1: return "2d_v1";
        case Variant::TwoDV2: return "2d_v2";
        case Variant::Hybrid: return "hybrid";
        case Variant::Mixed: return "mixed";
        case Variant::OneD: return "1d";
        case Variant::Ats: return "ats";
    }
    return "?";
}

Variant variant_from_name(const std::string& name) {
    if (name == "2d_v1") return Variant::TwoDV1;
    if (name == "2d_v2") return Variant::TwoDV2;
    if (name == "hybrid") return Variant::Hybrid;
    if (name == "mixed") return Variant::Mixed;
    if (name == "1d") return Variant::OneD;
    if (name == "ats") return Variant::Ats;
    throw std::invalid_argument("unknown variant: " + name);
}

void ModelConfig::validate() const {
    if (encoder_channels.empty()) throw std::invalid_argument("config: empty channel plan");
    for (int c : encoder_channels)
        if (c < 2) throw std::invalid_argument("config: channel widths must be >= 2");
    if (input_bins % (1 << depth()) != 0)
        throw std::invalid_argument("config: input_bins must be divisible by 2^depth");
    if (frames < 1) throw std::invalid_argument("config: frames must be >= 1");
    if (shift_fraction <= 0.0 || shift_fraction > 1.0)
        throw std::invalid_argument("config: shift_fraction must be in (0, 1]");
}

Model build(const ModelConfig& config) {
    config.validate();
    Model m;
    m.config = config;

    const int depth = config.depth();
    const bool with_shift = config.variant == Variant::Ats;
    std::vector<int> enc = config.encoder_channels;
    if (config.variant == Variant::TwoDV2)
        for (int& c : enc) c *= 4;

    // decoder mirrors the encoder plan at each resolution
    std::vector<int> dec(depth);
    for (int j = 0; j + 1 < depth; ++j) dec[j] = enc[depth - 2 - j];
    dec[depth - 1] = enc[0];

    auto add_node = [&m](OpKind kind, int in0, int in1 = -1, int conv = -1) {
        m.nodes.push_back(Node{kind, in0, in1, conv});
        return static_cast<int>(m.nodes.size() - 1);
    };
    auto add_conv = [&](int in_c, int out_c, ConvKind kind, int from) {
        const int kt = kind == ConvKind::TwoD ? 3 : 1;
        m.convs.emplace_back(out_c, in_c, 3, kt);
        return add_node(OpKind::Conv, from, -1, static_cast<int>(m.convs.size() - 1));
    };

    add_node(OpKind::Input, -1);
    int prev = 0;
    int prev_c = 1;
    std::vector<int> skip_nodes;     // block outputs usable as skips
    std::vector<int> skip_channels;
    skip_nodes.push_back(0);
    skip_channels.push_back(1);

    for (int i = 0; i < depth; ++i) {
        const ConvKind kind = conv_kind_for_block(config.variant, i, depth);
        int n = add_node(OpKind::MaxPoolF, prev);
        n = add_conv(prev_c, enc[i], kind, n);
        n = add_node(OpKind::Relu, n);
        n = add_conv(enc[i], enc[i], kind, n);
        n = add_node(OpKind::Relu, n);
        if (with_shift) n = add_node(OpKind::TemporalShift, n);
        prev = n;
        prev_c = enc[i];
        skip_nodes.push_back(n);
        skip_channels.push_back(enc[i]);
    }

    for (int j = 0; j < depth; ++j) {
        const ConvKind kind = conv_kind_for_block(config.variant, depth + j, depth);
        int n = add_node(OpKind::UpsampleF, prev);
        // skip at the post-upsample resolution: DB_(depth-1-j) output, or the
        // raw input for the last UB
        const int skip_idx = depth - 1 - j;
        n = add_node(OpKind::Concat, n, skip_nodes[skip_idx]);
        const int cat_c = prev_c + skip_channels[skip_idx];
        n = add_conv(cat_c, dec[j], kind, n);
        n = add_node(OpKind::Relu, n);
        n = add_conv(dec[j], dec[j], kind, n);
        n = add_node(OpKind::Relu, n);
        if (with_shift) n = add_node(OpKind::TemporalShift, n);
        prev = n;
        prev_c = dec[j];
    }

    // output projection, no activation
    const ConvKind out_kind = conv_kind_for_block(config.variant, 2 * depth, depth);
    add_conv(prev_c, 1, out_kind, prev);
    return m;
}

void init_weights(Model& m, std::mt19937_64& rng) {
    for (auto& p : m.convs) {
        const double fan_in = static_cast<double>(p.in_channels) * p.k_f * p.k_t;
        const double fan_out = static_cast<double>(p.out_channels) * p.k_f * p.k_t;
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        for (auto& w : p.weights) {
            // uniform in [-bound, bound) from the top 53 bits
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            w = (2.0 * u - 1.0) * bound;
        }
        std::fill(p.bias.begin(), p.bias.end(), 0.0);
    }
}

void forward_all(const Model& m, const Tensor& input, ForwardTape& tape,
                 const std::vector<std::pair<int, Tensor>>& overrides) {
    if (input.channels != 1 || input.bins != m.config.input_bins || input.frames != m.config.frames)
        throw std::invalid_argument("forward: input shape mismatch");

    const size_t n = m.nodes.size();
    tape.acts.resize(n);
    tape.pool_argmax.resize(n);

    tape.acts[0] = input;
    for (size_t i = 1; i < n; ++i) {
        const Node& node = m.nodes[i];
        Tensor& out = tape.acts[i];
        const Tensor& a = tape.acts[node.in0];
        switch (node.kind) {
            case OpKind::Conv:
                conv_forward(a, m.convs[node.conv], out);
                break;
            case OpKind::Relu:
                relu_forward(a, out);
                break;
            case OpKind::MaxPoolF:
                maxpool_f_forward(a, out, tape.pool_argmax[i]);
                break;
            case OpKind::UpsampleF:
                upsample_f_forward(a, out);
                break;
            case OpKind::Concat:
                concat_channels_forward(a, tape.acts[node.in1], out);
                break;
            case OpKind::TemporalShift:
                temporal_shift_forward(a, m.config.shift_fraction, out);
                break;
            case OpKind::Input:
                throw std::logic_error("forward: unexpected input node");
        }
        for (const auto& [idx, t] : overrides)
            if (idx == static_cast<int>(i)) out = t;
    }
}

Tensor forward(const Model& m, const Tensor& input) {
    ForwardTape tape;
    forward_all(m, input, tape);
    return tape.acts.back();
}

Tensor backward(Model& m, const ForwardTape& tape, const Tensor& grad_output) {
    const size_t n = m.nodes.size();
    std::vector<Tensor> grads(n);
    grads[n - 1] = grad_output;

    auto accumulate = [](Tensor& dst, Tensor&& src) {
        if (dst.data.empty()) {
            dst = std::move(src);
        } else {
            for (size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += src.data[i];
        }
    };

    for (size_t i = n - 1; i >= 1; --i) {
        const Node& node = m.nodes[i];
        Tensor& up = grads[i];
        if (up.data.empty()) continue;  // node feeds nothing that was reached
        const Tensor& x = tape.acts[node.in0];
        switch (node.kind) {
            case OpKind::Conv:
                accumulate(grads[node.in0], conv_backward(x, m.convs[node.conv], up));
                break;
            case OpKind::Relu:
                accumulate(grads[node.in0], relu_backward(x, up));
                break;
            case OpKind::MaxPoolF:
                accumulate(grads[node.in0], maxpool_f_backward(x, tape.pool_argmax[i], up));
                break;
            case OpKind::UpsampleF:
                accumulate(grads[node.in0], upsample_f_backward(x, up));
                break;
            case OpKind::Concat: {
                Tensor ga, gb;
                concat_channels_backward(up, x.channels, ga, gb);
                accumulate(grads[node.in0], std::move(ga));
                accumulate(grads[node.in1], std::move(gb));
                break;
            }
            case OpKind::TemporalShift:
                accumulate(grads[node.in0], temporal_shift_backward(up, m.config.shift_fraction));
                break;
            case OpKind::Input:
                break;
        }
    }
    return grads[0];
}

Tensor features_to_tensor(const LogPowerFeatures& f) {
    Tensor t(1, f.bins, f.frames);
    t.data = f.values;
    return t;
}

LogPowerFeatures tensor_to_features(const Tensor& t) {
    if (t.channels != 1) throw std::invalid_argument("tensor_to_features: expected 1 channel");
    LogPowerFeatures f;
    f.bins = t.bins;
    f.frames = t.frames;
    f.values = t.data;
    return f;
}

LogPowerFeatures forward_features(const Model& m, const LogPowerFeatures& f) {
    if (f.bins != m.config.input_bins || f.frames != m.config.frames)
        throw std::invalid_argument("forward_features: feature shape mismatch");
    return tensor_to_features(forward(m, features_to_tensor(f)));
}

size_t count_params(const Model& m) {
    size_t n = 0;
    for (const auto& p : m.convs) n += p.param_count();
    return n;
}

size_t count_flops(const Model& m) {
    // shapes are determined by the graph alone, so walk it symbolically
    size_t flops = 0;
    std::vector<int> channels(m.nodes.size()), bins(m.nodes.size());
    channels[0] = 1;
    bins[0] = m.config.input_bins;
    const int T = m.config.frames;

    for (size_t i = 1; i < m.nodes.size(); ++i) {
        const Node& node = m.nodes[i];
        const int cin = channels[node.in0], fin = bins[node.in0];
        switch (node.kind) {
            case OpKind::Conv: {
                const ConvParams& p = m.convs[node.conv];
                channels[i] = p.out_channels;
                bins[i] = fin;
                flops += 2ull * p.k_f * p.k_t * p.in_channels * p.out_channels *
                         static_cast<size_t>(fin) * T;
                break;
            }
            case OpKind::MaxPoolF:
                channels[i] = cin;
                bins[i] = fin / 2;
                flops += static_cast<size_t>(cin) * (fin / 2) * T;  // one compare per output
                break;
            case OpKind::UpsampleF:
                channels[i] = cin;
                bins[i] = fin * 2;
                flops += static_cast<size_t>(cin) * fin * 2 * T;  // one copy per output
                break;
            case OpKind::Concat:
                channels[i] = cin + channels[node.in1];
                bins[i] = fin;
                break;
            case OpKind::Relu:
            case OpKind::TemporalShift:  // pure data movement, costs nothing
                channels[i] = cin;
                bins[i] = fin;
                break;
            case OpKind::Input:
                break;
        }
    }
    return flops;
}

void zero_grad(Model& m) {
    for (auto& p : m.convs) p.zero_grad();
}

size_t param_count(const Model& m) { return count_params(m); }

void gather_params(const Model& m, std::vector<double>& out) {
    out.resize(count_params(m));
    size_t k = 0;
    for (const auto& p : m.convs) {
        std::copy(p.weights.begin(), p.weights.end(), out.begin() + k);
        k += p.weights.size();
        std::copy(p.bias.begin(), p.bias.end(), out.begin() + k);
        k += p.bias.size();
    }
}

void scatter_params(Model& m, const std::vector<double>& in) {
    size_t k = 0;
    for (auto& p : m.convs) {
        std::copy(in.begin() + k, in.begin() + k + p.weights.size(), p.weights.begin());
        k += p.weights.size();
        std::copy(in.begin() + k, in.begin() + k + p.bias.size(), p.bias.begin());
        k += p.bias.size();
    }
}

void gather_grads(const Model& m, std::vector<double>& out) {
    out.resize(count_params(m));
    size_t k = 0;
    for (const auto& p : m.convs) {
        std::copy(p.grad_weights.begin(), p.grad_weights.end(), out.begin() + k);
        k += p.grad_weights.size();
        std::copy(p.grad_bias.begin(), p.grad_bias.end(), out.begin() + k);
        k += p.grad_bias.size();
    }
}

void save_model(const Model& m, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot create model file: " + path);

    write_bytes(f, kMagic, 4);
    write_u32(f, kVersion);
    write_u32(f, static_cast<uint32_t>(m.config.variant));
    write_u32(f, static_cast<uint32_t>(m.config.depth()));
    for (int c : m.config.encoder_channels) write_u32(f, static_cast<uint32_t>(c));
    write_f64(f, m.config.shift_fraction);
    write_u32(f, static_cast<uint32_t>(m.config.input_bins));
    write_u32(f, static_cast<uint32_t>(m.config.frames));
    write_f64(f, m.norm_mean);
    write_f64(f, m.norm_std);

    write_u32(f, static_cast<uint32_t>(m.convs.size()));
    for (const auto& p : m.convs) {
        write_u32(f, static_cast<uint32_t>(p.out_channels));
        write_u32(f, static_cast<uint32_t>(p.in_channels));
        write_u32(f, static_cast<uint32_t>(p.k_f));
        write_u32(f, static_cast<uint32_t>(p.k_t));
        for (double w : p.weights) write_f32(f, static_cast<float>(w));
        for (double b : p.bias) write_f32(f, static_cast<float>(b));
    }
    if (!f) throw std::runtime_error("I/O failure writing model: " + path);
}

ModelConfig load_model_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open model config: " + path);

    ModelConfig config;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) continue;
        try {
            if (key == "variant") {
                config.variant = variant_from_name(value);
            } else if (key == "encoder_channels") {
                config.encoder_channels.clear();
                std::string item;
                std::istringstream ss(value);
                while (std::getline(ss, item, ','))
                    config.encoder_channels.push_back(std::stoi(item));
            } else if (key == "shift_fraction") {
                config.shift_fraction = std::stod(value);
            } else if (key == "input_bins") {
                config.input_bins = std::stoi(value);
            } else if (key == "frames") {
                config.frames = std::stoi(value);
            } else {
                throw std::runtime_error("unknown key '" + key + "'");
            }
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    config.validate();
    return config;
}

void save_model_config(const ModelConfig& config, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot create model config: " + path);
    f << "variant = " << variant_name(config.variant) << "\n";
    f << "encoder_channels = ";
    for (size_t i = 0; i < config.encoder_channels.size(); ++i)
        f << (i ? "," : "") << config.encoder_channels[i];
    f << "\n";
    f << "shift_fraction = " << config.shift_fraction << "\n";
    f << "input_bins = " << config.input_bins << "\n";
    f << "frames = " << config.frames << "\n";
}

Model load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open model file: " + path);

    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("bad model magic: " + path);
    const uint32_t version = read_u32(f);
    if (version != kVersion)
        throw std::runtime_error("unsupported model version " + std::to_string(version) + ": " +
                                 path);

    ModelConfig config;
    config.variant = static_cast<Variant>(read_u32(f));
    const uint32_t depth = read_u32(f);
    if (depth == 0 || depth > 16) throw std::runtime_error("corrupt model header: " + path);
    config.encoder_channels.resize(depth);
    for (auto& c : config.encoder_channels) c = static_cast<int>(read_u32(f));
    config.shift_fraction = read_f64(f);
    config.input_bins = static_cast<int>(read_u32(f));
    config.frames = static_cast<int>(read_u32(f));

    Model m = build(config);
    m.norm_mean = read_f64(f);
    m.norm_std = read_f64(f);

    const uint32_t n_convs = read_u32(f);
    if (n_convs != m.convs.size())
        throw std::runtime_error("model layer count mismatch: " + path);
    for (auto& p : m.convs) {
        const uint32_t oc = read_u32(f), ic = read_u32(f), kf = read_u32(f), kt = read_u32(f);
        if (static_cast<int>(oc) != p.out_channels || static_cast<int>(ic) != p.in_channels ||
            static_cast<int>(kf) != p.k_f || static_cast<int>(kt) != p.k_t)
            throw std::runtime_error("model layer shape mismatch: " + path);
        for (auto& w : p.weights) w = read_f32(f);
        for (auto& b : p.bias) b = read_f32(f);
    }
    return m;
}

}  // namespace bcsr
