#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "bcsr/dsp.hpp"
#include "bcsr/nn.hpp"

namespace bcsr {

enum class Variant { TwoDV1, TwoDV2, Hybrid, Mixed, OneD, Ats };

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct ModelConfig {
    Variant variant = Variant::Ats;
    // Output channels of each down-sampling block. The decoder mirrors this
    // plan; TwoDV2 multiplies every width by 4 at build time.
    std::vector<int> encoder_channels{4, 6, 8, 10, 12};
    double shift_fraction = 0.25;
    int input_bins = 256;
    int frames = 9;

    int depth() const { return static_cast<int>(encoder_channels.size()); }
    void validate() const;
};

enum class OpKind : uint32_t {
    Input = 0,
    Conv = 1,
    Relu = 2,
    MaxPoolF = 3,
    UpsampleF = 4,
    Concat = 5,
    TemporalShift = 6,
};

struct Node {
    OpKind kind = OpKind::Input;
    int in0 = -1;
    int in1 = -1;   // second input of Concat (the skip)
    int conv = -1;  // index into Model::convs for Conv nodes
};

struct Model {
    ModelConfig config;
    std::vector<Node> nodes;  // node 0 is the input
    std::vector<ConvParams> convs;
    double norm_mean = 0.0;
    double norm_std = 1.0;
};

// Assembles the encoder/decoder graph for the configured variant. Weights
// start at zero; call init_weights for a random start.
Model build(const ModelConfig& config);

// Uniform init in +/- sqrt(6 / (fan_in + fan_out)).
void init_weights(Model& m, std::mt19937_64& rng);

// Per-node activations kept for the backward pass (and for probes).
struct ForwardTape {
    std::vector<Tensor> acts;
    std::vector<std::vector<int32_t>> pool_argmax;
};

// Node output may be forced for connectivity probes: overrides[i] >= 0 means
// node overrides[i] gets replaced by the paired tensor before dependents run.
void forward_all(const Model& m, const Tensor& input, ForwardTape& tape,
                 const std::vector<std::pair<int, Tensor>>& overrides = {});
Tensor forward(const Model& m, const Tensor& input);

// Accumulates conv gradients from grad_output; returns grad wrt the input.
Tensor backward(Model& m, const ForwardTape& tape, const Tensor& grad_output);

// Runs the network over a normalized 256 x 9 log-power grid (DC row already
// removed); the caller reattaches the DC row afterwards.
LogPowerFeatures forward_features(const Model& m, const LogPowerFeatures& f);

Tensor features_to_tensor(const LogPowerFeatures& f);
LogPowerFeatures tensor_to_features(const Tensor& t);

size_t count_params(const Model& m);
// 2 FLOPs per multiply-accumulate in convolutions, one comparison per pooled
// element, one copy per upsampled element. Temporal shifts count zero.
size_t count_flops(const Model& m);

void zero_grad(Model& m);
size_t param_count(const Model& m);
void gather_params(const Model& m, std::vector<double>& out);
void scatter_params(Model& m, const std::vector<double>& in);
void gather_grads(const Model& m, std::vector<double>& out);

// Binary container: magic/version header, config, normalization stats, then
// per-layer little-endian float32 weight blobs.
void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);

// Human-readable key-value form of ModelConfig ("variant = ats",
// "encoder_channels = 4,6,8,10,12", ...). Unknown keys are rejected.
ModelConfig load_model_config(const std::string& path);
void save_model_config(const ModelConfig& config, const std::string& path);

}  // namespace bcsr
