#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bcsr/model.hpp"

namespace bcsr {

// q = floor(x * 2^e) saturated to int16, with e = 15 - ceil(log2 max|x|) so
// the scale is a power of two and no value leaves range.
struct QuantizedArray {
    std::vector<int16_t> values;
    int exponent = 0;
};
QuantizedArray quantize_array(const std::vector<double>& x);
int pow2_exponent(double max_abs);

struct QuantizedConv {
    int out_channels = 0;
    int in_channels = 0;
    int k_f = 3;
    int k_t = 1;
    std::vector<int16_t> weights;
    std::vector<int16_t> bias;
    int w_exp = 0;
    int b_exp = 0;
};

// Integer twin of Model: int16 weights plus per-layer power-of-two scale
// exponents. Activation exponents are calibrated at conv outputs (and the
// network input) and propagated through the data-movement ops.
struct QuantizedModel {
    ModelConfig config;
    double norm_mean = 0.0;
    double norm_std = 1.0;
    std::vector<Node> nodes;
    std::vector<QuantizedConv> convs;
    std::vector<int> act_exp;  // per node
};

// Post-training quantization: weight exponents from the weights themselves,
// activation exponents from max|activation| over the calibration set.
QuantizedModel quantize_model(const Model& m, const std::vector<LogPowerFeatures>& calibration);

// Integer inference: int64 accumulators, inter-layer rescale by arithmetic
// shift of (e_in + e_w - e_out), saturation to int16 on requantization.
// Output is dequantized back to a normalized log-power grid.
LogPowerFeatures forward_quantized(const QuantizedModel& qm, const LogPowerFeatures& f);

struct QuantTape {
    std::vector<std::vector<int16_t>> acts;  // per node, (c, f, t) row-major
    std::vector<int> channels, bins, frames;
};
void forward_quantized_all(const QuantizedModel& qm, const LogPowerFeatures& f, QuantTape& tape);

void save_quantized_model(const QuantizedModel& qm, const std::string& path);
QuantizedModel load_quantized_model(const std::string& path);

// True when the file at path holds a quantized container (magic check).
bool is_quantized_model_file(const std::string& path);

}  // namespace bcsr
