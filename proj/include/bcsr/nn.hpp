#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace bcsr {

// Dense (channels, bins, frames) array, row-major by (c, f, t).
struct Tensor {
    int channels = 0;
    int bins = 0;
    int frames = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int c, int f, int t) : channels(c), bins(f), frames(t), data(static_cast<size_t>(c) * f * t, 0.0) {}

    size_t size() const { return data.size(); }
    size_t index(int c, int f, int t) const {
        return (static_cast<size_t>(c) * bins + f) * frames + t;
    }
    double& at(int c, int f, int t) { return data[index(c, f, t)]; }
    double at(int c, int f, int t) const { return data[index(c, f, t)]; }
    bool same_shape(const Tensor& o) const {
        return channels == o.channels && bins == o.bins && frames == o.frames;
    }
};

// Cross-correlation weights, (out, in, k_f, k_t) with k_t = 1 for 1D
// (frequency-only) convolutions and 3x3 for 2D ones. Gradients accumulate
// alongside during training.
struct ConvParams {
    int out_channels = 0;
    int in_channels = 0;
    int k_f = 3;
    int k_t = 1;
    std::vector<double> weights;  // ((co*in + ci)*k_f + i)*k_t + j
    std::vector<double> bias;     // co
    std::vector<double> grad_weights;
    std::vector<double> grad_bias;

    ConvParams() = default;
    ConvParams(int out_c, int in_c, int kf, int kt)
        : out_channels(out_c), in_channels(in_c), k_f(kf), k_t(kt),
          weights(static_cast<size_t>(out_c) * in_c * kf * kt, 0.0), bias(out_c, 0.0),
          grad_weights(weights.size(), 0.0), grad_bias(out_c, 0.0) {}

    size_t windex(int co, int ci, int i, int j) const {
        return ((static_cast<size_t>(co) * in_channels + ci) * k_f + i) * k_t + j;
    }
    size_t param_count() const { return weights.size() + bias.size(); }
    void zero_grad() {
        std::fill(grad_weights.begin(), grad_weights.end(), 0.0);
        std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
    }
};

// Same-padded cross-correlation over (f) or (f, t).
void conv_forward(const Tensor& x, const ConvParams& p, Tensor& out);
Tensor conv_forward(const Tensor& x, const ConvParams& p);

// Accumulates grad_weights/grad_bias on p and returns grad wrt x.
Tensor conv_backward(const Tensor& x, ConvParams& p, const Tensor& upstream);

// 2x1 max pooling along frequency; F must be even. Ties keep the lower
// index. argmax records the winning f offset (0 or 1) per output element.
void maxpool_f_forward(const Tensor& x, Tensor& out, std::vector<int32_t>& argmax);
Tensor maxpool_f_backward(const Tensor& x, const std::vector<int32_t>& argmax,
                          const Tensor& upstream);

// Nearest-neighbor duplication along frequency, F -> 2F.
void upsample_f_forward(const Tensor& x, Tensor& out);
Tensor upsample_f_backward(const Tensor& x, const Tensor& upstream);

// Channel stacking, a first then b; spatial dims must match.
void concat_channels_forward(const Tensor& a, const Tensor& b, Tensor& out);
void concat_channels_backward(const Tensor& upstream, int a_channels, Tensor& grad_a,
                              Tensor& grad_b);
Tensor slice_channels(const Tensor& x, int from, int count);

void relu_forward(const Tensor& x, Tensor& out);
Tensor relu_backward(const Tensor& x, const Tensor& upstream);

// Audio temporal shift: with d = shift_channel_count(C, fraction), channels
// [0, d/2) are delayed one frame, channels [d/2, d) advanced one frame
// (zeros fill the vacated boundary column), the rest copied unchanged.
// Pure data movement; the backward pass is the opposite shift.
int shift_channel_count(int channels, double shift_fraction);
void temporal_shift_forward(const Tensor& x, double shift_fraction, Tensor& out);
Tensor temporal_shift_forward(const Tensor& x, double shift_fraction);
Tensor temporal_shift_backward(const Tensor& upstream, double shift_fraction);

}  // namespace bcsr
