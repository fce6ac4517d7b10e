#include "bcsr/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bcsr {

void conv_forward(const Tensor& x, const ConvParams& p, Tensor& out) {
    if (x.channels != p.in_channels)
        throw std::invalid_argument("conv_forward: input channel mismatch");
    const int F = x.bins, T = x.frames;
    const int pf = p.k_f / 2, pt = p.k_t / 2;

    out.channels = p.out_channels;
    out.bins = F;
    out.frames = T;
    out.data.assign(static_cast<size_t>(p.out_channels) * F * T, 0.0);

    for (int co = 0; co < p.out_channels; ++co) {
        double* o = &out.data[out.index(co, 0, 0)];
        const double b = p.bias[co];
        for (int i = 0; i < F * T; ++i) o[i] = b;
        for (int ci = 0; ci < p.in_channels; ++ci) {
            const double* xin = &x.data[x.index(ci, 0, 0)];
            for (int i = 0; i < p.k_f; ++i) {
                const int df = i - pf;
                const int f0 = std::max(0, -df), f1 = std::min(F, F - df);
                for (int j = 0; j < p.k_t; ++j) {
                    const int dt = j - pt;
                    const double w = p.weights[p.windex(co, ci, i, j)];
                    const int t0 = std::max(0, -dt), t1 = std::min(T, T - dt);
                    for (int f = f0; f < f1; ++f) {
                        const double* xr = xin + static_cast<size_t>(f + df) * T + dt;
                        double* orow = o + static_cast<size_t>(f) * T;
                        for (int t = t0; t < t1; ++t) orow[t] += w * xr[t];
                    }
                }
            }
        }
    }
}

Tensor conv_forward(const Tensor& x, const ConvParams& p) {
    Tensor out;
    conv_forward(x, p, out);
    return out;
}

Tensor conv_backward(const Tensor& x, ConvParams& p, const Tensor& upstream) {
    if (x.channels != p.in_channels)
        throw std::invalid_argument("conv_backward: input channel mismatch");
    if (upstream.channels != p.out_channels || upstream.bins != x.bins ||
        upstream.frames != x.frames)
        throw std::invalid_argument("conv_backward: upstream shape mismatch");

    const int F = x.bins, T = x.frames;
    const int pf = p.k_f / 2, pt = p.k_t / 2;
    Tensor grad_x(x.channels, F, T);

    for (int co = 0; co < p.out_channels; ++co) {
        const double* up = &upstream.data[upstream.index(co, 0, 0)];
        double gb = 0.0;
        for (int i = 0; i < F * T; ++i) gb += up[i];
        p.grad_bias[co] += gb;

        for (int ci = 0; ci < p.in_channels; ++ci) {
            const double* xin = &x.data[x.index(ci, 0, 0)];
            double* gx = &grad_x.data[grad_x.index(ci, 0, 0)];
            for (int i = 0; i < p.k_f; ++i) {
                const int df = i - pf;
                const int f0 = std::max(0, -df), f1 = std::min(F, F - df);
                for (int j = 0; j < p.k_t; ++j) {
                    const int dt = j - pt;
                    const int t0 = std::max(0, -dt), t1 = std::min(T, T - dt);
                    const double w = p.weights[p.windex(co, ci, i, j)];
                    double gw = 0.0;
                    for (int f = f0; f < f1; ++f) {
                        const double* xr = xin + static_cast<size_t>(f + df) * T + dt;
                        double* gxr = gx + static_cast<size_t>(f + df) * T + dt;
                        const double* ur = up + static_cast<size_t>(f) * T;
                        for (int t = t0; t < t1; ++t) {
                            gw += ur[t] * xr[t];
                            gxr[t] += ur[t] * w;
                        }
                    }
                    p.grad_weights[p.windex(co, ci, i, j)] += gw;
                }
            }
        }
    }
    return grad_x;
}

void maxpool_f_forward(const Tensor& x, Tensor& out, std::vector<int32_t>& argmax) {
    if (x.bins % 2 != 0) throw std::invalid_argument("maxpool_f: F must be even");
    const int F = x.bins, T = x.frames, C = x.channels;
    out.channels = C;
    out.bins = F / 2;
    out.frames = T;
    out.data.resize(static_cast<size_t>(C) * (F / 2) * T);
    argmax.resize(out.data.size());

    for (int c = 0; c < C; ++c) {
        for (int f = 0; f < F / 2; ++f) {
            const double* a = &x.data[x.index(c, 2 * f, 0)];
            const double* b = &x.data[x.index(c, 2 * f + 1, 0)];
            double* o = &out.data[out.index(c, f, 0)];
            int32_t* am = &argmax[out.index(c, f, 0)];
            for (int t = 0; t < T; ++t) {
                // ties keep the lower index
                if (b[t] > a[t]) {
                    o[t] = b[t];
                    am[t] = 1;
                } else {
                    o[t] = a[t];
                    am[t] = 0;
                }
            }
        }
    }
}

Tensor maxpool_f_backward(const Tensor& x, const std::vector<int32_t>& argmax,
                          const Tensor& upstream) {
    Tensor grad(x.channels, x.bins, x.frames);
    const int T = x.frames;
    for (int c = 0; c < x.channels; ++c)
        for (int f = 0; f < x.bins / 2; ++f)
            for (int t = 0; t < T; ++t) {
                const size_t oi = upstream.index(c, f, t);
                grad.at(c, 2 * f + argmax[oi], t) += upstream.data[oi];
            }
    return grad;
}

void upsample_f_forward(const Tensor& x, Tensor& out) {
    const int F = x.bins, T = x.frames, C = x.channels;
    out.channels = C;
    out.bins = 2 * F;
    out.frames = T;
    out.data.resize(static_cast<size_t>(C) * 2 * F * T);
    for (int c = 0; c < C; ++c)
        for (int f = 0; f < F; ++f) {
            const double* src = &x.data[x.index(c, f, 0)];
            std::copy(src, src + T, &out.data[out.index(c, 2 * f, 0)]);
            std::copy(src, src + T, &out.data[out.index(c, 2 * f + 1, 0)]);
        }
}

Tensor upsample_f_backward(const Tensor& x, const Tensor& upstream) {
    Tensor grad(x.channels, x.bins, x.frames);
    const int T = x.frames;
    for (int c = 0; c < x.channels; ++c)
        for (int f = 0; f < x.bins; ++f)
            for (int t = 0; t < T; ++t)
                grad.at(c, f, t) = upstream.at(c, 2 * f, t) + upstream.at(c, 2 * f + 1, t);
    return grad;
}

void concat_channels_forward(const Tensor& a, const Tensor& b, Tensor& out) {
    if (a.bins != b.bins || a.frames != b.frames)
        throw std::invalid_argument("concat_channels: spatial mismatch");
    out.channels = a.channels + b.channels;
    out.bins = a.bins;
    out.frames = a.frames;
    out.data.resize(a.data.size() + b.data.size());
    std::copy(a.data.begin(), a.data.end(), out.data.begin());
    std::copy(b.data.begin(), b.data.end(), out.data.begin() + a.data.size());
}

void concat_channels_backward(const Tensor& upstream, int a_channels, Tensor& grad_a,
                              Tensor& grad_b) {
    const size_t split = static_cast<size_t>(a_channels) * upstream.bins * upstream.frames;
    grad_a.channels = a_channels;
    grad_b.channels = upstream.channels - a_channels;
    grad_a.bins = grad_b.bins = upstream.bins;
    grad_a.frames = grad_b.frames = upstream.frames;
    grad_a.data.assign(upstream.data.begin(), upstream.data.begin() + split);
    grad_b.data.assign(upstream.data.begin() + split, upstream.data.end());
}

Tensor slice_channels(const Tensor& x, int from, int count) {
    Tensor out(count, x.bins, x.frames);
    const size_t plane = static_cast<size_t>(x.bins) * x.frames;
    std::copy(x.data.begin() + from * plane, x.data.begin() + (from + count) * plane,
              out.data.begin());
    return out;
}

void relu_forward(const Tensor& x, Tensor& out) {
    out.channels = x.channels;
    out.bins = x.bins;
    out.frames = x.frames;
    out.data.resize(x.data.size());
    for (size_t i = 0; i < x.data.size(); ++i) out.data[i] = x.data[i] > 0.0 ? x.data[i] : 0.0;
}

Tensor relu_backward(const Tensor& x, const Tensor& upstream) {
    Tensor grad(x.channels, x.bins, x.frames);
    for (size_t i = 0; i < x.data.size(); ++i)
        grad.data[i] = x.data[i] > 0.0 ? upstream.data[i] : 0.0;
    return grad;
}

int shift_channel_count(int channels, double shift_fraction) {
    if (channels < 2) throw std::invalid_argument("temporal_shift: needs at least 2 channels");
    if (shift_fraction <= 0.0 || shift_fraction > 1.0)
        throw std::invalid_argument("temporal_shift: shift_fraction must be in (0, 1]");
    int d = static_cast<int>(std::lround(channels * shift_fraction));
    if (d % 2 != 0) ++d;  // forward/backward halves must be equal
    d = std::max(d, 2);
    d = std::min(d, channels - (channels % 2));
    return d;
}

void temporal_shift_forward(const Tensor& x, double shift_fraction, Tensor& out) {
    const int d = shift_channel_count(x.channels, shift_fraction);
    const int T = x.frames;
    out.channels = x.channels;
    out.bins = x.bins;
    out.frames = T;
    out.data.resize(x.data.size());

    for (int c = 0; c < x.channels; ++c) {
        const int dt = c < d / 2 ? -1 : (c < d ? 1 : 0);
        for (int f = 0; f < x.bins; ++f) {
            const double* src = &x.data[x.index(c, f, 0)];
            double* dst = &out.data[out.index(c, f, 0)];
            if (dt == 0) {
                std::copy(src, src + T, dst);
            } else if (dt == -1) {  // delay: out[t] = x[t-1]
                dst[0] = 0.0;
                std::copy(src, src + T - 1, dst + 1);
            } else {  // advance: out[t] = x[t+1]
                std::copy(src + 1, src + T, dst);
                dst[T - 1] = 0.0;
            }
        }
    }
}

Tensor temporal_shift_forward(const Tensor& x, double shift_fraction) {
    Tensor out;
    temporal_shift_forward(x, shift_fraction, out);
    return out;
}

Tensor temporal_shift_backward(const Tensor& upstream, double shift_fraction) {
    const int d = shift_channel_count(upstream.channels, shift_fraction);
    const int T = upstream.frames;
    Tensor grad(upstream.channels, upstream.bins, T);

    for (int c = 0; c < upstream.channels; ++c) {
        // opposite shift of the forward pass
        const int dt = c < d / 2 ? 1 : (c < d ? -1 : 0);
        for (int f = 0; f < upstream.bins; ++f) {
            const double* src = &upstream.data[upstream.index(c, f, 0)];
            double* dst = &grad.data[grad.index(c, f, 0)];
            if (dt == 0) {
                std::copy(src, src + T, dst);
            } else if (dt == -1) {
                dst[0] = 0.0;
                std::copy(src, src + T - 1, dst + 1);
            } else {
                std::copy(src + 1, src + T, dst);
                dst[T - 1] = 0.0;
            }
        }
    }
    return grad;
}

}  // namespace bcsr
