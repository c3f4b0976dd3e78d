#include "binnet/binlayer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace binnet {

std::vector<std::int32_t> bin_dense_forward(const BitVector& input,
                                            const BinDenseWeights& w) {
    if (input.len != w.cols)
        throw DimensionError("bin_dense_forward: input length " +
                             std::to_string(input.len) + " vs cols " +
                             std::to_string(w.cols));
    if (w.row_bits.size() != w.rows)
        throw DimensionError("bin_dense_forward: row count mismatch");
    const bool masked = !w.row_masks.empty();
    if (masked && w.row_masks.size() != w.rows)
        throw DimensionError("bin_dense_forward: mask count mismatch");

    std::vector<std::int32_t> out(w.rows);
    for (std::uint32_t r = 0; r < w.rows; ++r) {
        const PruneMask* mask = masked ? &w.row_masks[r] : nullptr;
        out[r] = static_cast<std::int32_t>(xnor_popcount_dot(input, w.row_bits[r], mask));
    }
    return out;
}

IntTensor bin_conv2d_forward(const BitTensor& input, const BinConvWeights& w) {
    if (input.channels != w.in_channels)
        throw DimensionError("bin_conv2d_forward: input channels " +
                             std::to_string(input.channels) + " vs " +
                             std::to_string(w.in_channels));
    if (w.stride == 0) throw DimensionError("bin_conv2d_forward: stride must be >= 1");
    const std::int64_t h_span = static_cast<std::int64_t>(input.height) +
                                2 * static_cast<std::int64_t>(w.pad) - w.kernel_h;
    const std::int64_t w_span = static_cast<std::int64_t>(input.width) +
                                2 * static_cast<std::int64_t>(w.pad) - w.kernel_w;
    if (h_span < 0 || w_span < 0)
        throw DimensionError("bin_conv2d_forward: non-positive output dims");
    const std::uint32_t out_h = static_cast<std::uint32_t>(h_span / w.stride) + 1;
    const std::uint32_t out_w = static_cast<std::uint32_t>(w_span / w.stride) + 1;

    const std::size_t flen = w.fan_in();
    for (const BitVector& f : w.filters)
        if (f.len != flen)
            throw DimensionError("bin_conv2d_forward: filter length mismatch");
    if (w.filters.size() != w.out_channels)
        throw DimensionError("bin_conv2d_forward: filter count mismatch");

    IntTensor out = IntTensor::zeros(w.out_channels, out_h, out_w);

    // The receptive field is packed once per position and reused across all
    // output channels. Padded positions stay 0 (-1).
    BitVector patch = BitVector::zeros(flen);
    for (std::uint32_t oy = 0; oy < out_h; ++oy) {
        for (std::uint32_t ox = 0; ox < out_w; ++ox) {
            std::fill(patch.words.begin(), patch.words.end(), 0);
            std::size_t bit = 0;
            for (std::uint32_t ic = 0; ic < w.in_channels; ++ic) {
                for (std::uint32_t ky = 0; ky < w.kernel_h; ++ky) {
                    const std::int64_t iy =
                        static_cast<std::int64_t>(oy) * w.stride + ky - w.pad;
                    for (std::uint32_t kx = 0; kx < w.kernel_w; ++kx, ++bit) {
                        const std::int64_t ix =
                            static_cast<std::int64_t>(ox) * w.stride + kx - w.pad;
                        if (iy >= 0 && iy < input.height && ix >= 0 && ix < input.width &&
                            input.get(ic, static_cast<std::size_t>(iy),
                                      static_cast<std::size_t>(ix)))
                            patch.words[bit >> 6] |= std::uint64_t(1) << (bit & 63);
                    }
                }
            }
            for (std::uint32_t oc = 0; oc < w.out_channels; ++oc)
                out.at(oc, oy, ox) =
                    static_cast<std::int32_t>(xnor_popcount_dot(patch, w.filters[oc]));
        }
    }
    return out;
}

namespace {

double bn_eval(double gamma, double beta, double mu, double sigma, double s) {
    return gamma * (s - mu) / sigma + beta;
}

} // namespace

ThresholdSet fold_bn_sign(const BNParams& bn, std::size_t fan_in) {
    const std::size_t channels = bn.gamma.size();
    if (bn.beta.size() != channels || bn.mu.size() != channels ||
        bn.var.size() != channels)
        throw DimensionError("fold_bn_sign: BN parameter arrays differ in length");

    const std::int64_t n = static_cast<std::int64_t>(fan_in);
    ThresholdSet set;
    set.entries.reserve(channels);
    for (std::size_t c = 0; c < channels; ++c) {
        const double gamma = bn.gamma[c];
        const double sv = bn.var[c] + bn.eps;
        if (sv <= 0.0)
            throw SingularParamError("fold_bn_sign: var+eps <= 0 at channel " +
                                     std::to_string(c));
        const double sigma = std::sqrt(sv);

        ThresholdEntry e;
        if (gamma == 0.0) {
            // Degenerate channel: BN(s) == beta for every s.
            e.flip = false;
            e.t = binarize_scalar(bn.beta[c]) > 0 ? std::numeric_limits<std::int32_t>::min()
                                                  : std::numeric_limits<std::int32_t>::max();
            set.entries.push_back(e);
            continue;
        }

        const double tau = bn.mu[c] - bn.beta[c] * sigma / gamma;
        auto fires = [&](std::int64_t s) {
            return bn_eval(gamma, bn.beta[c], bn.mu[c], sigma, static_cast<double>(s)) >= 0.0;
        };
        // BN is monotone in s, so nudge the analytic threshold until it agrees
        // with the sign evaluation on the whole integer range that can occur
        // (|s| <= fan_in). Floating-point ties at the boundary land on the
        // same side as the direct evaluation this way.
        if (gamma > 0.0) {
            std::int64_t t = static_cast<std::int64_t>(std::ceil(tau));
            t = std::clamp<std::int64_t>(t, -n - 1, n + 1);
            while (t > -n - 1 && fires(t - 1)) --t;
            while (t <= n && !fires(t)) ++t;
            e.t = static_cast<std::int32_t>(t);
            e.flip = false;
        } else {
            std::int64_t t = static_cast<std::int64_t>(std::floor(tau));
            t = std::clamp<std::int64_t>(t, -n - 1, n + 1);
            while (t < n + 1 && fires(t + 1)) ++t;
            while (t >= -n && !fires(t)) --t;
            e.t = static_cast<std::int32_t>(t);
            e.flip = true;
        }
        set.entries.push_back(e);
    }
    return set;
}

BitTensor threshold_apply(const IntTensor& sums, const ThresholdSet& t) {
    if (t.entries.size() != sums.channels)
        throw DimensionError("threshold_apply: " + std::to_string(t.entries.size()) +
                             " thresholds vs " + std::to_string(sums.channels) +
                             " channels");
    BitTensor out = BitTensor::zeros(sums.channels, sums.height, sums.width);
    const std::size_t plane = static_cast<std::size_t>(sums.height) * sums.width;
    for (std::uint32_t c = 0; c < sums.channels; ++c) {
        const ThresholdEntry& e = t.entries[c];
        for (std::size_t i = 0; i < plane; ++i) {
            const std::size_t idx = c * plane + i;
            if (e.fires(sums.data[idx])) out.data.set(idx, true);
        }
    }
    return out;
}

namespace {

void pool_dims(std::uint32_t h, std::uint32_t w, std::uint32_t k, std::uint32_t s,
               std::uint32_t pad, std::uint32_t& out_h, std::uint32_t& out_w) {
    if (k == 0 || s == 0) throw DimensionError("pool: window and stride must be >= 1");
    if (pad >= k) throw DimensionError("pool: pad must be smaller than the window");
    const std::int64_t hs =
        static_cast<std::int64_t>(h) + 2 * static_cast<std::int64_t>(pad) - k;
    const std::int64_t ws =
        static_cast<std::int64_t>(w) + 2 * static_cast<std::int64_t>(pad) - k;
    if (hs < 0 || ws < 0) throw DimensionError("pool: window larger than padded input");
    out_h = static_cast<std::uint32_t>(hs / s) + 1;
    out_w = static_cast<std::uint32_t>(ws / s) + 1;
}

} // namespace

BitTensor maxpool_bits(const BitTensor& input, std::uint32_t k, std::uint32_t s,
                       std::uint32_t pad) {
    std::uint32_t out_h = 0, out_w = 0;
    pool_dims(input.height, input.width, k, s, pad, out_h, out_w);
    BitTensor out = BitTensor::zeros(input.channels, out_h, out_w);
    for (std::uint32_t c = 0; c < input.channels; ++c) {
        for (std::uint32_t oy = 0; oy < out_h; ++oy) {
            for (std::uint32_t ox = 0; ox < out_w; ++ox) {
                bool any = false;
                for (std::uint32_t ky = 0; ky < k && !any; ++ky) {
                    const std::int64_t iy = static_cast<std::int64_t>(oy) * s + ky - pad;
                    if (iy < 0 || iy >= input.height) continue;
                    for (std::uint32_t kx = 0; kx < k; ++kx) {
                        const std::int64_t ix = static_cast<std::int64_t>(ox) * s + kx - pad;
                        if (ix < 0 || ix >= input.width) continue;
                        if (input.get(c, static_cast<std::size_t>(iy),
                                      static_cast<std::size_t>(ix))) {
                            any = true;
                            break;
                        }
                    }
                }
                if (any) out.set(c, oy, ox, true);
            }
        }
    }
    return out;
}

IntTensor maxpool_int(const IntTensor& input, std::uint32_t k, std::uint32_t s,
                      std::uint32_t pad) {
    std::uint32_t out_h = 0, out_w = 0;
    pool_dims(input.height, input.width, k, s, pad, out_h, out_w);
    IntTensor out = IntTensor::zeros(input.channels, out_h, out_w);
    for (std::uint32_t c = 0; c < input.channels; ++c) {
        for (std::uint32_t oy = 0; oy < out_h; ++oy) {
            for (std::uint32_t ox = 0; ox < out_w; ++ox) {
                std::int32_t best = std::numeric_limits<std::int32_t>::min();
                for (std::uint32_t ky = 0; ky < k; ++ky) {
                    const std::int64_t iy = static_cast<std::int64_t>(oy) * s + ky - pad;
                    if (iy < 0 || iy >= input.height) continue;
                    for (std::uint32_t kx = 0; kx < k; ++kx) {
                        const std::int64_t ix = static_cast<std::int64_t>(ox) * s + kx - pad;
                        if (ix < 0 || ix >= input.width) continue;
                        best = std::max(best, input.at(c, static_cast<std::size_t>(iy),
                                                       static_cast<std::size_t>(ix)));
                    }
                }
                out.at(c, oy, ox) = best;
            }
        }
    }
    return out;
}

std::vector<double> avgpool_global(const BitTensor& input) {
    const std::size_t plane = static_cast<std::size_t>(input.height) * input.width;
    if (plane == 0) throw DimensionError("avgpool_global: empty spatial extent");
    std::vector<double> out(input.channels);
    for (std::uint32_t c = 0; c < input.channels; ++c) {
        const std::size_t ones = popcount_range(input.data, c * plane, (c + 1) * plane);
        out[c] = (2.0 * static_cast<double>(ones) - static_cast<double>(plane)) /
                 static_cast<double>(plane);
    }
    return out;
}

std::vector<double> avgpool_global_int(const IntTensor& input) {
    const std::size_t plane = static_cast<std::size_t>(input.height) * input.width;
    if (plane == 0) throw DimensionError("avgpool_global: empty spatial extent");
    std::vector<double> out(input.channels);
    for (std::uint32_t c = 0; c < input.channels; ++c) {
        double sum = 0.0;
        for (std::size_t i = 0; i < plane; ++i) sum += input.data[c * plane + i];
        out[c] = sum / static_cast<double>(plane);
    }
    return out;
}

std::vector<double> head_forward(std::span<const double> features,
                                 const FloatHead& head) {
    if (features.size() != head.features)
        throw DimensionError("head_forward: " + std::to_string(features.size()) +
                             " features vs " + std::to_string(head.features));
    if (head.weights.size() != static_cast<std::size_t>(head.classes) * head.features ||
        head.bias.size() != head.classes)
        throw DimensionError("head_forward: weight/bias sizes inconsistent");
    std::vector<double> logits(head.classes);
    for (std::uint32_t c = 0; c < head.classes; ++c) {
        double acc = head.bias[c];
        const float* row = head.weights.data() + static_cast<std::size_t>(c) * head.features;
        for (std::uint32_t j = 0; j < head.features; ++j)
            acc += static_cast<double>(row[j]) * features[j];
        logits[c] = acc;
    }
    return logits;
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) throw InvalidArgumentError("softmax: empty input");
    double max = logits[0];
    for (double l : logits) {
        if (!std::isfinite(l)) throw InvalidArgumentError("softmax: non-finite logit");
        max = std::max(max, l);
    }
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - max);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

} // namespace binnet
