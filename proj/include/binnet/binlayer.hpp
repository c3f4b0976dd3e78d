#ifndef BINNET_BINLAYER_HPP
#define BINNET_BINLAYER_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "binnet/bitpack.hpp"
#include "binnet/tensor.hpp"

namespace binnet {

// ---------------------------------------------------------------------------
// Binarized layer math: dense and conv forward passes over packed bits,
// BN -> integer-threshold folding, pooling, and the float classifier head.
// ---------------------------------------------------------------------------

struct BinDenseWeights {
    std::uint32_t rows = 0; // output neurons
    std::uint32_t cols = 0; // inputs per neuron
    std::vector<BitVector> row_bits;  // one packed row per output, len == cols
    std::vector<PruneMask> row_masks; // empty, or one mask per row
};

struct BinConvWeights {
    std::uint32_t out_channels = 0, in_channels = 0;
    std::uint32_t kernel_h = 0, kernel_w = 0;
    std::uint32_t stride = 1, pad = 0;
    // One packed filter per output channel, length in_channels*kernel_h*kernel_w,
    // ordered channel-major then kernel row then kernel column.
    std::vector<BitVector> filters;

    std::size_t fan_in() const {
        return static_cast<std::size_t>(in_channels) * kernel_h * kernel_w;
    }
};

// Per-channel integer threshold. flip=false: output +1 iff sum >= t.
// flip=true: output +1 iff sum <= t (negative-gamma BN channels).
// Sentinels (flip=false): t == INT32_MIN always fires, t == INT32_MAX never
// fires for any sum reachable from a real layer (|sum| <= fan-in).
struct ThresholdEntry {
    std::int32_t t = 0;
    bool flip = false;

    bool fires(std::int32_t sum) const { return flip ? sum <= t : sum >= t; }
    bool operator==(const ThresholdEntry&) const = default;
};

struct ThresholdSet {
    std::vector<ThresholdEntry> entries; // one per output channel
};

struct BNParams {
    std::vector<double> gamma, beta, mu, var; // one per channel
    double eps = 0.0;
};

struct FloatHead {
    std::uint32_t classes = 0;
    std::uint32_t features = 0;
    std::vector<float> weights; // row-major classes x features
    std::vector<float> bias;    // length classes
};

// out[r] = xnor_popcount_dot(input, row r, mask r). Throws DimensionError
// when input.len != w.cols.
std::vector<std::int32_t> bin_dense_forward(const BitVector& input,
                                            const BinDenseWeights& w);

// Sliding binary convolution. Out-of-bounds (padded) positions contribute -1
// (clear bit). Output dims floor((H + 2*pad - kh)/stride) + 1; throws
// DimensionError when non-positive or on channel mismatch.
IntTensor bin_conv2d_forward(const BitTensor& input, const BinConvWeights& w);

// Fold BN(s) = gamma*(s - mu)/sqrt(var + eps) + beta followed by sign (with
// sign(0) = +1) into per-channel integer thresholds that decide identically
// for every integer s in [-fan_in, fan_in]. Throws SingularParamError when
// var + eps == 0 for some channel.
ThresholdSet fold_bn_sign(const BNParams& bn, std::size_t fan_in);

// Apply per-channel thresholds to integer sums. Throws DimensionError when
// channel counts differ.
BitTensor threshold_apply(const IntTensor& sums, const ThresholdSet& t);

// Max over each k x k window with step s; the max of +/-1 values is the OR of
// the bits. Out-of-bounds positions of a padded window contribute -1.
// Throws DimensionError when no valid output position exists or pad >= k.
BitTensor maxpool_bits(const BitTensor& input, std::uint32_t k, std::uint32_t s,
                       std::uint32_t pad = 0);

// Integer variant used when pooling precedes the threshold. Padded positions
// are ignored (every window overlaps the input when pad < k).
IntTensor maxpool_int(const IntTensor& input, std::uint32_t k, std::uint32_t s,
                      std::uint32_t pad = 0);

// Per-channel mean of +/-1 values: (2*ones - count)/count, in [-1, 1].
// Throws DimensionError on empty spatial extent.
std::vector<double> avgpool_global(const BitTensor& input);

// Per-channel mean of integer sums (conv feeding global pool directly).
std::vector<double> avgpool_global_int(const IntTensor& input);

// logits[c] = dot(weights row c, features) + bias[c].
std::vector<double> head_forward(std::span<const double> features,
                                 const FloatHead& head);

// Numerically-stable softmax; throws InvalidArgumentError on empty or
// non-finite input.
std::vector<double> softmax(std::span<const double> logits);

} // namespace binnet

#endif
