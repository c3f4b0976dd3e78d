#ifndef BINNET_NETGRAPH_HPP
#define BINNET_NETGRAPH_HPP

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "binnet/binlayer.hpp"
#include "binnet/bitpack.hpp"
#include "binnet/rng.hpp"
#include "binnet/tensor.hpp"

namespace binnet {

// ---------------------------------------------------------------------------
// Tree-shaped model graph: a layer sequence where a Branches node fans the
// current bit tensor out over parallel sub-sequences and the Concat that must
// immediately follow it joins the branch outputs along channels.
// ---------------------------------------------------------------------------

struct LayerSpec;
using LayerSeq = std::vector<LayerSpec>;

struct InputLayer {
    std::uint32_t channels = 0, height = 0, width = 0;
    std::uint8_t threshold = 128; // pixel >= threshold binarizes to +1
};

struct BinConvLayer {
    BinConvWeights w;
};

struct BinDenseLayer {
    BinDenseWeights w;
};

struct ThresholdLayer {
    ThresholdSet t;
};

struct MaxPoolLayer {
    std::uint32_t k = 2, stride = 2, pad = 0;
};

struct GlobalAvgPoolLayer {};

struct BranchesLayer {
    std::vector<LayerSeq> branches;
};

struct ConcatLayer {};

struct HeadLayer {
    FloatHead head;
};

struct LayerSpec {
    std::variant<InputLayer, BinConvLayer, BinDenseLayer, ThresholdLayer,
                 MaxPoolLayer, GlobalAvgPoolLayer, BranchesLayer, ConcatLayer,
                 HeadLayer>
        node;

    const char* kind_name() const;
};

struct ModelGraph {
    std::string name;
    std::vector<std::string> class_labels;
    LayerSeq layers;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

enum class ValueKind { Bits, Sums, Feats };

struct ShapeInfo {
    ValueKind kind = ValueKind::Bits;
    std::uint32_t channels = 0, height = 0, width = 0;

    std::size_t count() const {
        return static_cast<std::size_t>(channels) * height * width;
    }
    bool operator==(const ShapeInfo&) const = default;
};

struct LayerShape {
    std::string name; // path-qualified, e.g. "3.b1.0:binconv"
    ShapeInfo in, out;
};

struct ShapeReport {
    std::vector<LayerShape> layers; // flattened, branch layers included
    ShapeInfo output;
    bool has_head = false;
    std::uint32_t feature_count = 0; // length of the GlobalAvgPool output, 0 if none
    std::uint32_t classes = 0;       // head classes, 0 if headless
};

// Checks layer chaining, Branches/Concat pairing, conv/dense -> threshold
// coverage and accumulator bounds. Throws ValidationError naming the first
// offending layer.
ShapeReport validate(const ModelGraph& graph);

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

using Value = std::variant<BitTensor, IntTensor, std::vector<double>>;

struct ExecTrace {
    // Output value and wall seconds per top-level layer, in graph order.
    std::vector<std::string> names;
    std::vector<Value> values;
    std::vector<double> seconds;
};

// pixel >= threshold -> +1, else -1.
BitTensor binarize_input(const U8Tensor& image, std::uint8_t threshold = 128);

// Runs layers [0, stop). stop == graph.layers.size() runs everything.
Value execute(const ModelGraph& graph, const U8Tensor& image, std::size_t stop,
              ExecTrace* trace = nullptr);

// Full pass; Head logits go through softmax. Throws DimensionError when the
// image does not match the Input layer, ValidationError for a graph that
// cannot execute.
std::vector<double> forward(const ModelGraph& graph, const U8Tensor& image);

// Runs every layer up to but excluding the Head (through GlobalAvgPool).
std::vector<double> extract_features(const ModelGraph& graph, const U8Tensor& image);

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

struct InceptionWidths {
    std::uint32_t b1 = 0;        // 1x1 branch
    std::uint32_t b3_reduce = 0; // 1x1 before the 3x3
    std::uint32_t b3 = 0;
    std::uint32_t b5_reduce = 0; // 1x1 before the 5x5
    std::uint32_t b5 = 0;
    std::uint32_t pool_proj = 0; // 1x1 after the 3x3 maxpool
};

// Branches([1x1], [1x1 -> 3x3 pad 1], [1x1 -> 5x5 pad 2],
// [3x3 maxpool stride 1 pad 1 -> 1x1]) followed by Concat. Filter bits are
// drawn from rng; every conv gets a plain sign threshold. Output channels are
// b1 + b3 + b5 + pool_proj with spatial dims preserved.
LayerSeq inception_module(std::uint32_t in_channels, const InceptionWidths& widths,
                          SplitMix64& rng);

// Identity feature extractor: every binarized input pixel becomes one feature
// (masked 1-active dense rows), so a zero-initialized head trains as a linear
// probe over raw bits.
ModelGraph build_pixel_probe(std::uint32_t channels, std::uint32_t height,
                             std::uint32_t width, std::uint32_t classes,
                             std::uint8_t input_threshold = 128);

// Reduced-width inception stack for desk-scale runs: stem conv, two pool
// stages, three inception modules, global average pool, zero head.
ModelGraph build_mini_googlenet(std::uint32_t in_channels, std::uint32_t height,
                                std::uint32_t width, std::uint32_t classes,
                                std::uint64_t seed);

// Full-width 9-inception stack on 3x224x224 with randomly drawn binary
// filters (the widths follow the well-known architecture family; no trained
// weights ship with it).
ModelGraph build_googlenet(std::uint32_t classes, std::uint64_t seed);

} // namespace binnet

#endif
