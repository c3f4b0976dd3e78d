#include "binnet/netgraph.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace binnet {

const char* LayerSpec::kind_name() const {
    struct Visitor {
        const char* operator()(const InputLayer&) const { return "input"; }
        const char* operator()(const BinConvLayer&) const { return "binconv"; }
        const char* operator()(const BinDenseLayer&) const { return "bindense"; }
        const char* operator()(const ThresholdLayer&) const { return "threshold"; }
        const char* operator()(const MaxPoolLayer&) const { return "maxpool"; }
        const char* operator()(const GlobalAvgPoolLayer&) const { return "gap"; }
        const char* operator()(const BranchesLayer&) const { return "branches"; }
        const char* operator()(const ConcatLayer&) const { return "concat"; }
        const char* operator()(const HeadLayer&) const { return "head"; }
    };
    return std::visit(Visitor{}, node);
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint32_t kMaxDim = 1u << 16; // sanity cap on any single dimension

struct Validator {
    ShapeReport report;

    [[noreturn]] void fail(std::size_t idx, const std::string& path, const char* kind,
                           const std::string& msg) {
        throw ValidationError(idx, path.empty() ? kind : path + ":" + kind, msg);
    }

    void record(const std::string& path, const char* kind, const ShapeInfo& in,
                const ShapeInfo& out) {
        report.layers.push_back({path + (path.empty() ? "" : ":") + kind, in, out});
    }

    static void check_dims(std::uint32_t c, std::uint32_t h, std::uint32_t w,
                           std::size_t idx, const std::string& path, const char* kind) {
        if (c == 0 || h == 0 || w == 0)
            throw ValidationError(idx, path + ":" + kind, "zero dimension");
        if (c > kMaxDim || h > kMaxDim || w > kMaxDim)
            throw ValidationError(idx, path + ":" + kind, "dimension exceeds cap");
    }

    ShapeInfo step(const LayerSpec& layer, ShapeInfo cur, std::size_t idx,
                   const std::string& path, bool top_level, bool is_last,
                   const LayerSeq& seq);

    ShapeInfo run_seq(const LayerSeq& seq, ShapeInfo cur, const std::string& path,
                      bool top_level);
};

std::uint32_t conv_out_dim(std::uint32_t in, std::uint32_t k, std::uint32_t stride,
                           std::uint32_t pad, bool& ok) {
    const std::int64_t span =
        static_cast<std::int64_t>(in) + 2 * static_cast<std::int64_t>(pad) - k;
    if (span < 0 || stride == 0) {
        ok = false;
        return 0;
    }
    ok = true;
    return static_cast<std::uint32_t>(span / stride) + 1;
}

ShapeInfo Validator::step(const LayerSpec& layer, ShapeInfo cur, std::size_t idx,
                          const std::string& path, bool top_level, bool is_last,
                          const LayerSeq& seq) {
    const char* kind = layer.kind_name();
    const ShapeInfo in = cur;

    if (const auto* l = std::get_if<InputLayer>(&layer.node)) {
        if (!top_level || idx != 0) fail(idx, path, kind, "Input allowed only first");
        check_dims(l->channels, l->height, l->width, idx, path, kind);
        ShapeInfo out{ValueKind::Bits, l->channels, l->height, l->width};
        record(path.empty() ? std::to_string(idx) : path, kind, in, out);
        return out;
    }
    if (top_level && idx == 0) fail(idx, path, kind, "graph must start with Input");

    const std::string name = (path.empty() ? std::to_string(idx) : path);

    if (const auto* l = std::get_if<BinConvLayer>(&layer.node)) {
        if (cur.kind != ValueKind::Bits) fail(idx, path, kind, "needs binary input");
        const BinConvWeights& w = l->w;
        if (w.out_channels == 0) fail(idx, path, kind, "zero output channels");
        if (cur.channels != w.in_channels)
            fail(idx, path, kind,
                 "input channels " + std::to_string(cur.channels) + " vs " +
                     std::to_string(w.in_channels));
        if (w.stride == 0) fail(idx, path, kind, "stride must be >= 1");
        if (w.pad > kMaxDim) fail(idx, path, kind, "pad exceeds cap");
        if (w.fan_in() > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max()))
            fail(idx, path, kind, "accumulator overflow risk: fan-in exceeds int32");
        if (w.filters.size() != w.out_channels)
            fail(idx, path, kind, "filter count mismatch");
        for (const BitVector& f : w.filters)
            if (f.len != w.fan_in()) fail(idx, path, kind, "filter length mismatch");
        bool ok_h = false, ok_w = false;
        ShapeInfo out{ValueKind::Sums, w.out_channels,
                      conv_out_dim(cur.height, w.kernel_h, w.stride, w.pad, ok_h),
                      conv_out_dim(cur.width, w.kernel_w, w.stride, w.pad, ok_w)};
        if (!ok_h || !ok_w) fail(idx, path, kind, "non-positive output dims");
        record(name, kind, in, out);
        return out;
    }

    if (const auto* l = std::get_if<BinDenseLayer>(&layer.node)) {
        if (cur.kind != ValueKind::Bits) fail(idx, path, kind, "needs binary input");
        const BinDenseWeights& w = l->w;
        if (w.rows == 0) fail(idx, path, kind, "zero rows");
        if (cur.count() != w.cols)
            fail(idx, path, kind,
                 "flattened input " + std::to_string(cur.count()) + " vs cols " +
                     std::to_string(w.cols));
        if (w.cols > static_cast<std::uint32_t>(std::numeric_limits<std::int32_t>::max()))
            fail(idx, path, kind, "accumulator overflow risk: cols exceed int32");
        if (w.row_bits.size() != w.rows) fail(idx, path, kind, "row count mismatch");
        for (const BitVector& r : w.row_bits)
            if (r.len != w.cols) fail(idx, path, kind, "row length mismatch");
        if (!w.row_masks.empty()) {
            if (w.row_masks.size() != w.rows) fail(idx, path, kind, "mask count mismatch");
            for (const PruneMask& m : w.row_masks)
                if (m.len != w.cols) fail(idx, path, kind, "mask length mismatch");
        }
        ShapeInfo out{ValueKind::Sums, w.rows, 1, 1};
        record(name, kind, in, out);
        return out;
    }

    if (const auto* l = std::get_if<ThresholdLayer>(&layer.node)) {
        if (cur.kind != ValueKind::Sums)
            fail(idx, path, kind, "needs integer sums input");
        if (l->t.entries.size() != cur.channels)
            fail(idx, path, kind,
                 std::to_string(l->t.entries.size()) + " thresholds vs " +
                     std::to_string(cur.channels) + " channels");
        ShapeInfo out{ValueKind::Bits, cur.channels, cur.height, cur.width};
        record(name, kind, in, out);
        return out;
    }

    if (const auto* l = std::get_if<MaxPoolLayer>(&layer.node)) {
        if (cur.kind == ValueKind::Feats) fail(idx, path, kind, "needs a tensor input");
        if (l->k == 0 || l->stride == 0) fail(idx, path, kind, "window/stride must be >= 1");
        if (l->pad >= l->k) fail(idx, path, kind, "pad must be smaller than the window");
        bool ok_h = false, ok_w = false;
        ShapeInfo out{cur.kind, cur.channels,
                      conv_out_dim(cur.height, l->k, l->stride, l->pad, ok_h),
                      conv_out_dim(cur.width, l->k, l->stride, l->pad, ok_w)};
        if (!ok_h || !ok_w) fail(idx, path, kind, "window larger than padded input");
        record(name, kind, in, out);
        return out;
    }

    if (std::get_if<GlobalAvgPoolLayer>(&layer.node)) {
        if (cur.kind == ValueKind::Feats) fail(idx, path, kind, "needs a tensor input");
        if (!top_level) fail(idx, path, kind, "global pool not allowed inside a branch");
        if (static_cast<std::size_t>(cur.height) * cur.width == 0)
            fail(idx, path, kind, "empty spatial extent");
        // A conv/dense may feed the global pool directly only on the way to a
        // Head (or as the extractor output); nothing else consumes features.
        ShapeInfo out{ValueKind::Feats, cur.channels, 1, 1};
        record(name, kind, in, out);
        report.feature_count = cur.channels;
        return out;
    }

    if (const auto* l = std::get_if<BranchesLayer>(&layer.node)) {
        if (!top_level) fail(idx, path, kind, "nested branches are not supported");
        if (cur.kind != ValueKind::Bits) fail(idx, path, kind, "needs binary input");
        if (l->branches.empty()) fail(idx, path, kind, "no branches");
        if (is_last || !std::holds_alternative<ConcatLayer>(seq[idx + 1].node))
            fail(idx, path, kind, "Branches must be immediately followed by Concat");
        std::uint64_t total_c = 0;
        ShapeInfo first_out{};
        for (std::size_t b = 0; b < l->branches.size(); ++b) {
            if (l->branches[b].empty()) fail(idx, path, kind, "empty branch");
            ShapeInfo bout = run_seq(l->branches[b],
                                     ShapeInfo{ValueKind::Bits, cur.channels, cur.height,
                                               cur.width},
                                     std::to_string(idx) + ".b" + std::to_string(b),
                                     false);
            if (bout.kind != ValueKind::Bits)
                fail(idx, path, kind, "branch " + std::to_string(b) +
                                          " does not end in binary activations");
            if (b == 0)
                first_out = bout;
            else if (bout.height != first_out.height || bout.width != first_out.width)
                fail(idx, path, kind, "branch spatial dims differ");
            total_c += bout.channels;
        }
        if (total_c > kMaxDim) fail(idx, path, kind, "concat channels exceed cap");
        ShapeInfo out{ValueKind::Bits, static_cast<std::uint32_t>(total_c),
                      first_out.height, first_out.width};
        record(name, kind, in, out);
        return out;
    }

    if (std::get_if<ConcatLayer>(&layer.node)) {
        // Shape already produced by the Branches step; Concat is just the marker.
        if (idx == 0 || !std::holds_alternative<BranchesLayer>(seq[idx - 1].node))
            fail(idx, path, kind, "Concat without a preceding Branches");
        record(name, kind, in, cur);
        return cur;
    }

    if (const auto* l = std::get_if<HeadLayer>(&layer.node)) {
        if (!top_level) fail(idx, path, kind, "Head not allowed inside a branch");
        if (!is_last) fail(idx, path, kind, "Head must be the last layer");
        if (cur.kind != ValueKind::Feats)
            fail(idx, path, kind, "Head needs a feature vector (GlobalAvgPool output)");
        const FloatHead& h = l->head;
        if (h.classes == 0) fail(idx, path, kind, "zero classes");
        if (h.features != cur.channels)
            fail(idx, path, kind,
                 "head features " + std::to_string(h.features) + " vs " +
                     std::to_string(cur.channels));
        if (h.weights.size() != static_cast<std::size_t>(h.classes) * h.features ||
            h.bias.size() != h.classes)
            fail(idx, path, kind, "weight/bias sizes inconsistent");
        for (float v : h.weights)
            if (!std::isfinite(v)) fail(idx, path, kind, "non-finite head weight");
        for (float v : h.bias)
            if (!std::isfinite(v)) fail(idx, path, kind, "non-finite head bias");
        ShapeInfo out{ValueKind::Feats, h.classes, 1, 1};
        record(name, kind, in, out);
        report.has_head = true;
        report.classes = h.classes;
        return out;
    }

    fail(idx, path, kind, "unhandled layer kind");
}

ShapeInfo Validator::run_seq(const LayerSeq& seq, ShapeInfo cur, const std::string& path,
                             bool top_level) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const std::string sub = path.empty() ? "" : path + "." + std::to_string(i);
        if (!top_level) {
            const LayerSpec& l = seq[i];
            if (std::holds_alternative<InputLayer>(l.node) ||
                std::holds_alternative<HeadLayer>(l.node) ||
                std::holds_alternative<ConcatLayer>(l.node))
                fail(i, sub, l.kind_name(), "layer kind not allowed inside a branch");
        }
        cur = step(seq[i], cur, i, top_level ? "" : path + "." + std::to_string(i),
                   top_level, i + 1 == seq.size(), seq);
    }
    return cur;
}

} // namespace

ShapeReport validate(const ModelGraph& graph) {
    if (graph.layers.empty())
        throw ValidationError(0, "graph", "empty layer list");
    if (!std::holds_alternative<InputLayer>(graph.layers.front().node))
        throw ValidationError(0, graph.layers.front().kind_name(),
                              "graph must start with Input");
    for (std::size_t i = 1; i < graph.layers.size(); ++i)
        if (std::holds_alternative<InputLayer>(graph.layers[i].node))
            throw ValidationError(i, "input", "Input allowed only first");

    Validator v;
    ShapeInfo out = v.run_seq(graph.layers, ShapeInfo{}, "", true);
    v.report.output = out;
    return v.report;
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

BitTensor binarize_input(const U8Tensor& image, std::uint8_t threshold) {
    BitTensor out = BitTensor::zeros(image.channels, image.height, image.width);
    for (std::size_t i = 0; i < image.data.size(); ++i)
        if (image.data[i] >= threshold) out.data.set(i, true);
    return out;
}

namespace {

// Value-kind checks mirror validate(); an ill-formed graph surfaces a
// structured error here even when the caller skipped validation.
const BitTensor& want_bits(const Value& v, const LayerSpec& layer) {
    if (const auto* bits = std::get_if<BitTensor>(&v)) return *bits;
    throw ValidationError(0, layer.kind_name(), "needs binary input");
}

Value apply_layer(const LayerSpec& layer, Value cur) {
    if (const auto* l = std::get_if<BinConvLayer>(&layer.node))
        return bin_conv2d_forward(want_bits(cur, layer), l->w);
    if (const auto* l = std::get_if<BinDenseLayer>(&layer.node))
        return IntTensor{bin_dense_forward(want_bits(cur, layer).data, l->w),
                         l->w.rows, 1, 1};
    if (const auto* l = std::get_if<ThresholdLayer>(&layer.node)) {
        if (const auto* sums = std::get_if<IntTensor>(&cur))
            return threshold_apply(*sums, l->t);
        throw ValidationError(0, layer.kind_name(), "needs integer sums input");
    }
    if (const auto* l = std::get_if<MaxPoolLayer>(&layer.node)) {
        if (const auto* bits = std::get_if<BitTensor>(&cur))
            return maxpool_bits(*bits, l->k, l->stride, l->pad);
        if (const auto* sums = std::get_if<IntTensor>(&cur))
            return maxpool_int(*sums, l->k, l->stride, l->pad);
        throw ValidationError(0, layer.kind_name(), "needs a tensor input");
    }
    if (std::get_if<GlobalAvgPoolLayer>(&layer.node)) {
        if (const auto* bits = std::get_if<BitTensor>(&cur)) return avgpool_global(*bits);
        if (const auto* sums = std::get_if<IntTensor>(&cur))
            return avgpool_global_int(*sums);
        throw ValidationError(0, layer.kind_name(), "needs a tensor input");
    }
    if (const auto* l = std::get_if<BranchesLayer>(&layer.node)) {
        const BitTensor& in = want_bits(cur, layer);
        std::vector<BitTensor> outs;
        outs.reserve(l->branches.size());
        for (const LayerSeq& branch : l->branches) {
            Value v = in;
            for (const LayerSpec& bl : branch) v = apply_layer(bl, std::move(v));
            outs.push_back(want_bits(v, layer));
        }
        if (outs.empty())
            throw ValidationError(0, layer.kind_name(), "no branches");
        std::uint32_t total_c = 0;
        for (const BitTensor& t : outs) {
            if (t.height != outs[0].height || t.width != outs[0].width)
                throw ValidationError(0, layer.kind_name(), "branch spatial dims differ");
            total_c += t.channels;
        }
        BitTensor joined = BitTensor::zeros(total_c, outs[0].height, outs[0].width);
        const std::size_t plane =
            static_cast<std::size_t>(outs[0].height) * outs[0].width;
        std::size_t base = 0;
        for (const BitTensor& t : outs) {
            for (std::size_t i = 0; i < static_cast<std::size_t>(t.channels) * plane; ++i)
                if (t.data.get(i)) joined.data.set(base + i, true);
            base += static_cast<std::size_t>(t.channels) * plane;
        }
        return joined;
    }
    if (std::get_if<ConcatLayer>(&layer.node)) return cur; // joined by Branches
    if (const auto* l = std::get_if<HeadLayer>(&layer.node)) {
        if (const auto* feats = std::get_if<std::vector<double>>(&cur))
            return head_forward(*feats, l->head);
        throw ValidationError(0, layer.kind_name(),
                              "Head needs a feature vector (GlobalAvgPool output)");
    }
    throw ValidationError(0, layer.kind_name(), "layer cannot execute here");
}

} // namespace

Value execute(const ModelGraph& graph, const U8Tensor& image, std::size_t stop,
              ExecTrace* trace) {
    if (graph.layers.empty() ||
        !std::holds_alternative<InputLayer>(graph.layers.front().node))
        throw ValidationError(0, "graph", "graph must start with Input");
    const InputLayer& in = std::get<InputLayer>(graph.layers.front().node);
    if (image.channels != in.channels || image.height != in.height ||
        image.width != in.width)
        throw DimensionError("execute: image " + std::to_string(image.channels) + "x" +
                             std::to_string(image.height) + "x" +
                             std::to_string(image.width) + " vs input " +
                             std::to_string(in.channels) + "x" +
                             std::to_string(in.height) + "x" + std::to_string(in.width));

    using Clock = std::chrono::steady_clock;
    Value cur;
    for (std::size_t i = 0; i < stop && i < graph.layers.size(); ++i) {
        const auto t0 = Clock::now();
        if (i == 0)
            cur = binarize_input(image, in.threshold);
        else
            cur = apply_layer(graph.layers[i], std::move(cur));
        if (trace != nullptr) {
            trace->names.push_back(graph.layers[i].kind_name());
            trace->values.push_back(cur);
            trace->seconds.push_back(
                std::chrono::duration<double>(Clock::now() - t0).count());
        }
    }
    return cur;
}

std::vector<double> forward(const ModelGraph& graph, const U8Tensor& image) {
    if (graph.layers.empty() ||
        !std::holds_alternative<HeadLayer>(graph.layers.back().node))
        throw ValidationError(graph.layers.empty() ? 0 : graph.layers.size() - 1, "head",
                              "forward needs a Head layer");
    Value out = execute(graph, image, graph.layers.size());
    return softmax(std::get<std::vector<double>>(out));
}

std::vector<double> extract_features(const ModelGraph& graph, const U8Tensor& image) {
    std::size_t stop = graph.layers.size();
    if (stop > 0 && std::holds_alternative<HeadLayer>(graph.layers.back().node))
        --stop;
    Value out = execute(graph, image, stop);
    if (!std::holds_alternative<std::vector<double>>(out))
        throw ValidationError(stop == 0 ? 0 : stop - 1, "gap",
                              "graph has no feature stage (GlobalAvgPool)");
    return std::get<std::vector<double>>(std::move(out));
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

namespace {

BitVector random_bits(std::size_t n, SplitMix64& rng) {
    BitVector v = BitVector::zeros(n);
    for (std::size_t w = 0; w < v.words.size(); ++w) v.words[w] = rng.next();
    if (!v.words.empty()) {
        const std::size_t r = n & 63;
        if (r != 0) v.words.back() &= (std::uint64_t(1) << r) - 1;
    }
    return v;
}

LayerSpec random_conv(std::uint32_t in_c, std::uint32_t out_c, std::uint32_t k,
                      std::uint32_t pad, SplitMix64& rng, std::uint32_t stride = 1) {
    BinConvWeights w;
    w.out_channels = out_c;
    w.in_channels = in_c;
    w.kernel_h = w.kernel_w = k;
    w.stride = stride;
    w.pad = pad;
    w.filters.reserve(out_c);
    for (std::uint32_t i = 0; i < out_c; ++i)
        w.filters.push_back(random_bits(w.fan_in(), rng));
    return LayerSpec{BinConvLayer{std::move(w)}};
}

LayerSpec sign_threshold(std::uint32_t channels) {
    ThresholdSet t;
    t.entries.assign(channels, ThresholdEntry{0, false});
    return LayerSpec{ThresholdLayer{std::move(t)}};
}

} // namespace

LayerSeq inception_module(std::uint32_t in_channels, const InceptionWidths& widths,
                          SplitMix64& rng) {
    if (in_channels == 0 || widths.b1 == 0 || widths.b3_reduce == 0 || widths.b3 == 0 ||
        widths.b5_reduce == 0 || widths.b5 == 0 || widths.pool_proj == 0)
        throw InvalidArgumentError("inception_module: widths must be positive");

    BranchesLayer branches;

    LayerSeq b0;
    b0.push_back(random_conv(in_channels, widths.b1, 1, 0, rng));
    b0.push_back(sign_threshold(widths.b1));
    branches.branches.push_back(std::move(b0));

    LayerSeq b1;
    b1.push_back(random_conv(in_channels, widths.b3_reduce, 1, 0, rng));
    b1.push_back(sign_threshold(widths.b3_reduce));
    b1.push_back(random_conv(widths.b3_reduce, widths.b3, 3, 1, rng));
    b1.push_back(sign_threshold(widths.b3));
    branches.branches.push_back(std::move(b1));

    LayerSeq b2;
    b2.push_back(random_conv(in_channels, widths.b5_reduce, 1, 0, rng));
    b2.push_back(sign_threshold(widths.b5_reduce));
    b2.push_back(random_conv(widths.b5_reduce, widths.b5, 5, 2, rng));
    b2.push_back(sign_threshold(widths.b5));
    branches.branches.push_back(std::move(b2));

    LayerSeq b3;
    b3.push_back(LayerSpec{MaxPoolLayer{3, 1, 1}});
    b3.push_back(random_conv(in_channels, widths.pool_proj, 1, 0, rng));
    b3.push_back(sign_threshold(widths.pool_proj));
    branches.branches.push_back(std::move(b3));

    LayerSeq seq;
    seq.push_back(LayerSpec{std::move(branches)});
    seq.push_back(LayerSpec{ConcatLayer{}});
    return seq;
}

ModelGraph build_pixel_probe(std::uint32_t channels, std::uint32_t height,
                             std::uint32_t width, std::uint32_t classes,
                             std::uint8_t input_threshold) {
    const std::size_t n = static_cast<std::size_t>(channels) * height * width;
    if (n == 0 || classes == 0)
        throw InvalidArgumentError("build_pixel_probe: zero dimensions");

    ModelGraph g;
    g.name = "pixel-probe";
    g.layers.push_back(LayerSpec{InputLayer{channels, height, width, input_threshold}});

    // Identity rows: all-ones weights with a single active mask bit per row,
    // so row r passes pixel r through unchanged.
    BinDenseWeights w;
    w.rows = static_cast<std::uint32_t>(n);
    w.cols = static_cast<std::uint32_t>(n);
    BitVector ones = BitVector::zeros(n);
    for (std::size_t i = 0; i < n; ++i) ones.set(i, true);
    w.row_bits.assign(n, ones);
    w.row_masks.reserve(n);
    std::vector<int> flags(n, 0);
    for (std::size_t r = 0; r < n; ++r) {
        flags[r] = 1;
        w.row_masks.push_back(make_mask(flags));
        flags[r] = 0;
    }
    g.layers.push_back(LayerSpec{BinDenseLayer{std::move(w)}});
    g.layers.push_back(sign_threshold(static_cast<std::uint32_t>(n)));
    g.layers.push_back(LayerSpec{GlobalAvgPoolLayer{}});

    FloatHead head;
    head.classes = classes;
    head.features = static_cast<std::uint32_t>(n);
    head.weights.assign(static_cast<std::size_t>(classes) * n, 0.0f);
    head.bias.assign(classes, 0.0f);
    g.layers.push_back(LayerSpec{HeadLayer{std::move(head)}});
    return g;
}

ModelGraph build_mini_googlenet(std::uint32_t in_channels, std::uint32_t height,
                                std::uint32_t width, std::uint32_t classes,
                                std::uint64_t seed) {
    if (in_channels == 0 || height < 8 || width < 8 || classes == 0)
        throw InvalidArgumentError("build_mini_googlenet: input must be at least 8x8");
    SplitMix64 rng(seed);

    ModelGraph g;
    g.name = "mini-googlenet";
    g.layers.push_back(LayerSpec{InputLayer{in_channels, height, width, 128}});
    g.layers.push_back(random_conv(in_channels, 8, 3, 1, rng));
    g.layers.push_back(sign_threshold(8));
    g.layers.push_back(LayerSpec{MaxPoolLayer{2, 2, 0}});

    auto append = [&g](LayerSeq seq) {
        for (LayerSpec& l : seq) g.layers.push_back(std::move(l));
    };
    append(inception_module(8, InceptionWidths{4, 2, 8, 2, 4, 4}, rng));   // -> 20
    append(inception_module(20, InceptionWidths{8, 4, 12, 2, 6, 6}, rng)); // -> 32
    g.layers.push_back(LayerSpec{MaxPoolLayer{2, 2, 0}});
    append(inception_module(32, InceptionWidths{12, 4, 16, 4, 8, 8}, rng)); // -> 44
    g.layers.push_back(LayerSpec{GlobalAvgPoolLayer{}});

    FloatHead head;
    head.classes = classes;
    head.features = 44;
    head.weights.assign(static_cast<std::size_t>(classes) * 44, 0.0f);
    head.bias.assign(classes, 0.0f);
    g.layers.push_back(LayerSpec{HeadLayer{std::move(head)}});
    return g;
}

ModelGraph build_googlenet(std::uint32_t classes, std::uint64_t seed) {
    if (classes == 0) throw InvalidArgumentError("build_googlenet: zero classes");
    SplitMix64 rng(seed);

    ModelGraph g;
    g.name = "googlenet";
    g.layers.push_back(LayerSpec{InputLayer{3, 224, 224, 128}});
    g.layers.push_back(random_conv(3, 64, 7, 3, rng, 2)); // -> 112
    g.layers.push_back(sign_threshold(64));
    g.layers.push_back(LayerSpec{MaxPoolLayer{3, 2, 1}}); // -> 56
    g.layers.push_back(random_conv(64, 64, 1, 0, rng));
    g.layers.push_back(sign_threshold(64));
    g.layers.push_back(random_conv(64, 192, 3, 1, rng));
    g.layers.push_back(sign_threshold(192));
    g.layers.push_back(LayerSpec{MaxPoolLayer{3, 2, 1}}); // -> 28

    auto append = [&g](LayerSeq seq) {
        for (LayerSpec& l : seq) g.layers.push_back(std::move(l));
    };
    append(inception_module(192, InceptionWidths{64, 96, 128, 16, 32, 32}, rng));   // 3a -> 256
    append(inception_module(256, InceptionWidths{128, 128, 192, 32, 96, 64}, rng)); // 3b -> 480
    g.layers.push_back(LayerSpec{MaxPoolLayer{3, 2, 1}});                           // -> 14
    append(inception_module(480, InceptionWidths{192, 96, 208, 16, 48, 64}, rng));  // 4a -> 512
    append(inception_module(512, InceptionWidths{160, 112, 224, 24, 64, 64}, rng)); // 4b -> 512
    append(inception_module(512, InceptionWidths{128, 128, 256, 24, 64, 64}, rng)); // 4c -> 512
    append(inception_module(512, InceptionWidths{112, 144, 288, 32, 64, 64}, rng)); // 4d -> 528
    append(inception_module(528, InceptionWidths{256, 160, 320, 32, 128, 128}, rng)); // 4e -> 832
    g.layers.push_back(LayerSpec{MaxPoolLayer{3, 2, 1}});                             // -> 7
    append(inception_module(832, InceptionWidths{256, 160, 320, 32, 128, 128}, rng)); // 5a -> 832
    append(inception_module(832, InceptionWidths{384, 192, 384, 48, 128, 128}, rng)); // 5b -> 1024
    g.layers.push_back(LayerSpec{GlobalAvgPoolLayer{}});

    FloatHead head;
    head.classes = classes;
    head.features = 1024;
    head.weights.assign(static_cast<std::size_t>(classes) * 1024, 0.0f);
    head.bias.assign(classes, 0.0f);
    g.layers.push_back(LayerSpec{HeadLayer{std::move(head)}});
    return g;
}

} // namespace binnet
