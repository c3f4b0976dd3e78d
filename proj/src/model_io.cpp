#include "binnet/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

#include <zlib.h>

namespace binnet {

namespace {

constexpr char kMagic[4] = {'B', 'N', 'N', 'M'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint32_t kMaxDim = 1u << 16;

enum LayerTag : std::uint8_t {
    kTagInput = 0,
    kTagBinConv = 1,
    kTagBinDense = 2,
    kTagThreshold = 3,
    kTagMaxPool = 4,
    kTagGlobalAvgPool = 5,
    kTagBranches = 6,
    kTagConcat = 7,
    kTagHead = 8,
};

// --- little-endian writer ---------------------------------------------------

struct ByteWriter {
    std::vector<std::uint8_t> bytes;

    void u8(std::uint8_t v) { bytes.push_back(v); }
    void u16(std::uint16_t v) {
        bytes.push_back(static_cast<std::uint8_t>(v));
        bytes.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes.insert(bytes.end(), s.begin(), s.end());
    }
};

// --- bounded little-endian reader -------------------------------------------
// Every multi-element read is bounded against the bytes actually present, so
// a header-declared count can never drive an oversized allocation.

struct ByteReader {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos = 0;

    std::size_t remaining() const { return size - pos; }

    void need(std::size_t n) {
        if (remaining() < n)
            throw FormatError(FormatError::Kind::Truncated,
                              "model file truncated: need " + std::to_string(n) +
                                  " bytes, have " + std::to_string(remaining()));
    }
    std::uint8_t u8() {
        need(1);
        return data[pos++];
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = static_cast<std::uint16_t>(data[pos]) |
                          static_cast<std::uint16_t>(data[pos + 1]) << 8;
        pos += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    float f32() { return std::bit_cast<float>(u32()); }
    std::string str() {
        const std::uint32_t n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(data + pos), n);
        pos += n;
        return s;
    }
    // Guard an upcoming count*elem_size read before allocating.
    void bound(std::uint64_t count, std::size_t elem_size, const char* what) {
        if (count > remaining() / elem_size)
            throw FormatError(FormatError::Kind::Truncated,
                              std::string("model file truncated in ") + what);
    }
};

std::uint32_t checked_dim(std::uint32_t v, const char* what) {
    if (v == 0 || v > kMaxDim)
        throw FormatError(FormatError::Kind::Malformed,
                          std::string(what) + " out of range: " + std::to_string(v));
    return v;
}

// --- per-layer payloads -------------------------------------------------------

void write_bitvector_words(ByteWriter& w, const BitVector& v) {
    for (std::uint64_t word : v.words) w.u64(word);
}

BitVector read_bitvector(ByteReader& r, std::size_t len) {
    const std::size_t nw = BitVector::word_count(len);
    r.bound(nw, 8, "weight words");
    BitVector v;
    v.len = len;
    v.words.resize(nw);
    for (std::size_t i = 0; i < nw; ++i) v.words[i] = r.u64();
    if (nw > 0) {
        const std::size_t rem = len & 63;
        const std::uint64_t pad =
            rem == 0 ? 0 : v.words.back() & ~((std::uint64_t(1) << rem) - 1);
        if (pad != 0)
            throw FormatError(FormatError::Kind::Malformed, "pad bits not zero");
    }
    return v;
}

void write_layer(ByteWriter& w, const LayerSpec& layer);

void write_seq(ByteWriter& w, const LayerSeq& seq) {
    w.u32(static_cast<std::uint32_t>(seq.size()));
    for (const LayerSpec& l : seq) write_layer(w, l);
}

void write_layer(ByteWriter& w, const LayerSpec& layer) {
    struct Visitor {
        ByteWriter& w;
        void operator()(const InputLayer& l) {
            w.u8(kTagInput);
            w.u32(l.channels);
            w.u32(l.height);
            w.u32(l.width);
            w.u8(l.threshold);
        }
        void operator()(const BinConvLayer& l) {
            w.u8(kTagBinConv);
            w.u32(l.w.out_channels);
            w.u32(l.w.in_channels);
            w.u32(l.w.kernel_h);
            w.u32(l.w.kernel_w);
            w.u32(l.w.stride);
            w.u32(l.w.pad);
            for (const BitVector& f : l.w.filters) write_bitvector_words(w, f);
        }
        void operator()(const BinDenseLayer& l) {
            w.u8(kTagBinDense);
            w.u32(l.w.rows);
            w.u32(l.w.cols);
            w.u8(l.w.row_masks.empty() ? 0 : 1);
            for (const BitVector& row : l.w.row_bits) write_bitvector_words(w, row);
            for (const PruneMask& m : l.w.row_masks)
                for (std::uint64_t word : m.words) w.u64(word);
        }
        void operator()(const ThresholdLayer& l) {
            w.u8(kTagThreshold);
            w.u32(static_cast<std::uint32_t>(l.t.entries.size()));
            for (const ThresholdEntry& e : l.t.entries) {
                w.i32(e.t);
                w.u8(e.flip ? 1 : 0);
            }
        }
        void operator()(const MaxPoolLayer& l) {
            w.u8(kTagMaxPool);
            w.u32(l.k);
            w.u32(l.stride);
            w.u32(l.pad);
        }
        void operator()(const GlobalAvgPoolLayer&) { w.u8(kTagGlobalAvgPool); }
        void operator()(const BranchesLayer& l) {
            w.u8(kTagBranches);
            w.u32(static_cast<std::uint32_t>(l.branches.size()));
            for (const LayerSeq& b : l.branches) write_seq(w, b);
        }
        void operator()(const ConcatLayer&) { w.u8(kTagConcat); }
        void operator()(const HeadLayer& l) {
            w.u8(kTagHead);
            w.u32(l.head.classes);
            w.u32(l.head.features);
            for (float v : l.head.weights) w.f32(v);
            for (float v : l.head.bias) w.f32(v);
        }
    };
    std::visit(Visitor{w}, layer.node);
}

LayerSpec read_layer(ByteReader& r, int depth);

LayerSeq read_seq(ByteReader& r, int depth) {
    const std::uint32_t count = r.u32();
    r.bound(count, 1, "branch layer list");
    LayerSeq seq;
    seq.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) seq.push_back(read_layer(r, depth));
    return seq;
}

LayerSpec read_layer(ByteReader& r, int depth) {
    const std::uint8_t tag = r.u8();
    switch (tag) {
    case kTagInput: {
        InputLayer l;
        l.channels = checked_dim(r.u32(), "input channels");
        l.height = checked_dim(r.u32(), "input height");
        l.width = checked_dim(r.u32(), "input width");
        l.threshold = r.u8();
        return LayerSpec{l};
    }
    case kTagBinConv: {
        BinConvWeights w;
        w.out_channels = checked_dim(r.u32(), "conv out_channels");
        w.in_channels = checked_dim(r.u32(), "conv in_channels");
        w.kernel_h = checked_dim(r.u32(), "conv kernel_h");
        w.kernel_w = checked_dim(r.u32(), "conv kernel_w");
        w.stride = checked_dim(r.u32(), "conv stride");
        w.pad = r.u32();
        if (w.pad > kMaxDim)
            throw FormatError(FormatError::Kind::Malformed, "conv pad out of range");
        const std::uint64_t flen =
            static_cast<std::uint64_t>(w.in_channels) * w.kernel_h * w.kernel_w;
        if (flen > std::numeric_limits<std::int32_t>::max())
            throw FormatError(FormatError::Kind::Malformed, "conv fan-in out of range");
        w.filters.reserve(w.out_channels);
        for (std::uint32_t i = 0; i < w.out_channels; ++i)
            w.filters.push_back(read_bitvector(r, static_cast<std::size_t>(flen)));
        return LayerSpec{BinConvLayer{std::move(w)}};
    }
    case kTagBinDense: {
        BinDenseWeights w;
        w.rows = checked_dim(r.u32(), "dense rows");
        w.cols = checked_dim(r.u32(), "dense cols");
        const std::uint8_t has_masks = r.u8();
        if (has_masks > 1)
            throw FormatError(FormatError::Kind::Malformed, "dense mask flag invalid");
        w.row_bits.reserve(w.rows);
        for (std::uint32_t i = 0; i < w.rows; ++i)
            w.row_bits.push_back(read_bitvector(r, w.cols));
        if (has_masks) {
            w.row_masks.reserve(w.rows);
            for (std::uint32_t i = 0; i < w.rows; ++i) {
                BitVector bits = read_bitvector(r, w.cols);
                PruneMask m;
                m.len = bits.len;
                m.words = std::move(bits.words);
                m.active = popcount_range(BitVector{m.words, m.len}, 0, m.len);
                w.row_masks.push_back(std::move(m));
            }
        }
        return LayerSpec{BinDenseLayer{std::move(w)}};
    }
    case kTagThreshold: {
        const std::uint32_t channels = checked_dim(r.u32(), "threshold channels");
        r.bound(channels, 5, "thresholds");
        ThresholdSet t;
        t.entries.reserve(channels);
        for (std::uint32_t i = 0; i < channels; ++i) {
            ThresholdEntry e;
            e.t = r.i32();
            const std::uint8_t flip = r.u8();
            if (flip > 1)
                throw FormatError(FormatError::Kind::Malformed, "flip flag invalid");
            e.flip = flip != 0;
            t.entries.push_back(e);
        }
        return LayerSpec{ThresholdLayer{std::move(t)}};
    }
    case kTagMaxPool: {
        MaxPoolLayer l;
        l.k = checked_dim(r.u32(), "pool window");
        l.stride = checked_dim(r.u32(), "pool stride");
        l.pad = r.u32();
        if (l.pad >= l.k)
            throw FormatError(FormatError::Kind::Malformed, "pool pad out of range");
        return LayerSpec{l};
    }
    case kTagGlobalAvgPool:
        return LayerSpec{GlobalAvgPoolLayer{}};
    case kTagBranches: {
        if (depth > 0)
            throw FormatError(FormatError::Kind::Malformed, "nested branches");
        const std::uint32_t count = r.u32();
        if (count == 0 || count > kMaxDim)
            throw FormatError(FormatError::Kind::Malformed, "branch count invalid");
        r.bound(count, 4, "branches");
        BranchesLayer l;
        l.branches.reserve(count);
        for (std::uint32_t i = 0; i < count; ++i)
            l.branches.push_back(read_seq(r, depth + 1));
        return LayerSpec{std::move(l)};
    }
    case kTagConcat:
        return LayerSpec{ConcatLayer{}};
    case kTagHead: {
        FloatHead h;
        h.classes = checked_dim(r.u32(), "head classes");
        h.features = checked_dim(r.u32(), "head features");
        const std::uint64_t nw = static_cast<std::uint64_t>(h.classes) * h.features;
        r.bound(nw + h.classes, 4, "head weights");
        h.weights.resize(static_cast<std::size_t>(nw));
        for (float& v : h.weights) v = r.f32();
        h.bias.resize(h.classes);
        for (float& v : h.bias) v = r.f32();
        return LayerSpec{HeadLayer{std::move(h)}};
    }
    default:
        throw FormatError(FormatError::Kind::Malformed,
                          "unknown layer tag " + std::to_string(tag));
    }
}

std::uint32_t crc_of(const std::uint8_t* data, std::size_t n) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(n)));
}

} // namespace

std::vector<std::uint8_t> serialize_model(const ModelGraph& graph) {
    ByteWriter w;
    w.bytes.insert(w.bytes.end(), kMagic, kMagic + 4);
    w.u16(kVersion);
    if (graph.layers.size() > std::numeric_limits<std::uint16_t>::max())
        throw InvalidArgumentError("serialize_model: too many layers");
    w.u16(static_cast<std::uint16_t>(graph.layers.size()));
    w.str(graph.name);
    w.u32(static_cast<std::uint32_t>(graph.class_labels.size()));
    for (const std::string& label : graph.class_labels) w.str(label);
    for (const LayerSpec& l : graph.layers) write_layer(w, l);
    w.u32(crc_of(w.bytes.data(), w.bytes.size()));
    return w.bytes;
}

ModelGraph deserialize_model(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4)
        throw FormatError(FormatError::Kind::Truncated, "model file shorter than magic");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw FormatError(FormatError::Kind::BadMagic, "not a BNNM model file");
    if (bytes.size() < 12)
        throw FormatError(FormatError::Kind::Truncated, "model file shorter than header");

    ByteReader r{bytes.data(), bytes.size()};
    r.pos = 4;
    const std::uint16_t version = r.u16();
    if (version != kVersion)
        throw FormatError(FormatError::Kind::BadVersion,
                          "unsupported model version " + std::to_string(version));

    // Checksum first: payload corruption reports as a checksum failure, not as
    // whatever structural error the corrupt bytes would produce.
    std::uint32_t stored = 0;
    for (int i = 0; i < 4; ++i)
        stored |= static_cast<std::uint32_t>(bytes[bytes.size() - 4 + i]) << (8 * i);
    if (crc_of(bytes.data(), bytes.size() - 4) != stored)
        throw FormatError(FormatError::Kind::Checksum, "model file checksum mismatch");

    ModelGraph g;
    const std::uint16_t layer_count = r.u16();
    g.name = r.str();
    const std::uint32_t label_count = r.u32();
    r.bound(label_count, 4, "class labels");
    g.class_labels.reserve(label_count);
    for (std::uint32_t i = 0; i < label_count; ++i) g.class_labels.push_back(r.str());
    g.layers.reserve(layer_count);
    for (std::uint16_t i = 0; i < layer_count; ++i) g.layers.push_back(read_layer(r, 0));
    if (r.pos != bytes.size() - 4)
        throw FormatError(FormatError::Kind::Malformed, "trailing bytes after layers");
    return g;
}

void save_model(const ModelGraph& graph, const std::string& path) {
    const std::vector<std::uint8_t> bytes = serialize_model(graph);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path);
}

ModelGraph load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

} // namespace binnet
