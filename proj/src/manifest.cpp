#include "binnet/manifest.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace binnet {

namespace {

// Whitespace-separated tokens; '#' starts a comment running to end of line.
std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream words(line);
        std::string tok;
        while (words >> tok) tokens.push_back(tok);
    }
    return tokens;
}

struct TokenStream {
    std::vector<std::string> tokens;
    std::size_t pos = 0;

    bool done() const { return pos >= tokens.size(); }
    const std::string& peek() const {
        if (done())
            throw FormatError(FormatError::Kind::Truncated,
                              "manifest ended before 'end'");
        return tokens[pos];
    }
    std::string next() {
        const std::string& t = peek();
        ++pos;
        return t;
    }
    std::uint32_t next_u32(const char* what) {
        const std::string t = next();
        try {
            std::size_t used = 0;
            const unsigned long v = std::stoul(t, &used);
            if (used != t.size() || v > std::numeric_limits<std::uint32_t>::max())
                throw std::invalid_argument(t);
            return static_cast<std::uint32_t>(v);
        } catch (const std::exception&) {
            throw FormatError(FormatError::Kind::Malformed,
                              std::string("manifest: bad integer for ") + what + ": '" +
                                  t + "'");
        }
    }
    double next_double(const char* what) {
        const std::string t = next();
        try {
            std::size_t used = 0;
            const double v = std::stod(t, &used);
            if (used != t.size() || !std::isfinite(v)) throw std::invalid_argument(t);
            return v;
        } catch (const std::exception&) {
            throw FormatError(FormatError::Kind::Malformed,
                              std::string("manifest: bad number for ") + what + ": '" +
                                  t + "'");
        }
    }
    // "<count> v0 v1 ... v<count-1>" with the count checked against `expect`.
    std::vector<double> next_array(const char* what, std::uint64_t expect) {
        const std::uint32_t count = next_u32(what);
        if (count != expect)
            throw FormatError(FormatError::Kind::Malformed,
                              std::string("manifest: ") + what + " count " +
                                  std::to_string(count) + ", expected " +
                                  std::to_string(expect));
        std::vector<double> values(count);
        for (std::uint32_t i = 0; i < count; ++i) values[i] = next_double(what);
        return values;
    }
};

} // namespace

FloatModelManifest parse_manifest(const std::string& text) {
    TokenStream ts{tokenize(text)};
    FloatModelManifest m;

    if (ts.done() || ts.next() != "bnnf")
        throw FormatError(FormatError::Kind::BadMagic, "manifest must start with 'bnnf'");
    if (ts.next_u32("version") != 1)
        throw FormatError(FormatError::Kind::BadVersion, "unsupported manifest version");

    bool saw_input = false, saw_end = false, saw_head = false;
    std::uint64_t last_width = 0; // outputs of the most recent conv/dense

    while (!ts.done()) {
        const std::string key = ts.next();
        if (key == "end") {
            saw_end = true;
            break;
        }
        if (key == "name") {
            m.name = ts.next();
            continue;
        }
        if (key == "labels") {
            const std::uint32_t count = ts.next_u32("label count");
            for (std::uint32_t i = 0; i < count; ++i) m.labels.push_back(ts.next());
            continue;
        }
        if (key == "input") {
            m.in_channels = ts.next_u32("input channels");
            m.in_height = ts.next_u32("input height");
            m.in_width = ts.next_u32("input width");
            const std::uint32_t thr = ts.next_u32("input threshold");
            if (thr > 255)
                throw FormatError(FormatError::Kind::Malformed,
                                  "input threshold must be a byte");
            m.input_threshold = static_cast<std::uint8_t>(thr);
            saw_input = true;
            continue;
        }
        if (!saw_input)
            throw FormatError(FormatError::Kind::Malformed,
                              "manifest: 'input' must precede layers");
        if (saw_head)
            throw FormatError(FormatError::Kind::Malformed,
                              "manifest: 'head' must be the last item");

        if (key == "conv") {
            ManifestItem it;
            it.kind = ManifestItem::Kind::Conv;
            it.out = ts.next_u32("conv out");
            it.in = ts.next_u32("conv in");
            it.kh = ts.next_u32("conv kh");
            it.kw = ts.next_u32("conv kw");
            it.stride = ts.next_u32("conv stride");
            it.pad = ts.next_u32("conv pad");
            if (ts.next() != "weights")
                throw FormatError(FormatError::Kind::Malformed,
                                  "manifest: conv must be followed by 'weights'");
            it.weights = ts.next_array(
                "conv weights",
                static_cast<std::uint64_t>(it.out) * it.in * it.kh * it.kw);
            last_width = it.out;
            m.items.push_back(std::move(it));
            continue;
        }
        if (key == "dense") {
            ManifestItem it;
            it.kind = ManifestItem::Kind::Dense;
            it.out = ts.next_u32("dense rows");
            it.in = ts.next_u32("dense cols");
            if (ts.next() != "weights")
                throw FormatError(FormatError::Kind::Malformed,
                                  "manifest: dense must be followed by 'weights'");
            it.weights =
                ts.next_array("dense weights", static_cast<std::uint64_t>(it.out) * it.in);
            last_width = it.out;
            m.items.push_back(std::move(it));
            continue;
        }
        if (key == "bn") {
            if (last_width == 0)
                throw FormatError(FormatError::Kind::Malformed,
                                  "manifest: 'bn' without a preceding conv/dense");
            ManifestItem it;
            it.kind = ManifestItem::Kind::BN;
            it.bn.eps = ts.next_double("bn eps");
            if (ts.next() != "gamma")
                throw FormatError(FormatError::Kind::Malformed, "manifest: expected 'gamma'");
            it.bn.gamma = ts.next_array("gamma", last_width);
            if (ts.next() != "beta")
                throw FormatError(FormatError::Kind::Malformed, "manifest: expected 'beta'");
            it.bn.beta = ts.next_array("beta", last_width);
            if (ts.next() != "mean")
                throw FormatError(FormatError::Kind::Malformed, "manifest: expected 'mean'");
            it.bn.mean = ts.next_array("mean", last_width);
            if (ts.next() != "var")
                throw FormatError(FormatError::Kind::Malformed, "manifest: expected 'var'");
            it.bn.var = ts.next_array("var", last_width);
            m.items.push_back(std::move(it));
            continue;
        }
        if (key == "sign") {
            if (last_width == 0)
                throw FormatError(FormatError::Kind::Malformed,
                                  "manifest: 'sign' without a preceding conv/dense");
            ManifestItem it;
            it.kind = ManifestItem::Kind::Sign;
            m.items.push_back(std::move(it));
            continue;
        }
        if (key == "maxpool") {
            ManifestItem it;
            it.kind = ManifestItem::Kind::MaxPool;
            it.kh = ts.next_u32("pool window");
            it.stride = ts.next_u32("pool stride");
            it.pad = ts.next_u32("pool pad");
            m.items.push_back(std::move(it));
            continue;
        }
        if (key == "gap") {
            ManifestItem it;
            it.kind = ManifestItem::Kind::GlobalAvgPool;
            m.items.push_back(std::move(it));
            continue;
        }
        if (key == "head") {
            ManifestItem it;
            it.kind = ManifestItem::Kind::Head;
            it.out = ts.next_u32("head classes");
            it.in = ts.next_u32("head features");
            if (ts.next() != "weights")
                throw FormatError(FormatError::Kind::Malformed,
                                  "manifest: head must be followed by 'weights'");
            it.weights =
                ts.next_array("head weights", static_cast<std::uint64_t>(it.out) * it.in);
            if (ts.next() != "bias")
                throw FormatError(FormatError::Kind::Malformed,
                                  "manifest: head needs a 'bias'");
            it.bias = ts.next_array("head bias", it.out);
            saw_head = true;
            m.items.push_back(std::move(it));
            continue;
        }
        throw FormatError(FormatError::Kind::Malformed,
                          "manifest: unknown directive '" + key + "'");
    }

    if (!saw_end)
        throw FormatError(FormatError::Kind::Truncated, "manifest missing 'end'");
    if (!ts.done())
        throw FormatError(FormatError::Kind::Malformed, "manifest: tokens after 'end'");
    if (!saw_input)
        throw FormatError(FormatError::Kind::Malformed, "manifest missing 'input'");
    return m;
}

FloatModelManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str());
}

ModelGraph convert(const FloatModelManifest& manifest) {
    ModelGraph g;
    g.name = manifest.name;
    g.class_labels = manifest.labels;
    g.layers.push_back(LayerSpec{InputLayer{manifest.in_channels, manifest.in_height,
                                            manifest.in_width,
                                            manifest.input_threshold}});

    std::size_t pending_fan_in = 0; // fan-in of the conv/dense awaiting activation
    std::uint32_t pending_width = 0;

    for (const ManifestItem& it : manifest.items) {
        switch (it.kind) {
        case ManifestItem::Kind::Conv: {
            BinConvWeights w;
            w.out_channels = it.out;
            w.in_channels = it.in;
            w.kernel_h = it.kh;
            w.kernel_w = it.kw;
            w.stride = it.stride;
            w.pad = it.pad;
            const std::size_t flen = w.fan_in();
            w.filters.reserve(it.out);
            std::vector<int> signs(flen);
            for (std::uint32_t oc = 0; oc < it.out; ++oc) {
                for (std::size_t i = 0; i < flen; ++i)
                    signs[i] = binarize_scalar(it.weights[oc * flen + i]);
                w.filters.push_back(pack(signs));
            }
            pending_fan_in = flen;
            pending_width = it.out;
            g.layers.push_back(LayerSpec{BinConvLayer{std::move(w)}});
            break;
        }
        case ManifestItem::Kind::Dense: {
            BinDenseWeights w;
            w.rows = it.out;
            w.cols = it.in;
            w.row_bits.reserve(it.out);
            std::vector<int> signs(it.in);
            for (std::uint32_t r = 0; r < it.out; ++r) {
                for (std::uint32_t c = 0; c < it.in; ++c)
                    signs[c] = binarize_scalar(it.weights[static_cast<std::size_t>(r) * it.in + c]);
                w.row_bits.push_back(pack(signs));
            }
            pending_fan_in = it.in;
            pending_width = it.out;
            g.layers.push_back(LayerSpec{BinDenseLayer{std::move(w)}});
            break;
        }
        case ManifestItem::Kind::BN: {
            BNParams bn;
            bn.eps = it.bn.eps;
            bn.gamma = it.bn.gamma;
            bn.beta = it.bn.beta;
            bn.mu = it.bn.mean;
            bn.var = it.bn.var;
            g.layers.push_back(
                LayerSpec{ThresholdLayer{fold_bn_sign(bn, pending_fan_in)}});
            break;
        }
        case ManifestItem::Kind::Sign: {
            ThresholdSet t;
            t.entries.assign(pending_width, ThresholdEntry{0, false});
            g.layers.push_back(LayerSpec{ThresholdLayer{std::move(t)}});
            break;
        }
        case ManifestItem::Kind::MaxPool:
            g.layers.push_back(LayerSpec{MaxPoolLayer{it.kh, it.stride, it.pad}});
            break;
        case ManifestItem::Kind::GlobalAvgPool:
            g.layers.push_back(LayerSpec{GlobalAvgPoolLayer{}});
            break;
        case ManifestItem::Kind::Head: {
            FloatHead h;
            h.classes = it.out;
            h.features = it.in;
            h.weights.reserve(it.weights.size());
            for (double v : it.weights) h.weights.push_back(static_cast<float>(v));
            h.bias.reserve(it.bias.size());
            for (double v : it.bias) h.bias.push_back(static_cast<float>(v));
            g.layers.push_back(LayerSpec{HeadLayer{std::move(h)}});
            break;
        }
        }
    }

    validate(g); // shapes must chain before the model is handed out
    return g;
}

} // namespace binnet
