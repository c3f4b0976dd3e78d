#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <sstream>

#include "binnet/manifest.hpp"
#include "binnet/model_io.hpp"
#include "binnet/netgraph.hpp"
#include "testutil.hpp"

using namespace binnet;

namespace {

ModelGraph dense_graph(std::uint32_t n, std::uint32_t rows, SplitMix64& rng) {
    ModelGraph g;
    g.layers.push_back(LayerSpec{InputLayer{1, n, 1, 128}});
    BinDenseWeights w;
    w.rows = rows;
    w.cols = n;
    for (std::uint32_t r = 0; r < rows; ++r)
        w.row_bits.push_back(pack(testutil::random_signs(n, rng)));
    g.layers.push_back(LayerSpec{BinDenseLayer{std::move(w)}});
    ThresholdSet t;
    t.entries.assign(rows, ThresholdEntry{0, false});
    g.layers.push_back(LayerSpec{ThresholdLayer{std::move(t)}});
    g.layers.push_back(LayerSpec{GlobalAvgPoolLayer{}});
    FloatHead head;
    head.classes = 3;
    head.features = rows;
    head.weights.assign(3 * rows, 0.0f);
    head.bias.assign(3, 0.0f);
    g.layers.push_back(LayerSpec{HeadLayer{std::move(head)}});
    return g;
}

} // namespace

TEST_CASE("validate reports shapes for a dense stack") {
    SplitMix64 rng(3);
    const ModelGraph g = dense_graph(784, 10, rng);
    const ShapeReport r = validate(g);
    CHECK(r.has_head);
    CHECK(r.feature_count == 10);
    CHECK(r.classes == 3);
    CHECK(r.output.channels == 3);
}

TEST_CASE("validate accepts a bare input->dense prefix graph") {
    ModelGraph g;
    g.layers.push_back(LayerSpec{InputLayer{1, 28, 28, 128}});
    BinDenseWeights w;
    w.rows = 10;
    w.cols = 784;
    SplitMix64 rng(4);
    for (int r = 0; r < 10; ++r)
        w.row_bits.push_back(pack(testutil::random_signs(784, rng)));
    g.layers.push_back(LayerSpec{BinDenseLayer{std::move(w)}});
    const ShapeReport r = validate(g);
    CHECK_FALSE(r.has_head);
    CHECK(r.output.kind == ValueKind::Sums);
    CHECK(r.output.channels == 10);
}

TEST_CASE("validate rejects bad chains with the offending layer") {
    // conv 3x3 pad 0 on a 2x2 input
    ModelGraph g;
    g.layers.push_back(LayerSpec{InputLayer{1, 2, 2, 128}});
    BinConvWeights w;
    w.out_channels = w.in_channels = 1;
    w.kernel_h = w.kernel_w = 3;
    w.filters.push_back(pack(std::vector<int>(9, +1)));
    g.layers.push_back(LayerSpec{BinConvLayer{std::move(w)}});
    try {
        validate(g);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.layer_index == 1);
        CHECK(std::string(e.what()).find("non-positive") != std::string::npos);
    }

    // Branches not followed by Concat
    ModelGraph b;
    b.layers.push_back(LayerSpec{InputLayer{1, 4, 4, 128}});
    BranchesLayer br;
    LayerSeq seq;
    BinConvWeights cw;
    cw.out_channels = cw.in_channels = 1;
    cw.kernel_h = cw.kernel_w = 1;
    cw.filters.push_back(pack(std::vector<int>{+1}));
    seq.push_back(LayerSpec{BinConvLayer{std::move(cw)}});
    ThresholdSet t;
    t.entries = {{0, false}};
    seq.push_back(LayerSpec{ThresholdLayer{std::move(t)}});
    br.branches.push_back(std::move(seq));
    b.layers.push_back(LayerSpec{std::move(br)});
    CHECK_THROWS_AS(validate(b), ValidationError);

    // graph that does not start with Input
    ModelGraph ni;
    ni.layers.push_back(LayerSpec{GlobalAvgPoolLayer{}});
    CHECK_THROWS_AS(validate(ni), ValidationError);
}

TEST_CASE("inception module shape law") {
    SplitMix64 rng(9);
    ModelGraph g;
    g.layers.push_back(LayerSpec{InputLayer{4, 8, 8, 128}});
    for (LayerSpec& l : inception_module(4, InceptionWidths{1, 1, 1, 1, 1, 1}, rng))
        g.layers.push_back(std::move(l));
    ShapeReport r = validate(g);
    CHECK(r.output.channels == 4); // 1+1+1+1
    CHECK(r.output.height == 8);
    CHECK(r.output.width == 8);

    ModelGraph g2;
    g2.layers.push_back(LayerSpec{InputLayer{32, 16, 16, 128}});
    for (LayerSpec& l :
         inception_module(32, InceptionWidths{16, 8, 16, 4, 8, 8}, rng))
        g2.layers.push_back(std::move(l));
    r = validate(g2);
    CHECK(r.output.channels == 48); // 16+16+8+8
    CHECK(r.output.height == 16);

    ModelGraph g3;
    g3.layers.push_back(LayerSpec{InputLayer{64, 8, 8, 128}});
    for (LayerSpec& l :
         inception_module(64, InceptionWidths{16, 8, 16, 4, 16, 16}, rng))
        g3.layers.push_back(std::move(l));
    r = validate(g3);
    CHECK(r.output.channels == 64); // branch widths 16+16+16+16
    CHECK(r.output.height == 8);
    CHECK(r.output.width == 8);

    CHECK_THROWS_AS(inception_module(4, InceptionWidths{0, 1, 1, 1, 1, 1}, rng),
                    InvalidArgumentError);
}

TEST_CASE("stacking nine inception modules preserves spatial dims") {
    SplitMix64 rng(10);
    ModelGraph g;
    g.layers.push_back(LayerSpec{InputLayer{8, 10, 10, 128}});
    std::uint32_t c = 8;
    for (int i = 0; i < 9; ++i) {
        for (LayerSpec& l : inception_module(c, InceptionWidths{2, 2, 3, 1, 2, 1}, rng))
            g.layers.push_back(std::move(l));
        c = 2 + 3 + 2 + 1;
    }
    const ShapeReport r = validate(g);
    CHECK(r.output.channels == 8);
    CHECK(r.output.height == 10);
    CHECK(r.output.width == 10);
}

TEST_CASE("conv can feed the global pool directly on the way to a head") {
    SplitMix64 rng(6);
    ModelGraph g;
    g.layers.push_back(LayerSpec{InputLayer{1, 4, 4, 128}});
    BinConvWeights w;
    w.out_channels = 2;
    w.in_channels = 1;
    w.kernel_h = w.kernel_w = 3;
    for (int i = 0; i < 2; ++i)
        w.filters.push_back(pack(testutil::random_signs(9, rng)));
    g.layers.push_back(LayerSpec{BinConvLayer{w}});
    g.layers.push_back(LayerSpec{GlobalAvgPoolLayer{}});
    FloatHead head;
    head.classes = 2;
    head.features = 2;
    head.weights = {1.0f, 0.0f, 0.0f, 1.0f};
    head.bias = {0.0f, 0.0f};
    g.layers.push_back(LayerSpec{HeadLayer{head}});

    const ShapeReport r = validate(g);
    CHECK(r.feature_count == 2);

    // features are the channel means of the integer sums
    const U8Tensor img = testutil::random_image(1, 4, 4, rng);
    const std::vector<double> feats = extract_features(g, img);
    const auto expect = testutil::ref_trace(g, img);
    REQUIRE(feats.size() == 2);
    CHECK(feats[0] == expect[2].reals[0]);
    CHECK(feats[1] == expect[2].reals[1]);
}

TEST_CASE("binarize_input threshold rule") {
    U8Tensor img = U8Tensor::zeros(1, 2, 2);
    img.data = {255, 255, 255, 255};
    CHECK(popcount_range(binarize_input(img, 128).data, 0, 4) == 4);
    img.data = {0, 0, 0, 0};
    CHECK(popcount_range(binarize_input(img, 128).data, 0, 4) == 0);
    img.data = {128, 127, 128, 127}; // boundary pixels binarize to +1
    const BitTensor b = binarize_input(img, 128);
    CHECK(b.data.get(0));
    CHECK_FALSE(b.data.get(1));
}

TEST_CASE("forward with zero head gives uniform probabilities") {
    SplitMix64 rng(14);
    const ModelGraph g = dense_graph(32, 6, rng);
    const U8Tensor img = testutil::random_image(1, 32, 1, rng);
    const std::vector<double> p = forward(g, img);
    REQUIRE(p.size() == 3);
    for (double v : p) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("forward decomposes into head_forward after extract_features") {
    SplitMix64 rng(15);
    ModelGraph g = dense_graph(48, 8, rng);
    // non-trivial head weights
    FloatHead& head = std::get<HeadLayer>(g.layers.back().node).head;
    for (auto& w : head.weights) w = static_cast<float>(rng.next_double() - 0.5);
    for (auto& b : head.bias) b = static_cast<float>(rng.next_double() - 0.5);

    for (int iter = 0; iter < 10; ++iter) {
        const U8Tensor img = testutil::random_image(1, 48, 1, rng);
        const std::vector<double> feats = extract_features(g, img);
        REQUIRE(feats.size() == 8);
        const std::vector<double> via_parts = softmax(head_forward(feats, head));
        const std::vector<double> direct = forward(g, img);
        REQUIRE(via_parts == direct);
    }
}

TEST_CASE("extract_features is deterministic run to run") {
    SplitMix64 rng(16);
    const ModelGraph g = build_mini_googlenet(1, 28, 28, 10, 77);
    const U8Tensor img = testutil::random_image(1, 28, 28, rng);
    const std::vector<double> a = extract_features(g, img);
    const std::vector<double> b = extract_features(g, img);
    REQUIRE(a == b);
}

TEST_CASE("packed path equals reference path on random graphs") {
    SplitMix64 rng(1001);
    for (int trial = 0; trial < 30; ++trial) {
        const ModelGraph g = testutil::random_graph(rng);
        validate(g);
        const auto& in = std::get<InputLayer>(g.layers.front().node);
        const U8Tensor img =
            testutil::random_image(in.channels, in.height, in.width, rng);

        ExecTrace trace;
        execute(g, img, g.layers.size(), &trace);
        const std::vector<testutil::RefValue> expect = testutil::ref_trace(g, img);
        REQUIRE(trace.values.size() == expect.size());
        for (std::size_t i = 0; i < expect.size(); ++i)
            REQUIRE(testutil::ref_equal(testutil::to_ref(trace.values[i]), expect[i]));
    }
}

TEST_CASE("pixel probe passes input bits through as features") {
    const ModelGraph g = build_pixel_probe(1, 4, 4, 2, 128);
    validate(g);
    U8Tensor img = U8Tensor::zeros(1, 4, 4);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        img.data[i] = i % 3 == 0 ? 200 : 10;
    const std::vector<double> feats = extract_features(g, img);
    REQUIRE(feats.size() == 16);
    for (std::size_t i = 0; i < 16; ++i)
        CHECK(feats[i] == (img.data[i] >= 128 ? 1.0 : -1.0));

    // all-+1 activations before the global pool give a feature vector of 1.0s
    U8Tensor bright = U8Tensor::zeros(1, 4, 4);
    for (auto& px : bright.data) px = 255;
    CHECK(extract_features(g, bright) == std::vector<double>(16, 1.0));
}

TEST_CASE("model save/load round trip is byte identical") {
    SplitMix64 rng(500);
    ModelGraph g = build_mini_googlenet(1, 28, 28, 10, 123);
    g.name = "roundtrip";
    g.class_labels = {"a", "b", "c"};

    const std::vector<std::uint8_t> bytes = serialize_model(g);
    const ModelGraph back = deserialize_model(bytes);
    const std::vector<std::uint8_t> again = serialize_model(back);
    REQUIRE(bytes == again);
    CHECK(back.name == "roundtrip");
    CHECK(back.class_labels == g.class_labels);
    CHECK(back.layers.size() == g.layers.size());

    // equality through behaviour: same features on random input
    const U8Tensor img = testutil::random_image(1, 28, 28, rng);
    REQUIRE(extract_features(g, img) == extract_features(back, img));
}

TEST_CASE("model file corruption surfaces distinct errors") {
    SplitMix64 rng(501);
    const ModelGraph g = dense_graph(16, 4, rng);
    std::vector<std::uint8_t> bytes = serialize_model(g);

    std::vector<std::uint8_t> bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_WITH_AS(deserialize_model(bad_magic), "not a BNNM model file",
                         FormatError);
    try {
        deserialize_model(bad_magic);
    } catch (const FormatError& e) {
        CHECK(e.kind == FormatError::Kind::BadMagic);
    }

    std::vector<std::uint8_t> bad_version = bytes;
    bad_version[4] = 99;
    try {
        deserialize_model(bad_version);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.kind == FormatError::Kind::BadVersion);
    }

    std::vector<std::uint8_t> corrupt = bytes;
    corrupt[bytes.size() / 2] ^= 0x40; // one payload byte
    try {
        deserialize_model(corrupt);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.kind == FormatError::Kind::Checksum);
    }

    std::vector<std::uint8_t> truncated(bytes.begin(), bytes.begin() + 9);
    try {
        deserialize_model(truncated);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.kind == FormatError::Kind::Truncated);
    }
}

TEST_CASE("convert binarizes weights by sign") {
    const std::string text = R"(bnnf 1
name tiny
input 1 2 1 128
dense 2 2
weights 4  0.3 -0.2 -0.1 0.4
sign
gap
head 2 2
weights 4  1 0 0 1
bias 2  0 0
end
)";
    const FloatModelManifest m = parse_manifest(text);
    const ModelGraph g = convert(m);
    const auto& dense = std::get<BinDenseLayer>(g.layers[1].node).w;
    CHECK(unpack(dense.row_bits[0]) == std::vector<int>{+1, -1});
    CHECK(unpack(dense.row_bits[1]) == std::vector<int>{-1, +1});
}

TEST_CASE("convert folds BN blocks into thresholds") {
    const std::string text = R"(bnnf 1
name bn
input 1 4 4 128
conv 1 1 3 3 1 1
weights 9  1 1 1 1 1 1 1 1 1
bn 0
gamma 1  2
beta 1  1
mean 1  5
var 1  4
gap
head 2 1
weights 2  1 -1
bias 2  0 0
end
)";
    const ModelGraph g = convert(parse_manifest(text));
    const auto& th = std::get<ThresholdLayer>(g.layers[2].node).t;
    REQUIRE(th.entries.size() == 1);
    CHECK(th.entries[0].t == 4);
    CHECK_FALSE(th.entries[0].flip);
}

TEST_CASE("convert-then-forward matches the sign-quantized reference path") {
    SplitMix64 rng(321);
    for (int trial = 0; trial < 10; ++trial) {
        // random float dense model: 12 -> 6 with sign activation + head
        std::ostringstream ss;
        ss << "bnnf 1\nname rnd\ninput 1 12 1 128\ndense 6 12\nweights 72 ";
        for (int i = 0; i < 72; ++i) ss << (rng.next_double() * 2.0 - 1.0) << ' ';
        ss << "\nsign\ngap\nhead 3 6\nweights 18 ";
        for (int i = 0; i < 18; ++i) ss << (rng.next_double() * 2.0 - 1.0) << ' ';
        ss << "\nbias 3 ";
        for (int i = 0; i < 3; ++i) ss << (rng.next_double() - 0.5) << ' ';
        ss << "\nend\n";
        const ModelGraph g = convert(parse_manifest(ss.str()));

        for (int rep = 0; rep < 10; ++rep) {
            const U8Tensor img = testutil::random_image(1, 12, 1, rng);
            const auto expect = testutil::ref_trace(g, img);
            ExecTrace trace;
            execute(g, img, g.layers.size(), &trace);
            REQUIRE(testutil::ref_equal(testutil::to_ref(trace.values.back()),
                                        expect.back()));
        }
    }
}

TEST_CASE("manifest grammar errors are structured") {
    CHECK_THROWS_AS(parse_manifest("xxxx 1\nend\n"), FormatError);
    CHECK_THROWS_AS(parse_manifest("bnnf 2\nend\n"), FormatError);
    CHECK_THROWS_AS(parse_manifest("bnnf 1\ninput 1 2 1 128\n"), FormatError); // no end
    CHECK_THROWS_AS(parse_manifest("bnnf 1\ninput 1 2 1 128\ndense 2 2\nweights 3 1 2 3\nend\n"),
                    FormatError); // wrong count
    CHECK_THROWS_AS(parse_manifest("bnnf 1\nbogus\nend\n"), FormatError);
}
