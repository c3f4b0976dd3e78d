#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "binnet/detect.hpp"
#include "binnet/transfer.hpp"
#include "digitgen.hpp"
#include "testutil.hpp"

using namespace binnet;

TEST_CASE("sliding_windows positions and counts") {
    const auto exact = sliding_windows(28, 28, 28, 28, 1);
    REQUIRE(exact.size() == 1);
    CHECK(exact[0] == std::pair<int, int>{0, 0});

    const auto four = sliding_windows(32, 32, 28, 28, 4);
    CHECK(four.size() == 4); // (floor(4/4)+1)^2

    // stride larger than the slack: single position per axis
    const auto single = sliding_windows(30, 30, 28, 28, 10);
    CHECK(single.size() == 1);

    // stride > W-w but room vertically: a single column of positions
    const auto column = sliding_windows(64, 30, 28, 28, 10);
    REQUIRE(column.size() == 4);
    for (const auto& [x, y] : column) CHECK(x == 0);

    const auto grid = sliding_windows(64, 64, 28, 28, 4);
    CHECK(grid.size() == 100); // (floor(36/4)+1)^2

    CHECK_THROWS_AS(sliding_windows(20, 20, 28, 28, 4), DimensionError);
}

TEST_CASE("nms keeps disjoint boxes and suppresses duplicates per class") {
    std::vector<Detection> dets;
    dets.push_back({{0, 0, 10, 10}, 1, 0.9});
    dets.push_back({{40, 40, 10, 10}, 1, 0.8});
    CHECK(nms(dets, 0.3).size() == 2);

    std::vector<Detection> dup;
    dup.push_back({{5, 5, 10, 10}, 2, 0.9});
    dup.push_back({{5, 5, 10, 10}, 2, 0.8});
    const auto kept = nms(dup, 0.3);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].score == doctest::Approx(0.9));

    std::vector<Detection> classes;
    classes.push_back({{5, 5, 10, 10}, 1, 0.9});
    classes.push_back({{5, 5, 10, 10}, 2, 0.8});
    CHECK(nms(classes, 0.3).size() == 2); // different classes both kept
}

TEST_CASE("nms output is a subset with bounded overlap") {
    SplitMix64 rng(17);
    std::vector<Detection> dets;
    for (int i = 0; i < 60; ++i) {
        Detection d;
        d.bbox = {static_cast<int>(rng.next_below(40)),
                  static_cast<int>(rng.next_below(40)),
                  8 + static_cast<int>(rng.next_below(12)),
                  8 + static_cast<int>(rng.next_below(12))};
        d.class_id = static_cast<int>(rng.next_below(3));
        d.score = 0.5 + rng.next_double() * 0.5;
        dets.push_back(d);
    }
    const double thr = 0.3;
    const auto kept = nms(dets, thr);
    CHECK(kept.size() <= dets.size());
    for (std::size_t i = 0; i < kept.size(); ++i)
        for (std::size_t j = i + 1; j < kept.size(); ++j)
            if (kept[i].class_id == kept[j].class_id)
                CHECK(iou(kept[i].bbox, kept[j].bbox) <= thr);
}

TEST_CASE("config validation bounds") {
    DetectConfig cfg;
    cfg.min_prob = 1.0 + 1e-9;
    CHECK_THROWS_AS(cfg.check(), InvalidArgumentError);
    cfg.min_prob = 0.5;
    cfg.nms_iou = 1.0;
    CHECK_THROWS_AS(cfg.check(), InvalidArgumentError);
    cfg.nms_iou = 0.3;
    cfg.stride = 0;
    CHECK_THROWS_AS(cfg.check(), InvalidArgumentError);
    cfg.stride = 4;
    cfg.scales = {0.5};
    CHECK_THROWS_AS(cfg.check(), InvalidArgumentError);
    cfg.scales = {1.0};
    cfg.check();
}

namespace {

// Small trained digit-vs-background classifier shared across detection tests.
struct Detector {
    ModelGraph model;

    Detector() {
        const ModelGraph probe = build_pixel_probe(1, 28, 28, 11, 128);
        LabeledDataset train = digitgen::make_detector_set(3000, 1500, 100);
        const LabeledDataset val = digitgen::make_detector_set(100, 40, 101);
        // shifted copies so off-grid windows still classify, near-miss shifts
        // as background so fragments do not
        SplitMix64 rng(102);
        const std::size_t base = train.size();
        for (std::size_t i = 0; i < base; ++i) {
            if (train.labels[i] == 10) continue;
            const int dx = static_cast<int>(rng.next_below(5)) - 2;
            const int dy = static_cast<int>(rng.next_below(5)) - 2;
            train.images.push_back(digitgen::shift_image(train.images[i], dx, dy));
            train.labels.push_back(train.labels[i]);
        }
        for (std::size_t i = 0; i < 3000; ++i) {
            const std::size_t pick = rng.next_below(base);
            int dx = 0, dy = 0;
            while (std::max(std::abs(dx), std::abs(dy)) < 4) {
                dx = static_cast<int>(rng.next_below(33)) - 16;
                dy = static_cast<int>(rng.next_below(33)) - 16;
            }
            train.images.push_back(digitgen::shift_image(train.images[pick], dx, dy));
            train.labels.push_back(10);
        }
        TrainConfig cfg;
        cfg.learning_rate = 0.1;
        cfg.batch_size = 64;
        cfg.epochs = 20;
        cfg.seed = 42;
        cfg.l2 = 3e-4;
        auto [trained, hist] = train_head(probe, train, val, cfg);
        model = std::move(trained);
        model.class_labels = train.class_names;
    }
};

const Detector& detector() {
    static Detector d;
    return d;
}

U8Tensor paste(const U8Tensor& digit, std::uint32_t canvas, std::uint32_t x0,
               std::uint32_t y0) {
    U8Tensor img = U8Tensor::zeros(1, canvas, canvas);
    for (std::uint32_t y = 0; y < digit.height; ++y)
        for (std::uint32_t x = 0; x < digit.width; ++x)
            img.at(0, y0 + y, x0 + x) = digit.at(0, y, x);
    return img;
}

} // namespace

TEST_CASE("blank image produces no detections") {
    DetectConfig cfg;
    cfg.background_class = 10;
    cfg.threads = 2;
    const U8Tensor blank = U8Tensor::zeros(1, 64, 64);
    const auto dets = detect_objects(detector().model, blank, cfg);
    CHECK(dets.empty());
}

TEST_CASE("planted digit is found near its box") {
    SplitMix64 rng(2024);
    DetectConfig cfg;
    cfg.background_class = 10;
    cfg.threads = 2;
    int hits = 0;
    const int trials = 6;
    for (int t = 0; t < trials; ++t) {
        const int digit = static_cast<int>(rng.next_below(10));
        const U8Tensor crop = digitgen::render_digit(digit, rng);
        const std::uint32_t x0 = static_cast<std::uint32_t>(rng.next_below(36));
        const std::uint32_t y0 = static_cast<std::uint32_t>(rng.next_below(36));
        const U8Tensor scene = paste(crop, 64, x0, y0);
        const auto dets = detect_objects(detector().model, scene, cfg);
        if (dets.empty()) continue;
        const BBox truth{static_cast<int>(x0), static_cast<int>(y0), 28, 28};
        if (iou(dets[0].bbox, truth) >= 0.5) ++hits;
    }
    CHECK(hits >= trials - 1);
}

TEST_CASE("every score clears min_prob and raising it never adds detections") {
    SplitMix64 rng(31);
    const U8Tensor scene = paste(digitgen::render_digit(3, rng), 64, 12, 9);
    DetectConfig cfg;
    cfg.background_class = 10;
    cfg.threads = 2;
    cfg.min_prob = 0.4;
    const auto low = detect_objects(detector().model, scene, cfg);
    for (const auto& d : low) CHECK(d.score >= 0.4);
    cfg.min_prob = 0.7;
    const auto high = detect_objects(detector().model, scene, cfg);
    CHECK(high.size() <= low.size());
    for (const auto& d : high) CHECK(d.score >= 0.7);

    // determinism, ordering included
    const auto again = detect_objects(detector().model, scene, cfg);
    REQUIRE(again.size() == high.size());
    for (std::size_t i = 0; i < again.size(); ++i) {
        CHECK(again[i].score == high[i].score);
        CHECK(again[i].bbox.x == high[i].bbox.x);
        CHECK(again[i].class_id == high[i].class_id);
    }
}

TEST_CASE("multi-scale boxes stay inside the original image") {
    SplitMix64 rng(77);
    U8Tensor scene = U8Tensor::zeros(1, 70, 70);
    const U8Tensor digit = digitgen::render_digit(5, rng);
    for (std::uint32_t y = 0; y < 28; ++y)
        for (std::uint32_t x = 0; x < 28; ++x) scene.at(0, y + 4, x + 6) = digit.at(0, y, x);

    DetectConfig cfg;
    cfg.background_class = 10;
    cfg.scales = {1.0, 1.5, 2.0};
    cfg.min_prob = 0.3;
    cfg.threads = 2;
    const auto dets = detect_objects(detector().model, scene, cfg);
    for (const auto& d : dets) {
        CHECK(d.bbox.x >= 0);
        CHECK(d.bbox.y >= 0);
        CHECK(d.bbox.x + d.bbox.w <= 70);
        CHECK(d.bbox.y + d.bbox.h <= 70);
    }
    // window larger than the downscaled image errors
    DetectConfig too_small = cfg;
    too_small.scales = {4.0};
    CHECK_THROWS_AS(detect_objects(detector().model, scene, too_small), DimensionError);
}

TEST_CASE("detection text format") {
    std::vector<Detection> dets;
    dets.push_back({{3, 4, 28, 28}, 2, 0.91234});
    const std::string text = format_detections(dets, {"zero", "one", "two"});
    CHECK(text == "two 0.9123 3 4 28 28\n");
    CHECK(format_detections(dets, {}) == "2 0.9123 3 4 28 28\n");
}

TEST_CASE("annotate draws outlines at 255 and keeps the rest") {
    U8Tensor img = U8Tensor::zeros(1, 16, 16);
    std::vector<Detection> dets;
    dets.push_back({{2, 3, 5, 4}, 0, 0.9});
    const U8Tensor painted = annotate(img, dets);
    CHECK(painted.at(0, 3, 2) == 255);  // top-left corner
    CHECK(painted.at(0, 6, 6) == 255);  // bottom-right corner
    CHECK(painted.at(0, 3, 7) == 0);    // outside the box
    CHECK(painted.at(0, 4, 4) == 0);    // interior untouched
}
