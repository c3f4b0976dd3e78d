#ifndef BINNET_DETECT_HPP
#define BINNET_DETECT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "binnet/dataio.hpp"
#include "binnet/netgraph.hpp"

namespace binnet {

struct BBox {
    int x = 0, y = 0;
    int w = 0, h = 0;
};

double iou(const BBox& a, const BBox& b);

struct Detection {
    BBox bbox; // original image pixels, window-aligned
    int class_id = 0;
    double score = 0.0;
};

struct DetectConfig {
    std::uint32_t stride = 4;
    double min_prob = 0.5; // detections below are not shown
    std::vector<double> scales = {1.0};
    double nms_iou = 0.3;
    std::optional<int> background_class;
    std::size_t threads = 0;

    // Throws InvalidArgumentError when min_prob is outside (0,1], nms_iou is
    // outside [0,1), stride == 0 or any scale < 1.
    void check() const;
};

// Top-left window positions {(x, y) : x = i*s <= W-w, y = j*s <= H-h}.
// Throws DimensionError when the window exceeds the image.
std::vector<std::pair<int, int>> sliding_windows(std::uint32_t image_h,
                                                 std::uint32_t image_w,
                                                 std::uint32_t window_h,
                                                 std::uint32_t window_w,
                                                 std::uint32_t stride);

// Greedy per-class suppression ordered by (score desc, x asc, y asc); a box is
// dropped when its IoU with an already-kept box of the same class exceeds
// iou_threshold.
std::vector<Detection> nms(std::vector<Detection> dets, double iou_threshold);

// Classify every window at every scale (nearest-neighbor downscale), keep
// top-class hits at probability >= min_prob that are not the background class,
// map boxes back to original pixels, suppress overlaps, sort by descending
// score. Window classifications fan out over cfg.threads with order-stable
// assembly.
std::vector<Detection> detect_objects(const ModelGraph& graph, const U8Tensor& image,
                                      const DetectConfig& cfg);

// One line per detection: "class_label score x y w h" (score with 4 decimals).
std::string format_detections(const std::vector<Detection>& dets,
                              const std::vector<std::string>& class_labels);

// Copy of the image with box outlines burned in at pixel value 255.
U8Tensor annotate(const U8Tensor& image, const std::vector<Detection>& dets);

} // namespace binnet

#endif
