#include "binnet/detect.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "binnet/parallel.hpp"

namespace binnet {

double iou(const BBox& a, const BBox& b) {
    const int x0 = std::max(a.x, b.x), y0 = std::max(a.y, b.y);
    const int x1 = std::min(a.x + a.w, b.x + b.w), y1 = std::min(a.y + a.h, b.y + b.h);
    const double inter =
        static_cast<double>(std::max(0, x1 - x0)) * std::max(0, y1 - y0);
    const double uni =
        static_cast<double>(a.w) * a.h + static_cast<double>(b.w) * b.h - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

void DetectConfig::check() const {
    if (!(min_prob > 0.0 && min_prob <= 1.0))
        throw InvalidArgumentError("detect: min_prob must be in (0,1]");
    if (!(nms_iou >= 0.0 && nms_iou < 1.0))
        throw InvalidArgumentError("detect: nms_iou must be in [0,1)");
    if (stride == 0) throw InvalidArgumentError("detect: stride must be >= 1");
    if (scales.empty()) throw InvalidArgumentError("detect: scales must be non-empty");
    for (double s : scales)
        if (!(s >= 1.0) || !std::isfinite(s))
            throw InvalidArgumentError("detect: scales must be >= 1");
}

std::vector<std::pair<int, int>> sliding_windows(std::uint32_t image_h,
                                                 std::uint32_t image_w,
                                                 std::uint32_t window_h,
                                                 std::uint32_t window_w,
                                                 std::uint32_t stride) {
    if (window_h == 0 || window_w == 0 || stride == 0)
        throw InvalidArgumentError("sliding_windows: window and stride must be >= 1");
    if (window_h > image_h || window_w > image_w)
        throw DimensionError("sliding_windows: window " + std::to_string(window_h) + "x" +
                             std::to_string(window_w) + " exceeds image " +
                             std::to_string(image_h) + "x" + std::to_string(image_w));
    std::vector<std::pair<int, int>> positions;
    for (std::uint32_t y = 0; y + window_h <= image_h; y += stride)
        for (std::uint32_t x = 0; x + window_w <= image_w; x += stride)
            positions.emplace_back(static_cast<int>(x), static_cast<int>(y));
    return positions;
}

namespace {

bool detection_before(const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.bbox.x != b.bbox.x) return a.bbox.x < b.bbox.x;
    if (a.bbox.y != b.bbox.y) return a.bbox.y < b.bbox.y;
    return a.class_id < b.class_id;
}

U8Tensor downscale_nn(const U8Tensor& src, double scale, std::uint32_t out_h,
                      std::uint32_t out_w) {
    U8Tensor dst = U8Tensor::zeros(src.channels, out_h, out_w);
    for (std::uint32_t c = 0; c < src.channels; ++c)
        for (std::uint32_t y = 0; y < out_h; ++y) {
            const std::size_t sy =
                std::min<std::size_t>(src.height - 1,
                                      static_cast<std::size_t>(y * scale));
            for (std::uint32_t x = 0; x < out_w; ++x) {
                const std::size_t sx =
                    std::min<std::size_t>(src.width - 1,
                                          static_cast<std::size_t>(x * scale));
                dst.at(c, y, x) = src.at(c, sy, sx);
            }
        }
    return dst;
}

U8Tensor crop(const U8Tensor& src, int x0, int y0, std::uint32_t h, std::uint32_t w) {
    U8Tensor dst = U8Tensor::zeros(src.channels, h, w);
    for (std::uint32_t c = 0; c < src.channels; ++c)
        for (std::uint32_t y = 0; y < h; ++y)
            for (std::uint32_t x = 0; x < w; ++x)
                dst.at(c, y, x) = src.at(c, static_cast<std::size_t>(y0) + y,
                                         static_cast<std::size_t>(x0) + x);
    return dst;
}

} // namespace

std::vector<Detection> nms(std::vector<Detection> dets, double iou_threshold) {
    std::sort(dets.begin(), dets.end(), detection_before);
    std::vector<Detection> kept;
    for (const Detection& d : dets) {
        bool suppressed = false;
        for (const Detection& k : kept) {
            if (k.class_id == d.class_id && iou(k.bbox, d.bbox) > iou_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(d);
    }
    return kept;
}

std::vector<Detection> detect_objects(const ModelGraph& graph, const U8Tensor& image,
                                      const DetectConfig& cfg) {
    cfg.check();
    const ShapeReport report = validate(graph);
    if (!report.has_head)
        throw ValidationError(graph.layers.size() - 1, "head", "detector needs a Head");
    const InputLayer& in = std::get<InputLayer>(graph.layers.front().node);
    if (image.channels != in.channels)
        throw DimensionError("detect: image channels " + std::to_string(image.channels) +
                             " vs model input " + std::to_string(in.channels));
    const std::uint32_t win_h = in.height, win_w = in.width;

    std::vector<Detection> all;
    for (double scale : cfg.scales) {
        const std::uint32_t sh = static_cast<std::uint32_t>(image.height / scale);
        const std::uint32_t sw = static_cast<std::uint32_t>(image.width / scale);
        if (win_h > sh || win_w > sw)
            throw DimensionError("detect: window exceeds image at scale " +
                                 std::to_string(scale));
        const U8Tensor scaled = scale == 1.0 ? image : downscale_nn(image, scale, sh, sw);
        const auto positions = sliding_windows(sh, sw, win_h, win_w, cfg.stride);

        // Windows are independent; classify them in parallel with
        // index-addressed results so assembly order is fixed.
        std::vector<Detection> results(positions.size());
        std::vector<std::uint8_t> keep(positions.size(), 0);
        parallel_for(positions.size(), cfg.threads, [&](std::size_t i) {
            const auto [wx, wy] = positions[i];
            const U8Tensor window = crop(scaled, wx, wy, win_h, win_w);
            const std::vector<double> probs = forward(graph, window);
            std::size_t best = 0;
            for (std::size_t c = 1; c < probs.size(); ++c)
                if (probs[c] > probs[best]) best = c;
            if (probs[best] < cfg.min_prob) return;
            if (cfg.background_class && static_cast<int>(best) == *cfg.background_class)
                return;

            Detection d;
            d.class_id = static_cast<int>(best);
            d.score = probs[best];
            d.bbox.x = static_cast<int>(std::lround(wx * scale));
            d.bbox.y = static_cast<int>(std::lround(wy * scale));
            d.bbox.w = static_cast<int>(std::lround(win_w * scale));
            d.bbox.h = static_cast<int>(std::lround(win_h * scale));
            // keep boxes inside the original image
            d.bbox.w = std::min(d.bbox.w, static_cast<int>(image.width) - d.bbox.x);
            d.bbox.h = std::min(d.bbox.h, static_cast<int>(image.height) - d.bbox.y);
            results[i] = d;
            keep[i] = 1;
        });
        for (std::size_t i = 0; i < results.size(); ++i)
            if (keep[i]) all.push_back(results[i]);
    }

    std::vector<Detection> final = nms(std::move(all), cfg.nms_iou);
    std::sort(final.begin(), final.end(), detection_before);
    return final;
}

std::string format_detections(const std::vector<Detection>& dets,
                              const std::vector<std::string>& class_labels) {
    std::ostringstream ss;
    ss.precision(4);
    ss << std::fixed;
    for (const Detection& d : dets) {
        const std::size_t id = static_cast<std::size_t>(d.class_id);
        if (id < class_labels.size())
            ss << class_labels[id];
        else
            ss << d.class_id;
        ss << ' ' << d.score << ' ' << d.bbox.x << ' ' << d.bbox.y << ' ' << d.bbox.w
           << ' ' << d.bbox.h << '\n';
    }
    return ss.str();
}

U8Tensor annotate(const U8Tensor& image, const std::vector<Detection>& dets) {
    U8Tensor out = image;
    auto paint = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= static_cast<int>(image.width) ||
            y >= static_cast<int>(image.height))
            return;
        for (std::uint32_t c = 0; c < image.channels; ++c)
            out.at(c, static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = 255;
    };
    for (const Detection& d : dets) {
        for (int x = d.bbox.x; x < d.bbox.x + d.bbox.w; ++x) {
            paint(x, d.bbox.y);
            paint(x, d.bbox.y + d.bbox.h - 1);
        }
        for (int y = d.bbox.y; y < d.bbox.y + d.bbox.h; ++y) {
            paint(d.bbox.x, y);
            paint(d.bbox.x + d.bbox.w - 1, y);
        }
    }
    return out;
}

} // namespace binnet
