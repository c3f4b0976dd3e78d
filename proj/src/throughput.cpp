#include "binnet/throughput.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace binnet {

namespace {

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

struct OpCounter {
    std::vector<LayerOps> ops;

    void add(std::size_t idx, std::string name, std::uint64_t macs,
             std::uint64_t elementwise) {
        ops.push_back({idx, std::move(name), macs, elementwise});
    }

    // Walks the same shape arithmetic as validate(); graph is validated first
    // so the chaining is known good here.
    ShapeInfo walk(const LayerSeq& seq, ShapeInfo cur, std::size_t top_idx,
                   const std::string& prefix);
};

std::uint32_t out_dim(std::uint32_t in, std::uint32_t k, std::uint32_t stride,
                      std::uint32_t pad) {
    return static_cast<std::uint32_t>(
               (static_cast<std::int64_t>(in) + 2 * pad - k) / stride) +
           1;
}

ShapeInfo OpCounter::walk(const LayerSeq& seq, ShapeInfo cur, std::size_t top_idx,
                          const std::string& prefix) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const LayerSpec& layer = seq[i];
        const std::size_t idx = prefix.empty() ? i : top_idx;
        const std::string name =
            (prefix.empty() ? std::to_string(i) : prefix + "." + std::to_string(i)) +
            std::string(":") + layer.kind_name();

        if (const auto* l = std::get_if<InputLayer>(&layer.node)) {
            cur = {ValueKind::Bits, l->channels, l->height, l->width};
        } else if (const auto* l = std::get_if<BinConvLayer>(&layer.node)) {
            const BinConvWeights& w = l->w;
            const std::uint32_t oh = out_dim(cur.height, w.kernel_h, w.stride, w.pad);
            const std::uint32_t ow = out_dim(cur.width, w.kernel_w, w.stride, w.pad);
            const std::uint64_t macs = static_cast<std::uint64_t>(w.out_channels) * oh *
                                       ow * w.in_channels * w.kernel_h * w.kernel_w;
            add(idx, name, macs, 0);
            cur = {ValueKind::Sums, w.out_channels, oh, ow};
        } else if (const auto* l = std::get_if<BinDenseLayer>(&layer.node)) {
            add(idx, name, static_cast<std::uint64_t>(l->w.rows) * l->w.cols, 0);
            cur = {ValueKind::Sums, l->w.rows, 1, 1};
        } else if (std::get_if<ThresholdLayer>(&layer.node)) {
            add(idx, name, 0, cur.count());
            cur.kind = ValueKind::Bits;
        } else if (const auto* l = std::get_if<MaxPoolLayer>(&layer.node)) {
            const std::uint32_t oh = out_dim(cur.height, l->k, l->stride, l->pad);
            const std::uint32_t ow = out_dim(cur.width, l->k, l->stride, l->pad);
            add(idx, name,
                0, static_cast<std::uint64_t>(cur.channels) * oh * ow * l->k * l->k);
            cur = {cur.kind, cur.channels, oh, ow};
        } else if (std::get_if<GlobalAvgPoolLayer>(&layer.node)) {
            add(idx, name, 0, cur.count());
            cur = {ValueKind::Feats, cur.channels, 1, 1};
        } else if (const auto* l = std::get_if<BranchesLayer>(&layer.node)) {
            std::uint32_t total_c = 0;
            ShapeInfo bout = cur;
            for (std::size_t b = 0; b < l->branches.size(); ++b) {
                bout = walk(l->branches[b], cur, i,
                            std::to_string(i) + ".b" + std::to_string(b));
                total_c += bout.channels;
            }
            cur = {ValueKind::Bits, total_c, bout.height, bout.width};
        } else if (std::get_if<ConcatLayer>(&layer.node)) {
            add(idx, name, 0, cur.count());
        } else if (const auto* l = std::get_if<HeadLayer>(&layer.node)) {
            // float multiply-adds, reported as elementwise work
            add(idx, name, 0,
                static_cast<std::uint64_t>(l->head.classes) * l->head.features);
            cur = {ValueKind::Feats, l->head.classes, 1, 1};
        }
    }
    return cur;
}

} // namespace

std::vector<LayerOps> count_ops(const ModelGraph& graph) {
    validate(graph);
    OpCounter counter;
    counter.walk(graph.layers, ShapeInfo{}, 0, "");
    // Input produces no work entry; everything else is listed.
    return std::move(counter.ops);
}

double attainable_fps(const std::vector<LayerOps>& ops,
                      const std::vector<std::uint64_t>& parallelism, double clock_hz) {
    if (ops.empty()) throw InvalidArgumentError("attainable_fps: empty ops list");
    if (parallelism.size() != ops.size())
        throw InvalidArgumentError("attainable_fps: plan length mismatch");
    if (!(clock_hz > 0.0)) throw InvalidArgumentError("attainable_fps: clock must be > 0");

    std::uint64_t max_cycles = 0;
    for (std::size_t i = 0; i < ops.size(); ++i) {
        if (parallelism[i] == 0)
            throw InvalidArgumentError("attainable_fps: parallelism must be >= 1");
        if (ops[i].macs == 0) continue;
        max_cycles = std::max(max_cycles, ceil_div(ops[i].macs, parallelism[i]));
    }
    if (max_cycles == 0) return clock_hz; // no MAC work: one frame per cycle
    return clock_hz / static_cast<double>(max_cycles);
}

FoldingPlan plan_folding(const std::vector<LayerOps>& ops, double fps_target,
                         double clock_hz, const std::vector<std::uint64_t>* caps) {
    if (ops.empty()) throw InvalidArgumentError("plan_folding: empty ops list");
    if (!(fps_target > 0.0)) throw InvalidArgumentError("plan_folding: target must be > 0");
    if (!(clock_hz > 0.0)) throw InvalidArgumentError("plan_folding: clock must be > 0");
    if (caps != nullptr && caps->size() != ops.size())
        throw InvalidArgumentError("plan_folding: caps length mismatch");

    // Largest per-stage cycle count that still meets the target, fixed up
    // against the same double comparison attainable_fps() makes so the
    // round-trip property holds exactly.
    std::uint64_t budget = 0;
    {
        const double raw = clock_hz / fps_target;
        if (raw >= 9e18) {
            budget = std::numeric_limits<std::uint64_t>::max() / 2;
        } else {
            budget = raw >= 1.0 ? static_cast<std::uint64_t>(raw) : 0;
            while (clock_hz / static_cast<double>(budget + 1) >= fps_target) ++budget;
            while (budget > 0 && clock_hz / static_cast<double>(budget) < fps_target)
                --budget;
        }
    }

    FoldingPlan plan;
    plan.clock_hz = clock_hz;
    plan.fps_target = fps_target;
    plan.parallelism.assign(ops.size(), 1);
    for (std::size_t i = 0; i < ops.size(); ++i) {
        if (ops[i].macs == 0) continue;
        if (budget == 0) {
            // even fully unrolled (one cycle per frame) the clock is too slow
            throw InfeasibleError(ops[i].layer_index, ops[i].name,
                                  "clock " + std::to_string(clock_hz) +
                                      " Hz cannot reach " + std::to_string(fps_target) +
                                      " fps");
        }
        const std::uint64_t p = std::max<std::uint64_t>(1, ceil_div(ops[i].macs, budget));
        if (caps != nullptr && (*caps)[i] != 0 && p > (*caps)[i])
            throw InfeasibleError(ops[i].layer_index, ops[i].name,
                                  "needs parallelism " + std::to_string(p) +
                                      " but cap is " + std::to_string((*caps)[i]));
        plan.parallelism[i] = p;
    }

    std::uint64_t max_cycles = 0, total_cycles = 0;
    for (std::size_t i = 0; i < ops.size(); ++i) {
        if (ops[i].macs == 0) continue;
        const std::uint64_t cycles = ceil_div(ops[i].macs, plan.parallelism[i]);
        max_cycles = std::max(max_cycles, cycles);
        total_cycles += cycles;
    }
    plan.pipeline_cycles = max_cycles;
    plan.sequential_cycles = total_cycles;
    plan.attained_fps = attainable_fps(ops, plan.parallelism, clock_hz);
    if (plan.attained_fps < fps_target)
        throw InfeasibleError(ops[0].layer_index, ops[0].name,
                              "target " + std::to_string(fps_target) +
                                  " fps exceeds the clock rate");
    return plan;
}

BenchReport bench_fps(const ModelGraph& graph, const std::vector<U8Tensor>& images,
                      std::size_t repetitions) {
    if (repetitions < 3)
        throw InvalidArgumentError("bench_fps: repetitions must be >= 3");
    if (images.empty()) throw InvalidArgumentError("bench_fps: empty image set");
    validate(graph);

    BenchReport report;
    report.frames = images.size();
    report.repetitions = repetitions;

    std::vector<double> layer_seconds;
    using Clock = std::chrono::steady_clock;
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
        const auto t0 = Clock::now();
        for (const U8Tensor& img : images) {
            ExecTrace trace;
            execute(graph, img, graph.layers.size(), &trace);
            if (layer_seconds.empty()) {
                report.layer_names = trace.names;
                layer_seconds.assign(trace.seconds.size(), 0.0);
            }
            for (std::size_t i = 0; i < trace.seconds.size(); ++i)
                layer_seconds[i] += trace.seconds[i];
        }
        report.seconds_per_rep.push_back(
            std::chrono::duration<double>(Clock::now() - t0).count());
    }

    std::vector<double> sorted = report.seconds_per_rep;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted.size() % 2 == 1
                              ? sorted[sorted.size() / 2]
                              : 0.5 * (sorted[sorted.size() / 2 - 1] +
                                       sorted[sorted.size() / 2]);
    report.median_fps =
        median > 0.0 ? static_cast<double>(images.size()) / median : 0.0;

    double total = 0.0;
    for (double s : layer_seconds) total += s;
    report.layer_shares.assign(layer_seconds.size(), 0.0);
    if (total > 0.0)
        for (std::size_t i = 0; i < layer_seconds.size(); ++i)
            report.layer_shares[i] = layer_seconds[i] / total;
    return report;
}

std::string plan_csv(const std::vector<LayerOps>& ops, const FoldingPlan& plan) {
    std::ostringstream ss;
    ss << "layer,name,ops,p,cycles\n";
    for (std::size_t i = 0; i < ops.size(); ++i) {
        const std::uint64_t cycles =
            ops[i].macs == 0 ? 0 : ceil_div(ops[i].macs, plan.parallelism[i]);
        ss << ops[i].layer_index << ',' << ops[i].name << ',' << ops[i].macs << ','
           << plan.parallelism[i] << ',' << cycles << '\n';
    }
    return ss.str();
}

std::string bench_csv(const BenchReport& report) {
    std::ostringstream ss;
    ss << "layer,name,share\n";
    ss.precision(6);
    ss << std::fixed;
    for (std::size_t i = 0; i < report.layer_names.size(); ++i)
        ss << i << ',' << report.layer_names[i] << ',' << report.layer_shares[i] << '\n';
    return ss.str();
}

} // namespace binnet
