#ifndef BINNET_THROUGHPUT_HPP
#define BINNET_THROUGHPUT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "binnet/dataio.hpp"
#include "binnet/netgraph.hpp"

namespace binnet {

// ---------------------------------------------------------------------------
// Compute-roofline throughput model for a pipelined (dataflow) execution:
// every layer is its own stage, a frame leaves the pipeline every
// max_l ceil(ops_l / p_l) cycles, and folding raises p_l on the slow stages.
// ---------------------------------------------------------------------------

struct LayerOps {
    std::size_t layer_index = 0; // top-level graph index (branch inners share it)
    std::string name;
    std::uint64_t macs = 0;        // binary MACs per frame (conv/dense)
    std::uint64_t elementwise = 0; // threshold/pool element ops, excluded from MAC cycles
};

struct FoldingPlan {
    std::vector<std::uint64_t> parallelism; // p_l per LayerOps entry, >= 1
    double clock_hz = 0.0;
    double fps_target = 0.0;
    double attained_fps = 0.0;
    std::uint64_t pipeline_cycles = 0;   // slowest stage, cycles per frame
    std::uint64_t sequential_cycles = 0; // sum over stages, single-frame latency
};

struct BenchReport {
    std::size_t frames = 0;
    std::size_t repetitions = 0;
    std::vector<double> seconds_per_rep;
    double median_fps = 0.0;
    std::vector<std::string> layer_names; // top-level layers
    std::vector<double> layer_shares;     // wall-time shares, sum to 1
};

// Exact per-layer op counts from validated shapes. Conv:
// out_ch*H_out*W_out*in_ch*kh*kw; dense: rows*cols; threshold/pool counted as
// elementwise. Branch inner layers appear as separate entries.
std::vector<LayerOps> count_ops(const ModelGraph& graph);

// clock_hz / max_l ceil(macs_l / p_l). Layers without MACs take no cycles.
// Throws InvalidArgumentError on an empty list, mismatched plan length, any
// p_l == 0 or clock_hz <= 0.
double attainable_fps(const std::vector<LayerOps>& ops,
                      const std::vector<std::uint64_t>& parallelism, double clock_hz);

// Smallest per-layer folding meeting fps_target: each p_l is the least value
// whose stage fits the cycle budget, so any p_l > 1 reduced by one breaks the
// target. caps, when given, bound p_l per entry; an entry that cannot fit
// raises InfeasibleError naming it.
FoldingPlan plan_folding(const std::vector<LayerOps>& ops, double fps_target,
                         double clock_hz,
                         const std::vector<std::uint64_t>* caps = nullptr);

// Wall-clock forward over the image set, `repetitions` times; median FPS and
// per-layer time shares. repetitions must be >= 3 and images non-empty.
BenchReport bench_fps(const ModelGraph& graph, const std::vector<U8Tensor>& images,
                      std::size_t repetitions);

// CSV emitters: "layer,name,ops,p,cycles" and "layer,name,share".
std::string plan_csv(const std::vector<LayerOps>& ops, const FoldingPlan& plan);
std::string bench_csv(const BenchReport& report);

} // namespace binnet

#endif
