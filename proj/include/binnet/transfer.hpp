#ifndef BINNET_TRANSFER_HPP
#define BINNET_TRANSFER_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "binnet/dataio.hpp"
#include "binnet/netgraph.hpp"

namespace binnet {

struct TrainConfig {
    double learning_rate = 0.001;
    std::uint32_t batch_size = 64;
    std::uint32_t epochs = 1;
    std::uint64_t seed = 42;
    double l2 = 0.0;
    std::size_t threads = 0; // 0 = hardware concurrency (feature extraction only)
};

struct EpochRecord {
    int epoch = 0; // 1-based
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_acc = 0.0;
    double seconds = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
};

struct TransferReport {
    double jumpstart = 0.0;
    std::optional<int> time_to_threshold; // 1-based epoch, absent if never reached
    double asymptote_transfer = 0.0;
    double asymptote_scratch = 0.0;
    bool negative_transfer = false;
};

struct EvalResult {
    double accuracy = 0.0;
    std::vector<double> per_class;
    std::vector<std::vector<int>> confusion; // [true][predicted]
    std::size_t total = 0;
    double seconds = 0.0; // wall time of the evaluation pass
    double fps = 0.0;
};

// New zero-initialized head over the graph's feature stage; every other layer
// is bit-identical to the input graph. Throws ValidationError when the graph
// has no GlobalAvgPool feature stage.
ModelGraph replace_head(const ModelGraph& graph, std::uint32_t classes);

// Minibatch SGD on softmax cross-entropy over frozen features. Features are
// extracted once per example (fanned out over cfg.threads workers); the SGD
// loop is single-threaded and the shuffle order (splitmix64 Fisher-Yates from
// cfg.seed) is the only randomness. Only head parameters change.
std::pair<ModelGraph, TrainHistory> train_head(const ModelGraph& graph,
                                               const LabeledDataset& train,
                                               const LabeledDataset& val,
                                               const TrainConfig& cfg);

// Full-forward accuracy with argmax ties broken toward the lowest class index.
EvalResult evaluate(const ModelGraph& graph, const LabeledDataset& data,
                    std::size_t threads = 0);

// Jumpstart / time-to-threshold / asymptote comparison of two histories.
// Asymptote is the max validation accuracy unless use_final_epoch is set.
TransferReport transfer_metrics(const TrainHistory& h_transfer,
                                const TrainHistory& h_scratch, double threshold,
                                bool use_final_epoch = false);

// CSV: header epoch,train_loss,train_acc,val_acc,seconds then one row per epoch.
void write_history_csv(const TrainHistory& history, const std::string& path);
std::string history_csv(const TrainHistory& history);

} // namespace binnet

#endif
