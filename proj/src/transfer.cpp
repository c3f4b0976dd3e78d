#include "binnet/transfer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "binnet/parallel.hpp"
#include "binnet/rng.hpp"

namespace binnet {

namespace {

std::size_t head_index(const ModelGraph& graph) {
    for (std::size_t i = 0; i < graph.layers.size(); ++i)
        if (std::holds_alternative<HeadLayer>(graph.layers[i].node)) return i;
    return graph.layers.size();
}

std::size_t argmax_lowest(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i; // ties keep the lowest index
    return best;
}

// Features for every example, fanned out over worker threads with
// index-addressed writes so the result is order-stable.
std::vector<std::vector<double>> cache_features(const ModelGraph& graph,
                                                const LabeledDataset& data,
                                                std::size_t threads) {
    std::vector<std::vector<double>> feats(data.size());
    parallel_for(data.size(), threads,
                 [&](std::size_t i) { feats[i] = extract_features(graph, data.images[i]); });
    return feats;
}

} // namespace

ModelGraph replace_head(const ModelGraph& graph, std::uint32_t classes) {
    if (classes == 0) throw InvalidArgumentError("replace_head: zero classes");

    ModelGraph g = graph;
    const std::size_t head = head_index(g);
    if (head != g.layers.size()) g.layers.erase(g.layers.begin() + static_cast<std::ptrdiff_t>(head));

    // The extractor must end in a feature stage.
    if (g.layers.empty() ||
        !std::holds_alternative<GlobalAvgPoolLayer>(g.layers.back().node))
        throw ValidationError(g.layers.empty() ? 0 : g.layers.size() - 1, "gap",
                              "graph has no feature stage (GlobalAvgPool) for a head");
    const ShapeReport report = validate(g);

    FloatHead h;
    h.classes = classes;
    h.features = report.feature_count;
    h.weights.assign(static_cast<std::size_t>(classes) * h.features, 0.0f);
    h.bias.assign(classes, 0.0f);
    g.layers.push_back(LayerSpec{HeadLayer{std::move(h)}});
    return g;
}

std::pair<ModelGraph, TrainHistory> train_head(const ModelGraph& graph,
                                               const LabeledDataset& train,
                                               const LabeledDataset& val,
                                               const TrainConfig& cfg) {
    if (train.size() == 0) throw InvalidArgumentError("train_head: empty training set");
    if (cfg.batch_size == 0) throw InvalidArgumentError("train_head: batch_size must be >= 1");
    if (cfg.epochs == 0) throw InvalidArgumentError("train_head: epochs must be >= 1");
    if (cfg.learning_rate < 0.0 || !std::isfinite(cfg.learning_rate))
        throw InvalidArgumentError("train_head: bad learning rate");

    ModelGraph g = graph;
    validate(g);
    const std::size_t head_at = head_index(g);
    if (head_at == g.layers.size())
        throw ValidationError(g.layers.empty() ? 0 : g.layers.size() - 1, "head",
                              "train_head needs a Head layer");
    FloatHead& head = std::get<HeadLayer>(g.layers[head_at].node).head;
    const std::size_t classes = head.classes;
    const std::size_t nfeat = head.features;

    for (int l : train.labels)
        if (l < 0 || static_cast<std::size_t>(l) >= classes)
            throw InvalidArgumentError("train_head: label " + std::to_string(l) +
                                       " out of range for " + std::to_string(classes) +
                                       " classes");
    for (int l : val.labels)
        if (l < 0 || static_cast<std::size_t>(l) >= classes)
            throw InvalidArgumentError("train_head: validation label out of range");

    // The extractor is frozen: features are computed once per example, then
    // training is a small dense softmax-regression problem.
    const auto train_feats = cache_features(g, train, cfg.threads);
    const auto val_feats = cache_features(g, val, cfg.threads);

    std::vector<double> w(head.weights.begin(), head.weights.end());
    std::vector<double> b(head.bias.begin(), head.bias.end());
    std::vector<double> gw(w.size()), gb(b.size());
    std::vector<double> logits(classes), probs;

    auto logits_of = [&](const std::vector<double>& x) {
        for (std::size_t c = 0; c < classes; ++c) {
            double acc = b[c];
            const double* row = w.data() + c * nfeat;
            for (std::size_t j = 0; j < nfeat; ++j) acc += row[j] * x[j];
            logits[c] = acc;
        }
    };
    auto val_accuracy = [&]() {
        if (val_feats.empty()) return 0.0;
        std::size_t correct = 0;
        for (std::size_t i = 0; i < val_feats.size(); ++i) {
            logits_of(val_feats[i]);
            if (argmax_lowest(logits) == static_cast<std::size_t>(val.labels[i])) ++correct;
        }
        return static_cast<double>(correct) / static_cast<double>(val_feats.size());
    };

    SplitMix64 rng(cfg.seed); // shuffle order is the only randomness
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainHistory history;
    using Clock = std::chrono::steady_clock;
    for (std::uint32_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = Clock::now();
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.next_below(i)]);

        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            const double inv_batch = 1.0 / static_cast<double>(end - start);
            std::fill(gw.begin(), gw.end(), 0.0);
            std::fill(gb.begin(), gb.end(), 0.0);

            for (std::size_t k = start; k < end; ++k) {
                const std::size_t i = order[k];
                const std::vector<double>& x = train_feats[i];
                const int label = train.labels[i];
                logits_of(x);
                probs = softmax(logits);
                if (argmax_lowest(logits) == static_cast<std::size_t>(label)) ++correct;
                loss_sum += -std::log(std::max(probs[static_cast<std::size_t>(label)], 1e-300));
                for (std::size_t c = 0; c < classes; ++c) {
                    const double d = probs[c] - (static_cast<int>(c) == label ? 1.0 : 0.0);
                    gb[c] += d;
                    double* grow = gw.data() + c * nfeat;
                    for (std::size_t j = 0; j < nfeat; ++j) grow[j] += d * x[j];
                }
            }
            for (std::size_t p = 0; p < w.size(); ++p)
                w[p] -= cfg.learning_rate * (gw[p] * inv_batch + cfg.l2 * w[p]);
            for (std::size_t c = 0; c < classes; ++c)
                b[c] -= cfg.learning_rate * gb[c] * inv_batch;
        }

        EpochRecord rec;
        rec.epoch = static_cast<int>(epoch);
        rec.train_loss = loss_sum / static_cast<double>(order.size());
        rec.train_acc = static_cast<double>(correct) / static_cast<double>(order.size());
        rec.val_acc = val_accuracy();
        rec.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        history.epochs.push_back(rec);
    }

    for (std::size_t p = 0; p < w.size(); ++p) head.weights[p] = static_cast<float>(w[p]);
    for (std::size_t c = 0; c < classes; ++c) head.bias[c] = static_cast<float>(b[c]);
    return {std::move(g), std::move(history)};
}

EvalResult evaluate(const ModelGraph& graph, const LabeledDataset& data,
                    std::size_t threads) {
    if (data.size() == 0) throw InvalidArgumentError("evaluate: empty dataset");
    const ShapeReport report = validate(graph);
    if (!report.has_head)
        throw ValidationError(graph.layers.size() - 1, "head", "evaluate needs a Head");
    const std::size_t classes = report.classes;

    for (int l : data.labels)
        if (l < 0 || static_cast<std::size_t>(l) >= classes)
            throw InvalidArgumentError("evaluate: label " + std::to_string(l) +
                                       " out of range");

    std::vector<int> predicted(data.size());
    const auto t0 = std::chrono::steady_clock::now();
    parallel_for(data.size(), threads, [&](std::size_t i) {
        const std::vector<double> probs = forward(graph, data.images[i]);
        predicted[i] = static_cast<int>(argmax_lowest(probs));
    });
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    EvalResult res;
    res.total = data.size();
    res.seconds = seconds;
    res.fps = seconds > 0.0 ? static_cast<double>(data.size()) / seconds : 0.0;
    res.confusion.assign(classes, std::vector<int>(classes, 0));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const int truth = data.labels[i];
        res.confusion[static_cast<std::size_t>(truth)]
                     [static_cast<std::size_t>(predicted[i])]++;
        if (predicted[i] == truth) ++correct;
    }
    res.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    res.per_class.assign(classes, 0.0);
    for (std::size_t c = 0; c < classes; ++c) {
        const int row_total =
            std::accumulate(res.confusion[c].begin(), res.confusion[c].end(), 0);
        res.per_class[c] =
            row_total > 0 ? static_cast<double>(res.confusion[c][c]) / row_total : 0.0;
    }
    return res;
}

TransferReport transfer_metrics(const TrainHistory& h_transfer,
                                const TrainHistory& h_scratch, double threshold,
                                bool use_final_epoch) {
    if (h_transfer.epochs.empty() || h_scratch.epochs.empty())
        throw InvalidArgumentError("transfer_metrics: empty history");
    if (!(threshold > 0.0 && threshold <= 1.0))
        throw InvalidArgumentError("transfer_metrics: threshold must be in (0,1]");

    TransferReport r;
    r.jumpstart = h_transfer.epochs.front().val_acc - h_scratch.epochs.front().val_acc;
    for (const EpochRecord& e : h_transfer.epochs) {
        if (e.val_acc >= threshold) {
            r.time_to_threshold = e.epoch;
            break;
        }
    }
    auto asymptote = [use_final_epoch](const TrainHistory& h) {
        if (use_final_epoch) return h.epochs.back().val_acc;
        double best = h.epochs.front().val_acc;
        for (const EpochRecord& e : h.epochs) best = std::max(best, e.val_acc);
        return best;
    };
    r.asymptote_transfer = asymptote(h_transfer);
    r.asymptote_scratch = asymptote(h_scratch);
    r.negative_transfer = r.asymptote_transfer < r.asymptote_scratch;
    return r;
}

std::string history_csv(const TrainHistory& history) {
    std::ostringstream ss;
    ss << "epoch,train_loss,train_acc,val_acc,seconds\n";
    ss.precision(6);
    ss << std::fixed;
    for (const EpochRecord& e : history.epochs)
        ss << e.epoch << ',' << e.train_loss << ',' << e.train_acc << ',' << e.val_acc
           << ',' << e.seconds << '\n';
    return ss.str();
}

void write_history_csv(const TrainHistory& history, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << history_csv(history);
    if (!out) throw IoError("write failed for " + path);
}

} // namespace binnet
