#include "binnet/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "binnet/dataio.hpp"
#include "binnet/detect.hpp"
#include "binnet/errors.hpp"
#include "binnet/manifest.hpp"
#include "binnet/model_io.hpp"
#include "binnet/netgraph.hpp"
#include "binnet/throughput.hpp"
#include "binnet/transfer.hpp"

namespace binnet::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

// Shared data-source flags for train-head/eval/bench.
struct DataArgs {
    std::string mnist_images, mnist_labels;
    std::vector<std::string> cifar;

    void attach(CLI::App* cmd) {
        cmd->add_option("--mnist-images", mnist_images, "MNIST IDX image file");
        cmd->add_option("--mnist-labels", mnist_labels, "MNIST IDX label file");
        cmd->add_option("--cifar", cifar, "CIFAR-10 binary batch file(s)");
    }

    LabeledDataset load() const {
        if (!mnist_images.empty() || !mnist_labels.empty()) {
            if (mnist_images.empty() || mnist_labels.empty())
                throw InvalidArgumentError(
                    "--mnist-images and --mnist-labels must be given together");
            return load_mnist(mnist_images, mnist_labels);
        }
        if (!cifar.empty()) return load_cifar10(cifar);
        throw InvalidArgumentError("no dataset given (use --mnist-* or --cifar)");
    }
};

std::string class_name(const std::vector<std::string>& labels, std::size_t c) {
    return c < labels.size() ? labels[c] : std::to_string(c);
}

void emit_eval_report(const EvalResult& res, const std::vector<std::string>& labels,
                      bool json, std::ostream& out) {
    if (json) {
        ordered_json j;
        j["schema_version"] = kSchemaVersion;
        j["command"] = "eval";
        j["total"] = res.total;
        j["accuracy"] = res.accuracy;
        ordered_json per = ordered_json::array();
        for (std::size_t c = 0; c < res.per_class.size(); ++c)
            per.push_back({{"class", class_name(labels, c)}, {"accuracy", res.per_class[c]}});
        j["per_class"] = per;
        j["confusion"] = res.confusion;
        j["fps"] = res.fps;
        j["seconds"] = res.seconds;
        out << j.dump(2) << "\n";
        return;
    }
    // classes across the top, accuracy row beneath, FPS/test-time footer
    std::size_t width = 10;
    for (std::size_t c = 0; c < res.per_class.size(); ++c)
        width = std::max(width, class_name(labels, c).size() + 2);
    out << std::left << std::setw(static_cast<int>(width)) << "class";
    for (std::size_t c = 0; c < res.per_class.size(); ++c)
        out << std::left << std::setw(static_cast<int>(width)) << class_name(labels, c);
    out << "\n";
    out << std::fixed << std::setprecision(4);
    out << std::left << std::setw(static_cast<int>(width)) << "accuracy";
    for (double acc : res.per_class)
        out << std::left << std::setw(static_cast<int>(width)) << acc;
    out << "\n";
    out << "overall " << res.accuracy << "  (n=" << res.total << ")\n";
    out << "fps " << std::setprecision(1) << res.fps << "\n";
    out << "test_time " << std::setprecision(2) << res.seconds << "s\n";
}

void emit_history(const TrainHistory& history, bool json, std::ostream& out) {
    if (json) {
        ordered_json j;
        j["schema_version"] = kSchemaVersion;
        j["command"] = "train-head";
        ordered_json eps = ordered_json::array();
        for (const EpochRecord& e : history.epochs)
            eps.push_back({{"epoch", e.epoch},
                           {"train_loss", e.train_loss},
                           {"train_acc", e.train_acc},
                           {"val_acc", e.val_acc},
                           {"seconds", e.seconds}});
        j["epochs"] = eps;
        out << j.dump(2) << "\n";
        return;
    }
    out << history_csv(history);
}

U8Tensor make_random_image(std::uint32_t c, std::uint32_t h, std::uint32_t w,
                           SplitMix64& rng) {
    U8Tensor img = U8Tensor::zeros(c, h, w);
    for (std::uint8_t& px : img.data) px = static_cast<std::uint8_t>(rng.next() & 0xFF);
    return img;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"binnet: bit-packed binarized neural network engine"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    // ---- convert ----
    auto* convert_cmd =
        app.add_subcommand("convert", "Convert a float manifest to a BNNM model");
    std::string cv_manifest, cv_out;
    convert_cmd->add_option("--manifest", cv_manifest, "float manifest (.bnnf)")
        ->required();
    convert_cmd->add_option("--out", cv_out, "output model path (.bnnm)")->required();

    // ---- infer ----
    auto* infer_cmd = app.add_subcommand("infer", "Classify a single PGM/PPM image");
    std::string in_model, in_image;
    bool in_json = false;
    infer_cmd->add_option("--model", in_model, "model file (.bnnm)")->required();
    infer_cmd->add_option("--image", in_image, "input image (P5/P6)")->required();
    infer_cmd->add_flag("--json", in_json, "structured output");

    // ---- train-head ----
    auto* train_cmd =
        app.add_subcommand("train-head", "Retrain the classifier head on frozen features");
    std::string th_model, th_out, th_history;
    DataArgs th_data;
    double th_fraction = 0.9, th_lr = 0.001, th_l2 = 0.0;
    std::uint32_t th_batch = 64, th_epochs = 5, th_classes = 0;
    std::uint64_t th_seed = 42;
    std::size_t th_threads = 0;
    bool th_json = false;
    train_cmd->add_option("--model", th_model, "model file (.bnnm)")->required();
    th_data.attach(train_cmd);
    train_cmd->add_option("--train-fraction", th_fraction,
                          "fraction of the data used for training (rest validates)")
        ->check(CLI::Range(0.0, 1.0));
    train_cmd->add_option("--classes", th_classes,
                          "head classes (0 = from dataset labels)");
    train_cmd->add_option("--lr", th_lr, "learning rate")->check(CLI::PositiveNumber);
    train_cmd->add_option("--batch", th_batch, "minibatch size")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--epochs", th_epochs, "epochs")->check(CLI::PositiveNumber);
    train_cmd->add_option("--l2", th_l2, "L2 penalty on head weights");
    train_cmd->add_option("--seed", th_seed, "shuffle seed");
    train_cmd->add_option("--threads", th_threads,
                          "feature-extraction workers (0 = all cores)");
    train_cmd->add_option("--out", th_out, "path for the trained model")->required();
    train_cmd->add_option("--history", th_history, "write per-epoch CSV here");
    train_cmd->add_flag("--json", th_json, "structured output");

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "Accuracy/FPS report on a dataset");
    std::string ev_model;
    DataArgs ev_data;
    std::size_t ev_threads = 0;
    bool ev_json = false;
    eval_cmd->add_option("--model", ev_model, "model file (.bnnm)")->required();
    ev_data.attach(eval_cmd);
    eval_cmd->add_option("--threads", ev_threads, "forward workers (0 = all cores)");
    eval_cmd->add_flag("--json", ev_json, "structured output");

    // ---- detect ----
    auto* detect_cmd =
        app.add_subcommand("detect", "Sliding-window detection over a still image");
    std::string dt_model, dt_image, dt_annotate;
    DetectConfig dt_cfg;
    int dt_background = -1;
    bool dt_json = false;
    detect_cmd->add_option("--model", dt_model, "classifier model (.bnnm)")->required();
    detect_cmd->add_option("--image", dt_image, "input image (P5/P6)")->required();
    detect_cmd->add_option("--stride", dt_cfg.stride, "window stride in pixels")
        ->check(CLI::PositiveNumber);
    detect_cmd->add_option("--min-prob", dt_cfg.min_prob,
                           "minimum top-class probability shown");
    detect_cmd->add_option("--scale", dt_cfg.scales,
                           "downscale factor(s), each >= 1 (repeatable)");
    detect_cmd->add_option("--nms-iou", dt_cfg.nms_iou, "overlap suppression threshold");
    detect_cmd->add_option("--background", dt_background,
                           "background class id (-1 = none)");
    detect_cmd->add_option("--threads", dt_cfg.threads,
                           "window workers (0 = all cores)");
    detect_cmd->add_option("--annotate", dt_annotate,
                           "write a copy with box outlines here");
    detect_cmd->add_flag("--json", dt_json, "structured output");

    // ---- plan ----
    auto* plan_cmd =
        app.add_subcommand("plan", "Folding plan meeting an FPS target at a clock");
    std::string pl_model, pl_out;
    double pl_fps = 0.0, pl_clock = 1e8;
    std::uint64_t pl_cap = 0;
    bool pl_json = false;
    plan_cmd->add_option("--model", pl_model, "model file (.bnnm)")->required();
    plan_cmd->add_option("--fps", pl_fps, "FPS target")
        ->required()
        ->check(CLI::PositiveNumber);
    plan_cmd->add_option("--clock", pl_clock, "clock in Hz")->check(CLI::PositiveNumber);
    plan_cmd->add_option("--cap", pl_cap, "max parallelism per layer (0 = unbounded)");
    plan_cmd->add_option("--out", pl_out, "write the CSV here instead of stdout");
    plan_cmd->add_flag("--json", pl_json, "structured output");

    // ---- bench ----
    auto* bench_cmd = app.add_subcommand("bench", "Wall-clock FPS over an image set");
    std::string bn_model;
    DataArgs bn_data;
    std::vector<std::string> bn_images;
    std::size_t bn_random = 0, bn_limit = 0;
    std::size_t bn_reps = 5;
    std::uint64_t bn_seed = 42;
    bool bn_json = false;
    bench_cmd->add_option("--model", bn_model, "model file (.bnnm)")->required();
    bn_data.attach(bench_cmd);
    bench_cmd->add_option("--image", bn_images, "PGM/PPM image(s) (repeatable)");
    bench_cmd->add_option("--random", bn_random,
                          "benchmark on N seeded random images instead of a dataset");
    bench_cmd->add_option("--limit", bn_limit, "use at most N dataset images (0 = all)");
    bench_cmd->add_option("--reps", bn_reps, "repetitions (median reported)")
        ->check(CLI::Range(std::size_t{3}, std::size_t{1000}));
    bench_cmd->add_option("--seed", bn_seed, "seed for --random images");
    bench_cmd->add_flag("--json", bn_json, "structured output");

    // ---- build ----
    auto* build_cmd =
        app.add_subcommand("build", "Materialize a builder preset as a BNNM model");
    std::string bd_preset, bd_out, bd_name;
    std::vector<std::string> bd_labels;
    std::uint32_t bd_classes = 10, bd_channels = 1, bd_height = 28, bd_width = 28;
    std::uint32_t bd_threshold = 128;
    std::uint64_t bd_seed = 42;
    build_cmd
        ->add_option("--preset", bd_preset,
                     "pixel-probe | mini-googlenet | googlenet")
        ->required()
        ->check(CLI::IsMember({"pixel-probe", "mini-googlenet", "googlenet"}));
    build_cmd->add_option("--out", bd_out, "output model path (.bnnm)")->required();
    build_cmd->add_option("--classes", bd_classes, "head classes");
    build_cmd->add_option("--channels", bd_channels, "input channels");
    build_cmd->add_option("--height", bd_height, "input height");
    build_cmd->add_option("--width", bd_width, "input width");
    build_cmd->add_option("--threshold", bd_threshold, "input binarization threshold")
        ->check(CLI::Range(0u, 255u));
    build_cmd->add_option("--seed", bd_seed, "seed for random binary filters");
    build_cmd->add_option("--name", bd_name, "model name");
    build_cmd->add_option("--labels", bd_labels, "class labels (repeatable)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "binnet: " << e.what() << "\n";
        err << "run with --help for usage\n";
        return 1;
    }

    try {
        if (convert_cmd->parsed()) {
            const FloatModelManifest manifest = load_manifest(cv_manifest);
            const ModelGraph graph = convert(manifest);
            save_model(graph, cv_out);
            out << "wrote " << cv_out << " (" << graph.layers.size() << " layers)\n";
            return 0;
        }

        if (infer_cmd->parsed()) {
            const ModelGraph graph = load_model(in_model);
            validate(graph);
            const U8Tensor image = load_image(in_image);
            const std::vector<double> probs = forward(graph, image);
            std::size_t best = 0;
            for (std::size_t c = 1; c < probs.size(); ++c)
                if (probs[c] > probs[best]) best = c;
            if (in_json) {
                ordered_json j;
                j["schema_version"] = kSchemaVersion;
                j["command"] = "infer";
                j["label"] = class_name(graph.class_labels, best);
                j["class_id"] = best;
                j["probability"] = probs[best];
                j["probabilities"] = probs;
                out << j.dump(2) << "\n";
            } else {
                out << class_name(graph.class_labels, best) << " " << std::fixed
                    << std::setprecision(4) << probs[best] << "\n";
            }
            return 0;
        }

        if (train_cmd->parsed()) {
            ModelGraph graph = load_model(th_model);
            const LabeledDataset full = th_data.load();
            auto [train, val] = split_shuffle(full, th_fraction, th_seed);
            const std::uint32_t classes =
                th_classes != 0 ? th_classes
                                : static_cast<std::uint32_t>(full.num_classes());
            graph = replace_head(graph, classes);
            if (graph.class_labels.empty() && !full.class_names.empty())
                graph.class_labels = full.class_names;

            TrainConfig cfg;
            cfg.learning_rate = th_lr;
            cfg.batch_size = th_batch;
            cfg.epochs = th_epochs;
            cfg.seed = th_seed;
            cfg.l2 = th_l2;
            cfg.threads = th_threads;
            auto [trained, history] = train_head(graph, train, val, cfg);
            save_model(trained, th_out);
            if (!th_history.empty()) write_history_csv(history, th_history);
            emit_history(history, th_json, out);
            return 0;
        }

        if (eval_cmd->parsed()) {
            const ModelGraph graph = load_model(ev_model);
            const LabeledDataset data = ev_data.load();
            const EvalResult res = evaluate(graph, data, ev_threads);
            emit_eval_report(res, graph.class_labels.empty() ? data.class_names
                                                             : graph.class_labels,
                             ev_json, out);
            return 0;
        }

        if (detect_cmd->parsed()) {
            const ModelGraph graph = load_model(dt_model);
            const U8Tensor image = load_image(dt_image);
            if (dt_background >= 0) dt_cfg.background_class = dt_background;
            const std::vector<Detection> dets = detect_objects(graph, image, dt_cfg);
            if (!dt_annotate.empty()) write_image(annotate(image, dets), dt_annotate);
            if (dt_json) {
                ordered_json j;
                j["schema_version"] = kSchemaVersion;
                j["command"] = "detect";
                ordered_json arr = ordered_json::array();
                for (const Detection& d : dets)
                    arr.push_back({{"label", class_name(graph.class_labels,
                                                        static_cast<std::size_t>(d.class_id))},
                                   {"class_id", d.class_id},
                                   {"score", d.score},
                                   {"x", d.bbox.x},
                                   {"y", d.bbox.y},
                                   {"w", d.bbox.w},
                                   {"h", d.bbox.h}});
                j["detections"] = arr;
                out << j.dump(2) << "\n";
            } else {
                out << format_detections(dets, graph.class_labels);
            }
            return 0;
        }

        if (plan_cmd->parsed()) {
            const ModelGraph graph = load_model(pl_model);
            const std::vector<LayerOps> ops = count_ops(graph);
            std::vector<std::uint64_t> caps;
            const std::vector<std::uint64_t>* caps_ptr = nullptr;
            if (pl_cap != 0) {
                caps.assign(ops.size(), pl_cap);
                caps_ptr = &caps;
            }
            const FoldingPlan plan = plan_folding(ops, pl_fps, pl_clock, caps_ptr);
            if (pl_json) {
                ordered_json j;
                j["schema_version"] = kSchemaVersion;
                j["command"] = "plan";
                j["fps_target"] = plan.fps_target;
                j["clock_hz"] = plan.clock_hz;
                j["attained_fps"] = plan.attained_fps;
                j["pipeline_cycles"] = plan.pipeline_cycles;
                j["sequential_cycles"] = plan.sequential_cycles;
                ordered_json layers = ordered_json::array();
                for (std::size_t i = 0; i < ops.size(); ++i)
                    layers.push_back({{"layer", ops[i].layer_index},
                                      {"name", ops[i].name},
                                      {"ops", ops[i].macs},
                                      {"elementwise", ops[i].elementwise},
                                      {"p", plan.parallelism[i]}});
                j["layers"] = layers;
                out << j.dump(2) << "\n";
            } else {
                const std::string csv = plan_csv(ops, plan);
                if (pl_out.empty()) {
                    out << csv;
                    out << "# attained_fps=" << plan.attained_fps
                        << " pipeline_cycles=" << plan.pipeline_cycles
                        << " sequential_cycles=" << plan.sequential_cycles << "\n";
                } else {
                    std::ofstream f(pl_out, std::ios::trunc);
                    if (!f) throw IoError("cannot open " + pl_out + " for writing");
                    f << csv;
                    out << "wrote " << pl_out << "\n";
                }
            }
            return 0;
        }

        if (bench_cmd->parsed()) {
            const ModelGraph graph = load_model(bn_model);
            std::vector<U8Tensor> images;
            if (bn_random > 0) {
                const InputLayer& in = std::get<InputLayer>(graph.layers.front().node);
                SplitMix64 rng(bn_seed);
                for (std::size_t i = 0; i < bn_random; ++i)
                    images.push_back(
                        make_random_image(in.channels, in.height, in.width, rng));
            } else if (!bn_images.empty()) {
                for (const std::string& p : bn_images) images.push_back(load_image(p));
            } else {
                LabeledDataset data = bn_data.load();
                const std::size_t n =
                    bn_limit == 0 ? data.size() : std::min(bn_limit, data.size());
                images.assign(data.images.begin(),
                              data.images.begin() + static_cast<std::ptrdiff_t>(n));
            }
            const BenchReport report = bench_fps(graph, images, bn_reps);
            if (bn_json) {
                ordered_json j;
                j["schema_version"] = kSchemaVersion;
                j["command"] = "bench";
                j["frames"] = report.frames;
                j["repetitions"] = report.repetitions;
                j["seconds_per_rep"] = report.seconds_per_rep;
                j["median_fps"] = report.median_fps;
                ordered_json layers = ordered_json::array();
                for (std::size_t i = 0; i < report.layer_names.size(); ++i)
                    layers.push_back({{"layer", i},
                                      {"name", report.layer_names[i]},
                                      {"share", report.layer_shares[i]}});
                j["layers"] = layers;
                out << j.dump(2) << "\n";
            } else {
                out << "frames " << report.frames << "\n";
                out << std::fixed << std::setprecision(2);
                out << "median_fps " << report.median_fps << "\n";
                out << bench_csv(report);
            }
            return 0;
        }

        if (build_cmd->parsed()) {
            ModelGraph graph;
            if (bd_preset == "pixel-probe")
                graph = build_pixel_probe(bd_channels, bd_height, bd_width, bd_classes,
                                          static_cast<std::uint8_t>(bd_threshold));
            else if (bd_preset == "mini-googlenet")
                graph = build_mini_googlenet(bd_channels, bd_height, bd_width,
                                             bd_classes, bd_seed);
            else
                graph = build_googlenet(bd_classes, bd_seed);
            if (!bd_name.empty()) graph.name = bd_name;
            graph.class_labels = bd_labels;
            validate(graph);
            save_model(graph, bd_out);
            out << "wrote " << bd_out << " (" << graph.layers.size() << " layers)\n";
            return 0;
        }
    } catch (const Error& e) {
        err << "binnet: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "binnet: " << e.what() << "\n";
        return 2;
    }
    err << "binnet: no subcommand\n";
    return 1;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    args.reserve(static_cast<std::size_t>(argc > 0 ? argc - 1 : 0));
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, out, err);
}

} // namespace binnet::cli
