#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "cli_config.hpp"
#include "overseg/dataset_io.hpp"
#include "overseg/errors.hpp"
#include "overseg/eval.hpp"
#include "overseg/nn/model_io.hpp"
#include "overseg/parallel.hpp"
#include "overseg/pgm.hpp"

namespace fs = std::filesystem;
using namespace overseg;

namespace {

enum ExitCode : int { kOk = 0, kArgs = 2, kIo = 3, kFormat = 4, kNumeric = 5 };

// Flags shared by every subcommand.
struct Common {
    std::optional<fs::path> config_file;
    std::optional<int> threads;
    bool print_config = false;
    std::optional<std::string> classes;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_file, "JSON config file (sections corpus, synth, unet, train, eval)");
        cmd->add_option("--threads", threads, "worker threads (default: OVERSEG_THREADS or all cores)")
            ->check(CLI::PositiveNumber);
        cmd->add_flag("--print-config", print_config, "print the effective configuration as JSON and exit");
        cmd->add_option("--classes", classes, "class letters, e.g. ABCDE");
    }

    int thread_count() const { return threads ? *threads : default_thread_count(); }
};

template <typename T>
void override(T& target, const std::optional<T>& flag) {
    if (flag) target = *flag;
}

cli::CliConfig load_config(const Common& common) {
    cli::CliConfig config;
    if (common.config_file) cli::apply_file(config, *common.config_file);
    override(config.corpus.classes, common.classes);
    return config;
}

// Prints and returns true when --print-config was requested.
bool maybe_print(const Common& common, const cli::CliConfig& config) {
    if (!common.print_config) return false;
    std::cout << cli::to_json(config).dump(2) << "\n";
    return true;
}

LetterCorpus read_corpus(const fs::path& path, const cli::CliConfig& config) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus " + path.string());
    return parse_corpus_csv(in, config.synth.class_set, config.synth.mask_threshold);
}

// ---- corpus-stats ----------------------------------------------------------

struct CorpusStatsArgs {
    Common common;
    fs::path corpus;
    std::optional<std::uint64_t> split_seed;
};

int run_corpus_stats(const CorpusStatsArgs& a) {
    auto config = load_config(a.common);
    override(config.corpus.split_seed, a.split_seed);
    cli::finalize(config);
    if (maybe_print(a.common, config)) return kOk;

    const auto corpus = assign_splits(read_corpus(a.corpus, config), config.corpus.split_fractions,
                                      config.corpus.split_seed);
    const auto sizes = split_sizes(corpus);
    std::printf("corpus %s: %zu glyphs in %zu classes\n", a.corpus.string().c_str(), corpus.total_instances(),
                corpus.classes.size());
    std::printf("class  count  min  max  train  val  test\n");
    for (std::size_t k = 0; k < corpus.classes.size(); ++k) {
        float lo = 1.0f, hi = 0.0f;
        for (const auto& inst : corpus.instances[k])
            for (float p : inst.image.pixels()) lo = std::min(lo, p), hi = std::max(hi, p);
        std::printf("%c      %5zu  %3ld  %3ld  %5zu  %3zu  %4zu\n", class_letter(corpus.classes[k]),
                    corpus.instances[k].size(), std::lround(lo * 255), std::lround(hi * 255), sizes[k][0],
                    sizes[k][1], sizes[k][2]);
    }
    return kOk;
}

// ---- generate --------------------------------------------------------------

struct GenerateArgs {
    Common common;
    fs::path corpus, out;
    std::string split = "train";
    long long count = 0;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> split_seed;
    std::optional<double> p_single, contrast_min, contrast_max, noise;
    std::optional<int> offset_max;
};

int run_generate(const GenerateArgs& a) {
    auto config = load_config(a.common);
    override(config.corpus.split_seed, a.split_seed);
    override(config.synth.p_single, a.p_single);
    override(config.synth.contrast_min, a.contrast_min);
    override(config.synth.contrast_max, a.contrast_max);
    override(config.synth.noise_sigma, a.noise);
    override(config.synth.offset_max, a.offset_max);
    cli::finalize(config);
    if (maybe_print(a.common, config)) return kOk;
    if (a.count < 1) throw ArgumentError("--count must be >= 1");
    const Split split = parse_split(a.split);

    const auto corpus = assign_splits(read_corpus(a.corpus, config), config.corpus.split_fractions,
                                      config.corpus.split_seed);
    auto dataset = generate_dataset(corpus.pool(split), config.synth, static_cast<std::size_t>(a.count), a.seed,
                                    a.common.thread_count());
    dataset.split = split;
    save_dataset(dataset, a.out);
    std::printf("wrote %lld %s samples to %s (%ju bytes)\n", a.count, split_name(split), a.out.string().c_str(),
                static_cast<std::uintmax_t>(fs::file_size(a.out)));
    return kOk;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
    Common common;
    fs::path train, val, out;
    std::optional<fs::path> history;
    std::optional<int> epochs, batch, base_filters, depth;
    std::optional<double> lr;
    std::optional<std::uint64_t> seed, shuffle_seed;
    bool no_checkpoints = false;
};

fs::path sibling(const fs::path& path, const std::string& suffix) {
    fs::path p = path;
    p.replace_extension();
    return fs::path(p.string() + suffix);
}

int run_train(const TrainArgs& a) {
    auto config = load_config(a.common);
    override(config.train.epochs, a.epochs);
    override(config.train.batch_size, a.batch);
    override(config.train.learning_rate, a.lr);
    override(config.unet.base_filters, a.base_filters);
    override(config.unet.depth, a.depth);
    if (a.seed) {
        config.init_seed = *a.seed;
        config.train.shuffle_seed = *a.seed;
    }
    override(config.train.shuffle_seed, a.shuffle_seed);
    cli::finalize(config);
    if (maybe_print(a.common, config)) return kOk;

    const auto train_set = load_dataset(a.train);
    const auto val_set = load_dataset(a.val);
    auto unet = unet_config_for(train_set, config.unet.base_filters, config.unet.depth);
    unet.kernel_size = config.unet.kernel_size;

    TrainOptions options;
    options.threads = a.common.thread_count();
    if (!a.no_checkpoints) options.checkpoint_prefix = sibling(a.out, "");
    const auto start = std::chrono::steady_clock::now();
    options.on_epoch = [&](const EpochRecord& r) {
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("epoch %d/%d train_loss %.6f val_loss %.6f val_acc %.4f val_prec %.4f val_rec %.4f [%.0fs]\n",
                    r.epoch, config.train.epochs, r.train_loss, r.val.loss, r.val.accuracy, r.val.precision,
                    r.val.recall, secs);
        std::fflush(stdout);
    };
    const auto result = train(train_set, val_set, unet, config.train, config.init_seed, options);
    nn::save_model_file(result.params, unet, a.out);

    const fs::path history = a.history ? *a.history : sibling(a.out, ".history.csv");
    std::ofstream csv(history);
    if (!csv) throw IoError("cannot write " + history.string());
    write_history_csv(result.history, csv);
    std::printf("wrote model %s and history %s\n", a.out.string().c_str(), history.string().c_str());
    return kOk;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
    Common common;
    fs::path model, data, report;
    std::optional<fs::path> render_dir, histogram;
    int render_count = 0;
    std::optional<double> detect, noise_threshold;
    std::optional<int> bins, scale;
};

int run_eval(const EvalArgs& a) {
    auto config = load_config(a.common);
    override(config.eval.detect_threshold, a.detect);
    override(config.eval.noise_threshold, a.noise_threshold);
    override(config.eval.histogram_bins, a.bins);
    override(config.eval.render_scale, a.scale);
    cli::finalize(config);
    if (maybe_print(a.common, config)) return kOk;
    if (a.render_count < 0) throw ArgumentError("--render-count must be >= 0");

    const auto model = nn::load_model_file(a.model);
    const auto dataset = load_dataset(a.data);
    const auto report = test_report(model.params, model.config, dataset, config.eval, a.common.thread_count());

    std::ofstream json(a.report);
    if (!json) throw IoError("cannot write " + a.report.string());
    json << report_json(report);
    if (!json) throw IoError("failed writing " + a.report.string());
    const fs::path histogram = a.histogram ? *a.histogram : sibling(a.report, ".histogram.csv");
    std::ofstream hist(histogram);
    if (!hist) throw IoError("cannot write " + histogram.string());
    write_histogram_csv(report.histogram, hist);

    const auto count = std::min<std::size_t>(static_cast<std::size_t>(a.render_count), dataset.size());
    if (count > 0) {
        const fs::path dir = a.render_dir ? *a.render_dir : a.report.parent_path();
        if (!dir.empty()) fs::create_directories(dir);
        // Datasets store channel indices; name panels with the configured letters when they line up.
        const auto class_set = config.synth.n_classes() == dataset.n_classes() ? config.synth.class_set
                                                                                : dataset.config.class_set;
        for (std::size_t i = 0; i < count; ++i) {
            const auto& s = dataset.samples[i];
            const auto panel = render_panel(s, predict(model.params, model.config, s.input), config.eval);
            const std::string name = panel_filename(i, s.truth_set(), class_set, report.records[i].category);
            write_pgm_file(panel, dir / name);
        }
    }

    const auto& m = report.metrics;
    std::printf("samples %zu accuracy %.4f precision %.4f recall %.4f loss %.6f\n", report.n_samples, m.accuracy,
                m.precision, m.recall, m.loss);
    for (std::size_t k = 0; k < kOutcomeCount; ++k)
        std::printf("%-22s %6zu  %.4f\n", outcome_name(static_cast<Outcome>(k)), report.outcome_counts[k],
                    report.outcome_fractions[k]);
    std::printf("success_rate %.4f\n", report.success_rate);
    std::printf("wrote %s, %s and %zu panels\n", a.report.string().c_str(), histogram.string().c_str(), count);
    return kOk;
}

// ---- predict ---------------------------------------------------------------

struct PredictArgs {
    Common common;
    fs::path model, image;
    std::string out_prefix;
    bool ink_positive = false;
    std::optional<double> detect;
};

int run_predict(const PredictArgs& a) {
    auto config = load_config(a.common);
    override(config.eval.detect_threshold, a.detect);
    cli::finalize(config);
    if (maybe_print(a.common, config)) return kOk;

    const auto model = nn::load_model_file(a.model);
    const auto pgm = read_pgm_file(a.image);
    if (pgm.height != model.config.height || pgm.width != model.config.width)
        throw ArgumentError("image is " + std::to_string(pgm.width) + "x" + std::to_string(pgm.height) +
                            ", model expects " + std::to_string(model.config.width) + "x" +
                            std::to_string(model.config.height));
    GrayImage image = from_display(pgm);
    if (a.ink_positive)
        for (float& p : image.pixels()) p = 1.0f - p;

    const auto planes = predict(model.params, model.config, image);
    const auto fluxes = mask_max_fluxes(planes);
    const bool named = static_cast<int>(config.corpus.classes.size()) == planes.n_classes;
    std::string detected;
    for (int c = 0; c < planes.n_classes; ++c) {
        const std::string label = named ? std::string(1, config.corpus.classes[static_cast<std::size_t>(c)])
                                        : std::to_string(c);
        const fs::path out = a.out_prefix + "_" + label + ".pgm";
        write_pgm_file(render_flux_plane(planes.plane(c), planes.height, planes.width), out);
        std::printf("%s max_flux %.6f -> %s\n", label.c_str(), fluxes[static_cast<std::size_t>(c)],
                    out.string().c_str());
        if (fluxes[static_cast<std::size_t>(c)] >= config.eval.detect_threshold) detected += label;
    }
    std::printf("detected %s\n", detected.empty() ? "(none)" : detected.c_str());
    return kOk;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ArgumentError*>(&e)) return kArgs;
    if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e)) return kIo;
    if (dynamic_cast<const FormatError*>(&e) || dynamic_cast<const ContentError*>(&e)) return kFormat;
    if (dynamic_cast<const NumericError*>(&e) || dynamic_cast<const GenerationError*>(&e)) return kNumeric;
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Overlapping-letter segmentation: corpus, synthesis, U-Net training and evaluation"};
    app.require_subcommand(1);
    int code = kOk;

    CorpusStatsArgs stats;
    auto* cs = app.add_subcommand("corpus-stats", "per-class counts, intensity range and split sizes of a CSV corpus");
    stats.common.attach(cs);
    cs->add_option("corpus,--corpus", stats.corpus, "glyph CSV (label,784 pixels per line)")->required();
    cs->add_option("--split-seed", stats.split_seed, "seed for the train/val/test glyph split");
    cs->callback([&] { code = run_corpus_stats(stats); });

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "synthesize an overlapping-letter dataset (OVLS)");
    gen.common.attach(g);
    g->add_option("--corpus", gen.corpus, "glyph CSV")->required();
    g->add_option("--out", gen.out, "output .ovls file")->required();
    g->add_option("--split", gen.split, "glyph pool to draw from: train, val or test")->capture_default_str();
    g->add_option("--count", gen.count, "number of samples")->required();
    g->add_option("--seed", gen.seed, "dataset seed")->capture_default_str();
    g->add_option("--split-seed", gen.split_seed, "seed for the train/val/test glyph split");
    g->add_option("--p-single", gen.p_single, "probability of a single-letter sample");
    g->add_option("--offset-max", gen.offset_max, "maximum translation in pixels");
    g->add_option("--contrast-min", gen.contrast_min, "lower bound of the under-letter contrast");
    g->add_option("--contrast-max", gen.contrast_max, "upper bound of the under-letter contrast");
    g->add_option("--noise", gen.noise, "Gaussian noise sigma");
    g->callback([&] { code = run_generate(gen); });

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "train the U-Net with BCE and Adam");
    tr.common.attach(t);
    t->add_option("--train", tr.train, "training .ovls")->required();
    t->add_option("--val", tr.val, "validation .ovls")->required();
    t->add_option("--out", tr.out, "output .unet model")->required();
    t->add_option("--history", tr.history, "history CSV (default <out>.history.csv)");
    t->add_option("--epochs", tr.epochs, "epochs (default 15)");
    t->add_option("--batch", tr.batch, "mini-batch size (default 64)");
    t->add_option("--lr", tr.lr, "Adam learning rate (default 1e-3)");
    t->add_option("--seed", tr.seed, "weight-init and shuffle seed");
    t->add_option("--shuffle-seed", tr.shuffle_seed, "shuffle seed (default: --seed)");
    t->add_option("--base-filters", tr.base_filters, "filters at full resolution (default 16)");
    t->add_option("--depth", tr.depth, "pooling levels (default 2)");
    t->add_flag("--no-checkpoints", tr.no_checkpoints, "skip the per-epoch <out>.epochNN.unet files");
    t->callback([&] { code = run_train(tr); });

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "score a model on a dataset: metrics, outcome taxonomy, histogram, panels");
    ev.common.attach(e);
    e->add_option("--model", ev.model, ".unet model")->required();
    e->add_option("--data", ev.data, ".ovls dataset")->required();
    e->add_option("--report", ev.report, "report JSON path")->required();
    e->add_option("--histogram", ev.histogram, "histogram CSV (default <report>.histogram.csv)");
    e->add_option("--render-dir", ev.render_dir, "directory for panel PGMs (default: next to the report)");
    e->add_option("--render-count", ev.render_count, "panels to render from the first samples")->capture_default_str();
    e->add_option("--detect", ev.detect, "max flux at which a class counts as present (default 0.5)");
    e->add_option("--noise-threshold", ev.noise_threshold, "tolerated wrong-class flux (default 0.1)");
    e->add_option("--bins", ev.bins, "histogram bins (default 20)");
    e->add_option("--scale", ev.scale, "panel upscaling factor (default 4)");
    e->callback([&] { code = run_eval(ev); });

    PredictArgs pr;
    auto* p = app.add_subcommand("predict", "segment one PGM image into per-class flux maps");
    pr.common.attach(p);
    p->add_option("--model", pr.model, ".unet model")->required();
    p->add_option("--image", pr.image, "P5 PGM, dark ink on light paper")->required();
    p->add_option("--out-prefix", pr.out_prefix, "writes <prefix>_<class>.pgm per class")->required();
    p->add_flag("--ink-positive", pr.ink_positive, "the image is light ink on dark background");
    p->add_option("--detect", pr.detect, "max flux at which a class counts as present (default 0.5)");
    p->callback([&] { code = run_predict(pr); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int rc = app.exit(err);
        return rc == 0 ? kOk : kArgs;
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return exit_code_for(err);
    }
    return code;
}
