// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// selected criterion fails.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "glyph_forge.hpp"
#include "oracles.hpp"
#include "overseg/dataset_io.hpp"
#include "overseg/errors.hpp"
#include "overseg/eval.hpp"
#include "overseg/loss.hpp"
#include "overseg/metrics.hpp"
#include "overseg/nn/layers.hpp"
#include "overseg/nn/model_io.hpp"
#include "overseg/parallel.hpp"
#include "overseg/trainer.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace overseg;
using namespace overseg::nn;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

struct Context {
    fs::path work;
    std::string cli;
    int threads = 1;
    int forge_per_label = 1000;
    // criterion 3 success rate, consumed by criterion 4
    std::optional<double> clean_success;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename T>
Tensor<T> random_tensor(Xoshiro256& rng, std::vector<int> shape, double lo = -1.0, double hi = 1.0) {
    Tensor<T> t(std::move(shape));
    for (auto& v : t.storage()) v = static_cast<T>(rng.uniform(lo, hi));
    return t;
}

double dot(const Tensor<double>& a, const Tensor<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

constexpr double kStep = 1e-5;
constexpr double kFloor = 1e-6;

// ---- 1: gradient correctness ----------------------------------------------

struct FdTally {
    double worst = 0;
    std::size_t probes = 0;
    void add(double analytic, double numeric) {
        worst = std::max(worst, oracle::relative_error(analytic, numeric, kFloor));
        ++probes;
    }
};

void fd_layers(Xoshiro256& rng, FdTally& tally) {
    for (int trial = 0; trial < 4; ++trial) {
        const int ci = static_cast<int>(rng.uniform_int(1, 3)), co = static_cast<int>(rng.uniform_int(1, 3));
        const int k = trial % 2 ? 3 : 1, h = 6, w = 4;
        auto x = random_tensor<double>(rng, {ci, h, w});
        auto kr = random_tensor<double>(rng, {co, ci, k, k});
        auto b = random_tensor<double>(rng, {co});
        const auto r = random_tensor<double>(rng, {co, h, w});
        auto loss = [&] { return dot(conv2d_forward(x, kr, b), r); };
        const auto g = conv2d_backward(x, kr, r);
        for (std::size_t i = 0; i < x.size(); ++i) tally.add(g.input[i], oracle::central_difference(loss, x[i], kStep));
        for (std::size_t i = 0; i < kr.size(); ++i)
            tally.add(g.kernel[i], oracle::central_difference(loss, kr[i], kStep));
        for (std::size_t i = 0; i < b.size(); ++i) tally.add(g.bias[i], oracle::central_difference(loss, b[i], kStep));
    }
    {
        auto x = random_tensor<double>(rng, {2, 4, 6});
        const auto r = random_tensor<double>(rng, {2, 2, 3});
        const auto base = maxpool2_forward(x);
        const auto g = maxpool2_backward(base.indices, r);
        auto loss = [&] { return dot(maxpool2_forward(x).output, r); };
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double saved = x[i];
            x[i] = saved + kStep;
            const bool up_same = maxpool2_forward(x).indices.argmax == base.indices.argmax;
            x[i] = saved - kStep;
            const bool down_same = maxpool2_forward(x).indices.argmax == base.indices.argmax;
            x[i] = saved;
            if (!up_same || !down_same) continue;  // pool tie within the step
            tally.add(g[i], oracle::central_difference(loss, x[i], kStep));
        }
    }
    {
        auto x = random_tensor<double>(rng, {2, 3, 3});
        const auto r = random_tensor<double>(rng, {2, 6, 6});
        const auto g = upsample2_nearest_backward(r);
        auto loss = [&] { return dot(upsample2_nearest_forward(x), r); };
        for (std::size_t i = 0; i < x.size(); ++i) tally.add(g[i], oracle::central_difference(loss, x[i], kStep));
    }
    {
        auto x = random_tensor<double>(rng, {1, 5, 5});
        const auto r = random_tensor<double>(rng, {1, 5, 5});
        const auto g = relu_backward(x, r);
        auto loss = [&] { return dot(relu_forward(x), r); };
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (std::abs(x[i]) < 10 * kStep) continue;  // kink
            tally.add(g[i], oracle::central_difference(loss, x[i], kStep));
        }
    }
    {
        auto x = random_tensor<double>(rng, {1, 4, 5}, -8.0, 8.0);
        const auto r = random_tensor<double>(rng, {1, 4, 5});
        const auto g = sigmoid_backward(sigmoid_forward(x), r);
        auto loss = [&] { return dot(sigmoid_forward(x), r); };
        for (std::size_t i = 0; i < x.size(); ++i) tally.add(g[i], oracle::central_difference(loss, x[i], kStep));
    }
    {
        auto a = random_tensor<double>(rng, {2, 3, 3});
        auto b = random_tensor<double>(rng, {1, 3, 3});
        const auto r = random_tensor<double>(rng, {3, 3, 3});
        const auto [ga, gb] = split_channels(r, 2);
        auto loss = [&] { return dot(concat_channels(a, b), r); };
        for (std::size_t i = 0; i < a.size(); ++i) tally.add(ga[i], oracle::central_difference(loss, a[i], kStep));
        for (std::size_t i = 0; i < b.size(); ++i) tally.add(gb[i], oracle::central_difference(loss, b[i], kStep));
    }
    {
        auto p = random_tensor<double>(rng, {2, 3, 3}, 0.01, 0.99);
        Tensor<double> t({2, 3, 3});
        for (auto& v : t.storage()) v = rng.bernoulli(0.4) ? 1.0 : 0.0;
        const auto g = bce_loss(p, t).grad;
        auto loss = [&] { return bce_loss(p, t).loss; };
        for (std::size_t i = 0; i < p.size(); ++i) tally.add(g[i], oracle::central_difference(loss, p[i], 1e-7));
    }
}

// Activation signature: which relu units are on, and every pool argmax.
std::pair<std::vector<bool>, std::vector<std::uint32_t>> signature(const UNetCache<double>& c) {
    std::vector<bool> on;
    for (const auto& a : c.activations)
        for (double v : a.storage()) on.push_back(v > 0);
    std::vector<std::uint32_t> idx;
    for (const auto& p : c.pools) idx.insert(idx.end(), p.argmax.begin(), p.argmax.end());
    return {on, idx};
}

Verdict criterion_gradients(Context&) {
    Xoshiro256 rng(1);
    FdTally layers;
    fd_layers(rng, layers);

    UNetConfig cfg;
    cfg.n_classes = 2;
    cfg.base_filters = 4;
    cfg.depth = 1;
    cfg.height = cfg.width = 8;
    auto params = init_params(cfg, 17).cast<double>();
    for (auto& t : params.tensors)
        if (t.value.rank() == 1)
            for (auto& v : t.value.storage()) v = rng.uniform(-0.1, 0.1);
    Tensor<double> x({1, 8, 8});
    for (auto& v : x.storage()) v = rng.uniform01();
    Tensor<double> r({2, 8, 8});
    for (auto& v : r.storage()) v = rng.uniform(-1.0, 1.0);

    UNetCache<double> cache;
    unet_forward(params, cfg, x, &cache);
    const auto base_sig = signature(cache);
    const auto grads = unet_backward(params, cfg, cache, r);
    auto loss = [&] { return dot(unet_forward(params, cfg, x), r); };

    FdTally net;
    std::size_t skipped = 0;
    while (net.probes < 60) {
        const auto t = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(params.size()) - 1));
        const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(params[t].size()) - 1));
        double& theta = params[t][j];
        const double saved = theta;
        bool stable = true;
        for (double s : {kStep, -kStep}) {
            theta = saved + s;
            UNetCache<double> c;
            unet_forward(params, cfg, x, &c);
            stable = stable && signature(c) == base_sig;
        }
        theta = saved;
        if (!stable) {
            ++skipped;
            continue;
        }
        net.add(grads[t][j], oracle::central_difference(loss, theta, kStep));
    }
    const bool pass = layers.worst <= 1e-4 && net.worst <= 1e-4 && net.probes >= 50;
    return {pass, fmt("layers max rel err %.2e over %zu probes; tiny U-Net max rel err %.2e over %zu probes "
                      "(%zu kink/tie probes excluded); bound 1e-4",
                      layers.worst, layers.probes, net.worst, net.probes, skipped)};
}

// ---- corpus and datasets ---------------------------------------------------

const LetterCorpus& forged_corpus(const Context& ctx) {
    static const LetterCorpus corpus = testing::forge_corpus({.per_label = ctx.forge_per_label, .seed = 2024});
    return corpus;
}

// ---- 2: overfit sanity -----------------------------------------------------

Verdict criterion_overfit(Context& ctx) {
    const auto data = generate_dataset(forged_corpus(ctx).pool(Split::train), SynthConfig{}, 32, 2);
    TrainConfig tc;
    tc.epochs = 200;
    tc.batch_size = 32;
    tc.learning_rate = 1e-3;
    TrainOptions opts;
    opts.threads = ctx.threads;
    const auto result = train(data, data, unet_config_for(data), tc, 2, opts);
    const double final_bce = evaluate_metrics(result.params, unet_config_for(data), data, 0.5, ctx.threads).loss;
    return {final_bce <= 0.01, fmt("final mean BCE %.5f after 200 epochs on 32 samples (epoch 1: %.5f); bound 0.01",
                                   final_bce, result.history.front().train_loss)};
}

// ---- 3 and 4: desk-scale runs ----------------------------------------------

struct DeskRun {
    EvalReport report;
    double train_seconds = 0;
};

DeskRun desk_run(Context& ctx, const std::string& tag, double contrast_min, double noise) {
    SynthConfig sc;
    sc.contrast_min = contrast_min;
    sc.contrast_max = 1.0;
    sc.noise_sigma = noise;
    const auto& corpus = forged_corpus(ctx);
    const auto train_set = generate_dataset(corpus.pool(Split::train), sc, 20000, 31, ctx.threads);
    const auto val_set = generate_dataset(corpus.pool(Split::val), sc, 1000, 32, ctx.threads);
    const auto test_set = generate_dataset(corpus.pool(Split::test), sc, 1000, 33, ctx.threads);

    TrainConfig tc;  // 15 epochs, batch 64, Adam 1e-3
    tc.shuffle_seed = 34;
    TrainOptions opts;
    opts.threads = ctx.threads;
    const auto t0 = std::chrono::steady_clock::now();
    opts.on_epoch = [&](const EpochRecord& r) {
        std::printf("  [%s] epoch %2d train_loss %.5f val_loss %.5f val_acc %.4f val_prec %.4f val_rec %.4f (%.0fs)\n",
                    tag.c_str(), r.epoch, r.train_loss, r.val.loss, r.val.accuracy, r.val.precision, r.val.recall,
                    seconds_since(t0));
        std::fflush(stdout);
    };
    const auto unet = unet_config_for(train_set);
    const auto result = train(train_set, val_set, unet, tc, 35, opts);
    DeskRun run;
    run.train_seconds = seconds_since(t0);
    run.report = test_report(result.params, unet, test_set, EvalConfig{}, ctx.threads);

    fs::create_directories(ctx.work);
    save_model_file(result.params, unet, ctx.work / (tag + ".unet"));
    std::ofstream(ctx.work / (tag + ".report.json")) << report_json(run.report);
    std::ofstream hist(ctx.work / (tag + ".history.csv"));
    write_history_csv(result.history, hist);
    return run;
}

std::string outcome_summary(const EvalReport& r) {
    std::string s;
    for (std::size_t k = 0; k < kOutcomeCount; ++k)
        s += fmt("%s%s %.3f", k ? ", " : "", outcome_name(static_cast<Outcome>(k)), r.outcome_fractions[k]);
    return s;
}

Verdict criterion_desk(Context& ctx) {
    const auto run = desk_run(ctx, "desk_clean", 1.0, 0.0);
    const auto& m = run.report.metrics;
    ctx.clean_success = run.report.success_rate;
    const bool pass = m.accuracy >= 0.95 && m.precision >= 0.85 && m.recall >= 0.60 && run.report.success_rate >= 0.70;
    return {pass, fmt("accuracy %.4f (>= 0.95), precision %.4f (>= 0.85), recall %.4f (>= 0.60), success_rate %.4f "
                      "(>= 0.70); outcomes: %s; trained in %.0fs",
                      m.accuracy, m.precision, m.recall, run.report.success_rate, outcome_summary(run.report).c_str(),
                      run.train_seconds)};
}

Verdict criterion_robust(Context& ctx) {
    if (!ctx.clean_success) {
        std::printf("  (criterion 4 needs the criterion 3 baseline; running it first)\n");
        criterion_desk(ctx);
    }
    const auto run = desk_run(ctx, "desk_noisy", 0.5, 0.05);
    const double drop = *ctx.clean_success - run.report.success_rate;
    const auto& m = run.report.metrics;
    return {drop <= 0.15, fmt("success_rate %.4f vs clean %.4f: degradation %.1f points (<= 15); accuracy %.4f "
                              "precision %.4f recall %.4f; trained in %.0fs",
                              run.report.success_rate, *ctx.clean_success, 100 * drop, m.accuracy, m.precision,
                              m.recall, run.train_seconds)};
}

// ---- 5: determinism ----------------------------------------------------------

int spawn(const Context& ctx, const std::string& args) {
    const std::string cmd = ctx.cli + " " + args + " > " + (ctx.work / "spawn.log").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Verdict criterion_determinism(Context& ctx) {
    const fs::path dir = ctx.work / "determinism";
    fs::create_directories(dir);
    const auto csv = dir / "glyphs.csv";
    testing::write_corpus_csv(csv, {.per_label = 60, .seed = 77});
    auto gen = [&](const std::string& out, const std::string& extra) {
        return spawn(ctx, "generate --corpus " + csv.string() + " --count 200 --seed 5 --noise 0.05 --out " +
                              (dir / out).string() + " " + extra);
    };
    std::vector<std::string> failures;
    if (gen("a.ovls", "--threads 1") || gen("b.ovls", "--threads 1") || gen("c.ovls", "--threads 4"))
        failures.push_back("generate failed");
    const bool gen_same = testing::read_bytes(dir / "a.ovls") == testing::read_bytes(dir / "b.ovls");
    const bool par_same = testing::read_bytes(dir / "a.ovls") == testing::read_bytes(dir / "c.ovls");

    spawn(ctx, "generate --corpus " + csv.string() + " --count 20 --seed 6 --split val --out " +
                   (dir / "val.ovls").string());
    auto tr = [&](const std::string& out) {
        return spawn(ctx, "train --train " + (dir / "a.ovls").string() + " --val " + (dir / "val.ovls").string() +
                              " --epochs 2 --batch 32 --seed 9 --no-checkpoints --out " + (dir / out).string());
    };
    if (tr("m1.unet") || tr("m2.unet")) failures.push_back("train failed");
    const auto h1 = testing::read_bytes(dir / "m1.history.csv");
    const bool hist_same = !h1.empty() && h1 == testing::read_bytes(dir / "m2.history.csv");

    // library level: 4 threads vs 1 on a larger set
    const auto& pool = forged_corpus(ctx).pool(Split::train);
    SynthConfig sc;
    sc.noise_sigma = 0.05;
    std::ostringstream s1, s4;
    write_dataset(generate_dataset(pool, sc, 2000, 8, 1), s1);
    write_dataset(generate_dataset(pool, sc, 2000, 8, 4), s4);
    const bool lib_same = s1.str() == s4.str();

    const bool pass = failures.empty() && gen_same && par_same && hist_same && lib_same;
    return {pass, fmt("generate twice identical: %s; 4-thread generate == sequential: %s (CLI), %s (2000 samples, "
                      "library); train twice identical history: %s%s",
                      gen_same ? "yes" : "no", par_same ? "yes" : "no", lib_same ? "yes" : "no",
                      hist_same ? "yes" : "no", failures.empty() ? "" : (" [" + failures.front() + "]").c_str())};
}

// ---- 6: oracle equivalence ---------------------------------------------------

Verdict criterion_oracles(Context& ctx) {
    Xoshiro256 rng(6);
    double worst = 0, worst_float = 0;
    int tensors = 0;
    for (int trial = 0; trial < 120; ++trial) {
        const int ci = static_cast<int>(rng.uniform_int(1, 4)), co = static_cast<int>(rng.uniform_int(1, 4));
        const int h = 2 * static_cast<int>(rng.uniform_int(1, 5)), w = 2 * static_cast<int>(rng.uniform_int(1, 5));
        const int k = static_cast<int>(2 * rng.uniform_int(0, 2) + 1);
        const auto x = random_tensor<double>(rng, {ci, h, w});
        const auto kr = random_tensor<double>(rng, {co, ci, k, k});
        const auto b = random_tensor<double>(rng, {co});
        const auto conv = conv2d_forward(x, kr, b);
        const auto ref = oracle::conv2d(x.storage(), ci, h, w, kr.storage(), co, k, b.storage());
        for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(conv[i] - ref[i]));
        const auto conv_f = conv2d_forward(x.cast<float>(), kr.cast<float>(), b.cast<float>());
        for (std::size_t i = 0; i < ref.size(); ++i)
            worst_float = std::max(worst_float, std::abs(static_cast<double>(conv_f[i]) - ref[i]));

        const auto pool = maxpool2_forward(x);
        const auto pref = oracle::maxpool2(x.storage(), ci, h, w);
        for (std::size_t i = 0; i < pref.out.size(); ++i) worst = std::max(worst, std::abs(pool.output[i] - pref.out[i]));
        const auto up = upsample2_nearest_forward(x);
        const auto uref = oracle::upsample2(x.storage(), ci, h, w);
        for (std::size_t i = 0; i < uref.size(); ++i) worst = std::max(worst, std::abs(up[i] - uref[i]));
        ++tensors;
    }

    bool counts_exact = true;
    for (int d = 0; d < 5; ++d) {
        const auto data = generate_dataset(forged_corpus(ctx).pool(Split::test), SynthConfig{}, 10, 60 + d);
        PixelCounts got, ref;
        for (const auto& s : data.samples) {
            std::vector<float> probs(s.masks.size() * s.input.size());
            for (float& p : probs) p = static_cast<float>(rng.uniform01());
            got += count_pixels(probs, s.masks, 0.5);
            for (std::size_t c = 0; c < s.masks.size(); ++c)
                for (std::size_t i = 0; i < s.input.size(); ++i) {
                    const bool pred = probs[c * s.input.size() + i] >= 0.5f;
                    const bool truth = s.masks[c].bits()[i] != 0;
                    (pred ? (truth ? ref.tp : ref.fp) : (truth ? ref.fn : ref.tn)) += 1;
                }
        }
        counts_exact = counts_exact && got == ref;
    }

    const double grid[] = {0.0, 0.05, 0.1, 0.3, 0.5, 0.9};
    std::size_t cases = 0, mismatches = 0;
    std::vector<double> f(5);
    for (int code = 0; code < 7776; ++code) {
        int rest = code;
        for (double& v : f) v = grid[rest % 6], rest /= 6;
        for (int a = 0; a < 5; ++a)
            for (int b = a; b < 5; ++b) {
                std::vector<int> truth{a};
                if (b != a) truth.push_back(b);
                const std::string want = oracle::classify(f, std::set<int>(truth.begin(), truth.end()), 0.5, 0.1);
                mismatches += want != outcome_name(classify_outcome(f, truth, EvalConfig{}));
                ++cases;
            }
    }
    // float32 conv is held to single-precision accuracy rather than 1e-6
    const bool pass = tensors >= 100 && worst <= 1e-6 && worst_float <= 1e-5 && counts_exact && mismatches == 0;
    return {pass, fmt("conv/pool/upsample on %d random tensors: max abs diff %.2e in double (<= 1e-6), conv %.2e in "
                      "float (<= 1e-5); metric counts on 5x10 samples exact: %s; classify grid %zu cases, %zu "
                      "mismatches",
                      tensors, worst, worst_float, counts_exact ? "yes" : "no", cases, mismatches)};
}

// ---- 7: format round trips ---------------------------------------------------

template <typename Read>
std::pair<std::size_t, std::size_t> abuse(const std::string& bytes, Read read, Xoshiro256& rng, std::size_t every) {
    std::size_t rejected = 0, crashed = 0, tried = 0;
    auto attempt = [&](const std::string& b) {
        ++tried;
        try {
            read(b);
        } catch (const FormatError&) {
            ++rejected;
        } catch (...) {
            ++crashed;
        }
    };
    for (std::size_t len = 0; len < bytes.size(); len += every) attempt(bytes.substr(0, len));
    for (int i = 0; i < 500; ++i) {
        std::string b = bytes;
        b[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(std::min<std::size_t>(b.size(), 64)) - 1))] ^=
            static_cast<char>(rng.uniform_int(1, 255));
        attempt(b);
    }
    std::string bad = bytes;
    bad.replace(0, 4, "XXXX");
    attempt(bad);
    return {tried - rejected - crashed, crashed};
}

Verdict criterion_formats(Context& ctx) {
    Xoshiro256 rng(7);
    SynthConfig sc;
    sc.noise_sigma = 0.03;
    const auto data = generate_dataset(forged_corpus(ctx).pool(Split::train), sc, 50, 70);
    std::ostringstream w1, w2;
    write_dataset(data, w1);
    std::istringstream r1(w1.str());
    write_dataset(read_dataset(r1), w2);
    const bool ovls_same = w1.str() == w2.str();

    UNetConfig cfg;
    const auto params = init_params(cfg, 71);
    std::ostringstream m1, m2;
    save_model(params, cfg, m1);
    std::istringstream mr(m1.str());
    const auto model = load_model(mr);
    save_model(model.params, model.config, m2);
    const bool unet_same = m1.str() == m2.str();

    auto read_ovls = [](const std::string& b) {
        std::istringstream in(b);
        read_dataset(in);
    };
    auto read_unet = [](const std::string& b) {
        std::istringstream in(b);
        load_model(in);
    };
    const auto small = generate_dataset(forged_corpus(ctx).pool(Split::train), sc, 2, 72);
    std::ostringstream ws;
    write_dataset(small, ws);
    const auto [ovls_accepted, ovls_crashed] = abuse(ws.str(), read_ovls, rng, 1);
    const auto [unet_accepted, unet_crashed] = abuse(m1.str(), read_unet, rng, 97);
    // bad magic and every truncation must be rejected; single-byte flips inside
    // pixel payloads may legitimately decode
    std::string magic = w1.str();
    magic.replace(0, 4, "XXXX");
    bool magic_rejected = false;
    try {
        read_ovls(magic);
    } catch (const FormatError& e) {
        magic_rejected = e.position() == 0;
    }

    const bool pass = ovls_same && unet_same && ovls_crashed == 0 && unet_crashed == 0 && magic_rejected;
    return {pass, fmt("OVLS write-read-write identical: %s (%zu bytes); UNET identical: %s (%zu bytes); corrupted "
                      "inputs: 0 crashes required, got %zu (OVLS) + %zu (UNET); bad magic rejected at offset 0: %s",
                      ovls_same ? "yes" : "no", w1.str().size(), unet_same ? "yes" : "no", m1.str().size(),
                      ovls_crashed, unet_crashed, magic_rejected ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria runner"};
    std::vector<int> selected{1, 2, 3, 4, 5, 6, 7};
    std::vector<int> known_failures;
    Context ctx;
    ctx.work = fs::temp_directory_path() / "overseg_acceptance";
    ctx.cli = OVERSEG_CLI_PATH;
    ctx.threads = default_thread_count();
    app.add_option("--criteria", selected, "criteria to run")->delimiter(',')->capture_default_str();
    app.add_option("--work-dir", ctx.work, "where models, reports and scratch files go")->capture_default_str();
    app.add_option("--cli", ctx.cli, "path to the overseg executable")->capture_default_str();
    app.add_option("--known-failures", known_failures,
                   "criteria reported FAIL that do not affect the exit status")
        ->delimiter(',');
    app.add_option("--threads", ctx.threads, "worker threads")->capture_default_str();
    app.add_option("--forge-per-label", ctx.forge_per_label, "forged glyphs per letter")->capture_default_str();
    CLI11_PARSE(app, argc, argv);
    fs::create_directories(ctx.work);

    const std::map<int, std::pair<const char*, std::function<Verdict(Context&)>>> criteria{
        {1, {"gradient correctness", criterion_gradients}},
        {2, {"overfit sanity", criterion_overfit}},
        {3, {"desk-scale reproduction", criterion_desk}},
        {4, {"robustness to contrast and noise", criterion_robust}},
        {5, {"determinism", criterion_determinism}},
        {6, {"oracle equivalence", criterion_oracles}},
        {7, {"format round trips", criterion_formats}},
    };

    int failed = 0;
    for (int id : selected) {
        const auto it = criteria.find(id);
        if (it == criteria.end()) {
            std::fprintf(stderr, "no criterion %d\n", id);
            return 2;
        }
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = it->second.second(ctx);
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        const bool known = std::find(known_failures.begin(), known_failures.end(), id) != known_failures.end();
        std::printf("criterion %d %s: %s (%.1fs) | %s%s\n", id, v.pass ? "PASS" : "FAIL", it->second.first,
                    seconds_since(t0), v.detail.c_str(), !v.pass && known ? " [known failure]" : "");
        std::fflush(stdout);
        failed += !v.pass && !known;
    }
    return failed ? 1 : 0;
}
