// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Training runs go to a fresh directory
// (NSR_ACCEPTANCE_DIR, default ./acceptance_runs).

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "image_oracles.hpp"
#include "nsrkit/harness/run.hpp"
#include "oracles.hpp"

using namespace nsr;
using namespace nsr::harness;
using imaging::ImageF;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ImageF random_image(std::size_t h, std::size_t w, std::uint64_t seed) {
    Rng rng(seed);
    ImageF img(h, w);
    for (float& v : img.data) v = static_cast<float>(rng.uniform());
    return img;
}

std::filesystem::path g_root;

ExperimentConfig run_config(const std::string& name) {
    ExperimentConfig c = default_config();
    c.output_dir = g_root / name;
    return c;
}

// ---------------------------------------------------------------------------

Outcome gradient_suite() {
    using T64 = Tensor64;
    using Fn = std::function<T64()>;
    const auto t0 = std::chrono::steady_clock::now();
    std::map<std::string, double> worst;
    std::size_t checked = 0, skipped = 0;
    auto record = [&](const std::string& op, const oracle::GradCheck& r) {
        worst[op] = std::max(worst[op], r.max_rel_error);
        checked += r.checked;
        skipped += r.skipped;
    };
    const int instances = 20;
    for (int inst = 0; inst < instances; ++inst) {
        const std::uint64_t seed = 9000 + inst;
        std::mt19937_64 rng(seed);
        const std::size_t n = 1 + inst % 2, c = 1 + inst % 3;

        T64 a = oracle::random_tensor<double>({n, c, 4, 4}, rng), b = oracle::random_tensor<double>({n, c, 4, 4}, rng);
        record("add", oracle::check_gradients<double>(Fn([&] { return ops::add(a, b); }), {a, b}, seed));
        record("sub", oracle::check_gradients<double>(Fn([&] { return ops::sub(a, b); }), {a, b}, seed));
        record("mul", oracle::check_gradients<double>(Fn([&] { return ops::mul(a, b); }), {a, b}, seed));
        record("scale", oracle::check_gradients<double>(Fn([&] { return ops::scale(a, -1.75); }), {a}, seed));
        record("sum", oracle::check_gradients<double>(Fn([&] { return ops::sum(a); }), {a}, seed));
        std::vector<double> offs(c);
        for (auto& o : offs) o = std::uniform_real_distribution<double>(-1, 1)(rng);
        record("add_channel", oracle::check_gradients<double>(
                                  Fn([&] { return ops::add_channel(a, std::span<const double>(offs)); }), {a}, seed));

        T64 xr = oracle::random_tensor<double>({n, c, 6, 6}, rng);
        for (auto& v : xr.mutable_data()) v += v >= 0 ? 0.05 : -0.05;
        record("relu", oracle::check_gradients<double>(Fn([&] { return ops::relu(xr); }), {xr}, seed));

        T64 x3 = oracle::random_tensor<double>({n, c, 6, 6}, rng), w3 = oracle::random_tensor<double>({2, c, 3, 3}, rng),
            b3 = oracle::random_tensor<double>({2}, rng);
        record("conv2d", oracle::check_gradients<double>(Fn([&] { return ops::conv2d(x3, w3, b3, 1); }), {x3, w3, b3}, seed));
        T64 x5 = oracle::random_tensor<double>({n, c, 6, 6}, rng), w5 = oracle::random_tensor<double>({2, c, 5, 5}, rng),
            b5 = oracle::random_tensor<double>({2}, rng);
        record("conv2d", oracle::check_gradients<double>(Fn([&] { return ops::conv2d(x5, w5, b5, 2); }), {x5, w5, b5}, seed));

        T64 xp({n, c, 6, 6}, 0.0);
        {
            auto d = xp.mutable_data();
            std::vector<std::size_t> perm(d.size());
            for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
            std::shuffle(perm.begin(), perm.end(), rng);
            for (std::size_t i = 0; i < d.size(); ++i) d[perm[i]] = 0.01 * double(i) - 0.5;
        }
        record("max_pool2", oracle::check_gradients<double>(Fn([&] { return ops::max_pool2(xp); }), {xp}, seed));

        T64 xu = oracle::random_tensor<double>({n, c, 3, 3}, rng);
        record("nearest_upsample2", oracle::check_gradients<double>(Fn([&] { return ops::nearest_upsample2(xu); }), {xu}, seed));
        T64 xs = oracle::random_tensor<double>({n, 4 * c, 3, 3}, rng);
        record("pixel_shuffle", oracle::check_gradients<double>(Fn([&] { return ops::pixel_shuffle(xs, 2); }), {xs}, seed));
        T64 xq = oracle::random_tensor<double>({n, c, 4, 6}, rng);
        record("pixel_unshuffle", oracle::check_gradients<double>(Fn([&] { return ops::pixel_unshuffle(xq, 2); }), {xq}, seed));

        T64 v = oracle::random_tensor<double>({3, c, 3, 3}, rng), g = oracle::random_tensor<double>({3}, rng, 0.5, 2.0);
        record("weight_norm", oracle::check_gradients<double>(Fn([&] { return ops::weight_norm(v, g); }), {v, g}, seed));

        T64 p = oracle::random_tensor<double>({n, c, 5, 5}, rng), t = oracle::random_tensor<double>({n, c, 5, 5}, rng, 0.05, 0.5);
        for (std::size_t i = 0; i < t.numel(); ++i) t.mutable_data()[i] = p.data()[i] + (i % 2 ? t.data()[i] : -t.data()[i]);
        Fn ident = [&] { return ops::scale(p, 1.0); };
        record("mae_loss", oracle::check_gradients<double>(ident, {p}, oracle::mae_objective(t), seed));
        record("mse_loss", oracle::check_gradients<double>(ident, {p}, oracle::mse_objective(t), seed));

        sr::SrConfig sc;
        sc.blocks = 2;
        sc.filters = 4;
        sc.expansion = 2;
        const sr::SrModel m32(sc, seed);
        sr::SrModel64 m = m32.cast<double>();
        // Undo the small tail init on v so the finite-difference step stays small relative to it.
        for (auto* q : m.parameters())
            if (q->name == "tail.v")
                for (auto& vi : q->value.mutable_data()) vi /= sr::kTailInitGain;
        const T64 x = oracle::random_tensor<double>({1, 3, 5, 5}, rng, 0.0, 1.0);
        const T64 target = oracle::random_tensor<double>({1, 3, 10, 10}, rng, 0.0, 1.0);
        std::vector<T64> wrt;
        for (auto* q : m.parameters()) wrt.push_back(q->value);
        record("wdsr-tiny", oracle::check_gradients<double>(Fn([&] { return m.forward_paths(x, x); }), wrt,
                                                            oracle::mae_objective(target), seed, 1e-3, 40));
    }
    double max_err = 0.0;
    std::string worst_op;
    for (const auto& [op, e] : worst)
        if (e >= max_err) {
            max_err = e;
            worst_op = op;
        }
    const double secs = seconds_since(t0);
    return {max_err <= 1e-3 && secs < 120.0 && checked > skipped,
            fmt("%zu ops + composite x %d instances, max rel err %.2e (%s), %zu entries checked, %zu kink-skipped, %.1fs",
                worst.size() - 1, instances, max_err, worst_op.c_str(), checked, skipped, secs)};
}

Outcome oracle_equivalence() {
    const int instances = 50;
    double conv = 0, pool = 0, shuf = 0, med = 0, wie = 0, ps = 0;
    for (int inst = 0; inst < instances; ++inst) {
        std::mt19937_64 rng(7000 + inst);
        auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };

        const std::size_t n = pick(1, 2), cin = pick(1, 3), cout = pick(1, 3), k = 2 * pick(0, 2) + 1;
        const std::size_t h = pick(k, 9), w = pick(k, 9), pad = pick(0, k / 2);
        const Tensor x = oracle::random_tensor({n, cin, h, w}, rng), wt = oracle::random_tensor({cout, cin, k, k}, rng),
                     b = oracle::random_tensor({cout}, rng);
        const Tensor got = ops::conv2d(x, wt, b, pad);
        const auto want = oracle::naive_conv2d(x, wt, b, pad);
        for (std::size_t i = 0; i < want.size(); ++i) conv = std::max(conv, std::abs(double(got.data()[i]) - want[i]));

        const Tensor xp = oracle::random_tensor({n, cin, 2 * pick(1, 4), 2 * pick(1, 4)}, rng);
        const auto pool_want = oracle::naive_max_pool2(xp);
        const Tensor pool_got = ops::max_pool2(xp);
        for (std::size_t i = 0; i < pool_want.size(); ++i)
            pool = std::max(pool, double(std::abs(pool_got.data()[i] - pool_want[i])));

        const std::size_t r = pick(1, 3);
        const Tensor xs = oracle::random_tensor({n, cin * r * r, pick(1, 4), pick(1, 4)}, rng);
        const auto shuf_want = oracle::naive_pixel_shuffle(xs, r);
        const Tensor shuf_got = ops::pixel_shuffle(xs, r);
        for (std::size_t i = 0; i < shuf_want.size(); ++i)
            shuf = std::max(shuf, double(std::abs(shuf_got.data()[i] - shuf_want[i])));

        const ImageF img = random_image(pick(6, 14), pick(6, 14), 7500 + inst);
        const std::size_t window = inst % 2 ? 5 : 3;
        med = std::max(med, double(oracle::max_abs_diff(denoise::median_filter(img, window), oracle::oracle_median(img, window))));
        wie = std::max(wie, double(oracle::max_abs_diff(denoise::wiener_filter(img, window), oracle::oracle_wiener(img, window))));

        const ImageF other = random_image(img.height, img.width, 7600 + inst);
        ps = std::max(ps, std::abs(imaging::psnr(img, other) - oracle::oracle_psnr(img, other)));
    }
    const bool pass = conv <= 1e-5 && pool <= 1e-5 && shuf <= 1e-5 && med <= 1e-5 && wie <= 1e-5 && ps <= 1e-9;
    return {pass, fmt("%d instances; max abs diff conv2d %.1e, max_pool2 %.1e, pixel_shuffle %.1e, median %.1e, "
                      "wiener %.1e, psnr %.1e dB",
                      instances, conv, pool, shuf, med, wie, ps)};
}

Outcome noise_statistics() {
    const auto t0 = std::chrono::steady_clock::now();
    const ImageF gray(1000, 1000, 0.5f);
    const ImageF g = noise::corrupt(gray, {noise::NoiseKind::gaussian, 0.04, 11});
    double s = 0, s2 = 0;
    for (std::size_t i = 0; i < g.data.size(); ++i) {
        const double d = double(g.data[i]) - 0.5;
        s += d;
        s2 += d * d;
    }
    const double count = double(g.data.size()), mean = s / count, var = s2 / count - mean * mean;

    const ImageF sp = noise::corrupt(gray, {noise::NoiseKind::salt_pepper, 0.2, 12});
    std::size_t changed = 0, salt = 0;
    for (std::size_t p = 0; p < 1000 * 1000; ++p) {
        if (sp.data[p * 3] == 0.5f) continue;
        ++changed;
        salt += sp.data[p * 3] == 1.0f;
    }
    const double frac = double(changed) / 1e6, ratio = double(salt) / double(changed);

    const ImageF zero(1000, 1000, 0.0f);
    bool zeros = true;
    for (auto kind : {noise::NoiseKind::poisson, noise::NoiseKind::speckle}) {
        const ImageF out = noise::corrupt(zero, {kind, 0.1, 13});
        zeros = zeros && out == zero;
    }
    const double secs = seconds_since(t0);
    const bool pass = std::abs(mean) <= 0.001 && var >= 0.038 && var <= 0.042 && frac >= 0.195 && frac <= 0.205 &&
                      ratio >= 0.48 && ratio <= 0.52 && zeros && secs < 60.0;
    return {pass, fmt("gaussian mean %+.5f var %.5f; s&p changed %.4f salt share %.4f; poisson/speckle zeros %s; %.1fs",
                      mean, var, frac, ratio, zeros ? "exact" : "NOT exact", secs)};
}

Outcome impulse_removal() {
    const ImageF flat(128, 128, 0.5f);
    double worst = 1.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const ImageF noisy = noise::corrupt(flat, {noise::NoiseKind::salt_pepper, 0.2, 300 + seed});
        const ImageF out = denoise::median_filter(noisy, 5);
        std::size_t restored = 0;
        for (std::size_t p = 0; p < 128 * 128; ++p)
            restored += out.data[p * 3] == 0.5f && out.data[p * 3 + 1] == 0.5f && out.data[p * 3 + 2] == 0.5f;
        worst = std::min(worst, double(restored) / (128.0 * 128.0));
    }
    return {worst >= 0.99, fmt("median 5x5 on 128x128 constant image, s&p p=0.2, 5 seeds: worst restored fraction %.4f", worst)};
}

Outcome dae_efficacy() {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentConfig config = run_config("run_a");
    const Corpus corpus = ensure_corpus(config);
    const auto dae = ensure_dae(config, corpus);
    const double train_secs = seconds_since(t0);
    const noise::NoiseSpec spec{noise::NoiseKind::gaussian, 0.1, 2024};
    std::size_t better = 0;
    double noisy_sum = 0, dae_sum = 0;
    for (std::size_t i = 0; i < corpus.val.size(); ++i) {
        const ImageF clean = imaging::bicubic_downsample(corpus.val[i], config.scale);
        const ImageF noisy = eval_input(corpus.val[i], config.scale, spec, i);
        const double before = imaging::mse(noisy, clean), after = imaging::mse(denoise::dae_forward(*dae, noisy), clean);
        better += after < before;
        noisy_sum += before;
        dae_sum += after;
    }
    const std::size_t steps = config.dae.epochs * config.dae.steps_per_epoch;
    const double secs = seconds_since(t0);
    return {better == corpus.val.size() && steps >= 200 && secs < 600.0,
            fmt("%zu steps; DAE better on %zu/%zu validation images; mean MSE noisy %.5f -> DAE %.5f; train %.0fs total %.0fs",
                steps, better, corpus.val.size(), noisy_sum / corpus.val.size(), dae_sum / corpus.val.size(), train_secs,
                secs)};
}

struct GainRun {
    EvalReport report;
    double seconds = 0;
};

// Criterion 6's experiment: clean pretrain, noisy fine-tune, Gaussian test.
GainRun sr_gain_experiment(const std::string& name) {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentConfig config = run_config(name);
    const Corpus corpus = ensure_corpus(config);
    train_variant(config, corpus, sr::Variant::baseline, denoise::DenoiserKind::identity);
    const RunPaths paths{config.output_dir};
    auto net = std::make_shared<const sr::SrNetwork>(sr::SrNetwork::load(paths.model_checkpoint("no-denoiser")));
    const std::vector<ModelEntry> entries{bicubic_entry(config.scale),
                                          {"no-denoiser", [net](const ImageF& lr) { return net->upscale(lr); }}};
    GainRun run{evaluate(entries, {config.test_noise.at(1)}, corpus.val, config.scale, config_hash(config)), 0};
    std::ofstream(paths.root / "gain_report.json") << report_to_json(run.report).dump(2) << "\n";
    run.seconds = seconds_since(t0);
    return run;
}

GainRun g_gain;

Outcome sr_gain() {
    g_gain = sr_gain_experiment("run_a");
    const std::string noise = g_gain.report.noises.at(0);
    const double bic = g_gain.report.cell("bicubic", noise).mean, tuned = g_gain.report.cell("no-denoiser", noise).mean;
    return {tuned - bic >= 1.0 && g_gain.seconds < 1200.0,
            fmt("%s: no-denoiser %.2f dB vs bicubic %.2f dB (gain %+.2f dB); %.0fs", noise.c_str(), tuned, bic, tuned - bic,
                g_gain.seconds)};
}

Outcome generalization_ordering() {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentConfig config = run_config("run_a");
    const Corpus corpus = ensure_corpus(config);
    ensure_dae(config, corpus);
    for (const auto& [variant, kind] : standard_variants())
        if (!std::filesystem::exists(RunPaths{config.output_dir}.model_log(model_name(variant, kind))))
            train_variant(config, corpus, variant, kind);
    const EvalReport r = run_eval(config, {});
    const std::string gauss = config.test_noise.at(1).label(), sp = config.test_noise.at(4).label();
    const double sp_margin = r.cell("pre-net-median", sp).mean - r.cell("no-denoiser", sp).mean;
    const double nd = r.cell("no-denoiser", gauss).mean, pm = r.cell("pre-net-median", gauss).mean;
    double spread = 0, in_min = std::numeric_limits<double>::infinity();
    for (const char* m : {"in-net-median", "in-net-wiener", "in-net-dae"}) {
        const double v = r.cell(m, gauss).mean;
        spread = std::max(spread, std::abs(v - nd));
        in_min = std::min(in_min, v);
    }
    const double secs = seconds_since(t0) + g_gain.seconds;
    const bool pass = sp_margin >= 3.0 && spread <= 1.0 && nd > pm && in_min > pm && secs < 3600.0;
    return {pass, fmt("%s: pre-net-median - no-denoiser %+.2f dB; %s: max |in-net - no-denoiser| %.2f dB, no-denoiser %.2f, "
                      "min in-net %.2f, pre-net-median %.2f; %.0fs",
                      sp.c_str(), sp_margin, gauss.c_str(), spread, nd, in_min, pm, secs)};
}

Outcome identity_equivalence() {
    sr::SrConfig c = default_config().model_config(sr::Variant::baseline, denoise::DenoiserKind::identity);
    const sr::SrModel m(c, 4242);
    const denoise::Denoiser identity;
    NoGradGuard ng;
    std::size_t equal = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        std::mt19937_64 rng(500 + s);
        const Tensor x = oracle::random_tensor({1, 3, 8 + 2 * s, 10}, rng, 0.0, 1.0);
        const Tensor base = sr::forward_baseline(m, x);
        const Tensor pre = sr::forward_pre_net(m, identity, x), in = sr::forward_in_net(m, identity, x);
        const auto bytes = [](const Tensor& t) { return std::string(reinterpret_cast<const char*>(t.data().data()), t.numel() * 4); };
        equal += bytes(pre) == bytes(base) && bytes(in) == bytes(base);
    }
    return {equal == 10, fmt("%zu/10 random inputs bit-identical across baseline, pre-net and in-net", equal)};
}

Outcome determinism() {
    const GainRun again = sr_gain_experiment("run_b");
    const RunPaths a{g_root / "run_a"}, b{g_root / "run_b"};
    const bool logs = file_bytes(a.pretrain_log()) == file_bytes(b.pretrain_log()) &&
                      file_bytes(a.model_log("no-denoiser")) == file_bytes(b.model_log("no-denoiser")) &&
                      !file_bytes(a.model_log("no-denoiser")).empty();
    const bool ckpt = file_bytes(a.model_checkpoint("no-denoiser")) == file_bytes(b.model_checkpoint("no-denoiser"));
    const bool report = file_bytes(a.root / "gain_report.json") == file_bytes(b.root / "gain_report.json");
    return {logs && ckpt && report, fmt("loss logs %s, checkpoints %s, report %s", logs ? "identical" : "DIFFER",
                                        ckpt ? "identical" : "DIFFER", report ? "identical" : "DIFFER")};
}

Outcome round_trips() {
    const auto dir = g_root / "roundtrip";
    std::filesystem::create_directories(dir);

    sr::SrConfig c = default_config().model_config(sr::Variant::in_net, denoise::DenoiserKind::dae);
    c.denoiser.dae_checkpoint = "embedded";
    auto dae = std::make_shared<denoise::DaeModel>(77);
    dae->freeze();
    const sr::SrNetwork net{sr::SrModel(c, 78), denoise::Denoiser(c.denoiser, dae)};
    net.save(dir / "net.ckpt");
    const sr::SrNetwork back = sr::SrNetwork::load(dir / "net.ckpt");
    const bool ckpt_bytes = encode_checkpoint(back.to_checkpoint()) == encode_checkpoint(net.to_checkpoint());
    const ImageF lr = random_image(16, 16, 79);
    const bool ckpt_forward = back.upscale(lr) == net.upscale(lr);
    dae->save(dir / "dae.ckpt");
    const bool dae_bytes = encode_checkpoint(denoise::DaeModel::load(dir / "dae.ckpt").to_checkpoint()) ==
                           encode_checkpoint(dae->to_checkpoint());

    const ImageF img = random_image(37, 23, 80);
    imaging::save_png(img, dir / "img.png");
    const float png_err = oracle::max_abs_diff(imaging::load_png(dir / "img.png"), img);
    const ImageF quant = generate_corpus(1, 32, 81)[0];
    imaging::save_png(quant, dir / "quant.png");
    const bool png_exact = imaging::load_png(dir / "quant.png") == quant;

    std::size_t rejected = 0;
    const char* bad[] = {R"({"typo": 1})", R"({"sr": {"learning_rate": 1e-4}})", R"({"seeds": {"other": 1}})",
                         R"({"model": {"blocks": 2, "depth": 3}})"};
    for (const char* text : bad) {
        std::ofstream(dir / "bad.json") << text;
        try {
            load_config(dir / "bad.json");
        } catch (const ConfigError&) {
            ++rejected;
        }
    }
    const bool pass = ckpt_bytes && ckpt_forward && dae_bytes && png_err <= 1.0f / 255.0f && png_exact && rejected == 4;
    return {pass, fmt("checkpoint %s (SR+DAE), forward %s, DAE %s; png max err %.2e (bound %.2e), quantized %s; "
                      "unknown keys rejected %zu/4",
                      ckpt_bytes ? "bit-exact" : "DIFFERS", ckpt_forward ? "equal" : "DIFFERS",
                      dae_bytes ? "bit-exact" : "DIFFERS", png_err, 1.0 / 255.0, png_exact ? "exact" : "NOT exact",
                      rejected)};
}

}  // namespace

int main() {
    const char* env = std::getenv("NSR_ACCEPTANCE_DIR");
    g_root = env && *env ? std::filesystem::path(env) : std::filesystem::current_path() / "acceptance_runs";
    std::filesystem::remove_all(g_root);
    std::filesystem::create_directories(g_root);

    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    // 6 runs before 9 (which repeats it) and before 5 and 7 (which share its run directory).
    const std::vector<Criterion> order{{1, "gradient suite", gradient_suite},
                                       {2, "oracle equivalence", oracle_equivalence},
                                       {3, "noise statistics", noise_statistics},
                                       {4, "impulse removal", impulse_removal},
                                       {8, "identity-denoiser equivalence", identity_equivalence},
                                       {10, "round trips", round_trips},
                                       {6, "end-to-end SR gain", sr_gain},
                                       {9, "determinism", determinism},
                                       {5, "DAE efficacy", dae_efficacy},
                                       {7, "generalization ordering", generalization_ordering}};
    std::map<int, std::pair<std::string, Outcome>> results;
    for (const auto& c : order) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        std::fprintf(stderr, "  finished criterion %d\n", c.id);
        results[c.id] = {c.name, o};
    }
    int failed = 0;
    for (const auto& [id, r] : results) {
        std::printf("%s %2d %s: %s\n", r.second.pass ? "PASS" : "FAIL", id, r.first.c_str(), r.second.detail.c_str());
        failed += !r.second.pass;
    }
    std::fflush(stdout);
    return failed == 0 ? 0 : 1;
}
