#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "nsrkit/harness/montage.hpp"
#include "nsrkit/harness/run.hpp"

using namespace nsr;
using namespace nsr::harness;
using imaging::ImageF;
using nlohmann::json;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("nsr_harness_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

std::string file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig tiny_config(const std::filesystem::path& dir) {
    ExperimentConfig c = default_config();
    c.output_dir = dir;
    c.corpus.image_size = 32;
    c.train_images = 3;
    c.val_images = 2;
    c.patch = 16;
    c.blocks = 1;
    c.filters = 4;
    c.expansion = 2;
    c.sr.batch = 2;
    c.sr.pretrain_epochs = 1;
    c.sr.finetune_epochs = 1;
    c.sr.steps_per_epoch = 2;
    c.dae.batch = 2;
    c.dae.epochs = 1;
    c.dae.steps_per_epoch = 1;
    c.dae.patch = 16;
    c.test_noise = {{noise::NoiseKind::none, 0.0, 0}, {noise::NoiseKind::gaussian, 0.1, 5}};
    return c;
}

std::vector<float> flat_weights(sr::SrModel& m) {
    std::vector<float> out;
    for (auto* p : m.parameters()) out.insert(out.end(), p->value.data().begin(), p->value.data().end());
    return out;
}

}  // namespace

TEST(Config, UnknownKeysRejectedAtEveryLevel) {
    for (const char* text : {R"({"bogus": 1})", R"({"sr": {"epochs": 3}})", R"({"seeds": {"dae": 1}})",
                             R"({"corpus": {"size": 64}})", R"({"model": {"width": 8}})", R"({"split": {"test": 2}})",
                             R"({"dae": {"loss": "mse"}})", R"({"train_noise": {"kind": "gaussian", "sigma": 1}})"}) {
        EXPECT_THROW(config_from_json(json::parse(text)), ConfigError) << text;
    }
}

TEST(Config, RejectsInvalidValues) {
    EXPECT_THROW(config_from_json(json::parse(R"({"patch": 95})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse(R"({"split": {"train": 0}})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse(R"({"scale": "two"})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse(R"({"seeds": {"init": -1}})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse(R"({"train_noise": "gaussian:-1:0"})")), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, JsonRoundTripIsCanonical) {
    ExperimentConfig c = default_config();
    c.sr.lr = 3e-4;
    c.seeds.noise = 77;
    c.test_noise.push_back({noise::NoiseKind::poisson, 0.05, 9});
    const ExperimentConfig back = config_from_json(config_to_json(c));
    EXPECT_EQ(canonical_config(back), canonical_config(c));
    EXPECT_EQ(config_from_json(json::parse(R"({"train_noise": {"kind": "speckle", "param": 0.2, "seed": 4}})"))
                  .train_noise.str(),
              "speckle:0.2:4");
}

TEST(Config, ShippedDeskConfigEqualsDefaults) {
    const ExperimentConfig desk = load_config(std::filesystem::path(NSRKIT_SOURCE_DIR) / "configs" / "desk.json");
    EXPECT_EQ(config_hash(desk), config_hash(default_config()));
}

TEST(Config, HashIgnoresOutputDirectoryOnly) {
    ExperimentConfig a = default_config(), b = default_config();
    b.output_dir = "elsewhere";
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_EQ(config_hash(a).size(), 16u);
    b.sr.lr = 2e-4;
    EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Corpus, DeterministicQuantizedAndInRange) {
    const auto a = generate_corpus(4, 48, 11), b = generate_corpus(4, 48, 11);
    ASSERT_EQ(a.size(), 4u);
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k], b[k]);
        for (float v : a[k].data) {
            ASSERT_GE(v, 0.0f);
            ASSERT_LE(v, 1.0f);
            ASSERT_FLOAT_EQ(std::round(v * 255.0f) / 255.0f, v);
        }
    }
    EXPECT_NE(generate_corpus(1, 48, 12)[0], a[0]);
}

TEST(Corpus, ImageDependsOnlyOnSeedAndIndex) {
    const auto small = generate_corpus(2, 48, 5), large = generate_corpus(5, 48, 5);
    EXPECT_EQ(small[1], large[1]);
}

TEST(Corpus, ImagesAreDiverse) {
    const auto imgs = generate_corpus(12, 64, 1);
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < imgs.size(); ++i)
        for (std::size_t j = i + 1; j < imgs.size(); ++j, ++pairs) total += imaging::psnr(imgs[i], imgs[j]);
    EXPECT_LT(total / static_cast<double>(pairs), 20.0);
}

TEST(Corpus, InvalidSizeRejected) {
    EXPECT_THROW(generate_corpus(2, 30, 1), std::invalid_argument);
    EXPECT_THROW(generate_corpus(2, 0, 1), std::invalid_argument);
}

TEST(Corpus, PngStorageIsLossless) {
    const auto dir = fresh_dir("corpus_png");
    const auto imgs = generate_corpus(3, 32, 2);
    save_images(imgs, dir);
    const auto back = load_images(dir);
    ASSERT_EQ(back.size(), imgs.size());
    for (std::size_t k = 0; k < imgs.size(); ++k) EXPECT_EQ(back[k], imgs[k]);
    EXPECT_EQ(list_pngs(dir).front().filename(), "0000.png");
}

TEST(LossCsv, RoundTripKeepsEveryBit) {
    const auto dir = fresh_dir("csv");
    std::filesystem::create_directories(dir);
    const std::vector<EpochRecord> log{{0, 0.1234567890123456789, 25.5},
                                       {1, 1.0 / 3.0, std::numeric_limits<double>::infinity()},
                                       {2, 2e-17, std::numeric_limits<double>::quiet_NaN()}};
    write_loss_csv(log, dir / "loss.csv");
    const auto back = read_loss_csv(dir / "loss.csv");
    ASSERT_EQ(back.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(back[i].epoch, log[i].epoch);
        EXPECT_EQ(back[i].train_loss, log[i].train_loss);
    }
    EXPECT_EQ(back[0].val_psnr, 25.5);
    EXPECT_TRUE(std::isinf(back[1].val_psnr));
    EXPECT_TRUE(std::isnan(back[2].val_psnr));
}

TEST(Training, ZeroLearningRateLeavesPretrainedWeights) {
    ExperimentConfig c = tiny_config(fresh_dir("lr0"));
    const Corpus corpus = ensure_corpus(c);
    sr::SrNetwork pre = ensure_pretrain(c, corpus);
    c.sr.lr = 0.0;
    sr::SrNetwork tuned =
        finetune_variant(c, corpus, pre, sr::Variant::pre_net, denoise::Denoiser({denoise::DenoiserKind::median, 5, {}}),
                         nullptr, {});
    EXPECT_EQ(flat_weights(tuned.model), flat_weights(pre.model));
}

TEST(Training, FineTuneChangesWeightsAndStartsFromPretrain) {
    ExperimentConfig c = tiny_config(fresh_dir("ft"));
    const Corpus corpus = ensure_corpus(c);
    sr::SrNetwork pre = ensure_pretrain(c, corpus);
    sr::SrNetwork tuned = finetune_variant(c, corpus, pre, sr::Variant::baseline, {}, nullptr, {});
    EXPECT_NE(flat_weights(tuned.model), flat_weights(pre.model));
    EXPECT_EQ(tuned.model.config().rgb_mean, pre.model.config().rgb_mean);
}

TEST(Training, OneEpochWritesCheckpointLogAndBest) {
    const auto dir = fresh_dir("smoke");
    const ExperimentConfig c = tiny_config(dir);
    const Corpus corpus = ensure_corpus(c);
    const std::string name = train_variant(c, corpus, sr::Variant::in_net, denoise::DenoiserKind::wiener);
    EXPECT_EQ(name, "in-net-wiener");
    const RunPaths paths{dir};
    EXPECT_TRUE(std::filesystem::exists(paths.config()));
    EXPECT_TRUE(std::filesystem::exists(paths.pretrain_checkpoint()));
    EXPECT_TRUE(std::filesystem::exists(dir / "models" / "in-net-wiener.best.ckpt"));
    const auto log = read_loss_csv(paths.model_log(name));
    ASSERT_EQ(log.size(), 1u);
    EXPECT_TRUE(std::isfinite(log[0].train_loss));
    EXPECT_TRUE(std::isfinite(log[0].val_psnr));
    const sr::SrNetwork net = sr::SrNetwork::load(paths.model_checkpoint(name));
    EXPECT_EQ(net.model.config().variant, sr::Variant::in_net);
    EXPECT_EQ(net.denoiser.spec().kind, denoise::DenoiserKind::wiener);
    EXPECT_EQ(net.upscale(corpus.val[0]).width, 64u);
}

TEST(Training, DaeVariantNeedsTrainedDae) {
    const ExperimentConfig c = tiny_config(fresh_dir("nodae"));
    const Corpus corpus = ensure_corpus(c);
    EXPECT_THROW(train_variant(c, corpus, sr::Variant::pre_net, denoise::DenoiserKind::dae), std::runtime_error);
    ensure_dae(c, corpus);
    EXPECT_EQ(train_variant(c, corpus, sr::Variant::pre_net, denoise::DenoiserKind::dae), "pre-net-dae");
    const sr::SrNetwork net = sr::SrNetwork::load(RunPaths{c.output_dir}.model_checkpoint("pre-net-dae"));
    ASSERT_NE(net.denoiser.dae(), nullptr);
}

TEST(Training, RepeatedRunsAreBitIdentical) {
    std::vector<std::string> logs, ckpts;
    for (const char* name : {"rep_a", "rep_b"}) {
        const ExperimentConfig c = tiny_config(fresh_dir(name));
        const Corpus corpus = ensure_corpus(c);
        train_variant(c, corpus, sr::Variant::baseline, denoise::DenoiserKind::identity);
        const RunPaths paths{c.output_dir};
        logs.push_back(file_bytes(paths.pretrain_log()) + file_bytes(paths.model_log("no-denoiser")));
        ckpts.push_back(file_bytes(paths.model_checkpoint("no-denoiser")));
    }
    EXPECT_EQ(logs[0], logs[1]);
    EXPECT_EQ(ckpts[0], ckpts[1]);
}

TEST(Training, DivergenceNamesLastGoodCheckpoint) {
    ExperimentConfig c = tiny_config(fresh_dir("diverge"));
    c.sr.lr = 1e38;
    c.sr.pretrain_epochs = 3;
    const Corpus corpus = ensure_corpus(c);
    const auto ckpt = RunPaths{c.output_dir}.pretrain_checkpoint();
    std::filesystem::create_directories(ckpt.parent_path());
    try {
        pretrain_baseline(c, corpus, nullptr, ckpt);
        FAIL() << "expected divergence";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("last good checkpoint"), std::string::npos) << e.what();
    }
    const sr::SrNetwork last = sr::SrNetwork::load(ckpt);
    sr::SrModel m = last.model.clone();
    for (float w : flat_weights(m)) ASSERT_TRUE(std::isfinite(w));
}

TEST(Run, FrozenConfigGuardsTheDirectory) {
    const auto dir = fresh_dir("frozen");
    ExperimentConfig c = tiny_config(dir);
    prepare_run(c);
    EXPECT_EQ(config_hash(load_config(RunPaths{dir}.config())), config_hash(c));
    prepare_run(c);
    c.seeds.init = 99;
    EXPECT_THROW(prepare_run(c), ConfigError);
}

TEST(Evaluation, BicubicStubMatchesDirectPsnr) {
    const auto val = generate_corpus(3, 32, 4);
    const noise::NoiseSpec none{noise::NoiseKind::none, 0.0, 0};
    const EvalReport r = evaluate({bicubic_entry(2)}, {none}, val, 2, "h");
    const EvalCell& cell = r.cell("bicubic", "none");
    for (std::size_t i = 0; i < val.size(); ++i) {
        const double direct = imaging::psnr(imaging::bicubic_upsample(imaging::bicubic_downsample(val[i], 2), 2), val[i]);
        EXPECT_EQ(cell.per_image[i], direct);
    }
}

TEST(Evaluation, MeanIsArithmeticMeanAndOrderIsModelMajor) {
    const auto val = generate_corpus(4, 32, 6);
    std::vector<ModelEntry> models{bicubic_entry(2), {"median", [](const ImageF& lr) {
                                                          return imaging::bicubic_upsample(denoise::median_filter(lr, 3), 2);
                                                      }}};
    const std::vector<noise::NoiseSpec> noises{{noise::NoiseKind::none, 0, 0}, {noise::NoiseKind::salt_pepper, 0.2, 3}};
    const EvalReport r = evaluate(models, noises, val, 2, "h");
    ASSERT_EQ(r.cells.size(), 4u);
    EXPECT_EQ(r.cells[0].model, "bicubic");
    EXPECT_EQ(r.cells[1].noise, "salt_pepper 0.2");
    EXPECT_EQ(r.cells[2].model, "median");
    for (const auto& c : r.cells) {
        double s = 0.0;
        for (double v : c.per_image) s += v;
        EXPECT_NEAR(c.mean, s / static_cast<double>(c.per_image.size()), 1e-9);
    }
    EXPECT_GT(r.cell("median", "salt_pepper 0.2").mean, r.cell("bicubic", "salt_pepper 0.2").mean);
}

TEST(Evaluation, InputNoiseSeededPerImage) {
    const auto val = generate_corpus(2, 32, 6);
    const noise::NoiseSpec g{noise::NoiseKind::gaussian, 0.1, 8};
    EXPECT_EQ(eval_input(val[0], 2, g, 0), eval_input(val[0], 2, g, 0));
    EXPECT_NE(eval_input(val[0], 2, g, 0), eval_input(val[0], 2, g, 1));
}

TEST(Evaluation, RecomputedReportMatchesOriginal) {
    const auto dir = fresh_dir("recompute");
    const auto val = generate_corpus(3, 32, 9);
    std::vector<ModelEntry> models{bicubic_entry(2), {"wiener", [](const ImageF& lr) {
                                                          return imaging::bicubic_upsample(denoise::wiener_filter(lr, 5), 2);
                                                      }}};
    const std::vector<noise::NoiseSpec> noises{{noise::NoiseKind::gaussian, 0.05, 1}, {noise::NoiseKind::speckle, 0.1, 2}};
    EvalOutputs outputs;
    const EvalReport r = evaluate(models, noises, val, 2, "abc", &outputs);
    std::filesystem::create_directories(dir);
    save_outputs(r, outputs, dir / "outputs.bin");
    const EvalReport back = recompute_report(dir / "outputs.bin");
    EXPECT_EQ(back.models, r.models);
    EXPECT_EQ(back.noises, r.noises);
    EXPECT_EQ(back.config_hash, "abc");
    ASSERT_EQ(back.cells.size(), r.cells.size());
    for (std::size_t k = 0; k < r.cells.size(); ++k) {
        EXPECT_NEAR(back.cells[k].mean, r.cells[k].mean, 1e-9);
        for (std::size_t i = 0; i < val.size(); ++i) EXPECT_NEAR(back.cells[k].per_image[i], r.cells[k].per_image[i], 1e-9);
    }
    EXPECT_EQ(report_to_json(back).dump(), report_to_json(r).dump());
}

TEST(Evaluation, JsonWritesInfiniteAsString) {
    EvalReport r;
    r.config_hash = "x";
    r.models = {"m"};
    r.noises = {"none"};
    r.cells.push_back({"m", "none", {std::numeric_limits<double>::infinity(), 30.0}, std::numeric_limits<double>::infinity()});
    const json j = report_to_json(r);
    EXPECT_EQ(j["cells"][0]["mean_psnr"], "inf");
    const EvalReport back = report_from_json(j);
    EXPECT_TRUE(std::isinf(back.cells[0].mean));
    EXPECT_EQ(back.cells[0].per_image[1], 30.0);
    EXPECT_NE(report_to_text(r).find("inf"), std::string::npos);
}

TEST(Evaluation, TextTableHasNoiseRowsAndModelColumns) {
    const auto val = generate_corpus(2, 32, 3);
    const EvalReport r = evaluate({bicubic_entry(2)},
                                  {{noise::NoiseKind::none, 0, 0}, {noise::NoiseKind::poisson, 0.1, 1}}, val, 2, "h");
    const std::string text = report_to_text(r);
    std::istringstream in(text);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    ASSERT_EQ(lines.size(), 6u);
    EXPECT_NE(lines[2].find("bicubic"), std::string::npos);
    EXPECT_EQ(lines[4].rfind("none", 0), 0u);
    EXPECT_EQ(lines[5].rfind("poisson 0.1", 0), 0u);
    EXPECT_NE(lines[5].find(imaging::format_psnr(r.cell("bicubic", "poisson 0.1").mean)), std::string::npos);
}

TEST(Evaluation, TinyRunProducesAllArtifacts) {
    const auto dir = fresh_dir("evalrun");
    const ExperimentConfig c = tiny_config(dir);
    const Corpus corpus = ensure_corpus(c);
    train_variant(c, corpus, sr::Variant::pre_net, denoise::DenoiserKind::median);
    const EvalReport r = run_eval(c, {});
    EXPECT_EQ(r.models, (std::vector<std::string>{"bicubic", "no-tuning", "pre-net-median"}));
    EXPECT_EQ(r.config_hash, config_hash(c));
    const RunPaths paths{dir};
    for (const char* f : {"report.txt", "report.json", "outputs.bin", "timings.json"})
        EXPECT_TRUE(std::filesystem::exists(paths.eval_dir() / f)) << f;
    EXPECT_TRUE(std::filesystem::exists(paths.eval_dir() / "montage" / "gaussian_0.1" / "0001.png"));
    EXPECT_EQ(json::parse(file_bytes(paths.eval_dir() / "report.json")).count("runtime_seconds"), 0u);
    const std::string first = file_bytes(paths.eval_dir() / "report.json");
    report_from_run(dir);
    EXPECT_EQ(file_bytes(paths.eval_dir() / "report.json"), first);
    EXPECT_THROW(run_eval(c, {"in-net-dae"}, false), std::runtime_error);
}

TEST(Montage, WidthIsPanelsPlusGutters) {
    const ImageF a(20, 24, 0.25f), b(20, 24, 0.75f);
    const ImageF m = compose_montage({{"a", a}, {"b", b}});
    EXPECT_EQ(m.width, 2u * 24 + 4);
    EXPECT_EQ(m.height, 20u + 11);
    EXPECT_EQ(compose_montage({{"a", a}}).width, 24u);
    EXPECT_EQ(compose_montage({{"a", a}, {"b", b}, {"c", a}}, {.gutter = 2, .label_height = 0}).width, 3u * 24 + 4);
}

TEST(Montage, PanelPixelsSitAtComputedOffsets) {
    const auto imgs = generate_corpus(3, 32, 17);
    std::vector<LabeledImage> panels{{"one", imgs[0]}, {"two", imgs[1]}, {"three", imgs[2]}};
    const MontageLayout layout{.gutter = 5, .label_height = 11};
    const ImageF m = compose_montage(panels, layout);
    for (std::size_t k = 0; k < panels.size(); ++k) {
        const std::size_t x0 = k * (32 + layout.gutter);
        for (std::size_t y = 0; y < 32; ++y)
            for (std::size_t x = 0; x < 32; ++x)
                for (std::size_t c = 0; c < 3; ++c) ASSERT_EQ(m.at(y, x0 + x, c), panels[k].image.at(y, x, c));
        if (k + 1 < panels.size()) {
            for (std::size_t y = 0; y < 32; ++y)
                for (std::size_t g = 0; g < layout.gutter; ++g) ASSERT_EQ(m.at(y, x0 + 32 + g, 0), 1.0f);
        }
    }
    bool ink = false;
    for (std::size_t y = 32; y < m.height; ++y)
        for (std::size_t x = 0; x < 32; ++x) ink = ink || m.at(y, x, 0) == 0.0f;
    EXPECT_TRUE(ink);
}

TEST(Montage, EmitIsDeterministicAndChecksSizes) {
    const auto dir = fresh_dir("montage");
    const auto imgs = generate_corpus(2, 32, 3);
    const ImageF lr = imaging::bicubic_downsample(imgs[0], 2);
    const ImageF m = emit_montage(imgs[0], lr, {{"recon", imgs[1]}}, dir / "a.png");
    emit_montage(imgs[0], lr, {{"recon", imgs[1]}}, dir / "b.png");
    EXPECT_EQ(file_bytes(dir / "a.png"), file_bytes(dir / "b.png"));
    EXPECT_EQ(m.width, 3u * 32 + 2 * 4);
    EXPECT_EQ(m.at(5, 32 + 4 + 3, 1), lr.at(2, 1, 1));
    EXPECT_THROW(emit_montage(imgs[0], lr, {{"small", lr}}, {}), std::invalid_argument);
    EXPECT_THROW(emit_montage(imgs[0], ImageF(5, 16), {}, {}), std::invalid_argument);
}

TEST(Montage, TextUsesBlackInkOnly) {
    ImageF img(9, 40, 1.0f);
    draw_text(img, 1, 1, "ab-9?~");
    for (float v : img.data) ASSERT_TRUE(v == 0.0f || v == 1.0f);
    ImageF q(9, 8, 1.0f), tilde(9, 8, 1.0f);
    draw_text(q, 1, 1, "?");
    draw_text(tilde, 1, 1, "~");
    EXPECT_EQ(q, tilde);
}
