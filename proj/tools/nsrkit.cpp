// nsrkit: corpus generation, degradation, training, evaluation and inference.
// Exit codes: 0 success, 1 usage or config error, 2 runtime failure.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>

#include "nsrkit/harness/run.hpp"

namespace {

using namespace nsr;
using namespace nsr::harness;

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

void print_epoch(const std::string& phase, const EpochRecord& r) {
    if (std::isnan(r.val_psnr))
        std::fprintf(stderr, "[%s] epoch %zu  loss %.6f\n", phase.c_str(), r.epoch, r.train_loss);
    else
        std::fprintf(stderr, "[%s] epoch %zu  loss %.6f  val %s dB\n", phase.c_str(), r.epoch, r.train_loss,
                     imaging::format_psnr(r.val_psnr).c_str());
}

template <typename Parse>
auto parse_or_usage(Parse&& parse, const std::string& what) {
    try {
        return parse();
    } catch (const std::exception& e) {
        throw UsageError(what + ": " + e.what());
    }
}

void cmd_gen_corpus(const std::string& config_path) {
    const ExperimentConfig config = load_config(config_path);
    const Corpus corpus = ensure_corpus(config);
    std::printf("%zu train and %zu validation images in %s\n", corpus.train.size(), corpus.val.size(),
                config.output_dir.string().c_str());
}

void cmd_degrade(const std::filesystem::path& in, const std::string& noise_text, const std::filesystem::path& out) {
    const auto spec = parse_or_usage([&] { return noise::NoiseSpec::parse(noise_text); }, "--noise");
    if (std::filesystem::is_directory(in)) {
        const auto files = list_pngs(in);
        std::filesystem::create_directories(out);
        for (std::size_t i = 0; i < files.size(); ++i) {
            noise::NoiseSpec s = spec;
            s.seed = derive_seed(spec.seed, i);
            imaging::save_png(noise::corrupt(imaging::load_png(files[i]), s), out / files[i].filename());
        }
        std::printf("degraded %zu images with %s\n", files.size(), spec.str().c_str());
        return;
    }
    if (!std::filesystem::exists(in)) throw UsageError("--in: " + in.string() + " does not exist");
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    imaging::save_png(noise::corrupt(imaging::load_png(in), spec), out);
}

void cmd_train_dae(const std::string& config_path) {
    const ExperimentConfig config = load_config(config_path);
    const Corpus corpus = ensure_corpus(config);
    ensure_dae(config, corpus, print_epoch);
    std::printf("DAE checkpoint: %s\n", RunPaths{config.output_dir}.dae_checkpoint().string().c_str());
}

void cmd_train_sr(const std::string& config_path, const std::string& variant_text, const std::string& denoiser_text,
                  bool all) {
    const ExperimentConfig config = load_config(config_path);
    std::vector<std::pair<sr::Variant, denoise::DenoiserKind>> jobs;
    if (all) {
        jobs = standard_variants();
    } else {
        jobs.emplace_back(parse_or_usage([&] { return sr::parse_variant(variant_text); }, "--variant"),
                          parse_or_usage([&] { return denoise::parse_kind(denoiser_text); }, "--denoiser"));
    }
    const Corpus corpus = ensure_corpus(config);
    for (const auto& [variant, kind] : jobs) {
        if (kind == denoise::DenoiserKind::dae && variant != sr::Variant::baseline && all)
            ensure_dae(config, corpus, print_epoch);
        const std::string name = train_variant(config, corpus, variant, kind, print_epoch);
        std::printf("%s: %s\n", name.c_str(), RunPaths{config.output_dir}.model_checkpoint(name).string().c_str());
    }
}

void cmd_eval(const std::string& config_path, const std::vector<std::string>& models, bool montage) {
    const ExperimentConfig config = load_config(config_path);
    const EvalReport report = run_eval(config, models, montage);
    std::cout << report_to_text(report);
}

void cmd_sr(const std::filesystem::path& model, const std::filesystem::path& in, const std::filesystem::path& out) {
    if (!std::filesystem::exists(model)) throw UsageError("--model: " + model.string() + " does not exist");
    if (!std::filesystem::exists(in)) throw UsageError("--in: " + in.string() + " does not exist");
    const sr::SrNetwork net = sr::SrNetwork::load(model);
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    imaging::save_png(net.upscale(imaging::load_png(in)), out);
}

void cmd_report(const std::filesystem::path& run) {
    std::cout << report_to_text(report_from_run(run));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint denoising and super-resolution toolkit"};
    app.require_subcommand(1);

    std::string config, noise_text, variant = "baseline", denoiser = "identity";
    std::filesystem::path in, out, model, run;
    std::vector<std::string> models;
    bool all = false, no_montage = false;

    auto* gen = app.add_subcommand("gen-corpus", "Generate or load the corpus of a run");
    gen->add_option("--config", config, "Experiment config (JSON)")->required();

    auto* degrade = app.add_subcommand("degrade", "Corrupt an image or a directory of PNGs");
    degrade->add_option("--in", in, "Input PNG or directory")->required();
    degrade->add_option("--noise", noise_text, "kind:param:seed, e.g. gaussian:0.1:7")->required();
    degrade->add_option("--out", out, "Output PNG or directory")->required();

    auto* dae = app.add_subcommand("train-dae", "Train the denoising autoencoder");
    dae->add_option("--config", config, "Experiment config (JSON)")->required();

    auto* train = app.add_subcommand("train-sr", "Pretrain (once) and fine-tune an SR model");
    train->add_option("--config", config, "Experiment config (JSON)")->required();
    train->add_option("--variant", variant, "baseline | pre-net | in-net");
    train->add_option("--denoiser", denoiser, "identity | median | wiener | dae");
    train->add_flag("--all", all, "Train no-denoiser and every pre-net and in-net denoiser combination");

    auto* eval = app.add_subcommand("eval", "Evaluate trained models on the test noises");
    eval->add_option("--config", config, "Experiment config (JSON)")->required();
    eval->add_option("--models", models, "Model names (default: all trained)")->delimiter(',');
    eval->add_flag("--no-montage", no_montage, "Skip montage PNGs");

    auto* srcmd = app.add_subcommand("sr", "Upscale one image with a trained model");
    srcmd->add_option("--model", model, "SR checkpoint")->required();
    srcmd->add_option("--in", in, "Input PNG")->required();
    srcmd->add_option("--out", out, "Output PNG")->required();

    auto* rep = app.add_subcommand("report", "Rebuild the report of a run from stored outputs");
    rep->add_option("--run", run, "Run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*gen) cmd_gen_corpus(config);
        else if (*degrade) cmd_degrade(in, noise_text, out);
        else if (*dae) cmd_train_dae(config);
        else if (*train) cmd_train_sr(config, variant, denoiser, all);
        else if (*eval) cmd_eval(config, models, !no_montage);
        else if (*srcmd) cmd_sr(model, in, out);
        else if (*rep) cmd_report(run);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "nsrkit: %s\n", e.what());
        return 1;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "nsrkit: config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "nsrkit: %s\n", e.what());
        return 2;
    }
    return 0;
}
