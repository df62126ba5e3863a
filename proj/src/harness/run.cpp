#include "nsrkit/harness/run.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>

#include "nsrkit/harness/montage.hpp"

namespace nsr::harness {

using imaging::ImageF;
using nlohmann::json;

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

// A phase counts as finished once its loss log exists; checkpoints are
// rewritten every epoch and may belong to an interrupted run.
bool finished(const std::filesystem::path& checkpoint, const std::filesystem::path& log, std::size_t epochs) {
    if (!std::filesystem::exists(checkpoint) || !std::filesystem::exists(log)) return false;
    return read_loss_csv(log).size() == epochs;
}

void report(const Progress& progress, const std::string& phase, const EpochRecord& r) {
    if (progress) progress(phase, r);
}

std::string file_label(std::string s) {
    for (char& c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-') c = '_';
    return s;
}

}  // namespace

RunPaths prepare_run(const ExperimentConfig& config) {
    config.validate();
    RunPaths paths{config.output_dir};
    std::filesystem::create_directories(paths.root);
    if (std::filesystem::exists(paths.config())) {
        const ExperimentConfig frozen = load_config(paths.config());
        if (config_hash(frozen) != config_hash(config))
            throw ConfigError("run directory " + paths.root.string() + " was created with a different config (hash " +
                              config_hash(frozen) + ", now " + config_hash(config) + ")");
        return paths;
    }
    write_text(paths.config(), canonical_config(config));
    return paths;
}

Corpus ensure_corpus(const ExperimentConfig& config) {
    const RunPaths paths = prepare_run(config);
    if (config.corpus.source != "procedural") return make_corpus(config);
    if (std::filesystem::exists(paths.corpus_val()) && list_pngs(paths.corpus_train()).size() == config.train_images &&
        list_pngs(paths.corpus_val()).size() == config.val_images)
        return {load_images(paths.corpus_train()), load_images(paths.corpus_val())};
    Corpus corpus = make_corpus(config);
    save_images(corpus.train, paths.corpus_train());
    save_images(corpus.val, paths.corpus_val());
    return corpus;
}

std::shared_ptr<const denoise::DaeModel> load_dae(const ExperimentConfig& config) {
    const RunPaths paths{config.output_dir};
    if (!finished(paths.dae_checkpoint(), paths.dae_log(), config.dae.epochs))
        throw std::runtime_error("missing DAE checkpoint " + paths.dae_checkpoint().string() +
                                 "; run train-dae with this config first");
    auto model = std::make_shared<denoise::DaeModel>(denoise::DaeModel::load(paths.dae_checkpoint()));
    model->freeze();
    return model;
}

std::shared_ptr<const denoise::DaeModel> ensure_dae(const ExperimentConfig& config, const Corpus& corpus,
                                                    const Progress& progress) {
    const RunPaths paths = prepare_run(config);
    if (finished(paths.dae_checkpoint(), paths.dae_log(), config.dae.epochs)) return load_dae(config);
    std::vector<EpochRecord> log;
    auto model = std::make_shared<denoise::DaeModel>(
        train_dae_model(config, corpus, &log, [&](const EpochRecord& r) { report(progress, "dae", r); }));
    std::filesystem::create_directories(paths.dae_checkpoint().parent_path());
    model->save(paths.dae_checkpoint());
    write_loss_csv(log, paths.dae_log());
    return model;
}

sr::SrNetwork ensure_pretrain(const ExperimentConfig& config, const Corpus& corpus, const Progress& progress) {
    const RunPaths paths = prepare_run(config);
    if (finished(paths.pretrain_checkpoint(), paths.pretrain_log(), config.sr.pretrain_epochs))
        return sr::SrNetwork::load(paths.pretrain_checkpoint());
    std::filesystem::create_directories(paths.pretrain_checkpoint().parent_path());
    std::vector<EpochRecord> log;
    sr::SrNetwork net = pretrain_baseline(config, corpus, &log, paths.pretrain_checkpoint(),
                                          [&](const EpochRecord& r) { report(progress, "pretrain", r); });
    write_loss_csv(log, paths.pretrain_log());
    return net;
}

std::string train_variant(const ExperimentConfig& config, const Corpus& corpus, sr::Variant variant,
                          denoise::DenoiserKind kind, const Progress& progress) {
    const RunPaths paths = prepare_run(config);
    const std::string name = model_name(variant, kind);
    denoise::Denoiser denoiser;
    if (variant != sr::Variant::baseline) {
        denoise::DenoiserSpec spec{kind, config.denoiser_window, {}};
        if (kind == denoise::DenoiserKind::dae) {
            spec.dae_checkpoint = paths.dae_checkpoint().string();
            denoiser = denoise::Denoiser(spec, load_dae(config));
        } else {
            denoiser = denoise::Denoiser(spec);
        }
    }
    const sr::SrNetwork pretrained = ensure_pretrain(config, corpus, progress);
    std::filesystem::create_directories(paths.model_checkpoint(name).parent_path());
    std::vector<EpochRecord> log;
    finetune_variant(config, corpus, pretrained, variant, std::move(denoiser), &log, paths.model_checkpoint(name),
                     [&](const EpochRecord& r) { report(progress, name, r); });
    write_loss_csv(log, paths.model_log(name));
    return name;
}

std::vector<std::pair<sr::Variant, denoise::DenoiserKind>> standard_variants() {
    using K = denoise::DenoiserKind;
    using V = sr::Variant;
    return {{V::baseline, K::identity}, {V::pre_net, K::median}, {V::pre_net, K::wiener}, {V::pre_net, K::dae},
            {V::in_net, K::median},     {V::in_net, K::wiener},  {V::in_net, K::dae}};
}

EvalReport run_eval(const ExperimentConfig& config, const std::vector<std::string>& requested, bool montages) {
    const RunPaths paths = prepare_run(config);
    const Corpus corpus = ensure_corpus(config);

    std::vector<std::string> names = requested;
    if (names.empty()) {
        for (const auto& [variant, kind] : standard_variants()) {
            const std::string n = model_name(variant, kind);
            if (std::filesystem::exists(paths.model_log(n))) names.push_back(n);
        }
    }
    if (!std::filesystem::exists(paths.pretrain_log()))
        throw std::runtime_error("no pretrained baseline in " + paths.root.string() + "; run train-sr first");

    std::vector<std::shared_ptr<const sr::SrNetwork>> nets;
    std::vector<ModelEntry> entries{bicubic_entry(config.scale)};
    auto add = [&](const std::string& name, const std::filesystem::path& ckpt) {
        if (!std::filesystem::exists(ckpt)) throw std::runtime_error("model '" + name + "' not found at " + ckpt.string());
        auto net = std::make_shared<const sr::SrNetwork>(sr::SrNetwork::load(ckpt));
        if (net->model.config().scale != config.scale)
            throw std::runtime_error("model '" + name + "' has scale " + std::to_string(net->model.config().scale) +
                                     ", config says " + std::to_string(config.scale));
        entries.push_back({name, [net](const ImageF& lr) { return net->upscale(lr); }});
    };
    add("no-tuning", paths.pretrain_checkpoint());
    for (const auto& n : names) add(n, paths.model_checkpoint(n));

    EvalOutputs outputs;
    EvalReport report = evaluate(entries, config.test_noise, corpus.val, config.scale, config_hash(config), &outputs);
    write_report(report, paths.eval_dir());
    save_outputs(report, outputs, paths.outputs());
    write_text(paths.eval_dir() / "timings.json",
               json{{"evaluate_seconds", report.runtime_seconds}, {"images", corpus.val.size()}}.dump(2) + "\n");

    if (montages) {
        for (const auto& spec : config.test_noise) {
            const auto dir = paths.eval_dir() / "montage" / file_label(spec.label());
            for (std::size_t i = 0; i < corpus.val.size(); ++i) {
                std::vector<LabeledImage> recon;
                for (const auto& e : entries) recon.push_back({e.name, outputs.images.at({e.name, spec.label()})[i]});
                char file[32];
                std::snprintf(file, sizeof file, "%04zu.png", i);
                emit_montage(corpus.val[i], eval_input(corpus.val[i], config.scale, spec, i), recon, dir / file);
            }
        }
    }
    return report;
}

EvalReport report_from_run(const std::filesystem::path& run_dir) {
    const RunPaths paths{run_dir};
    if (!std::filesystem::exists(paths.outputs()))
        throw std::runtime_error("no evaluation outputs in " + run_dir.string() + "; run eval first");
    EvalReport report = recompute_report(paths.outputs());
    write_report(report, paths.eval_dir());
    return report;
}

}  // namespace nsr::harness
