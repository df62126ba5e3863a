#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "nsrkit/harness/config.hpp"
#include "nsrkit/harness/corpus.hpp"
#include "nsrkit/harness/evaluation.hpp"
#include "nsrkit/harness/training.hpp"

namespace nsr::harness {

/// File layout of a run directory.
struct RunPaths {
    std::filesystem::path root;

    std::filesystem::path config() const { return root / "config.json"; }
    std::filesystem::path corpus_train() const { return root / "corpus" / "train"; }
    std::filesystem::path corpus_val() const { return root / "corpus" / "val"; }
    std::filesystem::path dae_checkpoint() const { return root / "dae" / "dae.ckpt"; }
    std::filesystem::path dae_log() const { return root / "dae" / "loss.csv"; }
    std::filesystem::path pretrain_checkpoint() const { return root / "pretrain" / "baseline.ckpt"; }
    std::filesystem::path pretrain_log() const { return root / "pretrain" / "loss.csv"; }
    std::filesystem::path model_checkpoint(const std::string& name) const { return root / "models" / (name + ".ckpt"); }
    std::filesystem::path model_log(const std::string& name) const { return root / "models" / (name + ".csv"); }
    std::filesystem::path eval_dir() const { return root / "eval"; }
    std::filesystem::path outputs() const { return root / "eval" / "outputs.bin"; }
};

using Progress = std::function<void(const std::string& phase, const EpochRecord&)>;

/// Creates the run directory and freezes the resolved config into it.
/// A run directory holding a different config is an error.
RunPaths prepare_run(const ExperimentConfig& config);

/// Corpus of the run; procedural images are generated once and kept as PNGs.
Corpus ensure_corpus(const ExperimentConfig& config);

/// Loads the run's DAE, training it first when absent.
std::shared_ptr<const denoise::DaeModel> ensure_dae(const ExperimentConfig& config, const Corpus& corpus,
                                                    const Progress& progress = nullptr);
/// Loads the run's DAE; throws when it has not been trained.
std::shared_ptr<const denoise::DaeModel> load_dae(const ExperimentConfig& config);

/// Loads the clean-pretrained baseline, training it first when absent.
sr::SrNetwork ensure_pretrain(const ExperimentConfig& config, const Corpus& corpus, const Progress& progress = nullptr);

/// Fine-tunes one variant on noisy data and stores it under models/.
/// Returns the model name.
std::string train_variant(const ExperimentConfig& config, const Corpus& corpus, sr::Variant variant,
                          denoise::DenoiserKind denoiser, const Progress& progress = nullptr);

/// The compared models: no-denoiser plus pre-net and
/// in-net with each denoiser.
std::vector<std::pair<sr::Variant, denoise::DenoiserKind>> standard_variants();

/// Evaluates bicubic, no-tuning and the named fine-tuned models (all of
/// models/ when empty) on every test noise. Writes report.txt, report.json,
/// outputs.bin, timings.json and montages into eval/.
EvalReport run_eval(const ExperimentConfig& config, const std::vector<std::string>& models, bool montages = true);

/// Rebuilds report.txt and report.json from eval/outputs.bin.
EvalReport report_from_run(const std::filesystem::path& run_dir);

}  // namespace nsr::harness
