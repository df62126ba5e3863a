#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "nsrkit/denoise/dae.hpp"
#include "nsrkit/harness/config.hpp"
#include "nsrkit/harness/corpus.hpp"
#include "nsrkit/sr/model.hpp"

namespace nsr::harness {

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_psnr = 0.0;  // mean over validation images; NaN when not measured
};

/// "epoch,train_loss,val_psnr" with 17 significant digits, so equal runs give equal bytes.
void write_loss_csv(const std::vector<EpochRecord>& log, const std::filesystem::path& path);
std::vector<EpochRecord> read_loss_csv(const std::filesystem::path& path);

/// Validation inputs prepared once: per image the clean HR target and the
/// LR inputs to the main and skip paths (already denoised as the variant needs).
struct ValSet {
    std::vector<imaging::ImageF> hr;
    std::vector<Tensor> main_input;
    std::vector<Tensor> skip_input;
};

/// Each validation image is downsampled, corrupted with
/// seed derive_seed(noise.seed, index) and denoised for the variant.
ValSet prepare_val(const std::vector<imaging::ImageF>& val, std::size_t scale, const noise::NoiseSpec& noise,
                   sr::Variant variant, const denoise::Denoiser& denoiser);
double val_psnr(const sr::SrModel& model, const ValSet& val);

struct PhaseOptions {
    std::size_t epochs = 1;
    std::size_t steps_per_epoch = 1;
    std::size_t batch = 8;
    std::size_t patch = 96;
    double lr = 1e-4;
    noise::NoiseSpec noise;             // fresh corruption per step from derive_seed(noise.seed, step)
    std::uint64_t sampling_seed = 0;    // patch positions
    std::filesystem::path checkpoint;   // rewritten after every epoch; last good state on failure
    std::filesystem::path best_checkpoint;
    std::function<void(const EpochRecord&)> on_epoch = nullptr;
};

/// One training phase of an SR network with MAE loss and Adam. Returns the per-epoch log.
std::vector<EpochRecord> train_phase(sr::SrNetwork& net, const std::vector<imaging::ImageF>& train, const ValSet& val,
                                     const PhaseOptions& options);

/// Clean pretraining of the baseline ("no tuning" model).
sr::SrNetwork pretrain_baseline(const ExperimentConfig& config, const Corpus& corpus, std::vector<EpochRecord>* log,
                                const std::filesystem::path& checkpoint,
                                std::function<void(const EpochRecord&)> on_epoch = nullptr);

/// Noisy fine-tuning of a variant, starting from the pretrained weights.
/// Every variant sees the same patch and noise stream.
sr::SrNetwork finetune_variant(const ExperimentConfig& config, const Corpus& corpus, const sr::SrNetwork& pretrained,
                               sr::Variant variant, denoise::Denoiser denoiser, std::vector<EpochRecord>* log,
                               const std::filesystem::path& checkpoint,
                               std::function<void(const EpochRecord&)> on_epoch = nullptr);

/// DAE on LR patches corrupted with the training noise, MSE loss.
denoise::DaeModel train_dae_model(const ExperimentConfig& config, const Corpus& corpus, std::vector<EpochRecord>* log,
                                  std::function<void(const EpochRecord&)> on_epoch = nullptr);

/// Report name of a trained model: "no-denoiser" for the fine-tuned
/// baseline, otherwise "<variant>-<denoiser>" such as "pre-net-median".
std::string model_name(sr::Variant variant, denoise::DenoiserKind denoiser);

}  // namespace nsr::harness
