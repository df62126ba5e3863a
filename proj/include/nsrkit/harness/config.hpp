#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nsrkit/noise/noise.hpp"
#include "nsrkit/sr/model.hpp"

namespace nsr::harness {

/// Raised for invalid configuration files: bad JSON, unknown keys, bad values.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct CorpusConfig {
    std::string source = "procedural";  // or "directory"
    std::size_t image_size = 96;        // procedural only
    std::filesystem::path directory;    // directory only: train/ and val/ subfolders of PNGs
};

struct TrainingConfig {
    double lr = 1e-4;
    std::size_t batch = 8;
    std::size_t pretrain_epochs = 100;
    std::size_t finetune_epochs = 100;
    std::size_t steps_per_epoch = 2;
};

struct DaeConfig {
    double lr = 1e-4;
    std::size_t batch = 8;
    std::size_t epochs = 80;
    std::size_t steps_per_epoch = 3;
    std::size_t patch = 64;  // HR patch side; the DAE sees the LR half
};

struct Seeds {
    std::uint64_t corpus = 1;
    std::uint64_t noise = 2;
    std::uint64_t init = 3;
    std::uint64_t sampling = 4;
};

struct ExperimentConfig {
    std::filesystem::path output_dir = "runs/desk";
    CorpusConfig corpus;
    std::size_t train_images = 64;
    std::size_t val_images = 8;
    std::size_t scale = 2;
    std::size_t patch = 96;
    noise::NoiseSpec train_noise{noise::NoiseKind::gaussian, 0.1, 0};
    std::vector<noise::NoiseSpec> test_noise;
    std::size_t blocks = 2;
    std::size_t filters = 16;
    std::size_t expansion = 4;
    std::size_t denoiser_window = 5;
    TrainingConfig sr;
    DaeConfig dae;
    Seeds seeds;

    void validate() const;

    /// Model config for a variant; rgb_mean is filled in by the trainer.
    sr::SrConfig model_config(sr::Variant variant, denoise::DenoiserKind denoiser) const;
};

/// Defaults: the desk-scale experiment with the four test noises.
ExperimentConfig default_config();

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical serialization used for hashing and the frozen run copy.
std::string canonical_config(const ExperimentConfig& config);
/// FNV-1a 64 of the canonical config, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace nsr::harness
