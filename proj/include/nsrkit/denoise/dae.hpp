#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "nsrkit/engine/checkpoint.hpp"
#include "nsrkit/engine/layers.hpp"
#include "nsrkit/imaging/image.hpp"

namespace nsr::denoise {

/// Convolutional denoising autoencoder.
///
/// Encoder: three 5x5 conv + ReLU + 2x2 max-pool stages (64, 128, 256
/// channels). Decoder: three nearest-upsample + 5x5 conv stages back to
/// 128, 64 and 3 channels with ReLU between them. The last bias starts at
/// mid-grey so the untrained output sits inside the image range.
class DaeModel {
public:
    static constexpr std::array<std::size_t, 4> kWidths = {3, 64, 128, 256};
    static constexpr std::size_t kKernel = 5;

    explicit DaeModel(std::uint64_t seed);
    DaeModel(DaeModel&&) = default;
    DaeModel& operator=(DaeModel&&) = default;

    DaeModel clone() const;

    /// [N,3,H,W] with H and W divisible by 8. Output is not clamped.
    Tensor forward(const Tensor& x) const;

    ParameterRefs parameters();
    void freeze(bool on = true);
    std::size_t parameter_count() const;
    static std::size_t expected_parameter_count();

    /// Layer shapes, e.g. "enc0=64x3x5x5;...". Stored in checkpoints.
    static std::string architecture();

    Checkpoint to_checkpoint() const;
    static DaeModel from_checkpoint(const Checkpoint& ckpt);
    void save(const std::filesystem::path& path) const;
    static DaeModel load(const std::filesystem::path& path);

    std::array<WnConv, 3>& encoder() { return enc_; }
    std::array<WnConv, 3>& decoder() { return dec_; }

private:
    DaeModel() = default;
    std::array<WnConv, 3> enc_;
    std::array<WnConv, 3> dec_;
};

/// Denoises one image. Sizes not divisible by 8 are reflect-padded and
/// cropped back. Output clamped to [0, 1]. Runs without the gradient tape.
imaging::ImageF dae_forward(const DaeModel& model, const imaging::ImageF& img);

struct DaeBatch {
    Tensor noisy;
    Tensor clean;
};

struct DaeTrainOptions {
    std::size_t epochs = 1;
    std::size_t steps_per_epoch = 1;
    double lr = 1e-4;
    /// Called after each epoch with (epoch index, mean train loss).
    std::function<void(std::size_t, double)> on_epoch = nullptr;
};

/// Minimizes mse(dae(noisy), clean) with Adam. The batch source is called
/// once per step with (epoch, step). Returns the mean loss of every epoch.
std::vector<double> train_dae(DaeModel& model, const std::function<DaeBatch(std::size_t, std::size_t)>& batches,
                              const DaeTrainOptions& options);

/// Fixed training pairs (noisy, clean), visited in a seeded shuffled order
/// in batches of `batch`. steps_per_epoch in options is ignored.
struct DaePair {
    imaging::ImageF noisy;
    imaging::ImageF clean;
};
std::vector<double> train_dae(DaeModel& model, const std::vector<DaePair>& data, std::size_t batch,
                              std::uint64_t seed, const DaeTrainOptions& options);

}  // namespace nsr::denoise
