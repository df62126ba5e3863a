#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nsrkit/denoise/denoiser.hpp"
#include "nsrkit/engine/layers.hpp"

namespace nsr::sr {

enum class Variant { baseline, pre_net, in_net };

/// Names as used on the command line: baseline, pre-net, in-net.
std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);

struct SrConfig {
    std::size_t scale = 2;
    std::size_t blocks = 2;
    std::size_t filters = 16;
    std::size_t expansion = 4;
    Variant variant = Variant::baseline;
    denoise::DenoiserSpec denoiser;
    std::array<float, 3> rgb_mean = {0.5f, 0.5f, 0.5f};

    /// Also forces the denoiser of a baseline config to identity.
    void normalize();
    void validate() const;
    bool operator==(const SrConfig&) const = default;
};

nlohmann::json config_to_json(const SrConfig& config);
/// Unknown keys are errors.
SrConfig config_from_json(const nlohmann::json& j);

/// WDSR-style network.
///
/// Main path: head conv 3->F (3x3), B residual blocks of
/// conv F->eF (3x3), ReLU, conv eF->F (3x3) plus identity, tail conv
/// F->3s^2 (3x3), pixel shuffle. Skip path: conv 3->3s^2 (5x5), pixel
/// shuffle. Every conv is weight-normalized. rgb_mean is removed from the
/// inputs and added back to the sum of both paths.
/// A fresh model is a bicubic upscaler plus a small random main-path term:
/// the skip conv starts as the bicubic kernel and the tail weights are scaled
/// by kTailInitGain. Every conv still has g == ||v|| at init.
inline constexpr double kTailInitGain = 0.01;

template <typename T>
class BasicSrModel {
public:
    struct Block {
        BasicWnConv<T> expand;
        BasicWnConv<T> reduce;
    };

    BasicSrModel(const SrConfig& config, std::uint64_t seed);
    BasicSrModel(BasicSrModel&&) = default;
    BasicSrModel& operator=(BasicSrModel&&) = default;

    BasicSrModel clone() const;
    template <typename U>
    BasicSrModel<U> cast() const;

    const SrConfig& config() const { return config_; }
    void set_rgb_mean(const std::array<float, 3>& mean) { config_.rgb_mean = mean; }

    /// Both inputs are [N,3,h,w] in image range; returns [N,3,sh,sw], unclamped.
    BasicTensor<T> forward_paths(const BasicTensor<T>& main_input, const BasicTensor<T>& skip_input) const;
    BasicTensor<T> main_path(const BasicTensor<T>& centered) const;
    BasicTensor<T> skip_path(const BasicTensor<T>& centered) const;

    /// Trainable SR parameters, in a fixed order.
    BasicParameterRefs<T> parameters();
    std::size_t parameter_count() const;
    static std::size_t expected_parameter_count(const SrConfig& config);

    /// Sets gains and biases of the named group to zero, making its convs output zero.
    void zero_main_path();
    void zero_skip_path();

    BasicWnConv<T> head, tail, skip;
    std::vector<Block> body;

private:
    template <typename U>
    friend class BasicSrModel;
    BasicSrModel() = default;

    SrConfig config_;
};

using SrModel = BasicSrModel<float>;
using SrModel64 = BasicSrModel<double>;

extern template class BasicSrModel<float>;
extern template class BasicSrModel<double>;

template <typename T>
template <typename U>
BasicSrModel<U> BasicSrModel<T>::cast() const {
    BasicSrModel<U> m;
    m.config_ = config_;
    m.head = head.template cast<U>();
    m.tail = tail.template cast<U>();
    m.skip = skip.template cast<U>();
    for (const auto& b : body) m.body.push_back({b.expand.template cast<U>(), b.reduce.template cast<U>()});
    return m;
}

/// Trained model plus the denoiser its variant uses.
struct SrNetwork {
    SrModel model;
    denoise::Denoiser denoiser;

    /// Denoises at image level (outside the tape) as the variant requires,
    /// then runs both paths. x is an [N,3,h,w] batch in image range.
    Tensor forward(const Tensor& x) const;

    /// Single image in, clamped image out, without the tape.
    imaging::ImageF upscale(const imaging::ImageF& lr) const;

    /// Parameter names with their frozen flag, denoiser weights included
    /// under "denoiser.dae.".
    std::vector<std::pair<std::string, bool>> named_parameters() const;

    /// Embeds the config, rgb_mean and any DAE weights.
    void save(const std::filesystem::path& path) const;
    static SrNetwork load(const std::filesystem::path& path);
    Checkpoint to_checkpoint() const;
    static SrNetwork from_checkpoint(const Checkpoint& ckpt);
};

/// Applies the denoiser to each image of an [N,3,h,w] batch.
Tensor denoise_batch(const denoise::Denoiser& denoiser, const Tensor& x);

Tensor forward_baseline(const SrModel& model, const Tensor& x);
Tensor forward_pre_net(const SrModel& model, const denoise::Denoiser& denoiser, const Tensor& x);
Tensor forward_in_net(const SrModel& model, const denoise::Denoiser& denoiser, const Tensor& x);

}  // namespace nsr::sr
