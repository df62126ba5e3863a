#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nsrkit/engine/random.hpp"
#include "nsrkit/engine/tensor.hpp"

namespace nsr::imaging {

/// RGB float image, row-major HWC, values in [0, 1].
struct ImageF {
    static constexpr std::size_t channels = 3;

    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<float> data;

    ImageF() = default;
    ImageF(std::size_t h, std::size_t w, float fill = 0.0f);
    ImageF(std::size_t h, std::size_t w, std::vector<float> values);

    float& at(std::size_t y, std::size_t x, std::size_t c) { return data[(y * width + x) * channels + c]; }
    float at(std::size_t y, std::size_t x, std::size_t c) const { return data[(y * width + x) * channels + c]; }
    std::size_t size() const { return data.size(); }

    bool operator==(const ImageF&) const = default;
};

/// Clamps every value into [0, 1] in place. NaN becomes 0.
void clamp_unit(ImageF& img);

ImageF load_png(const std::filesystem::path& path);
void save_png(const ImageF& img, const std::filesystem::path& path);

/// Catmull-Rom cubic (a = -0.5).
double cubic_kernel(double x);

/// Bicubic resampling with replicate borders. When shrinking, the kernel is
/// stretched by the scale factor so it also acts as the antialiasing filter.
ImageF bicubic_resize(const ImageF& img, std::size_t out_h, std::size_t out_w);
ImageF bicubic_downsample(const ImageF& img, std::size_t s);
ImageF bicubic_upsample(const ImageF& img, std::size_t s);

struct PatchPair {
    ImageF hr;
    ImageF lr;
    std::size_t scale = 2;
    std::size_t y = 0;  // top-left of the crop in the source image
    std::size_t x = 0;
};

std::vector<PatchPair> sample_patches(const ImageF& img, std::size_t count, std::size_t patch, std::size_t s, Rng& rng);

/// 10 log10(1 / MSE) over all pixels and channels. Identical images give +inf.
double psnr(const ImageF& a, const ImageF& b);
double mse(const ImageF& a, const ImageF& b);

/// "inf" for the identical-image sentinel, otherwise fixed with `digits` decimals.
std::string format_psnr(double db, int digits = 2);

/// HWC image -> [1,3,H,W] tensor.
Tensor image_to_tensor(const ImageF& img);
/// Images of equal size -> [N,3,H,W].
Tensor images_to_tensor(std::span<const ImageF> imgs);
/// Element `index` of an [N,3,H,W] tensor, clamped into [0, 1].
ImageF tensor_to_image(const Tensor& t, std::size_t index = 0);

}  // namespace nsr::imaging
