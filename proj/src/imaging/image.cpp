#include "nsrkit/imaging/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace nsr::imaging {

namespace {

std::string dims(std::size_t h, std::size_t w) { return std::to_string(h) + "x" + std::to_string(w); }

void require_same_size(const ImageF& a, const ImageF& b, const char* what) {
    if (a.height != b.height || a.width != b.width) {
        throw std::invalid_argument(std::string(what) + ": image sizes differ (" + dims(a.height, a.width) + " vs " +
                                    dims(b.height, b.width) + ")");
    }
}

// Contributions of input samples to each output sample along one axis.
struct AxisWeights {
    std::size_t taps = 0;
    std::vector<std::size_t> index;  // out * taps + k
    std::vector<double> weight;
};

AxisWeights axis_weights(std::size_t in, std::size_t out) {
    const double scale = static_cast<double>(out) / static_cast<double>(in);
    const double stretch = std::min(scale, 1.0);
    const double support = 2.0 / stretch;
    AxisWeights aw;
    aw.taps = static_cast<std::size_t>(std::ceil(2.0 * support)) + 1;
    aw.index.resize(out * aw.taps);
    aw.weight.resize(out * aw.taps);
    const auto last = static_cast<long>(in) - 1;
    for (std::size_t i = 0; i < out; ++i) {
        const double u = (static_cast<double>(i) + 0.5) / scale - 0.5;
        const long first = static_cast<long>(std::floor(u - support)) + 1;
        double total = 0.0;
        for (std::size_t k = 0; k < aw.taps; ++k) {
            const long j = first + static_cast<long>(k);
            const double w = cubic_kernel(stretch * (u - static_cast<double>(j)));
            aw.index[i * aw.taps + k] = static_cast<std::size_t>(std::clamp(j, 0L, last));
            aw.weight[i * aw.taps + k] = w;
            total += w;
        }
        for (std::size_t k = 0; k < aw.taps; ++k) aw.weight[i * aw.taps + k] /= total;
    }
    return aw;
}

}  // namespace

ImageF::ImageF(std::size_t h, std::size_t w, float fill) : height(h), width(w), data(h * w * channels, fill) {
    if (h == 0 || w == 0) throw std::invalid_argument("image dimensions must be >= 1, got " + dims(h, w));
}

ImageF::ImageF(std::size_t h, std::size_t w, std::vector<float> values) : height(h), width(w), data(std::move(values)) {
    if (h == 0 || w == 0) throw std::invalid_argument("image dimensions must be >= 1, got " + dims(h, w));
    if (data.size() != h * w * channels) {
        throw std::invalid_argument("image " + dims(h, w) + " needs " + std::to_string(h * w * channels) +
                                    " values, got " + std::to_string(data.size()));
    }
}

void clamp_unit(ImageF& img) {
    for (float& v : img.data) v = std::isnan(v) ? 0.0f : std::clamp(v, 0.0f, 1.0f);
}

ImageF load_png(const std::filesystem::path& path) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.c_str())) {
        throw std::runtime_error("cannot read PNG " + path.string() + ": " + png.message);
    }
    if (png.format & PNG_FORMAT_FLAG_LINEAR) {
        png_image_free(&png);
        throw std::runtime_error("unsupported PNG " + path.string() + ": only 8-bit channels are supported");
    }
    png.format = PNG_FORMAT_RGBA;
    std::vector<png_byte> buffer(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
        std::string message = png.message;
        png_image_free(&png);
        throw std::runtime_error("cannot decode PNG " + path.string() + ": " + message);
    }
    ImageF img(png.height, png.width);
    const std::size_t pixels = img.height * img.width;
    for (std::size_t p = 0; p < pixels; ++p)
        for (std::size_t c = 0; c < 3; ++c) img.data[p * 3 + c] = static_cast<float>(buffer[p * 4 + c]) / 255.0f;
    return img;
}

void save_png(const ImageF& img, const std::filesystem::path& path) {
    std::vector<png_byte> buffer(img.data.size());
    for (std::size_t i = 0; i < buffer.size(); ++i) {
        const float v = std::isnan(img.data[i]) ? 0.0f : std::clamp(img.data[i], 0.0f, 1.0f);
        buffer[i] = static_cast<png_byte>(std::lround(v * 255.0f));
    }
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(img.width);
    png.height = static_cast<png_uint_32>(img.height);
    png.format = PNG_FORMAT_RGB;
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    if (!png_image_write_to_file(&png, tmp.c_str(), 0, buffer.data(), 0, nullptr)) {
        std::string message = png.message;
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw std::runtime_error("cannot write PNG " + path.string() + ": " + message);
    }
    std::filesystem::rename(tmp, path);
}

double cubic_kernel(double x) {
    constexpr double a = -0.5;
    x = std::fabs(x);
    if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
    return 0.0;
}

ImageF bicubic_resize(const ImageF& img, std::size_t out_h, std::size_t out_w) {
    if (out_h == 0 || out_w == 0) throw std::invalid_argument("resize target must be >= 1x1");
    const AxisWeights wx = axis_weights(img.width, out_w);
    const AxisWeights wy = axis_weights(img.height, out_h);

    std::vector<double> rows(img.height * out_w * 3, 0.0);
    for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t x = 0; x < out_w; ++x)
            for (std::size_t k = 0; k < wx.taps; ++k) {
                const double w = wx.weight[x * wx.taps + k];
                const float* src = &img.data[(y * img.width + wx.index[x * wx.taps + k]) * 3];
                double* dst = &rows[(y * out_w + x) * 3];
                for (std::size_t c = 0; c < 3; ++c) dst[c] += w * src[c];
            }

    ImageF out(out_h, out_w);
    for (std::size_t y = 0; y < out_h; ++y)
        for (std::size_t x = 0; x < out_w; ++x)
            for (std::size_t c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (std::size_t k = 0; k < wy.taps; ++k)
                    acc += wy.weight[y * wy.taps + k] * rows[(wy.index[y * wy.taps + k] * out_w + x) * 3 + c];
                out.at(y, x, c) = static_cast<float>(std::clamp(acc, 0.0, 1.0));
            }
    return out;
}

ImageF bicubic_downsample(const ImageF& img, std::size_t s) {
    if (s == 0 || img.height % s || img.width % s) {
        throw std::invalid_argument("bicubic_downsample: image " + dims(img.height, img.width) +
                                    " is not divisible by factor " + std::to_string(s));
    }
    return bicubic_resize(img, img.height / s, img.width / s);
}

ImageF bicubic_upsample(const ImageF& img, std::size_t s) {
    if (s == 0) throw std::invalid_argument("bicubic_upsample: factor must be >= 1");
    return bicubic_resize(img, img.height * s, img.width * s);
}

std::vector<PatchPair> sample_patches(const ImageF& img, std::size_t count, std::size_t patch, std::size_t s, Rng& rng) {
    if (s == 0 || patch == 0 || patch % s) {
        throw std::invalid_argument("patch size " + std::to_string(patch) + " is not divisible by scale " + std::to_string(s));
    }
    if (img.height < patch || img.width < patch) {
        throw std::invalid_argument("image " + dims(img.height, img.width) + " is smaller than patch " +
                                    std::to_string(patch));
    }
    std::vector<PatchPair> out;
    out.reserve(count);
    for (std::size_t n = 0; n < count; ++n) {
        PatchPair pair;
        pair.scale = s;
        pair.y = rng.below(img.height - patch + 1);
        pair.x = rng.below(img.width - patch + 1);
        pair.hr = ImageF(patch, patch);
        for (std::size_t y = 0; y < patch; ++y) {
            const float* src = &img.data[((pair.y + y) * img.width + pair.x) * 3];
            std::copy(src, src + patch * 3, &pair.hr.data[y * patch * 3]);
        }
        pair.lr = bicubic_downsample(pair.hr, s);
        out.push_back(std::move(pair));
    }
    return out;
}

double mse(const ImageF& a, const ImageF& b) {
    require_same_size(a, b, "mse");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
        acc += d * d;
    }
    return acc / static_cast<double>(a.data.size());
}

double psnr(const ImageF& a, const ImageF& b) {
    require_same_size(a, b, "psnr");
    const double m = mse(a, b);
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return -10.0 * std::log10(m);
}

std::string format_psnr(double db, int digits) {
    if (std::isinf(db) && db > 0) return "inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, db);
    return buf;
}

Tensor image_to_tensor(const ImageF& img) { return images_to_tensor(std::span<const ImageF>(&img, 1)); }

Tensor images_to_tensor(std::span<const ImageF> imgs) {
    if (imgs.empty()) throw std::invalid_argument("images_to_tensor: empty batch");
    const std::size_t h = imgs[0].height, w = imgs[0].width;
    std::vector<float> values(imgs.size() * 3 * h * w);
    for (std::size_t n = 0; n < imgs.size(); ++n) {
        require_same_size(imgs[0], imgs[n], "images_to_tensor");
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t x = 0; x < w; ++x)
                    values[((n * 3 + c) * h + y) * w + x] = imgs[n].at(y, x, c);
    }
    return Tensor({imgs.size(), 3, h, w}, std::move(values));
}

ImageF tensor_to_image(const Tensor& t, std::size_t index) {
    if (t.rank() != 4 || t.dim(1) != 3) {
        throw std::invalid_argument("tensor_to_image expects [N,3,H,W], got " + shape_str(t.shape()));
    }
    if (index >= t.dim(0)) throw std::out_of_range("tensor_to_image: batch index out of range");
    const std::size_t h = t.dim(2), w = t.dim(3);
    ImageF img(h, w);
    auto src = t.data();
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) img.at(y, x, c) = src[((index * 3 + c) * h + y) * w + x];
    clamp_unit(img);
    return img;
}

}  // namespace nsr::imaging
