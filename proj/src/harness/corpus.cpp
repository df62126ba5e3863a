#include "nsrkit/harness/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace nsr::harness {

using imaging::ImageF;

namespace {

using Color = std::array<double, 3>;

Color random_color(Rng& rng) { return {rng.uniform(), rng.uniform(), rng.uniform()}; }

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

struct Shape {
    bool ellipse;
    double cx, cy, rx, ry, cos_t, sin_t;
    Color fill, stripe;
    double stripe_period;  // 0 = solid

    bool contains(double x, double y) const {
        const double dx = x - cx, dy = y - cy;
        const double u = (dx * cos_t + dy * sin_t) / rx;
        const double v = (-dx * sin_t + dy * cos_t) / ry;
        return ellipse ? u * u + v * v <= 1.0 : std::fabs(u) <= 1.0 && std::fabs(v) <= 1.0;
    }

    const Color& color_at(double x, double y) const {
        if (stripe_period == 0.0) return fill;
        const double u = (x - cx) * cos_t + (y - cy) * sin_t;
        return std::fmod(std::fabs(u), stripe_period) < stripe_period / 2 ? fill : stripe;
    }
};

ImageF procedural_image(std::size_t size, Rng& rng) {
    const double n = static_cast<double>(size);
    const Color c0 = random_color(rng), c1 = random_color(rng);
    const double g_angle = uniform(rng, 0, 2 * std::numbers::pi);
    const double gx = std::cos(g_angle) / n, gy = std::sin(g_angle) / n;

    const double t_angle = uniform(rng, 0, std::numbers::pi);
    const double t_freq = uniform(rng, 0.04, 0.45) * 2 * std::numbers::pi;
    const double t_amp = uniform(rng, 0.05, 0.25);
    const double t_phase = uniform(rng, 0, 2 * std::numbers::pi);
    const Color t_tint = random_color(rng);
    const double tx = std::cos(t_angle) * t_freq, ty = std::sin(t_angle) * t_freq;

    std::vector<Shape> shapes(3 + rng.below(6));
    for (auto& s : shapes) {
        s.ellipse = rng.uniform() < 0.5;
        s.cx = uniform(rng, 0, n);
        s.cy = uniform(rng, 0, n);
        s.rx = uniform(rng, 3, n / 3);
        s.ry = uniform(rng, 3, n / 3);
        const double theta = rng.uniform() < 0.5 ? 0.0 : uniform(rng, 0, std::numbers::pi);
        s.cos_t = std::cos(theta);
        s.sin_t = std::sin(theta);
        s.fill = random_color(rng);
        s.stripe = random_color(rng);
        s.stripe_period = rng.uniform() < 0.3 ? uniform(rng, 2, 8) : 0.0;
    }

    ImageF img(size, size);
    for (std::size_t y = 0; y < size; ++y)
        for (std::size_t x = 0; x < size; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            const double t = std::clamp(0.5 + (px - n / 2) * gx + (py - n / 2) * gy, 0.0, 1.0);
            const double wave = t_amp * std::sin(tx * px + ty * py + t_phase);
            Color c;
            for (int k = 0; k < 3; ++k) c[k] = (1 - t) * c0[k] + t * c1[k] + wave * (2 * t_tint[k] - 1);
            for (const auto& s : shapes)
                if (s.contains(px, py)) c = s.color_at(px, py);
            for (int k = 0; k < 3; ++k)
                img.at(y, x, k) = static_cast<float>(std::lround(std::clamp(c[k], 0.0, 1.0) * 255.0)) / 255.0f;
        }
    return img;
}

}  // namespace

std::vector<ImageF> generate_corpus(std::size_t n, std::size_t size, std::uint64_t seed) {
    if (size < 8 || size % 8)
        throw std::invalid_argument("corpus image size must be a positive multiple of 8, got " + std::to_string(size));
    std::vector<ImageF> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        Rng rng(derive_seed(seed, k));
        out.push_back(procedural_image(size, rng));
    }
    return out;
}

Corpus make_corpus(const ExperimentConfig& config) {
    Corpus c;
    if (config.corpus.source == "procedural") {
        auto all = generate_corpus(config.train_images + config.val_images, config.corpus.image_size, config.seeds.corpus);
        c.val.assign(std::make_move_iterator(all.begin() + static_cast<long>(config.train_images)),
                     std::make_move_iterator(all.end()));
        all.resize(config.train_images);
        c.train = std::move(all);
        return c;
    }
    c.train = load_images(config.corpus.directory / "train");
    c.val = load_images(config.corpus.directory / "val");
    if (c.train.size() < config.train_images || c.val.size() < config.val_images) {
        throw std::runtime_error("corpus directory " + config.corpus.directory.string() + " holds " +
                                 std::to_string(c.train.size()) + " train and " + std::to_string(c.val.size()) +
                                 " val images, fewer than the configured split");
    }
    c.train.resize(config.train_images);
    c.val.resize(config.val_images);
    return c;
}

void save_images(const std::vector<ImageF>& images, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < images.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "%04zu.png", i);
        imaging::save_png(images[i], dir / name);
    }
}

std::vector<std::filesystem::path> list_pngs(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    return files;
}

std::vector<ImageF> load_images(const std::filesystem::path& dir) {
    std::vector<ImageF> out;
    for (const auto& p : list_pngs(dir)) out.push_back(imaging::load_png(p));
    return out;
}

std::array<float, 3> rgb_mean(const std::vector<ImageF>& images) {
    std::array<double, 3> sum{};
    std::size_t count = 0;
    for (const auto& img : images) {
        for (std::size_t i = 0; i < img.data.size(); ++i) sum[i % 3] += img.data[i];
        count += img.height * img.width;
    }
    if (count == 0) throw std::invalid_argument("rgb_mean of an empty image set");
    return {static_cast<float>(sum[0] / count), static_cast<float>(sum[1] / count), static_cast<float>(sum[2] / count)};
}

}  // namespace nsr::harness
