#include "nsrkit/harness/montage.hpp"

#include <array>
#include <cctype>
#include <stdexcept>

namespace nsr::harness {

using imaging::ImageF;

namespace {

struct Glyph {
    char c;
    std::array<unsigned char, 7> rows;  // 5 bits per row, MSB on the left
};

// clang-format off
constexpr Glyph kFont[] = {
    {'A', {0x0E,0x11,0x11,0x1F,0x11,0x11,0x11}}, {'B', {0x1E,0x11,0x11,0x1E,0x11,0x11,0x1E}},
    {'C', {0x0E,0x11,0x10,0x10,0x10,0x11,0x0E}}, {'D', {0x1E,0x11,0x11,0x11,0x11,0x11,0x1E}},
    {'E', {0x1F,0x10,0x10,0x1E,0x10,0x10,0x1F}}, {'F', {0x1F,0x10,0x10,0x1E,0x10,0x10,0x10}},
    {'G', {0x0E,0x11,0x10,0x17,0x11,0x11,0x0F}}, {'H', {0x11,0x11,0x11,0x1F,0x11,0x11,0x11}},
    {'I', {0x0E,0x04,0x04,0x04,0x04,0x04,0x0E}}, {'J', {0x07,0x02,0x02,0x02,0x02,0x12,0x0C}},
    {'K', {0x11,0x12,0x14,0x18,0x14,0x12,0x11}}, {'L', {0x10,0x10,0x10,0x10,0x10,0x10,0x1F}},
    {'M', {0x11,0x1B,0x15,0x15,0x11,0x11,0x11}}, {'N', {0x11,0x11,0x19,0x15,0x13,0x11,0x11}},
    {'O', {0x0E,0x11,0x11,0x11,0x11,0x11,0x0E}}, {'P', {0x1E,0x11,0x11,0x1E,0x10,0x10,0x10}},
    {'Q', {0x0E,0x11,0x11,0x11,0x15,0x12,0x0D}}, {'R', {0x1E,0x11,0x11,0x1E,0x14,0x12,0x11}},
    {'S', {0x0F,0x10,0x10,0x0E,0x01,0x01,0x1E}}, {'T', {0x1F,0x04,0x04,0x04,0x04,0x04,0x04}},
    {'U', {0x11,0x11,0x11,0x11,0x11,0x11,0x0E}}, {'V', {0x11,0x11,0x11,0x11,0x11,0x0A,0x04}},
    {'W', {0x11,0x11,0x11,0x15,0x15,0x15,0x0A}}, {'X', {0x11,0x11,0x0A,0x04,0x0A,0x11,0x11}},
    {'Y', {0x11,0x11,0x0A,0x04,0x04,0x04,0x04}}, {'Z', {0x1F,0x01,0x02,0x04,0x08,0x10,0x1F}},
    {'0', {0x0E,0x11,0x13,0x15,0x19,0x11,0x0E}}, {'1', {0x04,0x0C,0x04,0x04,0x04,0x04,0x0E}},
    {'2', {0x0E,0x11,0x01,0x02,0x04,0x08,0x1F}}, {'3', {0x1F,0x02,0x04,0x02,0x01,0x11,0x0E}},
    {'4', {0x02,0x06,0x0A,0x12,0x1F,0x02,0x02}}, {'5', {0x1F,0x10,0x1E,0x01,0x01,0x11,0x0E}},
    {'6', {0x06,0x08,0x10,0x1E,0x11,0x11,0x0E}}, {'7', {0x1F,0x01,0x02,0x04,0x08,0x08,0x08}},
    {'8', {0x0E,0x11,0x11,0x0E,0x11,0x11,0x0E}}, {'9', {0x0E,0x11,0x11,0x0F,0x01,0x02,0x0C}},
    {'-', {0x00,0x00,0x00,0x1F,0x00,0x00,0x00}}, {'.', {0x00,0x00,0x00,0x00,0x00,0x0C,0x0C}},
    {':', {0x00,0x0C,0x0C,0x00,0x0C,0x0C,0x00}}, {'_', {0x00,0x00,0x00,0x00,0x00,0x00,0x1F}},
    {'+', {0x00,0x04,0x04,0x1F,0x04,0x04,0x00}}, {'/', {0x00,0x01,0x02,0x04,0x08,0x10,0x00}},
    {'(', {0x02,0x04,0x08,0x08,0x08,0x04,0x02}}, {')', {0x08,0x04,0x02,0x02,0x02,0x04,0x08}},
    {'?', {0x0E,0x11,0x01,0x02,0x04,0x00,0x04}}, {' ', {0x00,0x00,0x00,0x00,0x00,0x00,0x00}},
};
// clang-format on

const Glyph& glyph(char c) {
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (const auto& g : kFont)
        if (g.c == c) return g;
    return glyph('?');
}

constexpr std::size_t kGlyphAdvance = 6;

}  // namespace

void draw_text(ImageF& img, std::size_t y, std::size_t x, const std::string& text) {
    for (char c : text) {
        const Glyph& g = glyph(c);
        for (std::size_t r = 0; r < 7; ++r)
            for (std::size_t b = 0; b < 5; ++b) {
                if (!(g.rows[r] & (0x10 >> b))) continue;
                const std::size_t py = y + r, px = x + b;
                if (py >= img.height || px >= img.width) continue;
                for (std::size_t ch = 0; ch < 3; ++ch) img.at(py, px, ch) = 0.0f;
            }
        x += kGlyphAdvance;
    }
}

ImageF nearest_upsample(const ImageF& img, std::size_t factor) {
    if (factor == 0) throw std::invalid_argument("upsample factor must be positive");
    ImageF out(img.height * factor, img.width * factor);
    for (std::size_t y = 0; y < out.height; ++y)
        for (std::size_t x = 0; x < out.width; ++x)
            for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = img.at(y / factor, x / factor, c);
    return out;
}

ImageF compose_montage(const std::vector<LabeledImage>& panels, const MontageLayout& layout) {
    if (panels.empty()) throw std::invalid_argument("montage needs at least one panel");
    const std::size_t h = panels.front().image.height, w = panels.front().image.width;
    for (const auto& p : panels)
        if (p.image.height != h || p.image.width != w)
            throw std::invalid_argument("montage panel '" + p.label + "' is " + std::to_string(p.image.height) + "x" +
                                        std::to_string(p.image.width) + ", expected " + std::to_string(h) + "x" +
                                        std::to_string(w));
    const std::size_t n = panels.size();
    ImageF out(h + layout.label_height, n * w + (n - 1) * layout.gutter, 1.0f);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t x0 = k * (w + layout.gutter);
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x)
                for (std::size_t c = 0; c < 3; ++c) out.at(y, x0 + x, c) = panels[k].image.at(y, x, c);
        if (layout.label_height >= 9) {
            // Clip the label to the panel width.
            const std::size_t max_chars = (w + 1) / kGlyphAdvance;
            draw_text(out, h + 2, x0 + 1, panels[k].label.substr(0, max_chars));
        }
    }
    return out;
}

ImageF emit_montage(const ImageF& clean, const ImageF& noisy_lr, const std::vector<LabeledImage>& reconstructions,
                    const std::filesystem::path& path, const MontageLayout& layout) {
    if (noisy_lr.height == 0 || clean.height % noisy_lr.height != 0 || clean.width % noisy_lr.width != 0 ||
        clean.height / noisy_lr.height != clean.width / noisy_lr.width)
        throw std::invalid_argument("noisy input is not an integer downscale of the clean image");
    std::vector<LabeledImage> panels{{"clean", clean},
                                     {"input", nearest_upsample(noisy_lr, clean.height / noisy_lr.height)}};
    panels.insert(panels.end(), reconstructions.begin(), reconstructions.end());
    ImageF out = compose_montage(panels, layout);
    if (!path.empty()) {
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        imaging::save_png(out, path);
    }
    return out;
}

}  // namespace nsr::harness
