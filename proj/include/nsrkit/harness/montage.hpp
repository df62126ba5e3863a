#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nsrkit/imaging/image.hpp"

namespace nsr::harness {

struct LabeledImage {
    std::string label;
    imaging::ImageF image;
};

struct MontageLayout {
    std::size_t gutter = 4;
    std::size_t label_height = 11;
};

/// Panels side by side, separated by white gutters, with a label strip under
/// each panel. Panel k starts at column k * (width + gutter), row 0.
/// All panels must have the same size.
imaging::ImageF compose_montage(const std::vector<LabeledImage>& panels, const MontageLayout& layout = {});

/// Nearest-neighbour enlargement by an integer factor.
imaging::ImageF nearest_upsample(const imaging::ImageF& img, std::size_t factor);

/// Clean HR, noisy LR input (enlarged for display) and the reconstructions.
imaging::ImageF emit_montage(const imaging::ImageF& clean, const imaging::ImageF& noisy_lr,
                             const std::vector<LabeledImage>& reconstructions, const std::filesystem::path& path,
                             const MontageLayout& layout = {});

/// Renders text with the built-in 5x7 font into img at (y, x), in black.
/// Lowercase is drawn as uppercase; unknown characters become '?'.
void draw_text(imaging::ImageF& img, std::size_t y, std::size_t x, const std::string& text);

}  // namespace nsr::harness
