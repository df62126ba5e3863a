#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "nsrkit/harness/config.hpp"
#include "nsrkit/imaging/image.hpp"

namespace nsr::harness {

/// Procedural RGB images: a two-colour gradient, an oriented sinusoidal
/// texture and a handful of hard-edged ellipses and rectangles (some
/// striped). Values are quantized to multiples of 1/255 so PNG storage is
/// lossless. Image k depends only on (seed, k).
std::vector<imaging::ImageF> generate_corpus(std::size_t n, std::size_t size, std::uint64_t seed);

struct Corpus {
    std::vector<imaging::ImageF> train;
    std::vector<imaging::ImageF> val;
};

/// Procedural corpus from the config, or PNGs from <directory>/train and /val.
Corpus make_corpus(const ExperimentConfig& config);

/// Writes images as 0000.png, 0001.png, ... into dir.
void save_images(const std::vector<imaging::ImageF>& images, const std::filesystem::path& dir);
/// All *.png files of dir in name order.
std::vector<imaging::ImageF> load_images(const std::filesystem::path& dir);
std::vector<std::filesystem::path> list_pngs(const std::filesystem::path& dir);

/// Per-channel mean over all pixels of all images.
std::array<float, 3> rgb_mean(const std::vector<imaging::ImageF>& images);

}  // namespace nsr::harness
