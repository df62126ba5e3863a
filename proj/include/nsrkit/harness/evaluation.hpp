#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nsrkit/imaging/image.hpp"
#include "nsrkit/noise/noise.hpp"

namespace nsr::harness {

/// A named upscaler: noisy LR image in, HR estimate out.
struct ModelEntry {
    std::string name;
    std::function<imaging::ImageF(const imaging::ImageF&)> upscale;
};

/// Bicubic upsampling of the noisy input, the reference every model must beat.
ModelEntry bicubic_entry(std::size_t scale);

struct EvalCell {
    std::string model;
    std::string noise;  // NoiseSpec::label()
    std::vector<double> per_image;
    double mean = 0.0;
};

struct EvalReport {
    std::string config_hash;
    std::vector<std::string> models;
    std::vector<std::string> noises;
    std::vector<EvalCell> cells;  // model-major, then noise, in the order above
    double runtime_seconds = 0.0;  // not part of the serialized report

    const EvalCell& cell(const std::string& model, const std::string& noise) const;
};

/// Per-image outputs kept for later recomputation of the report.
struct EvalOutputs {
    std::vector<imaging::ImageF> hr;
    std::map<std::pair<std::string, std::string>, std::vector<imaging::ImageF>> images;  // (model, noise) -> outputs
};

/// Noisy LR input of validation image `index` under `spec`.
imaging::ImageF eval_input(const imaging::ImageF& hr, std::size_t scale, const noise::NoiseSpec& spec, std::size_t index);

/// For every (model, noise): corrupt each downsampled validation image with
/// seed derive_seed(spec.seed, index), upscale, and compare against HR.
/// Images are processed in parallel; results are joined by index.
EvalReport evaluate(const std::vector<ModelEntry>& models, const std::vector<noise::NoiseSpec>& noises,
                    const std::vector<imaging::ImageF>& val_hr, std::size_t scale, const std::string& config_hash,
                    EvalOutputs* outputs = nullptr);

/// Mean of a PSNR list; +inf entries make the mean +inf.
double mean_psnr(const std::vector<double>& values);

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);
/// Rows are noises, columns are models.
std::string report_to_text(const EvalReport& report);

void save_outputs(const EvalReport& report, const EvalOutputs& outputs, const std::filesystem::path& path);
/// Recomputes every PSNR from stored outputs.
EvalReport recompute_report(const std::filesystem::path& outputs_path, EvalOutputs* outputs = nullptr);

/// Writes report.json and report.txt into dir.
void write_report(const EvalReport& report, const std::filesystem::path& dir);

}  // namespace nsr::harness
