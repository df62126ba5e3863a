#include "nsrkit/harness/evaluation.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>

#include "nsrkit/engine/checkpoint.hpp"

namespace nsr::harness {

using imaging::ImageF;
using nlohmann::json;

namespace {

constexpr const char* kOutputsFormat = "nsrkit-eval-outputs";

json psnr_json(double v) { return std::isinf(v) && v > 0 ? json("inf") : json(v); }

double psnr_from_json(const json& j) {
    if (j.is_string() && j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    return j.get<double>();
}

// Runs fn(i) for i in [0, n) on up to hardware_concurrency threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w)
        threads.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::string tensor_name(std::size_t model, std::size_t noise, std::size_t image) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "out/%zu/%zu/%04zu", model, noise, image);
    return buf;
}

std::string hr_name(std::size_t image) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "hr/%04zu", image);
    return buf;
}

NamedTensor image_tensor(std::string name, const ImageF& img) {
    return {std::move(name), {img.height, img.width, 3}, img.data, false};
}

ImageF tensor_image(const NamedTensor& t) {
    if (t.shape.size() != 3 || t.shape[2] != 3) throw std::runtime_error("outputs file: bad image tensor " + t.name);
    return ImageF(t.shape[0], t.shape[1], t.values);
}

}  // namespace

ModelEntry bicubic_entry(std::size_t scale) {
    return {"bicubic", [scale](const ImageF& lr) { return imaging::bicubic_upsample(lr, scale); }};
}

const EvalCell& EvalReport::cell(const std::string& model, const std::string& noise) const {
    for (const auto& c : cells)
        if (c.model == model && c.noise == noise) return c;
    throw std::out_of_range("no report cell for model '" + model + "' and noise '" + noise + "'");
}

ImageF eval_input(const ImageF& hr, std::size_t scale, const noise::NoiseSpec& spec, std::size_t index) {
    noise::NoiseSpec s = spec;
    s.seed = derive_seed(spec.seed, index);
    return noise::corrupt(imaging::bicubic_downsample(hr, scale), s);
}

double mean_psnr(const std::vector<double>& values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    double total = 0.0;
    for (double v : values) total += v;
    return total / static_cast<double>(values.size());
}

EvalReport evaluate(const std::vector<ModelEntry>& models, const std::vector<noise::NoiseSpec>& noises,
                    const std::vector<ImageF>& val_hr, std::size_t scale, const std::string& config_hash,
                    EvalOutputs* outputs) {
    const auto start = std::chrono::steady_clock::now();
    EvalReport report;
    report.config_hash = config_hash;
    for (const auto& m : models) report.models.push_back(m.name);
    for (const auto& n : noises) report.noises.push_back(n.label());
    if (outputs) {
        outputs->hr = val_hr;
        outputs->images.clear();
    }

    for (std::size_t k = 0; k < noises.size(); ++k) {
        std::vector<ImageF> inputs(val_hr.size());
        parallel_for(val_hr.size(), [&](std::size_t i) { inputs[i] = eval_input(val_hr[i], scale, noises[k], i); });
        for (const auto& m : models) {
            EvalCell cell{m.name, noises[k].label(), std::vector<double>(val_hr.size()), 0.0};
            std::vector<ImageF> outs(val_hr.size());
            parallel_for(val_hr.size(), [&](std::size_t i) {
                outs[i] = m.upscale(inputs[i]);
                cell.per_image[i] = imaging::psnr(outs[i], val_hr[i]);
            });
            cell.mean = mean_psnr(cell.per_image);
            report.cells.push_back(std::move(cell));
            if (outputs) outputs->images[{m.name, noises[k].label()}] = std::move(outs);
        }
    }
    // Model-major order for the report.
    std::vector<EvalCell> ordered;
    for (const auto& m : report.models)
        for (const auto& n : report.noises) ordered.push_back(report.cell(m, n));
    report.cells = std::move(ordered);
    report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

json report_to_json(const EvalReport& r) {
    json cells = json::array();
    for (const auto& c : r.cells) {
        json per = json::array();
        for (double v : c.per_image) per.push_back(psnr_json(v));
        cells.push_back({{"model", c.model}, {"noise", c.noise}, {"mean_psnr", psnr_json(c.mean)}, {"per_image_psnr", per}});
    }
    return {{"config_hash", r.config_hash}, {"models", r.models}, {"noises", r.noises}, {"cells", cells}};
}

EvalReport report_from_json(const json& j) {
    EvalReport r;
    r.config_hash = j.at("config_hash").get<std::string>();
    r.models = j.at("models").get<std::vector<std::string>>();
    r.noises = j.at("noises").get<std::vector<std::string>>();
    for (const auto& c : j.at("cells")) {
        EvalCell cell;
        cell.model = c.at("model").get<std::string>();
        cell.noise = c.at("noise").get<std::string>();
        cell.mean = psnr_from_json(c.at("mean_psnr"));
        for (const auto& v : c.at("per_image_psnr")) cell.per_image.push_back(psnr_from_json(v));
        r.cells.push_back(std::move(cell));
    }
    return r;
}

std::string report_to_text(const EvalReport& r) {
    std::size_t noise_w = 5;
    for (const auto& n : r.noises) noise_w = std::max(noise_w, n.size());
    std::string out = "Mean PSNR (dB)";
    if (!r.cells.empty()) out += " over " + std::to_string(r.cells.front().per_image.size()) + " validation images";
    out += ", config " + r.config_hash + "\n\n";
    auto pad_right = [](std::string s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); };
    auto pad_left = [](std::string s, std::size_t w) { return std::string(w > s.size() ? w - s.size() : 0, ' ') + s; };
    std::vector<std::size_t> widths;
    std::string header = pad_right("noise", noise_w);
    for (const auto& m : r.models) {
        widths.push_back(std::max<std::size_t>(m.size(), 6));
        header += "  " + pad_left(m, widths.back());
    }
    out += header + "\n" + std::string(header.size(), '-') + "\n";
    for (const auto& n : r.noises) {
        std::string row = pad_right(n, noise_w);
        for (std::size_t i = 0; i < r.models.size(); ++i)
            row += "  " + pad_left(imaging::format_psnr(r.cell(r.models[i], n).mean), widths[i]);
        out += row + "\n";
    }
    return out;
}

void save_outputs(const EvalReport& report, const EvalOutputs& outputs, const std::filesystem::path& path) {
    Checkpoint ck;
    ck.metadata = json{{"format", kOutputsFormat},
                       {"config_hash", report.config_hash},
                       {"models", report.models},
                       {"noises", report.noises}}
                      .dump();
    for (std::size_t i = 0; i < outputs.hr.size(); ++i) ck.tensors.push_back(image_tensor(hr_name(i), outputs.hr[i]));
    for (std::size_t m = 0; m < report.models.size(); ++m)
        for (std::size_t n = 0; n < report.noises.size(); ++n) {
            const auto& imgs = outputs.images.at({report.models[m], report.noises[n]});
            for (std::size_t i = 0; i < imgs.size(); ++i) ck.tensors.push_back(image_tensor(tensor_name(m, n, i), imgs[i]));
        }
    save_checkpoint(ck, path);
}

EvalReport recompute_report(const std::filesystem::path& outputs_path, EvalOutputs* outputs) {
    const Checkpoint ck = load_checkpoint(outputs_path);
    const json meta = json::parse(ck.metadata);
    if (meta.value("format", "") != kOutputsFormat) throw std::runtime_error(outputs_path.string() + " is not an outputs file");
    EvalReport r;
    r.config_hash = meta.at("config_hash").get<std::string>();
    r.models = meta.at("models").get<std::vector<std::string>>();
    r.noises = meta.at("noises").get<std::vector<std::string>>();
    std::vector<ImageF> hr;
    while (const NamedTensor* t = ck.find(hr_name(hr.size()))) hr.push_back(tensor_image(*t));
    for (std::size_t m = 0; m < r.models.size(); ++m)
        for (std::size_t n = 0; n < r.noises.size(); ++n) {
            EvalCell cell{r.models[m], r.noises[n], {}, 0.0};
            std::vector<ImageF> imgs;
            for (std::size_t i = 0; i < hr.size(); ++i) {
                const NamedTensor* t = ck.find(tensor_name(m, n, i));
                if (!t) throw std::runtime_error("outputs file is missing " + tensor_name(m, n, i));
                imgs.push_back(tensor_image(*t));
                cell.per_image.push_back(imaging::psnr(imgs.back(), hr[i]));
            }
            cell.mean = mean_psnr(cell.per_image);
            r.cells.push_back(std::move(cell));
            if (outputs) outputs->images[{r.models[m], r.noises[n]}] = std::move(imgs);
        }
    if (outputs) outputs->hr = std::move(hr);
    return r;
}

void write_report(const EvalReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "report.json", std::ios::binary | std::ios::trunc);
        out << report_to_json(report).dump(2) << "\n";
    }
    std::ofstream out(dir / "report.txt", std::ios::binary | std::ios::trunc);
    out << report_to_text(report);
}

}  // namespace nsr::harness
