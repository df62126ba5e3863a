#include "nsrkit/denoise/denoiser.hpp"

#include <stdexcept>

namespace nsr::denoise {

using imaging::ImageF;

namespace {

constexpr std::pair<DenoiserKind, std::string_view> kNames[] = {
    {DenoiserKind::identity, "identity"},
    {DenoiserKind::median, "median"},
    {DenoiserKind::wiener, "wiener"},
    {DenoiserKind::dae, "dae"},
};

}  // namespace

std::string_view kind_name(DenoiserKind kind) {
    for (auto [k, n] : kNames)
        if (k == kind) return n;
    throw std::invalid_argument("unknown denoiser kind");
}

DenoiserKind parse_kind(std::string_view name) {
    for (auto [k, n] : kNames)
        if (n == name) return k;
    throw std::invalid_argument("unknown denoiser '" + std::string(name) +
                                "' (expected identity, median, wiener or dae)");
}

void DenoiserSpec::validate() const {
    if ((kind == DenoiserKind::median || kind == DenoiserKind::wiener) && (window < 3 || window % 2 == 0)) {
        throw std::invalid_argument("denoiser window must be odd and >= 3, got " + std::to_string(window));
    }
}

Denoiser::Denoiser(DenoiserSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    if (spec_.kind == DenoiserKind::dae) {
        if (spec_.dae_checkpoint.empty()) throw std::invalid_argument("dae denoiser needs a checkpoint path");
        auto model = std::make_shared<DaeModel>(DaeModel::load(spec_.dae_checkpoint));
        model->freeze();
        dae_ = std::move(model);
    }
}

Denoiser::Denoiser(DenoiserSpec spec, std::shared_ptr<const DaeModel> dae) : spec_(std::move(spec)), dae_(std::move(dae)) {
    spec_.validate();
    if (spec_.kind == DenoiserKind::dae && !dae_) throw std::invalid_argument("dae denoiser needs a model");
}

ImageF Denoiser::operator()(const ImageF& img) const {
    switch (spec_.kind) {
        case DenoiserKind::identity:
            return img;
        case DenoiserKind::median:
            return median_filter(img, spec_.window);
        case DenoiserKind::wiener:
            return wiener_filter(img, spec_.window);
        case DenoiserKind::dae:
            return dae_forward(*dae_, img);
    }
    throw std::logic_error("unhandled denoiser kind");
}

ImageF apply(const DenoiserSpec& spec, const ImageF& img) { return Denoiser(spec)(img); }

}  // namespace nsr::denoise
