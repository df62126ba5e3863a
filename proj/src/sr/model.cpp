#include "nsrkit/sr/model.hpp"

#include <cmath>
#include <stdexcept>

#include "nsrkit/common/json.hpp"
#include "nsrkit/imaging/image.hpp"

namespace nsr::sr {

using imaging::ImageF;
using nlohmann::json;

namespace {

constexpr const char* kFormat = "nsrkit-sr";
constexpr const char* kDaePrefix = "denoiser.dae.";

constexpr std::pair<Variant, std::string_view> kVariants[] = {
    {Variant::baseline, "baseline"},
    {Variant::pre_net, "pre-net"},
    {Variant::in_net, "in-net"},
};

template <typename T>
BasicWnConv<T> clone_conv(const BasicWnConv<T>& c) {
    BasicWnConv<T> out;
    out.v = {c.v.name, c.v.value.clone(), c.v.frozen};
    out.g = {c.g.name, c.g.value.clone(), c.g.frozen};
    out.b = {c.b.name, c.b.value.clone(), c.b.frozen};
    out.padding = c.padding;
    return out;
}

template <typename T>
void zero_gain_and_bias(BasicWnConv<T>& c) {
    for (auto& x : c.g.value.mutable_data()) x = T(0);
    for (auto& x : c.b.value.mutable_data()) x = T(0);
}

}  // namespace

std::string_view variant_name(Variant v) {
    for (auto [k, n] : kVariants)
        if (k == v) return n;
    throw std::invalid_argument("unknown variant");
}

Variant parse_variant(std::string_view name) {
    for (auto [k, n] : kVariants)
        if (n == name) return k;
    throw std::invalid_argument("unknown variant '" + std::string(name) + "' (expected baseline, pre-net or in-net)");
}

void SrConfig::normalize() {
    if (variant == Variant::baseline) denoiser = {};
}

void SrConfig::validate() const {
    if (scale < 1 || blocks < 1 || filters < 1 || expansion < 1) {
        throw std::invalid_argument("model scale, blocks, filters and expansion must all be >= 1");
    }
    if (variant == Variant::baseline && denoiser.kind != denoise::DenoiserKind::identity) {
        throw std::invalid_argument("the baseline variant takes no denoiser");
    }
    denoiser.validate();
}

json config_to_json(const SrConfig& c) {
    return {
        {"scale", c.scale},
        {"blocks", c.blocks},
        {"filters", c.filters},
        {"expansion", c.expansion},
        {"variant", variant_name(c.variant)},
        {"denoiser",
         {{"kind", denoise::kind_name(c.denoiser.kind)},
          {"window", c.denoiser.window},
          {"dae_checkpoint", c.denoiser.dae_checkpoint}}},
        {"rgb_mean", c.rgb_mean},
    };
}

SrConfig config_from_json(const json& j) {
    require_known_keys(j, {"scale", "blocks", "filters", "expansion", "variant", "denoiser", "rgb_mean"}, "model");
    SrConfig c;
    c.scale = json_get(j, "scale", c.scale, "model");
    c.blocks = json_get(j, "blocks", c.blocks, "model");
    c.filters = json_get(j, "filters", c.filters, "model");
    c.expansion = json_get(j, "expansion", c.expansion, "model");
    c.variant = parse_variant(json_get<std::string>(j, "variant", "baseline", "model"));
    if (j.contains("denoiser")) {
        const json& d = j.at("denoiser");
        require_known_keys(d, {"kind", "window", "dae_checkpoint"}, "model.denoiser");
        c.denoiser.kind = denoise::parse_kind(json_get<std::string>(d, "kind", "identity", "model.denoiser"));
        c.denoiser.window = json_get(d, "window", c.denoiser.window, "model.denoiser");
        c.denoiser.dae_checkpoint = json_get<std::string>(d, "dae_checkpoint", "", "model.denoiser");
    }
    c.rgb_mean = json_get(j, "rgb_mean", c.rgb_mean, "model");
    c.validate();
    return c;
}

namespace {

// Skip conv that, followed by pixel shuffle, reproduces bicubic upsampling
// (zero padding at the border instead of replication).
template <typename T>
void init_bicubic_skip(BasicWnConv<T>& conv, std::size_t s) {
    const std::size_t k = conv.kernel(), r = k / 2;
    auto v = conv.v.value.mutable_data();
    std::fill(v.begin(), v.end(), T(0));
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < s; ++i)
            for (std::size_t j = 0; j < s; ++j) {
                const std::size_t o = c * s * s + i * s + j;
                const double oy = (i + 0.5) / double(s) - 0.5, ox = (j + 0.5) / double(s) - 0.5;
                for (std::size_t dy = 0; dy < k; ++dy)
                    for (std::size_t dx = 0; dx < k; ++dx)
                        v[((o * 3 + c) * k + dy) * k + dx] =
                            static_cast<T>(imaging::cubic_kernel(double(dy) - double(r) - oy) *
                                           imaging::cubic_kernel(double(dx) - double(r) - ox));
            }
    const std::size_t fan = 3 * k * k;
    auto g = conv.g.value.mutable_data();
    for (std::size_t o = 0; o < g.size(); ++o) {
        double n2 = 0;
        for (std::size_t q = 0; q < fan; ++q) n2 += double(v[o * fan + q]) * double(v[o * fan + q]);
        g[o] = static_cast<T>(std::sqrt(n2));
    }
}

}  // namespace

template <typename T>
BasicSrModel<T>::BasicSrModel(const SrConfig& config, std::uint64_t seed) : config_(config) {
    config_.validate();
    Rng rng(seed);
    const std::size_t f = config_.filters, wide = config_.filters * config_.expansion;
    const std::size_t out = 3 * config_.scale * config_.scale;
    head = BasicWnConv<T>("head", f, 3, 3, rng);
    for (std::size_t i = 0; i < config_.blocks; ++i) {
        const std::string p = "body." + std::to_string(i);
        Block b;
        b.expand = BasicWnConv<T>(p + ".expand", wide, f, 3, rng);
        b.reduce = BasicWnConv<T>(p + ".reduce", f, wide, 3, rng);
        body.push_back(std::move(b));
    }
    tail = BasicWnConv<T>("tail", out, f, 3, rng);
    skip = BasicWnConv<T>("skip", out, 3, 5, rng);
    init_bicubic_skip(skip, config_.scale);
    // The main path starts as a small correction on top of the interpolating skip.
    for (auto& vi : tail.v.value.mutable_data()) vi *= T(kTailInitGain);
    for (auto& gi : tail.g.value.mutable_data()) gi *= T(kTailInitGain);
}

template <typename T>
BasicSrModel<T> BasicSrModel<T>::clone() const {
    BasicSrModel m;
    m.config_ = config_;
    m.head = clone_conv(head);
    m.tail = clone_conv(tail);
    m.skip = clone_conv(skip);
    for (const auto& b : body) m.body.push_back({clone_conv(b.expand), clone_conv(b.reduce)});
    return m;
}

template <typename T>
BasicTensor<T> BasicSrModel<T>::main_path(const BasicTensor<T>& centered) const {
    BasicTensor<T> h = head(centered);
    for (const auto& b : body) h = ops::add(h, b.reduce(ops::relu(b.expand(h))));
    return ops::pixel_shuffle(tail(h), config_.scale);
}

template <typename T>
BasicTensor<T> BasicSrModel<T>::skip_path(const BasicTensor<T>& centered) const {
    return ops::pixel_shuffle(skip(centered), config_.scale);
}

template <typename T>
BasicTensor<T> BasicSrModel<T>::forward_paths(const BasicTensor<T>& main_input, const BasicTensor<T>& skip_input) const {
    if (main_input.rank() != 4 || main_input.dim(1) != 3) {
        throw std::invalid_argument("SR input must be [N,3,H,W], got " + shape_str(main_input.shape()));
    }
    if (main_input.shape() != skip_input.shape()) {
        throw std::invalid_argument("main and skip inputs differ in shape: " + shape_str(main_input.shape()) + " vs " +
                                    shape_str(skip_input.shape()));
    }
    const std::array<T, 3> neg = {-T(config_.rgb_mean[0]), -T(config_.rgb_mean[1]), -T(config_.rgb_mean[2])};
    const std::array<T, 3> pos = {T(config_.rgb_mean[0]), T(config_.rgb_mean[1]), T(config_.rgb_mean[2])};
    const BasicTensor<T> main_c = ops::add_channel(main_input, std::span<const T>(neg));
    const BasicTensor<T> skip_c =
        skip_input.same_storage(main_input) ? main_c : ops::add_channel(skip_input, std::span<const T>(neg));
    return ops::add_channel(ops::add(main_path(main_c), skip_path(skip_c)), std::span<const T>(pos));
}

template <typename T>
BasicParameterRefs<T> BasicSrModel<T>::parameters() {
    BasicParameterRefs<T> refs;
    head.collect(refs);
    for (auto& b : body) {
        b.expand.collect(refs);
        b.reduce.collect(refs);
    }
    tail.collect(refs);
    skip.collect(refs);
    return refs;
}

template <typename T>
std::size_t BasicSrModel<T>::parameter_count() const {
    std::size_t n = 0;
    for (auto* p : const_cast<BasicSrModel*>(this)->parameters()) n += p->value.numel();
    return n;
}

template <typename T>
std::size_t BasicSrModel<T>::expected_parameter_count(const SrConfig& c) {
    auto conv = [](std::size_t out, std::size_t in, std::size_t k) { return out * in * k * k + 2 * out; };
    const std::size_t f = c.filters, wide = c.filters * c.expansion, out = 3 * c.scale * c.scale;
    return conv(f, 3, 3) + c.blocks * (conv(wide, f, 3) + conv(f, wide, 3)) + conv(out, f, 3) + conv(out, 3, 5);
}

template <typename T>
void BasicSrModel<T>::zero_main_path() {
    zero_gain_and_bias(head);
    for (auto& b : body) {
        zero_gain_and_bias(b.expand);
        zero_gain_and_bias(b.reduce);
    }
    zero_gain_and_bias(tail);
}

template <typename T>
void BasicSrModel<T>::zero_skip_path() {
    zero_gain_and_bias(skip);
}

template class BasicSrModel<float>;
template class BasicSrModel<double>;

Tensor denoise_batch(const denoise::Denoiser& denoiser, const Tensor& x) {
    if (denoiser.is_identity()) return x;
    std::vector<ImageF> imgs;
    for (std::size_t n = 0; n < x.dim(0); ++n) imgs.push_back(denoiser(imaging::tensor_to_image(x, n)));
    return imaging::images_to_tensor(imgs).detach();
}

Tensor forward_baseline(const SrModel& model, const Tensor& x) { return model.forward_paths(x, x); }

Tensor forward_pre_net(const SrModel& model, const denoise::Denoiser& denoiser, const Tensor& x) {
    const Tensor clean = denoise_batch(denoiser, x);
    return model.forward_paths(clean, clean);
}

Tensor forward_in_net(const SrModel& model, const denoise::Denoiser& denoiser, const Tensor& x) {
    return model.forward_paths(x, denoise_batch(denoiser, x));
}

Tensor SrNetwork::forward(const Tensor& x) const {
    switch (model.config().variant) {
        case Variant::baseline:
            return forward_baseline(model, x);
        case Variant::pre_net:
            return forward_pre_net(model, denoiser, x);
        case Variant::in_net:
            return forward_in_net(model, denoiser, x);
    }
    throw std::logic_error("unhandled variant");
}

ImageF SrNetwork::upscale(const ImageF& lr) const {
    NoGradGuard no_grad;
    return imaging::tensor_to_image(forward(imaging::image_to_tensor(lr)));
}

std::vector<std::pair<std::string, bool>> SrNetwork::named_parameters() const {
    std::vector<std::pair<std::string, bool>> out;
    for (auto* p : const_cast<SrModel&>(model).parameters()) out.emplace_back(p->name, p->frozen);
    if (denoiser.dae()) {
        for (auto* p : const_cast<denoise::DaeModel&>(*denoiser.dae()).parameters())
            out.emplace_back(kDaePrefix + p->name, p->frozen);
    }
    return out;
}

Checkpoint SrNetwork::to_checkpoint() const {
    json meta = {{"format", kFormat}, {"config", config_to_json(model.config())}};
    if (denoiser.dae()) meta["dae_architecture"] = denoise::DaeModel::architecture();
    Checkpoint ck = checkpoint_from_parameters(const_cast<SrModel&>(model).parameters(), meta.dump());
    if (denoiser.dae()) {
        for (auto& t : denoiser.dae()->to_checkpoint().tensors) {
            t.name = kDaePrefix + t.name;
            t.frozen = true;
            ck.tensors.push_back(std::move(t));
        }
    }
    return ck;
}

SrNetwork SrNetwork::from_checkpoint(const Checkpoint& ck) {
    json meta;
    try {
        meta = json::parse(ck.metadata);
    } catch (const json::exception&) {
        throw std::runtime_error("SR checkpoint metadata is not valid JSON");
    }
    if (!meta.is_object() || meta.value("format", "") != kFormat) throw std::runtime_error("checkpoint is not an SR checkpoint");
    const SrConfig config = config_from_json(meta.at("config"));
    SrModel model(config, 0);
    restore_parameters(ck, model.parameters());

    denoise::Denoiser denoiser;
    if (config.denoiser.kind == denoise::DenoiserKind::dae) {
        Checkpoint dae_ck;
        dae_ck.metadata =
            json{{"format", "nsrkit-dae"}, {"architecture", meta.value("dae_architecture", "")}}.dump();
        const std::string prefix = kDaePrefix;
        for (const auto& t : ck.tensors)
            if (t.name.starts_with(prefix)) dae_ck.tensors.push_back({t.name.substr(prefix.size()), t.shape, t.values, true});
        if (dae_ck.tensors.empty()) throw std::runtime_error("SR checkpoint uses a DAE denoiser but embeds no DAE weights");
        auto dae = std::make_shared<denoise::DaeModel>(denoise::DaeModel::from_checkpoint(dae_ck));
        dae->freeze();
        denoiser = denoise::Denoiser(config.denoiser, std::move(dae));
    } else {
        denoiser = denoise::Denoiser(config.denoiser);
    }
    return SrNetwork{std::move(model), std::move(denoiser)};
}

void SrNetwork::save(const std::filesystem::path& path) const { save_checkpoint(to_checkpoint(), path); }

SrNetwork SrNetwork::load(const std::filesystem::path& path) { return from_checkpoint(load_checkpoint(path)); }

}  // namespace nsr::sr
