#include "nsrkit/denoise/dae.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "nsrkit/denoise/filters.hpp"
#include "nsrkit/engine/optim.hpp"

namespace nsr::denoise {

using imaging::ImageF;

namespace {

constexpr const char* kFormat = "nsrkit-dae";

template <typename Fn>
void for_each_conv(std::array<WnConv, 3>& enc, std::array<WnConv, 3>& dec, Fn fn) {
    for (auto& c : enc) fn(c);
    for (auto& c : dec) fn(c);
}

WnConv clone_conv(const WnConv& c) {
    WnConv out;
    out.v = {c.v.name, c.v.value.clone(), c.v.frozen};
    out.g = {c.g.name, c.g.value.clone(), c.g.frozen};
    out.b = {c.b.name, c.b.value.clone(), c.b.frozen};
    out.padding = c.padding;
    return out;
}

}  // namespace

DaeModel::DaeModel(std::uint64_t seed) {
    Rng rng(seed);
    for (std::size_t i = 0; i < 3; ++i)
        enc_[i] = WnConv("enc" + std::to_string(i), kWidths[i + 1], kWidths[i], kKernel, rng);
    for (std::size_t i = 0; i < 3; ++i)
        dec_[i] = WnConv("dec" + std::to_string(i), kWidths[2 - i], kWidths[3 - i], kKernel, rng);
    for (float& b : dec_[2].b.value.mutable_data()) b = 0.5f;
}

DaeModel DaeModel::clone() const {
    DaeModel m;
    for (std::size_t i = 0; i < 3; ++i) {
        m.enc_[i] = clone_conv(enc_[i]);
        m.dec_[i] = clone_conv(dec_[i]);
    }
    return m;
}

Tensor DaeModel::forward(const Tensor& x) const {
    if (x.rank() != 4 || x.dim(1) != 3 || x.dim(2) % 8 || x.dim(3) % 8) {
        throw std::invalid_argument("DAE input must be [N,3,H,W] with H and W divisible by 8, got " +
                                    shape_str(x.shape()));
    }
    Tensor h = x;
    for (const auto& conv : enc_) h = ops::max_pool2(ops::relu(conv(h)));
    h = ops::relu(dec_[0](ops::nearest_upsample2(h)));
    h = ops::relu(dec_[1](ops::nearest_upsample2(h)));
    return dec_[2](ops::nearest_upsample2(h));
}

ParameterRefs DaeModel::parameters() {
    ParameterRefs refs;
    for_each_conv(enc_, dec_, [&](WnConv& c) { c.collect(refs); });
    return refs;
}

void DaeModel::freeze(bool on) {
    for_each_conv(enc_, dec_, [&](WnConv& c) { c.freeze(on); });
}

std::size_t DaeModel::parameter_count() const {
    return count_elements(const_cast<DaeModel*>(this)->parameters());
}

std::size_t DaeModel::expected_parameter_count() {
    std::size_t total = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        const std::size_t in = kWidths[i], out = kWidths[i + 1];
        total += out * in * kKernel * kKernel + 2 * out;  // encoder stage
        total += in * out * kKernel * kKernel + 2 * in;   // mirrored decoder stage
    }
    return total;
}

std::string DaeModel::architecture() {
    std::string s;
    for (std::size_t i = 0; i < 3; ++i)
        s += "enc" + std::to_string(i) + "=" + std::to_string(kWidths[i + 1]) + "x" + std::to_string(kWidths[i]) +
             "x5x5;";
    for (std::size_t i = 0; i < 3; ++i)
        s += "dec" + std::to_string(i) + "=" + std::to_string(kWidths[2 - i]) + "x" + std::to_string(kWidths[3 - i]) +
             "x5x5;";
    return s;
}

Checkpoint DaeModel::to_checkpoint() const {
    const nlohmann::json meta = {{"format", kFormat}, {"architecture", architecture()}};
    return checkpoint_from_parameters(const_cast<DaeModel*>(this)->parameters(), meta.dump());
}

DaeModel DaeModel::from_checkpoint(const Checkpoint& ckpt) {
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(ckpt.metadata);
    } catch (const nlohmann::json::exception&) {
        throw std::runtime_error("DAE checkpoint metadata is not valid JSON");
    }
    if (meta.value("format", "") != kFormat) throw std::runtime_error("checkpoint is not a DAE checkpoint");
    if (meta.value("architecture", "") != architecture()) {
        throw std::runtime_error("DAE checkpoint architecture '" + meta.value("architecture", "") +
                                 "' does not match this build ('" + architecture() + "')");
    }
    DaeModel m(0);
    restore_parameters(ckpt, m.parameters());
    return m;
}

void DaeModel::save(const std::filesystem::path& path) const { save_checkpoint(to_checkpoint(), path); }

DaeModel DaeModel::load(const std::filesystem::path& path) { return from_checkpoint(load_checkpoint(path)); }

ImageF dae_forward(const DaeModel& model, const ImageF& img) {
    const std::size_t ph = (img.height + 7) / 8 * 8, pw = (img.width + 7) / 8 * 8;
    ImageF padded(ph, pw);
    for (std::size_t y = 0; y < ph; ++y)
        for (std::size_t x = 0; x < pw; ++x) {
            const std::size_t sy = reflect_index(static_cast<long>(y), img.height);
            const std::size_t sx = reflect_index(static_cast<long>(x), img.width);
            for (std::size_t c = 0; c < 3; ++c) padded.at(y, x, c) = img.at(sy, sx, c);
        }
    NoGradGuard no_grad;
    const ImageF full = imaging::tensor_to_image(model.forward(imaging::image_to_tensor(padded)));
    if (ph == img.height && pw == img.width) return full;
    ImageF out(img.height, img.width);
    for (std::size_t y = 0; y < img.height; ++y)
        std::copy_n(&full.data[y * pw * 3], img.width * 3, &out.data[y * img.width * 3]);
    return out;
}

std::vector<double> train_dae(DaeModel& model, const std::function<DaeBatch(std::size_t, std::size_t)>& batches,
                              const DaeTrainOptions& options) {
    if (options.epochs == 0 || options.steps_per_epoch == 0) throw std::invalid_argument("train_dae: nothing to train");
    model.freeze(false);
    Adam adam(model.parameters(), {.lr = options.lr});
    std::vector<double> log;
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        double total = 0.0;
        for (std::size_t step = 0; step < options.steps_per_epoch; ++step) {
            DaeBatch batch = batches(epoch, step);
            try {
                Tensor loss = ops::mse_loss(model.forward(batch.noisy), batch.clean);
                total += loss.item();
                backward(loss);
                adam.step();
            } catch (const std::runtime_error& e) {
                throw std::runtime_error("DAE training diverged at epoch " + std::to_string(epoch) + ", step " +
                                         std::to_string(step) + ": " + e.what());
            }
        }
        log.push_back(total / static_cast<double>(options.steps_per_epoch));
        if (options.on_epoch) options.on_epoch(epoch, log.back());
    }
    return log;
}

std::vector<double> train_dae(DaeModel& model, const std::vector<DaePair>& data, std::size_t batch,
                              std::uint64_t seed, const DaeTrainOptions& options) {
    if (data.empty()) throw std::invalid_argument("train_dae: empty training data");
    if (batch == 0) throw std::invalid_argument("train_dae: batch size must be >= 1");
    const std::size_t steps = (data.size() + batch - 1) / batch;
    std::vector<std::size_t> order(data.size());
    std::size_t order_epoch = SIZE_MAX;
    auto source = [&](std::size_t epoch, std::size_t step) {
        if (epoch != order_epoch) {
            std::iota(order.begin(), order.end(), 0);
            Rng rng(derive_seed(seed, epoch));
            for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
            order_epoch = epoch;
        }
        std::vector<ImageF> noisy, clean;
        for (std::size_t k = step * batch; k < std::min(data.size(), (step + 1) * batch); ++k) {
            noisy.push_back(data[order[k]].noisy);
            clean.push_back(data[order[k]].clean);
        }
        return DaeBatch{imaging::images_to_tensor(noisy), imaging::images_to_tensor(clean)};
    };
    DaeTrainOptions opts = options;
    opts.steps_per_epoch = steps;
    return train_dae(model, source, opts);
}

}  // namespace nsr::denoise
