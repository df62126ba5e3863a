#include "nsrkit/harness/training.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "nsrkit/engine/optim.hpp"

namespace nsr::harness {

using imaging::ImageF;

namespace {

// Seed streams, so phases never share random numbers by accident.
constexpr std::uint64_t kPretrainStream = 0;
constexpr std::uint64_t kFinetuneStream = 1;
constexpr std::uint64_t kDaeStream = 2;

std::vector<imaging::PatchPair> draw_patches(const std::vector<ImageF>& images, std::size_t count, std::size_t patch,
                                             std::size_t scale, Rng& rng) {
    std::vector<imaging::PatchPair> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto& img = images[rng.below(images.size())];
        auto one = imaging::sample_patches(img, 1, patch, scale, rng);
        out.push_back(std::move(one.front()));
    }
    return out;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_loss_csv(const std::vector<EpochRecord>& log, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "epoch,train_loss,val_psnr\n";
    for (const auto& r : log) out << r.epoch << ',' << fmt17(r.train_loss) << ',' << fmt17(r.val_psnr) << '\n';
}

std::vector<EpochRecord> read_loss_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string line;
    std::getline(in, line);
    std::vector<EpochRecord> out;
    while (std::getline(in, line)) {
        EpochRecord r;
        std::istringstream ls(line);
        std::string a, b, c;
        std::getline(ls, a, ',');
        std::getline(ls, b, ',');
        std::getline(ls, c, ',');
        r.epoch = std::stoul(a);
        r.train_loss = std::stod(b);
        r.val_psnr = std::stod(c);
        out.push_back(r);
    }
    return out;
}

ValSet prepare_val(const std::vector<ImageF>& val, std::size_t scale, const noise::NoiseSpec& noise, sr::Variant variant,
                   const denoise::Denoiser& denoiser) {
    ValSet vs;
    for (std::size_t i = 0; i < val.size(); ++i) {
        noise::NoiseSpec spec = noise;
        spec.seed = derive_seed(noise.seed, i);
        const ImageF noisy = noise::corrupt(imaging::bicubic_downsample(val[i], scale), spec);
        const Tensor x = imaging::image_to_tensor(noisy);
        const Tensor d = variant == sr::Variant::baseline ? x : sr::denoise_batch(denoiser, x);
        vs.hr.push_back(val[i]);
        vs.main_input.push_back(variant == sr::Variant::pre_net ? d : x);
        vs.skip_input.push_back(d);
    }
    return vs;
}

double val_psnr(const sr::SrModel& model, const ValSet& val) {
    if (val.hr.empty()) return std::numeric_limits<double>::quiet_NaN();
    NoGradGuard no_grad;
    double total = 0.0;
    for (std::size_t i = 0; i < val.hr.size(); ++i) {
        const ImageF out = imaging::tensor_to_image(model.forward_paths(val.main_input[i], val.skip_input[i]));
        total += imaging::psnr(out, val.hr[i]);
    }
    return total / static_cast<double>(val.hr.size());
}

std::vector<EpochRecord> train_phase(sr::SrNetwork& net, const std::vector<ImageF>& train, const ValSet& val,
                                     const PhaseOptions& o) {
    if (train.empty()) throw std::invalid_argument("train_phase: no training images");
    const std::size_t scale = net.model.config().scale;
    const sr::Variant variant = net.model.config().variant;
    Adam adam(net.model.parameters(), {.lr = o.lr});
    Rng rng(o.sampling_seed);
    if (!o.checkpoint.empty()) net.save(o.checkpoint);

    std::vector<EpochRecord> log;
    double best = -std::numeric_limits<double>::infinity();
    std::size_t global_step = 0;
    for (std::size_t epoch = 0; epoch < o.epochs; ++epoch) {
        double total = 0.0;
        for (std::size_t step = 0; step < o.steps_per_epoch; ++step, ++global_step) {
            auto pairs = draw_patches(train, o.batch, o.patch, scale, rng);
            noise::NoiseSpec spec = o.noise;
            spec.seed = derive_seed(o.noise.seed, global_step);
            pairs = noise::corrupt_batch(std::move(pairs), spec);
            std::vector<ImageF> lr, hr;
            for (auto& p : pairs) {
                lr.push_back(std::move(p.lr));
                hr.push_back(std::move(p.hr));
            }
            const Tensor x = imaging::images_to_tensor(lr);
            const Tensor target = imaging::images_to_tensor(hr);
            try {
                Tensor loss = ops::mae_loss(net.forward(x), target);
                if (!std::isfinite(loss.item())) throw std::runtime_error("non-finite loss");
                total += loss.item();
                backward(loss);
                adam.step();
            } catch (const std::runtime_error& e) {
                throw std::runtime_error("training of " + std::string(sr::variant_name(variant)) + " diverged at epoch " +
                                         std::to_string(epoch) + ", step " + std::to_string(step) + " (" + e.what() +
                                         ")" + (o.checkpoint.empty() ? "" : "; last good checkpoint: " + o.checkpoint.string()));
            }
        }
        EpochRecord rec{epoch, total / static_cast<double>(o.steps_per_epoch), val_psnr(net.model, val)};
        log.push_back(rec);
        if (!o.checkpoint.empty()) net.save(o.checkpoint);
        if (!o.best_checkpoint.empty() && rec.val_psnr > best) {
            best = rec.val_psnr;
            net.save(o.best_checkpoint);
        }
        if (o.on_epoch) o.on_epoch(rec);
    }
    return log;
}

namespace {

std::filesystem::path best_path(const std::filesystem::path& ckpt) {
    if (ckpt.empty()) return {};
    auto p = ckpt;
    p.replace_extension(".best.ckpt");
    return p;
}

}  // namespace

sr::SrNetwork pretrain_baseline(const ExperimentConfig& config, const Corpus& corpus, std::vector<EpochRecord>* log,
                                const std::filesystem::path& checkpoint, std::function<void(const EpochRecord&)> on_epoch) {
    sr::SrConfig mc = config.model_config(sr::Variant::baseline, denoise::DenoiserKind::identity);
    mc.rgb_mean = rgb_mean(corpus.train);
    sr::SrNetwork net{sr::SrModel(mc, derive_seed(config.seeds.init, kPretrainStream)), {}};
    PhaseOptions o;
    o.epochs = config.sr.pretrain_epochs;
    o.steps_per_epoch = config.sr.steps_per_epoch;
    o.batch = config.sr.batch;
    o.patch = config.patch;
    o.lr = config.sr.lr;
    o.noise = {noise::NoiseKind::none, 0.0, 0};
    o.sampling_seed = derive_seed(config.seeds.sampling, kPretrainStream);
    o.checkpoint = checkpoint;
    o.best_checkpoint = best_path(checkpoint);
    o.on_epoch = std::move(on_epoch);
    const ValSet val = prepare_val(corpus.val, config.scale, o.noise, sr::Variant::baseline, {});
    auto records = train_phase(net, corpus.train, val, o);
    if (log) *log = std::move(records);
    return net;
}

sr::SrNetwork finetune_variant(const ExperimentConfig& config, const Corpus& corpus, const sr::SrNetwork& pretrained,
                               sr::Variant variant, denoise::Denoiser denoiser, std::vector<EpochRecord>* log,
                               const std::filesystem::path& checkpoint, std::function<void(const EpochRecord&)> on_epoch) {
    sr::SrConfig mc = config.model_config(variant, denoiser.spec().kind);
    mc.rgb_mean = pretrained.model.config().rgb_mean;
    mc.denoiser.dae_checkpoint = denoiser.spec().dae_checkpoint;
    if (variant == sr::Variant::baseline) denoiser = {};
    denoise::DenoiserSpec spec = mc.denoiser;
    sr::SrModel model(mc, 0);
    {
        // Same architecture as the pretrained baseline: copy its weights.
        auto dst = model.parameters();
        auto src = const_cast<sr::SrModel&>(pretrained.model).parameters();
        if (dst.size() != src.size()) throw std::runtime_error("pretrained model does not match the configured architecture");
        for (std::size_t i = 0; i < dst.size(); ++i) {
            if (dst[i]->value.shape() != src[i]->value.shape())
                throw std::runtime_error("pretrained parameter " + src[i]->name + " has a different shape");
            std::copy(src[i]->value.data().begin(), src[i]->value.data().end(), dst[i]->value.mutable_data().begin());
        }
    }
    sr::SrNetwork net{std::move(model), denoise::Denoiser(spec, denoiser.dae())};

    PhaseOptions o;
    o.epochs = config.sr.finetune_epochs;
    o.steps_per_epoch = config.sr.steps_per_epoch;
    o.batch = config.sr.batch;
    o.patch = config.patch;
    o.lr = config.sr.lr;
    o.noise = config.train_noise;
    o.noise.seed = derive_seed(config.seeds.noise, kFinetuneStream);
    o.sampling_seed = derive_seed(config.seeds.sampling, kFinetuneStream);
    o.checkpoint = checkpoint;
    o.best_checkpoint = best_path(checkpoint);
    o.on_epoch = std::move(on_epoch);
    noise::NoiseSpec val_noise = config.train_noise;
    val_noise.seed = derive_seed(config.seeds.noise, 1000 + kFinetuneStream);
    const ValSet val = prepare_val(corpus.val, config.scale, val_noise, variant, net.denoiser);
    auto records = train_phase(net, corpus.train, val, o);
    if (log) *log = std::move(records);
    return net;
}

denoise::DaeModel train_dae_model(const ExperimentConfig& config, const Corpus& corpus, std::vector<EpochRecord>* log,
                                  std::function<void(const EpochRecord&)> on_epoch) {
    denoise::DaeModel model(derive_seed(config.seeds.init, kDaeStream));
    Rng rng(derive_seed(config.seeds.sampling, kDaeStream));
    const std::uint64_t noise_seed = derive_seed(config.seeds.noise, kDaeStream);
    std::size_t global_step = 0;
    auto batches = [&](std::size_t, std::size_t) {
        auto pairs = draw_patches(corpus.train, config.dae.batch, config.dae.patch, config.scale, rng);
        std::vector<ImageF> noisy, clean;
        for (auto& p : pairs) {
            noise::NoiseSpec spec = config.train_noise;
            spec.seed = derive_seed(noise_seed, global_step * config.dae.batch + noisy.size());
            noisy.push_back(noise::corrupt(p.lr, spec));
            clean.push_back(std::move(p.lr));
        }
        ++global_step;
        return denoise::DaeBatch{imaging::images_to_tensor(noisy), imaging::images_to_tensor(clean)};
    };
    std::vector<EpochRecord> records;
    denoise::DaeTrainOptions o;
    o.epochs = config.dae.epochs;
    o.steps_per_epoch = config.dae.steps_per_epoch;
    o.lr = config.dae.lr;
    o.on_epoch = [&](std::size_t epoch, double loss) {
        records.push_back({epoch, loss, std::numeric_limits<double>::quiet_NaN()});
        if (on_epoch) on_epoch(records.back());
    };
    denoise::train_dae(model, batches, o);
    model.freeze();
    if (log) *log = std::move(records);
    return model;
}

std::string model_name(sr::Variant variant, denoise::DenoiserKind denoiser) {
    if (variant == sr::Variant::baseline) return "no-denoiser";
    return std::string(sr::variant_name(variant)) + "-" + std::string(denoise::kind_name(denoiser));
}

}  // namespace nsr::harness
