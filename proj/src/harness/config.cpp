#include "nsrkit/harness/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "nsrkit/common/json.hpp"

namespace nsr::harness {

using nlohmann::json;

namespace {

noise::NoiseSpec noise_from_json(const json& j, const std::string& where) {
    if (j.is_string()) return noise::NoiseSpec::parse(j.get<std::string>());
    require_known_keys(j, {"kind", "param", "seed"}, where);
    noise::NoiseSpec s;
    s.kind = noise::parse_kind(json_get<std::string>(j, "kind", "none", where));
    s.param = json_get(j, "param", 0.0, where);
    s.seed = json_get<std::uint64_t>(j, "seed", 0, where);
    s.validate();
    return s;
}

json noise_to_json(const noise::NoiseSpec& s) {
    return {{"kind", noise::kind_name(s.kind)}, {"param", s.param}, {"seed", s.seed}};
}

template <typename Fn>
auto as_config_error(Fn fn) {
    try {
        return fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

}  // namespace

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
    if (corpus.source != "procedural" && corpus.source != "directory")
        fail("corpus.source must be 'procedural' or 'directory'");
    if (corpus.source == "directory" && corpus.directory.empty()) fail("corpus.directory is required");
    if (train_images < 1 || val_images < 1) fail("split counts must be >= 1");
    if (scale < 1) fail("scale must be >= 1");
    if (patch == 0 || patch % scale) fail("patch must be a positive multiple of scale");
    if (corpus.source == "procedural") {
        if (corpus.image_size < patch) fail("corpus.image_size must be >= patch");
        if (corpus.image_size % (2 * scale) || corpus.image_size % 8) fail("corpus.image_size must be divisible by 2*scale and 8");
    }
    if (dae.patch == 0 || dae.patch % scale || (dae.patch / scale) % 8)
        fail("dae.patch / scale must be a positive multiple of 8");
    if (corpus.source == "procedural" && dae.patch > corpus.image_size) fail("dae.patch must fit inside the corpus images");
    if (sr.batch < 1 || dae.batch < 1) fail("batch sizes must be >= 1");
    if (sr.steps_per_epoch < 1 || dae.steps_per_epoch < 1) fail("steps_per_epoch must be >= 1");
    if (sr.pretrain_epochs < 1 || sr.finetune_epochs < 1 || dae.epochs < 1) fail("epoch counts must be >= 1");
    if (!(sr.lr >= 0) || !(dae.lr >= 0)) fail("learning rates must be >= 0");
    if (test_noise.empty()) fail("test_noise must list at least one noise");
    if (blocks < 1 || filters < 1 || expansion < 1) fail("model sizes must be >= 1");
    if (denoiser_window < 3 || denoiser_window % 2 == 0) fail("model.denoiser_window must be odd and >= 3");
}

sr::SrConfig ExperimentConfig::model_config(sr::Variant variant, denoise::DenoiserKind denoiser) const {
    sr::SrConfig c;
    c.scale = scale;
    c.blocks = blocks;
    c.filters = filters;
    c.expansion = expansion;
    c.variant = variant;
    c.denoiser.kind = variant == sr::Variant::baseline ? denoise::DenoiserKind::identity : denoiser;
    c.denoiser.window = denoiser_window;
    return c;
}

ExperimentConfig default_config() {
    ExperimentConfig c;
    c.train_noise = {noise::NoiseKind::gaussian, 0.1, 0};
    c.test_noise = {
        {noise::NoiseKind::none, 0.0, 0},
        {noise::NoiseKind::gaussian, 0.1, 101},
        {noise::NoiseKind::speckle, 0.1, 102},
        {noise::NoiseKind::poisson, 0.1, 103},
        {noise::NoiseKind::salt_pepper, 0.2, 104},
    };
    return c;
}

ExperimentConfig config_from_json(const json& j) {
    return as_config_error([&] {
        require_known_keys(j, {"output_dir", "corpus", "split", "scale", "patch", "train_noise", "test_noise", "model",
                               "sr", "dae", "seeds"},
                           "config");
        ExperimentConfig c = default_config();
        c.output_dir = json_get<std::string>(j, "output_dir", c.output_dir.string(), "config");
        if (j.contains("corpus")) {
            const json& k = j.at("corpus");
            require_known_keys(k, {"source", "image_size", "directory"}, "corpus");
            c.corpus.source = json_get(k, "source", c.corpus.source, "corpus");
            c.corpus.image_size = json_get(k, "image_size", c.corpus.image_size, "corpus");
            c.corpus.directory = json_get<std::string>(k, "directory", "", "corpus");
        }
        if (j.contains("split")) {
            const json& k = j.at("split");
            require_known_keys(k, {"train", "val"}, "split");
            c.train_images = json_get(k, "train", c.train_images, "split");
            c.val_images = json_get(k, "val", c.val_images, "split");
        }
        c.scale = json_get(j, "scale", c.scale, "config");
        c.patch = json_get(j, "patch", c.patch, "config");
        if (j.contains("train_noise")) c.train_noise = noise_from_json(j.at("train_noise"), "train_noise");
        if (j.contains("test_noise")) {
            if (!j.at("test_noise").is_array()) throw ConfigError("config.test_noise: expected a list");
            c.test_noise.clear();
            for (const json& n : j.at("test_noise")) c.test_noise.push_back(noise_from_json(n, "test_noise[]"));
        }
        if (j.contains("model")) {
            const json& k = j.at("model");
            require_known_keys(k, {"blocks", "filters", "expansion", "denoiser_window"}, "model");
            c.blocks = json_get(k, "blocks", c.blocks, "model");
            c.filters = json_get(k, "filters", c.filters, "model");
            c.expansion = json_get(k, "expansion", c.expansion, "model");
            c.denoiser_window = json_get(k, "denoiser_window", c.denoiser_window, "model");
        }
        if (j.contains("sr")) {
            const json& k = j.at("sr");
            require_known_keys(k, {"lr", "batch", "pretrain_epochs", "finetune_epochs", "steps_per_epoch"}, "sr");
            c.sr.lr = json_get(k, "lr", c.sr.lr, "sr");
            c.sr.batch = json_get(k, "batch", c.sr.batch, "sr");
            c.sr.pretrain_epochs = json_get(k, "pretrain_epochs", c.sr.pretrain_epochs, "sr");
            c.sr.finetune_epochs = json_get(k, "finetune_epochs", c.sr.finetune_epochs, "sr");
            c.sr.steps_per_epoch = json_get(k, "steps_per_epoch", c.sr.steps_per_epoch, "sr");
        }
        if (j.contains("dae")) {
            const json& k = j.at("dae");
            require_known_keys(k, {"lr", "batch", "epochs", "steps_per_epoch", "patch"}, "dae");
            c.dae.lr = json_get(k, "lr", c.dae.lr, "dae");
            c.dae.batch = json_get(k, "batch", c.dae.batch, "dae");
            c.dae.epochs = json_get(k, "epochs", c.dae.epochs, "dae");
            c.dae.steps_per_epoch = json_get(k, "steps_per_epoch", c.dae.steps_per_epoch, "dae");
            c.dae.patch = json_get(k, "patch", c.dae.patch, "dae");
        }
        if (j.contains("seeds")) {
            const json& k = j.at("seeds");
            require_known_keys(k, {"corpus", "noise", "init", "sampling"}, "seeds");
            c.seeds.corpus = json_get(k, "corpus", c.seeds.corpus, "seeds");
            c.seeds.noise = json_get(k, "noise", c.seeds.noise, "seeds");
            c.seeds.init = json_get(k, "init", c.seeds.init, "seeds");
            c.seeds.sampling = json_get(k, "sampling", c.seeds.sampling, "seeds");
        }
        c.validate();
        return c;
    });
}

json config_to_json(const ExperimentConfig& c) {
    json tests = json::array();
    for (const auto& n : c.test_noise) tests.push_back(noise_to_json(n));
    return {
        {"output_dir", c.output_dir.string()},
        {"corpus", {{"source", c.corpus.source}, {"image_size", c.corpus.image_size}, {"directory", c.corpus.directory.string()}}},
        {"split", {{"train", c.train_images}, {"val", c.val_images}}},
        {"scale", c.scale},
        {"patch", c.patch},
        {"train_noise", noise_to_json(c.train_noise)},
        {"test_noise", tests},
        {"model", {{"blocks", c.blocks}, {"filters", c.filters}, {"expansion", c.expansion}, {"denoiser_window", c.denoiser_window}}},
        {"sr",
         {{"lr", c.sr.lr},
          {"batch", c.sr.batch},
          {"pretrain_epochs", c.sr.pretrain_epochs},
          {"finetune_epochs", c.sr.finetune_epochs},
          {"steps_per_epoch", c.sr.steps_per_epoch}}},
        {"dae",
         {{"lr", c.dae.lr},
          {"batch", c.dae.batch},
          {"epochs", c.dae.epochs},
          {"steps_per_epoch", c.dae.steps_per_epoch},
          {"patch", c.dae.patch}}},
        {"seeds", {{"corpus", c.seeds.corpus}, {"noise", c.seeds.noise}, {"init", c.seeds.init}, {"sampling", c.seeds.sampling}}},
    };
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

std::string canonical_config(const ExperimentConfig& config) { return config_to_json(config).dump(2) + "\n"; }

std::string config_hash(const ExperimentConfig& config) {
    // The output location does not change results, so it is left out.
    json j = config_to_json(config);
    j.erase("output_dir");
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace nsr::harness
