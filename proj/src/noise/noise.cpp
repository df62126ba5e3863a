#include "nsrkit/noise/noise.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace nsr::noise {

using imaging::ImageF;

namespace {

constexpr std::pair<NoiseKind, std::string_view> kNames[] = {
    {NoiseKind::none, "none"},
    {NoiseKind::gaussian, "gaussian"},
    {NoiseKind::speckle, "speckle"},
    {NoiseKind::poisson, "poisson"},
    {NoiseKind::salt_pepper, "salt_pepper"},
};

std::string format_param(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

std::string_view kind_name(NoiseKind kind) {
    for (auto [k, name] : kNames)
        if (k == kind) return name;
    throw std::invalid_argument("unknown noise kind");
}

NoiseKind parse_kind(std::string_view name) {
    for (auto [k, n] : kNames)
        if (n == name) return k;
    throw std::invalid_argument("unknown noise kind '" + std::string(name) +
                                "' (expected none, gaussian, speckle, poisson or salt_pepper)");
}

void NoiseSpec::validate() const {
    if (kind == NoiseKind::none) return;
    if (!std::isfinite(param) || param < 0.0) {
        throw std::invalid_argument(std::string(kind_name(kind)) + " noise parameter must be finite and >= 0, got " +
                                    format_param(param));
    }
    if (kind == NoiseKind::salt_pepper && param > 1.0) {
        throw std::invalid_argument("salt_pepper probability must be <= 1, got " + format_param(param));
    }
}

NoiseSpec NoiseSpec::parse(std::string_view text) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
        const std::size_t colon = text.find(':', start);
        parts.push_back(text.substr(start, colon - start));
        if (colon == std::string_view::npos) break;
        start = colon + 1;
    }
    NoiseSpec spec;
    spec.kind = parse_kind(parts[0]);
    if (parts.size() > 3 || (spec.kind != NoiseKind::none && parts.size() < 2)) {
        throw std::invalid_argument("noise spec '" + std::string(text) + "' must look like kind:param:seed");
    }
    auto bad = [&](const char* field) {
        return std::invalid_argument("noise spec '" + std::string(text) + "': cannot parse " + field);
    };
    if (parts.size() >= 2) {
        const auto p = parts[1];
        auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), spec.param);
        if (ec != std::errc() || ptr != p.data() + p.size()) throw bad("param");
    }
    if (parts.size() == 3) {
        const auto s = parts[2];
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), spec.seed);
        if (ec != std::errc() || ptr != s.data() + s.size()) throw bad("seed");
    }
    spec.validate();
    return spec;
}

std::string NoiseSpec::str() const {
    return std::string(kind_name(kind)) + ":" + format_param(param) + ":" + std::to_string(seed);
}

std::string NoiseSpec::label() const {
    if (kind == NoiseKind::none) return "none";
    return std::string(kind_name(kind)) + " " + format_param(param);
}

ImageF corrupt(const ImageF& img, const NoiseSpec& spec) {
    spec.validate();
    ImageF out = img;
    if (spec.kind == NoiseKind::none) return out;
    Rng rng(spec.seed);
    switch (spec.kind) {
        case NoiseKind::gaussian: {
            const double sigma = std::sqrt(spec.param);
            for (float& v : out.data) v = static_cast<float>(v + sigma * rng.normal());
            break;
        }
        case NoiseKind::speckle: {
            const double sigma = std::sqrt(spec.param);
            for (float& v : out.data) v = static_cast<float>(v * (1.0 + sigma * rng.normal()));
            break;
        }
        case NoiseKind::poisson: {
            // lambda -> 0 is the noiseless limit.
            if (spec.param == 0.0) break;
            const double lambda = spec.param;
            for (float& v : out.data)
                v = static_cast<float>(lambda * static_cast<double>(rng.poisson(std::max(0.0f, v) / lambda)));
            break;
        }
        case NoiseKind::salt_pepper: {
            const std::size_t pixels = out.height * out.width;
            for (std::size_t p = 0; p < pixels; ++p) {
                if (rng.uniform() >= spec.param) continue;
                const float value = rng.uniform() < 0.5 ? 1.0f : 0.0f;
                std::fill_n(&out.data[p * 3], 3, value);
            }
            break;
        }
        case NoiseKind::none:
            break;
    }
    imaging::clamp_unit(out);
    return out;
}

std::vector<imaging::PatchPair> corrupt_batch(std::vector<imaging::PatchPair> pairs, const NoiseSpec& spec) {
    spec.validate();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        NoiseSpec child = spec;
        child.seed = derive_seed(spec.seed, i);
        pairs[i].lr = corrupt(pairs[i].lr, child);
    }
    return pairs;
}

}  // namespace nsr::noise
