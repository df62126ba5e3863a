#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "nsrkit/denoise/dae.hpp"
#include "nsrkit/denoise/filters.hpp"

namespace nsr::denoise {

enum class DenoiserKind { identity, median, wiener, dae };

std::string_view kind_name(DenoiserKind kind);
DenoiserKind parse_kind(std::string_view name);

struct DenoiserSpec {
    DenoiserKind kind = DenoiserKind::identity;
    std::size_t window = 5;
    std::string dae_checkpoint;  // required for kind dae unless a model is supplied

    void validate() const;
    bool operator==(const DenoiserSpec&) const = default;
};

/// Uniform image-level denoiser. Immutable and safe to share across threads.
class Denoiser {
public:
    Denoiser() = default;
    /// Loads the DAE checkpoint when spec.kind is dae.
    explicit Denoiser(DenoiserSpec spec);
    Denoiser(DenoiserSpec spec, std::shared_ptr<const DaeModel> dae);

    imaging::ImageF operator()(const imaging::ImageF& img) const;

    const DenoiserSpec& spec() const { return spec_; }
    const std::shared_ptr<const DaeModel>& dae() const { return dae_; }
    bool is_identity() const { return spec_.kind == DenoiserKind::identity; }

private:
    DenoiserSpec spec_;
    std::shared_ptr<const DaeModel> dae_;
};

/// One-shot dispatch; loads the DAE checkpoint on every call.
imaging::ImageF apply(const DenoiserSpec& spec, const imaging::ImageF& img);

}  // namespace nsr::denoise
