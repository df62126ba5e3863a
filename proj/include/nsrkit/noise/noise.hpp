#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nsrkit/imaging/image.hpp"

namespace nsr::noise {

enum class NoiseKind { none, gaussian, speckle, poisson, salt_pepper };

std::string_view kind_name(NoiseKind kind);
NoiseKind parse_kind(std::string_view name);

/// param is the variance for gaussian and speckle, the quantization step
/// lambda for poisson and the replacement probability for salt_pepper.
struct NoiseSpec {
    NoiseKind kind = NoiseKind::none;
    double param = 0.0;
    std::uint64_t seed = 0;

    void validate() const;

    /// "kind:param:seed"; param and seed may be omitted for kind none.
    static NoiseSpec parse(std::string_view text);
    std::string str() const;
    /// Short label for tables, e.g. "gaussian 0.1".
    std::string label() const;

    bool operator==(const NoiseSpec&) const = default;
};

/// Deterministic given spec.seed; output clamped to [0, 1].
imaging::ImageF corrupt(const imaging::ImageF& img, const NoiseSpec& spec);

/// Corrupts the lr member of each pair with seed derive_seed(spec.seed, index).
std::vector<imaging::PatchPair> corrupt_batch(std::vector<imaging::PatchPair> pairs, const NoiseSpec& spec);

}  // namespace nsr::noise
