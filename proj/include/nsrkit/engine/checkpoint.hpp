#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nsrkit/engine/parameter.hpp"

namespace nsr {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
    std::string name;
    Shape shape;
    std::vector<float> values;
    bool frozen = false;
};

/// Binary container: named float32 tensors plus an opaque UTF-8 metadata
/// string (higher layers store JSON there). Layout in docs/checkpoint-format.md.
struct Checkpoint {
    std::uint32_t version = kCheckpointVersion;
    std::string metadata;
    std::vector<NamedTensor> tensors;

    const NamedTensor* find(const std::string& name) const;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

Checkpoint checkpoint_from_parameters(const ParameterRefs& params, std::string metadata);

/// Copies tensor values and frozen flags into the given parameters by name. Every parameter
/// must be present with an identical shape.
void restore_parameters(const Checkpoint& ckpt, const ParameterRefs& params,
                        const std::string& prefix = "");

}  // namespace nsr
